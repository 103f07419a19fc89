//! Hefer forms: solving `δ_{ζ−z} ψ = φ` with a degree drop, the affine tower
//! `H_k^l`, its projective homogenization `h_k^l`, and the explicit Koszul
//! and Buchsbaum-Rim shortcuts.
//!
//! Affine forms live in `2n` variables, `ζ'` at `0..n` and `z'` at `n..2n`,
//! with differentials `dζ'_0..dζ'_{n-1}`. Projective forms live in `2n + 1`
//! variables, `ζ₀` at 0, `ζ'` at `1..=n`, `z'` at `n+1..=2n`, with
//! differentials `dζ₀..dζ_n`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexes::{Flavor, GradedComplex};
use crate::error::{Error, Result};
use crate::linalg::LinearSystem;
use crate::multilinear::{delta_form, Form, FormMap, LambdaIndex};
use crate::poly::{rat, Poly, PolyMatrix, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerFlavor {
    Affine,
    Projective,
}

/// Right-hand side of a single solve step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhsKind {
    /// `φ` is a closed `s`-form, `s ≥ 1`, in the doubled variables.
    ClosedForm,
    /// `φ` is a 0-form in `ζ'` only; solve `δψ = φ(ζ) − φ(z)`.
    ZeroFormDifference,
}

/// The variables and contraction field of one flavor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Space {
    pub flavor: TowerFlavor,
    pub n: usize,
}

impl Space {
    pub fn affine(n: usize) -> Self {
        Space {
            flavor: TowerFlavor::Affine,
            n,
        }
    }

    pub fn projective(n: usize) -> Self {
        Space {
            flavor: TowerFlavor::Projective,
            n,
        }
    }

    pub fn for_complex(c: &GradedComplex) -> Self {
        match c.flavor {
            Flavor::Affine => Self::affine(c.nvars),
            Flavor::Homogeneous => Self::projective(c.nvars - 1),
        }
    }

    pub fn nvars(&self) -> usize {
        match self.flavor {
            TowerFlavor::Affine => 2 * self.n,
            TowerFlavor::Projective => 2 * self.n + 1,
        }
    }

    /// Number of differentials.
    pub fn ndiff(&self) -> usize {
        match self.flavor {
            TowerFlavor::Affine => self.n,
            TowerFlavor::Projective => self.n + 1,
        }
    }

    /// Coefficients of the contraction field (without the `2πi`).
    pub fn field(&self) -> Vec<Poly> {
        let (n, nv) = (self.n, self.nvars());
        match self.flavor {
            TowerFlavor::Affine => (0..n)
                .map(|j| &Poly::var(nv, j) - &Poly::var(nv, n + j))
                .collect(),
            TowerFlavor::Projective => std::iter::once(Poly::one(nv))
                .chain((1..=n).map(|j| Poly::var(nv, n + j)))
                .collect(),
        }
    }

    /// A polynomial in the complex's own variables, read in `ζ`.
    pub fn lift_zeta(&self, p: &Poly) -> Poly {
        let map: Vec<usize> = (0..p.nvars()).collect();
        p.embed(self.nvars(), &map)
    }

    /// The same polynomial read in `z`; projective entries of degree `deg`
    /// become `ζ₀^deg F(z')`.
    pub fn lift_z(&self, p: &Poly, deg: i64) -> Poly {
        let n = self.n;
        match self.flavor {
            TowerFlavor::Affine => {
                let map: Vec<usize> = (n..2 * n).collect();
                p.embed(self.nvars(), &map)
            }
            TowerFlavor::Projective => {
                if p.is_zero() {
                    return Poly::zero(self.nvars());
                }
                let map: Vec<usize> = (n + 1..=2 * n).collect();
                let mut e = vec![0u32; self.nvars()];
                e[0] = deg as u32;
                p.dehomogenize().embed(self.nvars(), &map).shift(&e)
            }
        }
    }

    /// `f_k` read in `ζ`, as a 0-form map `k → k − 1`.
    pub fn zeta_map(&self, c: &GradedComplex, k: usize) -> FormMap {
        FormMap::from_matrix(k, k - 1, &c.map(k).map(|p| self.lift_zeta(p)))
    }

    /// `f_k` read in `z`.
    pub fn z_map(&self, c: &GradedComplex, k: usize) -> FormMap {
        let f = c.map(k);
        let mut m = PolyMatrix::zeros(f.nrows(), f.ncols(), self.nvars());
        for i in 0..f.nrows() {
            for j in 0..f.ncols() {
                let deg = c.twist(k - 1, i) - c.twist(k, j);
                m.set(i, j, self.lift_z(f.get(i, j), deg));
            }
        }
        FormMap::from_matrix(k, k - 1, &m)
    }

    /// Contraction with the field, raising every `tau` by one.
    pub fn delta(&self, psi: &FormMap) -> FormMap {
        bump_tau(&psi.contract(&self.field()), 1)
    }

    pub fn delta_form(&self, f: &Form) -> Form {
        if f.degree() == 0 {
            return Form::zero(0);
        }
        f.contract(&self.field()).map_coeffs(|p| {
            let t = p.tau();
            p.clone().with_tau(t + 1)
        })
    }
}

fn bump_tau(m: &FormMap, by: i32) -> FormMap {
    let mut out = FormMap::zero(
        m.source(),
        m.target(),
        m.form_degree(),
        m.nrows(),
        m.ncols(),
        m.nvars(),
    );
    for (&(a, b), f) in m.entries() {
        out.set(
            a,
            b,
            f.map_coeffs(|p| {
                let t = p.tau();
                p.clone().with_tau(t + by)
            }),
        );
    }
    out
}

/// `δ_{ζ−z}` on an affine form map over `ζ', z'`.
pub fn delta_zeta_z(psi: &FormMap) -> FormMap {
    Space::affine(psi.nvars() / 2).delta(psi)
}

/// Solves `δ_{ζ−z} ψ = target` for an affine form, with every coefficient of
/// `ψ` of total `(ζ, z)`-degree at most `cap`.
///
/// The system splits by the weight `w_j = deg_{ζ_j} + deg_{z_j} + [dζ_j]`,
/// which `δ` preserves. Unknowns inside a block are ordered by
/// `(z-degree, ζ-degree, exponent, J)` and free unknowns are set to zero.
pub fn solve_delta(target: &Form, n: usize, cap: i64) -> Result<Form> {
    let space = Space::affine(n);
    let s = target.degree();
    if s >= 1 && !space.delta_form(target).is_zero() {
        return Err(Error::NotClosed);
    }
    if target.is_zero() {
        return Ok(Form::zero(s + 1));
    }
    let tau = target.terms().next().map_or(0, |(_, p)| p.tau());

    let weight = |e: &[u32], j: &LambdaIndex| -> Vec<u32> {
        let mut w: Vec<u32> = (0..n).map(|i| e[i] + e[n + i]).collect();
        for &i in j.as_slice() {
            w[i] += 1;
        }
        w
    };
    let mut blocks: BTreeMap<Vec<u32>, Vec<(LambdaIndex, Vec<u32>, Rat)>> = BTreeMap::new();
    for (j, p) in target.terms() {
        for (e, c) in p.terms() {
            blocks
                .entry(weight(e, j))
                .or_default()
                .push((j.clone(), e.clone(), c.clone()));
        }
    }

    let mut psi = Form::zero(s + 1);
    for (w, rhs) in blocks {
        let total: u32 = w.iter().sum();
        let t = i64::from(total) - (s as i64 + 1);
        if t < 0 || t > cap {
            return Err(Error::Infeasible(format!(
                "target component of weight {w:?} needs degree {t} beyond cap {cap}"
            )));
        }
        for (j, e, c) in solve_block(n, s, &w, &rhs)? {
            psi.add_term(j, Poly::monomial(2 * n, e, c).with_tau(tau - 1));
        }
    }
    Ok(psi)
}

fn block_unknowns(n: usize, s: usize, w: &[u32]) -> Vec<(LambdaIndex, Vec<u32>)> {
    let mut cols = Vec::new();
    for j in LambdaIndex::all(n, s + 1) {
        if j.as_slice().iter().any(|&i| w[i] == 0) {
            continue;
        }
        let c: Vec<u32> = (0..n)
            .map(|i| w[i] - u32::from(j.contains(i)))
            .collect();
        // every split c_i = a_i + b_i
        let mut splits: Vec<Vec<u32>> = vec![vec![0u32; 2 * n]];
        for i in 0..n {
            let mut next = Vec::new();
            for e in &splits {
                for a in 0..=c[i] {
                    let mut f = e.clone();
                    f[i] = a;
                    f[n + i] = c[i] - a;
                    next.push(f);
                }
            }
            splits = next;
        }
        cols.extend(splits.into_iter().map(|e| (j.clone(), e)));
    }
    cols.sort_by(|(ja, ea), (jb, eb)| {
        let zd = |e: &[u32]| e[n..].iter().sum::<u32>();
        let xd = |e: &[u32]| e[..n].iter().sum::<u32>();
        (zd(ea), xd(ea), ea, ja).cmp(&(zd(eb), xd(eb), eb, jb))
    });
    cols
}

fn solve_block(
    n: usize,
    s: usize,
    w: &[u32],
    rhs: &[(LambdaIndex, Vec<u32>, Rat)],
) -> Result<Vec<(LambdaIndex, Vec<u32>, Rat)>> {
    let cols = block_unknowns(n, s, w);
    let mut rows: BTreeMap<(LambdaIndex, Vec<u32>), BTreeMap<usize, Rat>> = BTreeMap::new();
    for (ci, (j, e)) in cols.iter().enumerate() {
        for t in 0..j.len() {
            let (rest, sign) = j.remove_at(t);
            let i = j.as_slice()[t];
            let sign = rat(i64::from(sign));
            let mut ez = e.clone();
            ez[i] += 1;
            let mut zz = e.clone();
            zz[n + i] += 1;
            *rows
                .entry((rest.clone(), ez))
                .or_default()
                .entry(ci)
                .or_insert_with(Rat::zero) += &sign;
            *rows
                .entry((rest, zz))
                .or_default()
                .entry(ci)
                .or_insert_with(Rat::zero) -= &sign;
        }
    }
    let rhs_map: BTreeMap<(LambdaIndex, Vec<u32>), Rat> = rhs
        .iter()
        .map(|(j, e, c)| ((j.clone(), e.clone()), c.clone()))
        .collect();
    if rhs_map.keys().any(|k| !rows.contains_key(k)) {
        return Err(Error::Infeasible(format!("weight {w:?} is out of reach")));
    }
    let mut sys = LinearSystem::new(cols.len());
    for (key, row) in rows {
        let b = rhs_map.get(&key).cloned().unwrap_or_else(Rat::zero);
        sys.push_row(row, b);
    }
    let x = sys
        .solve()
        .ok_or_else(|| Error::Infeasible(format!("inconsistent system at weight {w:?}")))?;
    Ok(cols
        .into_iter()
        .zip(x)
        .filter(|(_, v)| !v.is_zero())
        .map(|((j, e), v)| (j, e, v))
        .collect())
}

/// One entrywise solve step; the degree cap of each entry is one less than
/// the largest coefficient degree of its target.
pub fn hefer_solve_step(phi: &FormMap, kind: RhsKind) -> Result<FormMap> {
    let (target, n) = match kind {
        RhsKind::ClosedForm => {
            if phi.form_degree() == 0 {
                return Err(Error::InvalidInput(
                    "a closed-form step needs form degree at least 1".into(),
                ));
            }
            (phi.clone(), phi.nvars() / 2)
        }
        RhsKind::ZeroFormDifference => {
            if phi.form_degree() != 0 {
                return Err(Error::InvalidInput(
                    "a difference step needs a 0-form".into(),
                ));
            }
            let n = phi.nvars();
            let space = Space::affine(n);
            let mut t = FormMap::zero(phi.source(), phi.target(), 0, phi.nrows(), phi.ncols(), 2 * n);
            for (&(a, b), f) in phi.entries() {
                let p = f.coeff(&LambdaIndex::empty()).cloned().unwrap_or_else(|| Poly::zero(n));
                t.set(a, b, Form::scalar(&space.lift_zeta(&p) - &space.lift_z(&p, 0)));
            }
            (t, n)
        }
    };
    let jobs: Vec<((usize, usize), Form, i64)> = target
        .entries()
        .map(|(&k, f)| (k, f.clone(), f.max_coeff_degree().map_or(-1, i64::from) - 1))
        .collect();
    let solved = jobs
        .into_par_iter()
        .map(|(k, f, cap)| solve_delta(&f, n, cap).map(|psi| (k, psi)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = FormMap::zero(
        target.source(),
        target.target(),
        target.form_degree() + 1,
        target.nrows(),
        target.ncols(),
        2 * n,
    );
    for ((a, b), psi) in solved {
        out.set(a, b, psi);
    }
    Ok(out)
}

/// The collection `{H_k^l}` or `{h_k^l}` for `0 ≤ l ≤ k ≤ N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeferTower {
    pub flavor: TowerFlavor,
    pub n: usize,
    pub complex: GradedComplex,
    entries: BTreeMap<(usize, usize), FormMap>,
}

#[derive(Serialize, Deserialize)]
struct TowerEntry {
    k: usize,
    l: usize,
    map: FormMap,
}

#[derive(Serialize, Deserialize)]
struct TowerRepr {
    flavor: TowerFlavor,
    n: usize,
    complex: GradedComplex,
    entries: Vec<TowerEntry>,
}

impl Serialize for HeferTower {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TowerRepr {
            flavor: self.flavor,
            n: self.n,
            complex: self.complex.clone(),
            entries: self
                .entries
                .iter()
                .map(|(&(k, l), m)| TowerEntry { k, l, map: m.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HeferTower {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = TowerRepr::deserialize(d)?;
        Ok(HeferTower {
            flavor: r.flavor,
            n: r.n,
            complex: r.complex,
            entries: r.entries.into_iter().map(|e| ((e.k, e.l), e.map)).collect(),
        })
    }
}

impl HeferTower {
    pub fn space(&self) -> Space {
        Space {
            flavor: self.flavor,
            n: self.n,
        }
    }

    pub fn length(&self) -> usize {
        self.complex.length()
    }

    /// `H_k^l`; the zero map when `k < l`.
    pub fn get(&self, k: usize, l: usize) -> FormMap {
        if let Some(m) = self.entries.get(&(k, l)) {
            return m.clone();
        }
        let c = &self.complex;
        FormMap::zero(
            k,
            l,
            k.saturating_sub(l),
            c.levels[l].rank(),
            c.levels[k].rank(),
            self.space().nvars(),
        )
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &FormMap)> {
        self.entries.iter()
    }

    /// `D = d_l^α − d_k^β`.
    fn weight(&self, k: usize, l: usize, a: usize, b: usize) -> i64 {
        self.complex.twist(l, a) - self.complex.twist(k, b)
    }

    /// Right side `H_{k-1}^l f_k(ζ) − f_{l+1}(z) H_k^{l+1}` (graded product).
    pub fn relation_rhs(&self, k: usize, l: usize) -> Result<FormMap> {
        relation_rhs(&self.space(), &self.complex, |a, b| self.get(a, b), k, l)
    }

    /// Checks `δ H_k^l` against [`relation_rhs`](Self::relation_rhs) for
    /// every `l < k`.
    pub fn check_relation(&self) -> Result<()> {
        let space = self.space();
        for k in 1..=self.length() {
            for l in 0..k {
                let lhs = space.delta(&self.get(k, l));
                let rhs = self.relation_rhs(k, l)?;
                if lhs != rhs {
                    return Err(Error::ComplexInvariant(format!(
                        "tower relation fails at (k, l) = ({k}, {l})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Affine: coefficient degrees `≤ D − (k − l)`. Projective: coefficients
    /// homogeneous of degree `D` in `ζ`, so `D + k − l` with the
    /// differentials, and of degree `≤ D − (k − l)` in `z'`.
    pub fn check_degrees(&self) -> Result<()> {
        let n = self.n;
        for (&(k, l), m) in &self.entries {
            let s = (k - l) as i64;
            for (a, b, _, p) in m.coefficients() {
                let d = self.weight(k, l, a, b);
                let ok = match self.flavor {
                    TowerFlavor::Affine => p.degree_i64() <= d - s,
                    TowerFlavor::Projective => {
                        let zeta: Vec<usize> = (0..=n).collect();
                        let z: Vec<usize> = (n + 1..=2 * n).collect();
                        d >= 0
                            && p.is_homogeneous_in(&zeta, d as u32)
                            && p.degree_in(&z).is_none_or(|x| i64::from(x) <= d - s)
                    }
                };
                if !ok {
                    return Err(Error::ComplexInvariant(format!(
                        "entry ({a}, {b}) of H_{k}^{l} has coefficient {p} outside its degree bound"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn relation_rhs(
    space: &Space,
    c: &GradedComplex,
    get: impl Fn(usize, usize) -> FormMap,
    k: usize,
    l: usize,
) -> Result<FormMap> {
    let left = get(k - 1, l).compose(&space.zeta_map(c, k))?;
    let right = space.z_map(c, l + 1).compose(&get(k, l + 1))?;
    left.sub(&right)
}

/// Builds `H_k^l` on an affine complex by induction on `k − l`.
pub fn build_hefer_tower(c: &GradedComplex) -> Result<HeferTower> {
    if c.flavor != Flavor::Affine {
        return Err(Error::InvalidInput("the affine tower needs an affine complex".into()));
    }
    let space = Space::affine(c.nvars);
    let big_n = c.length();
    let mut tower = HeferTower {
        flavor: TowerFlavor::Affine,
        n: c.nvars,
        complex: c.clone(),
        entries: BTreeMap::new(),
    };
    for l in 0..=big_n {
        tower
            .entries
            .insert((l, l), FormMap::identity(l, c.levels[l].rank(), space.nvars()));
    }
    for gap in 1..=big_n {
        let level: Vec<((usize, usize), FormMap)> = (0..=big_n - gap)
            .into_par_iter()
            .map(|l| {
                let k = l + gap;
                let target = tower.relation_rhs(k, l)?;
                let mut h = FormMap::zero(
                    k,
                    l,
                    gap,
                    c.levels[l].rank(),
                    c.levels[k].rank(),
                    space.nvars(),
                );
                let jobs: Vec<(usize, usize, Form)> = (0..c.levels[l].rank())
                    .flat_map(|a| (0..c.levels[k].rank()).map(move |b| (a, b)))
                    .map(|(a, b)| (a, b, target.entry_or_zero(a, b)))
                    .collect();
                let solved = jobs
                    .into_par_iter()
                    .map(|(a, b, t)| {
                        let cap = tower.weight(k, l, a, b) - gap as i64;
                        solve_delta(&t, c.nvars, cap).map(|psi| (a, b, psi))
                    })
                    .collect::<Result<Vec<_>>>()?;
                for (a, b, psi) in solved {
                    h.set(a, b, psi);
                }
                Ok(((k, l), h))
            })
            .collect::<Result<Vec<_>>>()?;
        tower.entries.extend(level);
    }
    Ok(tower)
}

/// `h_k^l = (−1)^{k−l} ζ₀^{D+k−l} Σ_I a_I(ζ'/ζ₀, z') d(ζ'/ζ₀)_I`, expanded
/// into polynomial coefficients on `dζ₀, …, dζ_n`.
pub fn homogenize_tower(t: &HeferTower, c_hom: &GradedComplex) -> Result<HeferTower> {
    if t.flavor != TowerFlavor::Affine || c_hom.flavor != Flavor::Homogeneous {
        return Err(Error::InvalidInput(
            "homogenize_tower needs an affine tower and a homogeneous complex".into(),
        ));
    }
    if c_hom.nvars != t.n + 1 || c_hom.levels != t.complex.levels {
        return Err(Error::InvalidInput("tower was not built on this complex".into()));
    }
    let n = t.n;
    let space = Space::projective(n);
    let nv = space.nvars();
    let mut out = HeferTower {
        flavor: TowerFlavor::Projective,
        n,
        complex: c_hom.clone(),
        entries: BTreeMap::new(),
    };
    for (&(k, l), m) in &t.entries {
        let s = k - l;
        if s == 0 {
            out.entries
                .insert((k, l), FormMap::identity(l, c_hom.levels[l].rank(), nv));
            continue;
        }
        let mut h = FormMap::zero(k, l, s, m.nrows(), m.ncols(), nv);
        for (&(a, b), form) in m.entries() {
            let d = t.weight(k, l, a, b);
            let mut acc = Form::zero(s);
            for (idx, coeff) in form.terms() {
                let lifted = homogenize_in_zeta(coeff, n, d - s as i64)?;
                let mut e0 = vec![0u32; nv];
                e0[0] = s as u32 - 1;
                let lifted = lifted.shift(&e0);
                let lifted = if s % 2 == 1 { -lifted } else { lifted };
                for (j, p) in expand_projective_differential(idx, nv) {
                    acc.add_term(j, &lifted * &p);
                }
            }
            h.set(a, b, acc);
        }
        out.entries.insert((k, l), h);
    }
    Ok(out)
}

/// `ζ₀^{deg} a(ζ'/ζ₀, z')` with the affine variables moved to the
/// projective layout.
fn homogenize_in_zeta(a: &Poly, n: usize, deg: i64) -> Result<Poly> {
    let nv = 2 * n + 1;
    let mut out = Poly::zero(nv);
    for (e, c) in a.terms() {
        let zd: i64 = e[..n].iter().map(|&x| i64::from(x)).sum();
        if zd > deg {
            return Err(Error::Internal(format!(
                "coefficient of ζ-degree {zd} exceeds {deg} during homogenization"
            )));
        }
        let mut f = vec![0u32; nv];
        f[0] = (deg - zd) as u32;
        f[1..=n].copy_from_slice(&e[..n]);
        f[n + 1..].copy_from_slice(&e[n..]);
        out = out + Poly::monomial(nv, f, c.clone());
    }
    Ok(out.with_tau(a.tau()))
}

/// `ζ₀^{s+1} d(ζ_{i_1}/ζ₀) ∧ … ∧ d(ζ_{i_s}/ζ₀)
///   = ζ₀ dζ_I − Σ_t (−1)^t ζ_{i_t} dζ₀ ∧ dζ_{I∖i_t}`
/// for an affine index set `I` (shifted by one).
fn expand_projective_differential(idx: &LambdaIndex, nv: usize) -> Vec<(LambdaIndex, Poly)> {
    let shifted: Vec<usize> = idx.as_slice().iter().map(|&i| i + 1).collect();
    let mut out = vec![(
        LambdaIndex::new(shifted.clone()).expect("distinct"),
        Poly::var(nv, 0),
    )];
    for t in 0..shifted.len() {
        let mut rest = vec![0];
        rest.extend(shifted.iter().enumerate().filter(|&(u, _)| u != t).map(|(_, &v)| v));
        let p = Poly::var(nv, shifted[t]);
        out.push((
            LambdaIndex::new(rest).expect("distinct"),
            if t % 2 == 0 { -p } else { p },
        ));
    }
    out
}

/// Koszul tower `h_k^l = (δ_h)^{k−l} / (k−l)!` from the single-row solution
/// `h` of `δ h = f_1 − f_1^z`.
pub fn koszul_tower(h: &FormMap, c: &GradedComplex) -> Result<HeferTower> {
    if c.levels[0].rank() != 1 || h.nrows() != 1 || h.form_degree() != 1 {
        return Err(Error::InvalidInput("koszul_tower needs r = 1 and a row of 1-forms".into()));
    }
    let space = Space::for_complex(c);
    if h.nvars() != space.nvars() {
        return Err(Error::NvarsMismatch {
            left: h.nvars(),
            right: space.nvars(),
        });
    }
    let exterior = c.exterior_indices();
    let mut entries = BTreeMap::new();
    for k in 0..=c.length() {
        let id = FormMap::identity(k, c.levels[k].rank(), space.nvars());
        let mut fact = Rat::one();
        for l in (0..=k).rev() {
            let s = k - l;
            if s > 0 {
                fact *= rat(s as i64);
            }
            let m = delta_form(h, &exterior, s, &id)?;
            entries.insert((k, l), m.scale(&(Rat::one() / &fact)));
        }
    }
    Ok(HeferTower {
        flavor: space.flavor,
        n: space.n,
        complex: c.clone(),
        entries,
    })
}

/// Explicit `h_2^1` of a Buchsbaum-Rim complex:
/// `e_J ↦ Σ_k ι(f^z_r) ⋯ ι(f^z_{k+1}) ι(h_k) ι(f_{k−1}) ⋯ ι(f_1) e_J`,
/// where `h` is `r × m` and solves `δ h = f_1 − f_1^z`.
pub fn br_h21(c: &GradedComplex, h: &FormMap) -> Result<FormMap> {
    let space = Space::for_complex(c);
    let (r, m) = (c.levels[0].rank(), c.levels[1].rank());
    if c.length() < 2 {
        return Err(Error::InvalidInput("complex has no level 2".into()));
    }
    if h.nrows() != r || h.ncols() != m || h.form_degree() != 1 {
        return Err(Error::InvalidInput("h must be an r × m row of 1-forms".into()));
    }
    let nv = space.nvars();
    let fz = space.zeta_map(c, 1);
    let fzz = space.z_map(c, 1);
    let row_of = |map: &FormMap, i: usize| -> Vec<Form> {
        (0..m).map(|j| map.entry_or_zero(i, j)).collect()
    };
    let level2 = &c.levels[2];
    let exterior = c.exterior_indices();
    let mut out = FormMap::zero(2, 1, 1, m, level2.rank(), nv);
    for (col, ext) in exterior[2].iter().enumerate() {
        let mut total: BTreeMap<LambdaIndex, Form> = BTreeMap::new();
        for k in 0..r {
            let rows: Vec<Vec<Form>> = (0..r)
                .map(|i| match i.cmp(&k) {
                    std::cmp::Ordering::Less => row_of(&fz, i),
                    std::cmp::Ordering::Equal => row_of(h, i),
                    std::cmp::Ordering::Greater => row_of(&fzz, i),
                })
                .collect();
            for (idx, f) in contract_form_rows(&rows, ext, nv) {
                let e = total.remove(&idx).map_or(f.clone(), |g| g.add(&f));
                total.insert(idx, e);
            }
        }
        for (idx, f) in total {
            if !f.is_zero() {
                out.set(idx.as_slice()[0], col, f);
            }
        }
    }
    Ok(out)
}

fn contract_form_rows(rows: &[Vec<Form>], ext: &LambdaIndex, nv: usize) -> BTreeMap<LambdaIndex, Form> {
    let mut cur: BTreeMap<LambdaIndex, Form> = BTreeMap::new();
    cur.insert(ext.clone(), Form::scalar(Poly::one(nv)));
    for row in rows {
        let mut next: BTreeMap<LambdaIndex, Form> = BTreeMap::new();
        for (idx, c) in &cur {
            for t in 0..idx.len() {
                let (rest, sign) = idx.remove_at(t);
                let term = c.wedge(&row[idx.as_slice()[t]]);
                let term = if sign < 0 { term.neg() } else { term };
                let e = next.remove(&rest).map_or(term.clone(), |g| g.add(&term));
                next.insert(rest, e);
            }
        }
        next.retain(|_, f| !f.is_zero());
        cur = next;
    }
    cur
}

/// Checks the `(k, l) = (2, 1)` relation `δ h_2^1 = f_2 − f_2^z`.
pub fn check_h21(c: &GradedComplex, h21: &FormMap) -> Result<()> {
    let space = Space::for_complex(c);
    let lhs = space.delta(h21);
    let rhs = space.zeta_map(c, 2).sub(&space.z_map(c, 2))?;
    if lhs != rhs.with_form_degree(0) {
        return Err(Error::ComplexInvariant("h_2^1 relation fails".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{affine_slice, build_buchsbaum_rim, build_koszul, BuildOptions};

    fn v(nv: usize, i: usize) -> Poly {
        Poly::var(nv, i)
    }

    fn scalar_map(p: Poly) -> FormMap {
        let mut m = FormMap::zero(1, 0, 0, 1, 1, p.nvars());
        m.set(0, 0, Form::scalar(p));
        m
    }

    fn koszul(entries: Vec<Poly>, d: Vec<i64>) -> GradedComplex {
        let p = PolyMatrix::from_rows(vec![entries]).unwrap().with_col_degrees(d).unwrap();
        build_koszul(&p, &BuildOptions::default()).unwrap()
    }

    #[test]
    fn delta_of_basic_forms() {
        let nv = 4;
        let mut m = FormMap::zero(1, 0, 1, 1, 1, nv);
        m.set(0, 0, Form::basis(LambdaIndex::single(0), Poly::one(nv)));
        let d = delta_zeta_z(&m);
        let want = (&v(nv, 0) - &v(nv, 2)).with_tau(1);
        assert_eq!(d.get(0, 0).unwrap().coeff(&LambdaIndex::empty()), Some(&want));

        let top = Form::basis(LambdaIndex::new(vec![0, 1]).unwrap(), Poly::one(nv));
        let d = Space::affine(2).delta_form(&top);
        let want0 = (&v(nv, 0) - &v(nv, 2)).with_tau(1);
        let want1 = -(&v(nv, 1) - &v(nv, 3)).with_tau(1);
        assert_eq!(d.coeff(&LambdaIndex::single(1)), Some(&want0));
        assert_eq!(d.coeff(&LambdaIndex::single(0)), Some(&want1));
        assert!(Space::affine(2).delta_form(&d).is_zero());
    }

    #[test]
    fn telescoping_step() {
        let phi = scalar_map(&v(2, 0) * &v(2, 1));
        let psi = hefer_solve_step(&phi, RhsKind::ZeroFormDifference).unwrap();
        let f = psi.get(0, 0).unwrap();
        assert_eq!(f.coeff(&LambdaIndex::single(0)), Some(&v(4, 3).with_tau(-1)));
        assert_eq!(f.coeff(&LambdaIndex::single(1)), Some(&v(4, 0).with_tau(-1)));
        assert_eq!(f.terms().count(), 2);

        let c = scalar_map(Poly::constant(2, rat(7)));
        assert!(hefer_solve_step(&c, RhsKind::ZeroFormDifference).unwrap().is_zero());
    }

    #[test]
    fn top_form_step() {
        let nv = 4;
        let mut m = FormMap::zero(1, 0, 1, 1, 1, nv);
        let target = Space::affine(2)
            .delta_form(&Form::basis(LambdaIndex::new(vec![0, 1]).unwrap(), Poly::one(nv)));
        m.set(0, 0, target);
        let psi = hefer_solve_step(&m, RhsKind::ClosedForm).unwrap();
        let f = psi.get(0, 0).unwrap();
        assert_eq!(f.coeff(&LambdaIndex::new(vec![0, 1]).unwrap()), Some(&Poly::one(nv)));

        let mut bad = FormMap::zero(1, 0, 1, 1, 1, nv);
        bad.set(0, 0, Form::basis(LambdaIndex::single(0), Poly::one(nv)));
        assert_eq!(hefer_solve_step(&bad, RhsKind::ClosedForm), Err(Error::NotClosed));
    }

    #[test]
    fn geometric_factorization() {
        for d in 1..5u32 {
            let c = affine_slice(&koszul(vec![v(1, 0).pow(d)], vec![d as i64])).unwrap();
            let t = build_hefer_tower(&c).unwrap();
            let h = t.get(1, 0);
            let want: Poly = (0..d)
                .map(|i| &v(2, 0).pow(i) * &v(2, 1).pow(d - 1 - i))
                .fold(Poly::zero(2), |a, b| a + b);
            assert_eq!(h.get(0, 0).unwrap().coeff(&LambdaIndex::single(0)), Some(&want.with_tau(-1)));
            t.check_relation().unwrap();
        }
    }

    #[test]
    fn koszul_three_generators_tower() {
        let n = 2;
        let one = Poly::one(n);
        let c = koszul(vec![v(n, 0).pow(2), v(n, 1), &v(n, 0) + &one], vec![2, 1, 1]);
        let a = affine_slice(&c).unwrap();
        let t = build_hefer_tower(&a).unwrap();
        t.check_relation().unwrap();
        t.check_degrees().unwrap();
        assert_eq!(t.get(0, 1).form_degree(), 0);
        assert!(t.get(0, 1).is_zero());
        assert_eq!(t.get(2, 2), FormMap::identity(2, 3, 4));

        let p = homogenize_tower(&t, &c).unwrap();
        p.check_relation().unwrap();
        p.check_degrees().unwrap();

        let kt = koszul_tower(&t.get(1, 0), &a).unwrap();
        kt.check_relation().unwrap();
        let kp = koszul_tower(&p.get(1, 0), &c).unwrap();
        kp.check_relation().unwrap();
    }

    #[test]
    fn projective_square() {
        let c = koszul(vec![v(1, 0).pow(2)], vec![2]);
        let t = build_hefer_tower(&affine_slice(&c).unwrap()).unwrap();
        let p = homogenize_tower(&t, &c).unwrap();
        p.check_relation().unwrap();
        p.check_degrees().unwrap();
        // −(ζ₁ + ζ₀z)(ζ₀ dζ₁ − ζ₁ dζ₀)
        let nv = 3;
        let a = &v(nv, 1) + &(&v(nv, 0) * &v(nv, 2));
        let h = p.get(1, 0);
        let f = h.get(0, 0).unwrap();
        assert_eq!(
            f.coeff(&LambdaIndex::single(1)),
            Some(&(-(&a * &v(nv, 0))).with_tau(-1))
        );
        assert_eq!(f.coeff(&LambdaIndex::single(0)), Some(&(&a * &v(nv, 1)).with_tau(-1)));
    }

    #[test]
    fn two_generator_projective_relation() {
        let c = koszul(vec![v(1, 0), &Poly::one(1) - &v(1, 0)], vec![1, 1]);
        let t = build_hefer_tower(&affine_slice(&c).unwrap()).unwrap();
        let p = homogenize_tower(&t, &c).unwrap();
        p.check_relation().unwrap();
        let kp = koszul_tower(&p.get(1, 0), &c).unwrap();
        kp.check_relation().unwrap();
        let h21 = br_h21(&c, &p.get(1, 0)).unwrap();
        assert_eq!(h21, kp.get(2, 1));
    }

    #[test]
    fn br_h21_rank_two() {
        let n = 2;
        let one = Poly::one(n);
        let p = PolyMatrix::from_rows(vec![
            vec![v(n, 0), &v(n, 1) + &one, one.clone()],
            vec![one.clone(), v(n, 0), &v(n, 1) - &v(n, 0)],
        ])
        .unwrap()
        .with_col_degrees(vec![1, 1, 1])
        .unwrap();
        let c = build_buchsbaum_rim(&p, &BuildOptions::default()).unwrap();
        let a = affine_slice(&c).unwrap();
        let t = build_hefer_tower(&a).unwrap();
        t.check_relation().unwrap();
        t.check_degrees().unwrap();
        let h21 = br_h21(&a, &t.get(1, 0)).unwrap();
        check_h21(&a, &h21).unwrap();
        let ph = homogenize_tower(&t, &c).unwrap();
        ph.check_relation().unwrap();
        let h21p = br_h21(&c, &ph.get(1, 0)).unwrap();
        check_h21(&c, &h21p).unwrap();
    }

    #[test]
    fn tower_json_round_trip() {
        let c = koszul(vec![v(1, 0), &Poly::one(1) - &v(1, 0)], vec![1, 1]);
        let t = build_hefer_tower(&affine_slice(&c).unwrap()).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let back: HeferTower = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }
}
