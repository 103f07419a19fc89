//! Exterior and symmetric index sets, polynomial-coefficient differential
//! forms, and form-valued maps between levels of a complex.
//!
//! Sign convention: removing the element at 0-based position `t` of a sorted
//! index set contributes `(-1)^t`. Everything downstream is pinned by the
//! requirement that the complexes square to zero, not by this choice.
//!
//! Form-valued maps compose in the ℤ₂-graded sense: a map that shifts the
//! level by `a` passes over a form of degree `b` at the cost of `(-1)^{ab}`.

use std::collections::BTreeMap;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Poly, PolyMatrix, Rat};

/// Strictly increasing subset of `0..m` (0-based labels).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct LambdaIndex(Vec<usize>);

impl LambdaIndex {
    pub fn new(mut v: Vec<usize>) -> Result<Self> {
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!("repeated exterior index in {v:?}")));
        }
        Ok(LambdaIndex(v))
    }

    pub fn empty() -> Self {
        LambdaIndex(Vec::new())
    }

    pub fn single(j: usize) -> Self {
        LambdaIndex(vec![j])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub fn is_subset(&self, other: &LambdaIndex) -> bool {
        self.0.iter().all(|j| other.contains(*j))
    }

    /// Removes position `t`, returning the rest and the sign `(-1)^t`.
    pub fn remove_at(&self, t: usize) -> (LambdaIndex, i8) {
        let mut v = self.0.clone();
        v.remove(t);
        (LambdaIndex(v), if t.is_multiple_of(2) { 1 } else { -1 })
    }

    /// `e_self ∧ e_other` as a sign and a merged index, or `None` if they meet.
    pub fn wedge(&self, other: &LambdaIndex) -> Option<(LambdaIndex, i8)> {
        let mut inversions = 0usize;
        for a in &self.0 {
            for b in &other.0 {
                if a == b {
                    return None;
                }
                if a > b {
                    inversions += 1;
                }
            }
        }
        let mut v: Vec<usize> = self.0.iter().chain(&other.0).copied().collect();
        v.sort_unstable();
        Some((LambdaIndex(v), if inversions.is_multiple_of(2) { 1 } else { -1 }))
    }

    /// All `k`-subsets of `0..m` in lexicographic order.
    pub fn all(m: usize, k: usize) -> Vec<LambdaIndex> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(k);
        fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<LambdaIndex>) {
            if cur.len() == k {
                out.push(LambdaIndex(cur.clone()));
                return;
            }
            for j in start..m {
                if m - j < k - cur.len() {
                    break;
                }
                cur.push(j);
                rec(j + 1, m, k, cur, out);
                cur.pop();
            }
        }
        rec(0, m, k, &mut cur, &mut out);
        out
    }
}

/// Sorted multiset over `0..r`: a monomial basis label of a symmetric power.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct SymIndex(Vec<usize>);

impl SymIndex {
    pub fn new(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        SymIndex(v)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Lowers the multiplicity of `i` by one, if present.
    pub fn lower(&self, i: usize) -> Option<SymIndex> {
        let pos = self.0.iter().position(|&x| x == i)?;
        let mut v = self.0.clone();
        v.remove(pos);
        Some(SymIndex(v))
    }

    /// All multisets of size `s` over `0..r`, lexicographically.
    pub fn all(r: usize, s: usize) -> Vec<SymIndex> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(s);
        fn rec(start: usize, r: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<SymIndex>) {
            if cur.len() == s {
                out.push(SymIndex(cur.clone()));
                return;
            }
            for i in start..r {
                cur.push(i);
                rec(i, r, s, cur, out);
                cur.pop();
            }
        }
        rec(0, r, s, &mut cur, &mut out);
        out
    }
}

/// Interior multiplication of `e_idx` by the covector `p_row`:
/// every `(idx ∖ {j}, p_j, (-1)^{pos(j)})` for `j ∈ idx`.
pub fn wedge_contract(p_row: &[Poly], idx: &LambdaIndex) -> Vec<(LambdaIndex, Poly, i8)> {
    (0..idx.len())
        .map(|t| {
            let (rest, sign) = idx.remove_at(t);
            (rest, p_row[idx.0[t]].clone(), sign)
        })
        .collect()
}

/// A differential form `Σ_J c_J dζ_J` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    degree: usize,
    terms: BTreeMap<LambdaIndex, Poly>,
}

impl Form {
    pub fn zero(degree: usize) -> Self {
        Form {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(p: Poly) -> Self {
        Self::basis(LambdaIndex::empty(), p)
    }

    pub fn basis(j: LambdaIndex, p: Poly) -> Self {
        let mut f = Form::zero(j.len());
        f.add_term(j, p);
        f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LambdaIndex, &Poly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, j: &LambdaIndex) -> Option<&Poly> {
        self.terms.get(j)
    }

    pub fn add_term(&mut self, j: LambdaIndex, p: Poly) {
        assert_eq!(j.len(), self.degree, "form degree mismatch");
        if p.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(j) {
            Entry::Vacant(v) => {
                v.insert(p);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + &p;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Form) -> Form {
        if self.is_zero() {
            return other.clone();
        }
        let mut out = self.clone();
        for (j, p) in &other.terms {
            out.add_term(j.clone(), p.clone());
        }
        out
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        self.scale(&-Rat::one())
    }

    pub fn scale(&self, c: &Rat) -> Form {
        self.map_coeffs(|p| p.scale(c))
    }

    pub fn mul_poly(&self, p: &Poly) -> Form {
        self.map_coeffs(|c| c * p)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Poly) -> Poly) -> Form {
        let mut out = Form::zero(self.degree);
        for (j, p) in &self.terms {
            out.add_term(j.clone(), f(p));
        }
        out
    }

    pub fn wedge(&self, other: &Form) -> Form {
        let mut out = Form::zero(self.degree + other.degree);
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                if let Some((j, sign)) = a.wedge(b) {
                    let c = p * q;
                    out.add_term(j, if sign < 0 { -c } else { c });
                }
            }
        }
        out
    }

    /// Interior product with the vector field `Σ v_j ∂/∂ζ_j`.
    pub fn contract(&self, field: &[Poly]) -> Form {
        assert!(self.degree >= 1, "cannot contract a 0-form");
        let mut out = Form::zero(self.degree - 1);
        for (j, p) in &self.terms {
            for (rest, v, sign) in wedge_contract(field, j) {
                let c = p * &v;
                out.add_term(rest, if sign < 0 { -c } else { c });
            }
        }
        out
    }

    /// Largest coefficient degree, `None` for the zero form.
    pub fn max_coeff_degree(&self) -> Option<u32> {
        self.terms.values().filter_map(Poly::degree).max()
    }
}

/// A form-valued morphism from level `source` to level `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormMap {
    source: usize,
    target: usize,
    form_degree: usize,
    nrows: usize,
    ncols: usize,
    nvars: usize,
    entries: BTreeMap<(usize, usize), Form>,
}

impl FormMap {
    pub fn zero(
        source: usize,
        target: usize,
        form_degree: usize,
        nrows: usize,
        ncols: usize,
        nvars: usize,
    ) -> Self {
        FormMap {
            source,
            target,
            form_degree,
            nrows,
            ncols,
            nvars,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(level: usize, rank: usize, nvars: usize) -> Self {
        let mut m = Self::zero(level, level, 0, rank, rank, nvars);
        for i in 0..rank {
            m.set(i, i, Form::scalar(Poly::one(nvars)));
        }
        m
    }

    /// Wraps a polynomial matrix as a 0-form-valued map `source → target`.
    pub fn from_matrix(source: usize, target: usize, m: &PolyMatrix) -> Self {
        let mut out = Self::zero(source, target, 0, m.nrows(), m.ncols(), m.nvars());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.set(i, j, Form::scalar(m.get(i, j).clone()));
            }
        }
        out
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn form_degree(&self) -> usize {
        self.form_degree
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&Form> {
        self.entries.get(&(row, col))
    }

    pub fn entry_or_zero(&self, row: usize, col: usize) -> Form {
        self.get(row, col)
            .cloned()
            .unwrap_or_else(|| Form::zero(self.form_degree))
    }

    pub fn set(&mut self, row: usize, col: usize, f: Form) {
        assert!(row < self.nrows && col < self.ncols, "entry out of range");
        assert_eq!(f.degree(), self.form_degree, "form degree mismatch");
        if f.is_zero() {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), f);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &Form)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Flat view: `(α, β, J, coefficient)`.
    pub fn coefficients(&self) -> impl Iterator<Item = (usize, usize, &LambdaIndex, &Poly)> {
        self.entries
            .iter()
            .flat_map(|(&(a, b), f)| f.terms().map(move |(j, p)| (a, b, j, p)))
    }

    pub fn with_form_degree(mut self, d: usize) -> Self {
        assert!(self.entries.is_empty() || self.form_degree == d);
        self.form_degree = d;
        self
    }

    pub fn add(&self, other: &FormMap) -> Result<FormMap> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (&(a, b), f) in &other.entries {
            let s = out.entry_or_zero(a, b).add(f);
            out.set(a, b, s);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FormMap) -> Result<FormMap> {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, c: &Rat) -> FormMap {
        let mut out = self.clone();
        for f in out.entries.values_mut() {
            *f = f.scale(c);
        }
        out.entries.retain(|_, f| !f.is_zero());
        out
    }

    fn check_same_shape(&self, other: &FormMap) -> Result<()> {
        if (self.source, self.target, self.form_degree, self.nrows, self.ncols)
            != (
                other.source,
                other.target,
                other.form_degree,
                other.nrows,
                other.ncols,
            )
        {
            return Err(Error::InvalidInput(format!(
                "form maps {}→{} (deg {}) and {}→{} (deg {}) differ in shape",
                self.source,
                self.target,
                self.form_degree,
                other.source,
                other.target,
                other.form_degree
            )));
        }
        Ok(())
    }

    /// Graded composition `self ∘ rhs`.
    pub fn compose(&self, rhs: &FormMap) -> Result<FormMap> {
        if self.source != rhs.target || self.ncols != rhs.nrows {
            return Err(Error::InvalidInput(format!(
                "cannot compose {}→{} after {}→{}",
                self.source, self.target, rhs.source, rhs.target
            )));
        }
        let shift = self.source.abs_diff(self.target);
        let negate = (shift * rhs.form_degree) % 2 == 1;
        let mut out = FormMap::zero(
            rhs.source,
            self.target,
            self.form_degree + rhs.form_degree,
            self.nrows,
            rhs.ncols,
            self.nvars.max(rhs.nvars),
        );
        let mut by_row: BTreeMap<usize, Vec<(usize, &Form)>> = BTreeMap::new();
        for (&(b, c), f) in &rhs.entries {
            by_row.entry(b).or_default().push((c, f));
        }
        for (&(a, b), f) in &self.entries {
            if let Some(list) = by_row.get(&b) {
                for &(c, g) in list {
                    let w = f.wedge(g);
                    let w = if negate { w.neg() } else { w };
                    let s = out.entry_or_zero(a, c).add(&w);
                    out.set(a, c, s);
                }
            }
        }
        Ok(out)
    }

    /// Applies an operation to every coefficient form.
    pub fn contract(&self, field: &[Poly]) -> FormMap {
        let mut out = FormMap::zero(
            self.source,
            self.target,
            self.form_degree.saturating_sub(1),
            self.nrows,
            self.ncols,
            self.nvars,
        );
        if self.form_degree == 0 {
            return out;
        }
        for (&(a, b), f) in &self.entries {
            out.set(a, b, f.contract(field));
        }
        out
    }

    /// Largest coefficient degree across all entries.
    pub fn max_coeff_degree(&self) -> Option<u32> {
        self.entries.values().filter_map(Form::max_coeff_degree).max()
    }
}

#[derive(Serialize, Deserialize)]
struct FormMapRepr {
    source: usize,
    target: usize,
    form_degree: usize,
    rows: usize,
    cols: usize,
    nvars: usize,
    coefficients: Vec<(usize, usize, LambdaIndex, Poly)>,
}

impl Serialize for FormMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FormMapRepr {
            source: self.source,
            target: self.target,
            form_degree: self.form_degree,
            rows: self.nrows,
            cols: self.ncols,
            nvars: self.nvars,
            coefficients: self
                .coefficients()
                .map(|(a, b, j, p)| (a, b, j.clone(), p.clone()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FormMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = FormMapRepr::deserialize(d)?;
        let mut m = FormMap::zero(r.source, r.target, r.form_degree, r.rows, r.cols, r.nvars);
        for (a, b, j, p) in r.coefficients {
            if a >= r.rows || b >= r.cols || j.len() != r.form_degree {
                return Err(D::Error::custom("form map coefficient out of shape"));
            }
            let j = LambdaIndex::new(j.0).map_err(D::Error::custom)?;
            let f = m.entry_or_zero(a, b).add(&Form::basis(j, p));
            m.set(a, b, f);
        }
        Ok(m)
    }
}

/// Interior multiplication by a row of 1-forms `h = Σ_j h_j e_j*`, as a map
/// between two exterior levels whose basis elements carry the given indices.
pub fn interior_map(
    h: &[Form],
    source_level: usize,
    source: &[LambdaIndex],
    target: &[LambdaIndex],
    nvars: usize,
) -> FormMap {
    let form_degree = h.first().map_or(0, Form::degree);
    let position: BTreeMap<&LambdaIndex, usize> =
        target.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut out = FormMap::zero(
        source_level,
        source_level.saturating_sub(1),
        form_degree,
        target.len(),
        source.len(),
        nvars,
    );
    for (col, idx) in source.iter().enumerate() {
        for t in 0..idx.len() {
            let (rest, sign) = idx.remove_at(t);
            let Some(&row) = position.get(&rest) else {
                continue;
            };
            let f = &h[idx.as_slice()[t]];
            let f = if sign < 0 { f.neg() } else { f.clone() };
            let s = out.entry_or_zero(row, col).add(&f);
            out.set(row, col, s);
        }
    }
    out
}

/// `(δ_h)^power ∘ target`, where `δ_h` is interior multiplication by the
/// `(1,0)`-form row `h` and `exterior[k]` lists the exterior index of every
/// basis element of level `k`. Running out of levels yields the zero map.
pub fn delta_form(
    h: &FormMap,
    exterior: &[Vec<LambdaIndex>],
    power: usize,
    target: &FormMap,
) -> Result<FormMap> {
    if h.nrows() != 1 {
        return Err(Error::InvalidInput(
            "delta_form expects a single-row (Koszul) map".into(),
        ));
    }
    let row: Vec<Form> = (0..h.ncols())
        .map(|j| h.entry_or_zero(0, j))
        .collect();
    let mut acc = target.clone();
    for _ in 0..power {
        let level = acc.target();
        if level == 0 {
            return Ok(FormMap::zero(
                acc.source(),
                0,
                acc.form_degree() + h.form_degree(),
                0,
                acc.ncols(),
                acc.nvars(),
            ));
        }
        let step = interior_map(&row, level, &exterior[level], &exterior[level - 1], h.nvars());
        acc = step.compose(&acc)?;
    }
    Ok(acc)
}
