//! Seeded test corpora.
//!
//! Every instance is a [`DivisionProblem`] plus a sidecar of properties
//! checked at generation time. The same seed and profile always give the
//! same instances.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Result};
use hefdiv_core::complexes::{contract_rows, generic_surjectivity_check};
use hefdiv_core::division::{degree_bound, solve_capped, BoundMethod, CapOutcome, DivisionProblem};
use hefdiv_core::poly::rat;
use hefdiv_core::{LambdaIndex, Poly, PolyMatrix, Rat};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Sampled weighted norms below this count as a rank drop.
pub const RANK_DROP_SAMPLE: f64 = 1e-6;
const SPHERE_SAMPLES: usize = 4096;
const MAX_ATTEMPTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `n = 1`, one row, no common zeros on P¹, `Φ = 1`.
    MacaulayR1,
    /// Two rows, no rank drop on Pⁿ, `Φ = P Q₀`.
    BrR2,
    /// `Φ = P Q₀` with no condition on the zero set.
    Membership,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::MacaulayR1, Profile::BrR2, Profile::Membership];

    pub fn name(self) -> &'static str {
        match self {
            Profile::MacaulayR1 => "macaulay-r1",
            Profile::BrR2 => "br-r2",
            Profile::Membership => "membership",
        }
    }

    pub fn default_count(self) -> usize {
        match self {
            Profile::MacaulayR1 => 20,
            Profile::BrR2 | Profile::Membership => 10,
        }
    }

    fn stream(self) -> u64 {
        match self {
            Profile::MacaulayR1 => 1,
            Profile::BrR2 => 2,
            Profile::Membership => 3,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| anyhow::anyhow!("unknown profile {s:?}; expected macaulay-r1, br-r2 or membership"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub profile: Profile,
    pub index: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub degrees: Vec<i64>,
    pub rho: i64,
    /// `"gcd"` (exact, n = 1), `"bezout"` (exact, n = 2) or `"none"`.
    pub emptiness_check: String,
    pub rank_drop_free: Option<bool>,
    /// Smallest `Σ |g|²` over the sphere samples, `g` the homogenized
    /// maximal minors.
    pub min_sampled_norm: f64,
    pub samples: usize,
    pub bounds: BTreeMap<String, i64>,
    #[serde(rename = "Q0", skip_serializing_if = "Option::is_none", default)]
    pub q0: Option<Vec<Poly>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusInstance {
    pub name: String,
    pub problem: DivisionProblem,
    pub meta: InstanceMeta,
}

pub fn generate(seed: u64, profile: Profile, count: Option<usize>) -> Result<Vec<CorpusInstance>> {
    let count = count.unwrap_or(profile.default_count());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(profile.stream());
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let mut attempt = 0;
        let inst = loop {
            attempt += 1;
            if attempt > MAX_ATTEMPTS {
                bail!("{profile}: no acceptable instance {index} after {MAX_ATTEMPTS} draws");
            }
            if let Some(inst) = draw(&mut rng, seed, profile, index)? {
                break inst;
            }
        };
        out.push(inst);
    }
    Ok(out)
}

fn draw(rng: &mut ChaCha8Rng, seed: u64, profile: Profile, index: usize) -> Result<Option<CorpusInstance>> {
    let (p, phi, rho, q0) = match profile {
        Profile::MacaulayR1 => {
            let p = match index {
                0 => fixed_row(&[&[(2, 1)], &[(0, 1), (1, -2), (2, 1)]], vec![2, 2]),
                1 => fixed_row(&[&[(3, 1)], &[(0, 1), (1, -2), (2, 1)]], vec![3, 2]),
                _ => {
                    let m = rng.gen_range(2..=3);
                    let degs = sorted_degrees(rng, m, 1, 3);
                    random_matrix_with_degrees(rng, 1, 1, &degs, true)
                }
            };
            (p, vec![Poly::one(1)], 0, None)
        }
        Profile::BrR2 => {
            let (n, m) = [(1, 3), (1, 4), (2, 4)][index % 3];
            let degs = sorted_degrees(rng, m, 1, 2);
            let p = random_matrix_with_degrees(rng, n, 2, &degs, true);
            let q0: Vec<Poly> = (0..m).map(|_| random_poly(rng, n, 1, false)).collect();
            let phi = p.apply(&q0)?;
            let rho = phi.iter().map(Poly::degree_i64).max().unwrap_or(0).max(0);
            (p, phi, rho, Some(q0))
        }
        Profile::Membership => {
            let r = 1 + index % 2;
            let n = rng.gen_range(1..=2);
            let m = r + rng.gen_range(1..=2);
            let degs = sorted_degrees(rng, m, 1, 2);
            let p = random_matrix_with_degrees(rng, n, r, &degs, false);
            let q0: Vec<Poly> = (0..m).map(|_| random_poly(rng, n, 1, false)).collect();
            let phi = p.apply(&q0)?;
            let rho = phi.iter().map(Poly::degree_i64).max().unwrap_or(0).max(0);
            (p, phi, rho, Some(q0))
        }
    };
    if phi.iter().all(Poly::is_zero) || !generic_surjectivity_check(&p, 8, seed ^ index as u64) {
        return Ok(None);
    }
    let minors = maximal_minors(&p);
    let (min_norm, samples) = sampled_min_norm(&minors, p.nvars(), seed ^ (index as u64) << 8);
    let (check, free) = match profile {
        Profile::Membership => ("none", None),
        _ if p.nvars() == 1 => ("gcd", Some(no_common_zero_p1(&minors))),
        _ => ("bezout", Some(no_common_zero_p2(&minors)?)),
    };
    if free == Some(false) || (free.is_some() && min_norm < RANK_DROP_SAMPLE) {
        return Ok(None);
    }
    let problem = DivisionProblem::new(p, phi, rho)?;
    let mut bounds = BTreeMap::new();
    for (name, method) in [
        ("eliot", BoundMethod::Eliot),
        ("koszul", BoundMethod::Koszul),
        ("macaulay", BoundMethod::Macaulay),
        ("mountie", BoundMethod::Mountie),
        ("fuhrmann", BoundMethod::Fuhrmann),
    ] {
        if let Ok(b) = degree_bound(&problem.query(method)) {
            bounds.insert(name.to_string(), b);
        }
    }
    let meta = InstanceMeta {
        profile,
        index,
        seed,
        n: problem.n,
        m: problem.p.ncols(),
        r: problem.p.nrows(),
        degrees: problem.p.col_degrees().to_vec(),
        rho: problem.rho,
        emptiness_check: check.to_string(),
        rank_drop_free: free,
        min_sampled_norm: min_norm,
        samples,
        bounds,
        q0,
    };
    Ok(Some(CorpusInstance {
        name: format!("{}-{:03}", profile.name(), index),
        problem,
        meta,
    }))
}

fn fixed_row(entries: &[&[(u32, i64)]], degs: Vec<i64>) -> PolyMatrix {
    let row = entries
        .iter()
        .map(|terms| Poly::from_terms(1, terms.iter().map(|&(e, c)| (vec![e], rat(c)))))
        .collect();
    PolyMatrix::from_rows(vec![row])
        .and_then(|m| m.with_col_degrees(degs))
        .expect("fixed corpus rows are well formed")
}

fn sorted_degrees(rng: &mut ChaCha8Rng, m: usize, lo: i64, hi: i64) -> Vec<i64> {
    let mut d: Vec<i64> = (0..m).map(|_| rng.gen_range(lo..=hi)).collect();
    d.sort_by(|a, b| b.cmp(a));
    d
}

fn monomials(n: usize, deg: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for a in 0..=deg {
        for mut rest in monomials(n - 1, deg - a) {
            rest.insert(0, a);
            out.push(rest);
        }
    }
    out
}

/// Integer coefficients in `−3..=3`; with `exact`, some monomial of degree
/// `deg` is nonzero.
pub fn random_poly(rng: &mut ChaCha8Rng, n: usize, deg: u32, exact: bool) -> Poly {
    let mut terms: Vec<(Vec<u32>, Rat)> = Vec::new();
    for d in 0..=deg {
        for e in monomials(n, d) {
            if e.iter().sum::<u32>() != d {
                continue;
            }
            if rng.gen_bool(0.6) {
                let c: i64 = rng.gen_range(-3..=3);
                terms.push((e, rat(c)));
            }
        }
    }
    let mut p = Poly::from_terms(n, terms);
    if exact && p.degree() != Some(deg) {
        let top: Vec<Vec<u32>> = monomials(n, deg).into_iter().filter(|e| e.iter().sum::<u32>() == deg).collect();
        let e = top[rng.gen_range(0..top.len())].clone();
        let c = if rng.gen_bool(0.5) { 1 } else { -1 } * rng.gen_range(1..=3);
        p = &p + &Poly::monomial(n, e, rat(c));
    }
    p
}

/// `r × m` matrix whose column `j` has entries of degree at most `degs[j]`;
/// with `exact`, row `j mod r` attains it.
pub fn random_matrix_with_degrees(rng: &mut ChaCha8Rng, n: usize, r: usize, degs: &[i64], exact: bool) -> PolyMatrix {
    let mut m = PolyMatrix::zeros(r, degs.len(), n);
    for (j, &d) in degs.iter().enumerate() {
        for i in 0..r {
            m.set(i, j, random_poly(rng, n, d as u32, exact && i == j % r));
        }
    }
    m.with_col_degrees(degs.to_vec()).expect("one degree per column")
}

/// Random `r × m` matrix with entry degrees at most `max_deg`, columns
/// sorted by degree and degrees declared from the entries.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, r: usize, m: usize, max_deg: u32) -> PolyMatrix {
    let degs = sorted_degrees(rng, m, 1, i64::from(max_deg));
    random_matrix_with_degrees(rng, n, r, &degs, true)
}

/// Maximal minors with their declared degrees.
pub fn maximal_minors(p: &PolyMatrix) -> Vec<(Poly, i64)> {
    let rows: Vec<usize> = (0..p.nrows()).collect();
    let d = p.col_degrees();
    LambdaIndex::all(p.ncols(), p.nrows())
        .into_iter()
        .map(|idx| {
            let minor = contract_rows(p, &rows, &idx)
                .remove(&LambdaIndex::empty())
                .unwrap_or_else(|| Poly::zero(p.nvars()));
            let deg = idx.as_slice().iter().map(|&j| d[j]).sum();
            (minor, deg)
        })
        .collect()
}

/// Exact test on P²: the minors satisfy a Bezout identity at the
/// Macaulay cap (no affine common zero, and the cap suffices whenever the
/// projective zero set is empty), and their top-degree forms have no
/// common zero on the line at infinity.
pub fn no_common_zero_p2(minors: &[(Poly, i64)]) -> Result<bool> {
    let mut sorted = minors.to_vec();
    sorted.sort_by_key(|x| std::cmp::Reverse(x.1));
    let degs: Vec<i64> = sorted.iter().map(|x| x.1).collect();
    let n = 2;
    let top = sorted
        .iter()
        .map(|(g, d)| {
            let form = Poly::from_terms(
                1,
                g.terms()
                    .filter(|(e, _)| i64::from(e[0] + e[1]) == *d)
                    .map(|(e, c)| (vec![e[1]], c.clone())),
            );
            (form, *d)
        })
        .collect::<Vec<_>>();
    if !no_common_zero_p1(&top) {
        return Ok(false);
    }
    let cap = degs.iter().take(n + 1).sum::<i64>() - n as i64;
    let row = PolyMatrix::from_rows(vec![sorted.into_iter().map(|x| x.0).collect()])?.with_col_degrees(degs)?;
    let prob = DivisionProblem::new(row, vec![Poly::one(n)], 0)?;
    Ok(matches!(solve_capped(&prob, cap)?, CapOutcome::Solved(_)))
}

/// Exact test on P¹: no common affine zero (gcd is constant) and not all
/// minors drop degree at infinity.
pub fn no_common_zero_p1(minors: &[(Poly, i64)]) -> bool {
    let at_infinity = minors.iter().all(|(g, d)| g.degree_i64() < *d);
    if at_infinity {
        return false;
    }
    let mut g: Vec<Rat> = Vec::new();
    for (p, _) in minors {
        g = univariate_gcd(g, univariate(p));
        if g.len() == 1 {
            return true;
        }
    }
    g.len() == 1
}

fn univariate(p: &Poly) -> Vec<Rat> {
    let deg = p.degree().map_or(0, |d| d as usize + 1);
    let mut v: Vec<Rat> = (0..deg).map(|k| p.coeff(&[k as u32])).collect();
    trim(&mut v);
    v
}

fn trim(v: &mut Vec<Rat>) {
    while v.last().is_some_and(|c| *c == rat(0)) {
        v.pop();
    }
}

fn univariate_gcd(mut a: Vec<Rat>, mut b: Vec<Rat>) -> Vec<Rat> {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let lead = b.last().cloned().expect("nonempty");
        while a.len() >= b.len() {
            let c = a.last().cloned().expect("nonempty") / &lead;
            let shift = a.len() - b.len();
            for (k, bk) in b.iter().enumerate() {
                a[k + shift] -= &c * bk;
            }
            trim(&mut a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

/// Minimum of `Σ |g_k^h(ζ)|²` over deterministic points on the unit sphere
/// of `ℂ^{n+1}`, including points with `ζ₀ = 0`.
pub fn sampled_min_norm(minors: &[(Poly, i64)], n: usize, seed: u64) -> (f64, usize) {
    let homog: Vec<Poly> = minors
        .iter()
        .filter_map(|(g, d)| g.homogenize(*d).ok())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for s in 0..SPHERE_SAMPLES {
        let mut z: Vec<Complex64> = (0..=n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        if s % 8 == 0 {
            z[0] = Complex64::new(0.0, 0.0);
        }
        let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        z.iter_mut().for_each(|c| *c /= norm);
        let v: f64 = homog.iter().map(|g| g.eval(&z).norm_sqr()).sum();
        best = best.min(v);
    }
    (best, SPHERE_SAMPLES)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bezout_check_on_p2() {
        let (x, y) = (Poly::var(2, 0), Poly::var(2, 1));
        let one = Poly::one(2);
        // shared affine zero at the origin
        assert!(!no_common_zero_p2(&[(x.clone(), 1), (y.clone(), 1), (&x * &y, 2)]).unwrap());
        // three lines in general position
        assert!(no_common_zero_p2(&[(x.clone(), 1), (&y - &one, 1), (&(&x + &y) - &one.scale(&rat(3)), 1)]).unwrap());
        // x and x − 1 are parallel lines: they meet at infinity
        assert!(!no_common_zero_p2(&[(x.clone(), 1), (&x - &one, 1)]).unwrap());
    }

    #[test]
    fn gcd_detects_shared_root() {
        let z = Poly::var(1, 0);
        let one = Poly::one(1);
        let a = &z * &(&z - &one);
        let b = &(&z - &one) * &(&z - &one);
        assert!(!no_common_zero_p1(&[(a.clone(), 2), (b, 2)]));
        assert!(no_common_zero_p1(&[(a, 2), (&(&z * &z) + &one, 2)]));
        // (z, 1) declared at degree 2 share the point at infinity
        assert!(!no_common_zero_p1(&[(z.clone(), 2), (one, 2)]));
    }

    #[test]
    fn first_instance_is_fixed() {
        let c = generate(7, Profile::MacaulayR1, Some(2)).unwrap();
        let row = c[0].problem.p.row(0);
        assert_eq!(row[0], Poly::var(1, 0).pow(2));
        assert_eq!(c[0].meta.rank_drop_free, Some(true));
    }

    #[test]
    fn generation_is_deterministic() {
        for p in Profile::ALL {
            let a = serde_json::to_string(&generate(7, p, Some(4)).unwrap()).unwrap();
            let b = serde_json::to_string(&generate(7, p, Some(4)).unwrap()).unwrap();
            assert_eq!(a, b);
        }
    }
}
