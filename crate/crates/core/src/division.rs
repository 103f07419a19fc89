//! Degree bounds and the degree-capped exact division solver `P Q = Φ`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexes::{binomial, contract_rows, generic_surjectivity_check, DEFAULT_SURJECTIVITY_SEED, DEFAULT_SURJECTIVITY_TRIALS};
use crate::error::{Error, Result};
use crate::linalg::LinearSystem;
use crate::multilinear::LambdaIndex;
use crate::poly::{Poly, PolyMatrix, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Eliot,
    Koszul,
    Macaulay,
    Mountie,
    Fuhrmann,
}

impl std::str::FromStr for BoundMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eliot" => Ok(BoundMethod::Eliot),
            "koszul" => Ok(BoundMethod::Koszul),
            "macaulay" => Ok(BoundMethod::Macaulay),
            "mountie" => Ok(BoundMethod::Mountie),
            "fuhrmann" => Ok(BoundMethod::Fuhrmann),
            _ => Err(Error::InvalidInput(format!("unknown bound method `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub degrees: Vec<i64>,
    pub rho: i64,
    pub method: BoundMethod,
}

/// Value of the chosen bound.
pub fn degree_bound(q: &BoundQuery) -> Result<i64> {
    let BoundQuery { n, m, r, ref degrees, rho, method } = *q;
    if r == 0 || m < r {
        return Err(Error::InvalidInput(format!("need m ≥ r ≥ 1, got m = {m}, r = {r}")));
    }
    if degrees.len() != m {
        return Err(Error::InvalidInput(format!("expected {m} degrees, got {}", degrees.len())));
    }
    if degrees.iter().any(|&d| d < 0) || degrees.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput("degrees must be non-negative and non-increasing".into()));
    }
    let head = |k: usize| -> i64 { degrees[..k.min(m)].iter().sum() };
    match method {
        BoundMethod::Eliot => Ok(rho + head(n.min(m - r) + r)),
        BoundMethod::Koszul => {
            if r != 1 {
                return Err(Error::Applicability("the Koszul bound needs r = 1".into()));
            }
            Ok(rho + head(n.min(m - 1) + 1))
        }
        BoundMethod::Macaulay => {
            if r != 1 {
                return Err(Error::Applicability("the Macaulay bound needs r = 1".into()));
            }
            if m < n + 1 {
                return Err(Error::Applicability(format!(
                    "the Macaulay bound needs m ≥ n + 1 = {}",
                    n + 1
                )));
            }
            Ok(rho + head(n + 1) - n as i64)
        }
        BoundMethod::Mountie => Ok(rho + head(n + r)),
        BoundMethod::Fuhrmann => {
            let mu = (binomial(m, r) as usize - 1).min(n);
            Ok(rho + (mu as i64 + 1) * head(r))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisionProblem {
    pub n: usize,
    #[serde(rename = "P")]
    pub p: PolyMatrix,
    #[serde(rename = "Phi")]
    pub phi: Vec<Poly>,
    pub rho: i64,
}

impl DivisionProblem {
    /// Fills in actual column degrees when `P` declares none, then checks
    /// the invariants.
    pub fn new(p: PolyMatrix, phi: Vec<Poly>, rho: i64) -> Result<Self> {
        let p = if p.col_degrees().is_empty() {
            let degs = (0..p.ncols())
                .map(|j| (0..p.nrows()).map(|i| p.get(i, j).degree_i64().max(0)).max().unwrap_or(0))
                .collect();
            p.with_col_degrees(degs)?
        } else {
            p
        };
        let prob = DivisionProblem { n: p.nvars(), p, phi, rho };
        prob.validate()?;
        Ok(prob)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.nvars() != self.n {
            return Err(Error::InvalidInput(format!(
                "P has {} variables but n = {}",
                self.p.nvars(),
                self.n
            )));
        }
        if self.phi.len() != self.p.nrows() {
            return Err(Error::InvalidInput(format!(
                "Φ has {} entries but P has {} rows",
                self.phi.len(),
                self.p.nrows()
            )));
        }
        if self.p.col_degrees().len() != self.p.ncols() {
            return Err(Error::InvalidInput("P needs declared column degrees".into()));
        }
        self.p.check_column_caps()?;
        for f in &self.phi {
            if f.nvars() != self.n {
                return Err(Error::NvarsMismatch { left: f.nvars(), right: self.n });
            }
            if f.degree_i64() > self.rho {
                return Err(Error::InvalidInput(format!(
                    "ρ = {} is below deg Φ = {}",
                    self.rho,
                    f.degree_i64()
                )));
            }
        }
        Ok(())
    }

    pub fn query(&self, method: BoundMethod) -> BoundQuery {
        BoundQuery {
            n: self.n,
            m: self.p.ncols(),
            r: self.p.nrows(),
            degrees: self.p.col_degrees().to_vec(),
            rho: self.rho,
            method,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    CappedSolve,
    Fuhrmann,
    Certificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisionSolution {
    #[serde(rename = "Q")]
    pub q: Vec<Poly>,
    pub cap_used: i64,
    pub bound_claimed: Option<i64>,
    pub method: SolveMethod,
    pub identity_verified: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub minimal_cap: Option<i64>,
}

/// Result of one capped solve; running out of room is an ordinary outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CapOutcome {
    Solved(DivisionSolution),
    NoSolutionAtCap { cap: i64 },
}

impl CapOutcome {
    pub fn solution(self) -> Option<DivisionSolution> {
        match self {
            CapOutcome::Solved(s) => Some(s),
            CapOutcome::NoSolutionAtCap { .. } => None,
        }
    }

    pub fn into_result(self) -> Result<DivisionSolution> {
        match self {
            CapOutcome::Solved(s) => Ok(s),
            CapOutcome::NoSolutionAtCap { cap } => Err(Error::NoSolutionAtCap { cap }),
        }
    }
}

fn monomials_up_to(n: usize, deg: i64) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if deg < 0 {
        return out;
    }
    for d in 0..=deg as u32 {
        let mut level = Vec::new();
        fn rec(i: usize, n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if i + 1 == n {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
                return;
            }
            for a in 0..=left {
                cur.push(a);
                rec(i + 1, n, left - a, cur, out);
                cur.pop();
            }
        }
        if n == 0 {
            if d == 0 {
                level.push(Vec::new());
            }
        } else {
            rec(0, n, d, &mut Vec::new(), &mut level);
        }
        level.sort();
        out.extend(level);
    }
    out
}

/// Solves `P Q = Φ` with `deg Q_j ≤ cap − degs[j]`. Unknowns are ordered by
/// `(monomial degree, monomial, j)`; free unknowns are set to zero.
fn solve_system(p: &PolyMatrix, degs: &[i64], phi: &[Poly], cap: i64) -> Option<Vec<Poly>> {
    let n = p.nvars();
    let (r, m) = (p.nrows(), p.ncols());
    if phi.iter().all(Poly::is_zero) {
        return Some(vec![Poly::zero(n); m]);
    }
    let mut cols: Vec<(u32, Vec<u32>, usize)> = Vec::new();
    for (j, &dj) in degs.iter().enumerate() {
        for e in monomials_up_to(n, cap - dj) {
            cols.push((e.iter().sum(), e, j));
        }
    }
    cols.sort();
    let mut rows: BTreeMap<(usize, Vec<u32>), BTreeMap<usize, Rat>> = BTreeMap::new();
    for (ci, (_, e, j)) in cols.iter().enumerate() {
        for i in 0..r {
            for (f, c) in p.get(i, *j).terms() {
                let g: Vec<u32> = f.iter().zip(e).map(|(a, b)| a + b).collect();
                let slot = rows.entry((i, g)).or_default().entry(ci).or_insert_with(Rat::zero);
                *slot += c;
            }
        }
    }
    for (i, f) in phi.iter().enumerate() {
        for (e, _) in f.terms() {
            if !rows.contains_key(&(i, e.clone())) {
                return None;
            }
        }
    }
    let mut sys = LinearSystem::new(cols.len());
    for ((i, e), row) in rows {
        let b = phi[i].coeff(&e);
        sys.push_row(row, b);
    }
    let x = sys.solve()?;
    let mut q = vec![Poly::zero(n); m];
    for ((_, e, j), v) in cols.into_iter().zip(x) {
        if !v.is_zero() {
            q[j] = &q[j] + &Poly::monomial(n, e, v);
        }
    }
    Some(q)
}

fn verify(p: &PolyMatrix, q: &[Poly], phi: &[Poly]) -> Result<bool> {
    Ok(p.apply(q)? == phi)
}

/// Degree-capped exact division: `deg P^j Q_j ≤ cap` for every column.
pub fn solve_capped(prob: &DivisionProblem, cap: i64) -> Result<CapOutcome> {
    prob.validate()?;
    if cap < 0 {
        return Err(Error::InvalidInput(format!("cap must be non-negative, got {cap}")));
    }
    let Some(q) = solve_system(&prob.p, prob.p.col_degrees(), &prob.phi, cap) else {
        return Ok(CapOutcome::NoSolutionAtCap { cap });
    };
    if !verify(&prob.p, &q, &prob.phi)? {
        return Err(Error::Internal("capped solve returned a non-solution".into()));
    }
    Ok(CapOutcome::Solved(DivisionSolution {
        q,
        cap_used: cap,
        bound_claimed: None,
        method: SolveMethod::CappedSolve,
        identity_verified: true,
        minimal_cap: None,
    }))
}

/// Solves at the cap given by `method`; `fuhrmann` routes to
/// [`fuhrmann_reduce`].
pub fn solve_with_bound(prob: &DivisionProblem, method: BoundMethod) -> Result<CapOutcome> {
    if method == BoundMethod::Fuhrmann {
        return fuhrmann_reduce(prob);
    }
    let bound = degree_bound(&prob.query(method))?;
    Ok(match solve_capped(prob, bound)? {
        CapOutcome::Solved(mut s) => {
            s.bound_claimed = Some(bound);
            CapOutcome::Solved(s)
        }
        other => other,
    })
}

/// Least feasible cap in `0..=upper`, by binary search; `None` when the
/// problem is infeasible at `upper`.
pub fn minimal_cap(prob: &DivisionProblem, upper: i64) -> Result<Option<i64>> {
    if solve_capped(prob, upper)?.solution().is_none() {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0i64, upper);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if solve_capped(prob, mid)?.solution().is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(Some(lo))
}

/// Reduction to a scalar problem over the maximal minors
/// `p' = p_1 ∧ ⋯ ∧ p_r`: solve `p' q'_j = φ_j`, then
/// `q_j = ± ι(p_r) ⋯ ι̂(p_j) ⋯ ι(p_1) q'_j`, so `p_i q_j = δ_{ij} φ_j`.
pub fn fuhrmann_reduce(prob: &DivisionProblem) -> Result<CapOutcome> {
    prob.validate()?;
    let (r, m, n) = (prob.p.nrows(), prob.p.ncols(), prob.n);
    if r < 2 {
        return Err(Error::Applicability("the Fuhrmann reduction needs r ≥ 2".into()));
    }
    let bound = degree_bound(&prob.query(BoundMethod::Fuhrmann))?;
    let all_rows: Vec<usize> = (0..r).collect();
    let subsets = LambdaIndex::all(m, r);
    let d = prob.p.col_degrees();
    let mut minors = PolyMatrix::zeros(1, subsets.len(), n);
    let mut minor_degs = Vec::with_capacity(subsets.len());
    for (c, idx) in subsets.iter().enumerate() {
        let v = contract_rows(&prob.p, &all_rows, idx);
        if let Some(x) = v.get(&LambdaIndex::empty()) {
            minors.set(0, c, x.clone());
        }
        minor_degs.push(idx.as_slice().iter().map(|&j| d[j]).sum::<i64>());
    }

    let sub: Vec<Option<Vec<Poly>>> = prob
        .phi
        .par_iter()
        .map(|f| solve_system(&minors, &minor_degs, std::slice::from_ref(f), bound))
        .collect();
    let mut q = vec![Poly::zero(n); m];
    for (j, qj) in sub.into_iter().enumerate() {
        let Some(qj) = qj else {
            return Ok(CapOutcome::NoSolutionAtCap { cap: bound });
        };
        let others: Vec<usize> = (0..r).filter(|&i| i != j).collect();
        let negate = (r - 1 - j) % 2 == 1;
        for (c, idx) in subsets.iter().enumerate() {
            if qj[c].is_zero() {
                continue;
            }
            for (rest, coeff) in contract_rows(&prob.p, &others, idx) {
                let k = rest.as_slice()[0];
                let t = &coeff * &qj[c];
                q[k] = if negate { &q[k] - &t } else { &q[k] + &t };
            }
        }
    }
    if !verify(&prob.p, &q, &prob.phi)? {
        return Err(Error::Internal("Fuhrmann recombination failed".into()));
    }
    Ok(CapOutcome::Solved(DivisionSolution {
        q,
        cap_used: bound,
        bound_claimed: Some(bound),
        method: SolveMethod::Fuhrmann,
        identity_verified: true,
        minimal_cap: None,
    }))
}

/// `m × r` matrix `Q` with `P Q = I_r`, solved column by column at the
/// `Σ_1^{n+r} d_j` cap.
pub fn macaulay_certificate(p: &PolyMatrix) -> Result<PolyMatrix> {
    let (r, m, n) = (p.nrows(), p.ncols(), p.nvars());
    if !generic_surjectivity_check(p, DEFAULT_SURJECTIVITY_TRIALS, DEFAULT_SURJECTIVITY_SEED) {
        return Err(Error::GenericSurjectivity {
            trials: DEFAULT_SURJECTIVITY_TRIALS,
            seed: DEFAULT_SURJECTIVITY_SEED,
        });
    }
    let probs: Vec<DivisionProblem> = (0..r)
        .map(|i| {
            let phi = (0..r)
                .map(|k| if k == i { Poly::one(n) } else { Poly::zero(n) })
                .collect();
            DivisionProblem::new(p.clone(), phi, 0)
        })
        .collect::<Result<_>>()?;
    let cap = degree_bound(&probs[0].query(BoundMethod::Mountie))?;
    let cols = probs
        .par_iter()
        .map(|prob| solve_capped(prob, cap))
        .collect::<Result<Vec<_>>>()?;
    let mut out = PolyMatrix::zeros(m, r, n);
    for (i, c) in cols.into_iter().enumerate() {
        let Some(s) = c.solution() else {
            return Err(Error::Failure(format!(
                "column {i} of I_r is not reached at cap {cap}"
            )));
        };
        for (k, x) in s.q.into_iter().enumerate() {
            out.set(k, i, x);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub point: Vec<[f64; 2]>,
    /// `‖φ‖`, absent when `det(pp*)` vanishes at the point.
    pub norm: Option<f64>,
    /// `det(pp*)^{min(n, m − r + 1)}`.
    pub det_power: f64,
    pub degenerate: bool,
}

const DEGENERATE_DET: f64 = 1e-14;

/// Evaluates `‖φ‖² = det(pp*) |p*(pp*)^{-1} φ|²` and `det(pp*)^{min(n, m−r+1)}`
/// at `ζ = (1, z')/|(1, z')|`, with `p` and `φ` homogenized.
pub fn norm_diagnostic(prob: &DivisionProblem, samples: &[Vec<Complex64>]) -> Result<Vec<NormSample>> {
    prob.validate()?;
    let (r, m, n) = (prob.p.nrows(), prob.p.ncols(), prob.n);
    let ph = prob.p.homogenize_columns()?;
    let phi_h: Vec<Poly> = prob
        .phi
        .iter()
        .map(|f| f.homogenize(prob.rho))
        .collect::<Result<_>>()?;
    let power = n.min(m - r + 1) as i32;
    samples
        .iter()
        .map(|z| {
            if z.len() != n {
                return Err(Error::InvalidInput(format!("sample has {} coordinates, expected {n}", z.len())));
            }
            let norm2: f64 = 1.0 + z.iter().map(|c| c.norm_sqr()).sum::<f64>();
            let s = norm2.sqrt();
            let zeta: Vec<Complex64> = std::iter::once(Complex64::new(1.0 / s, 0.0))
                .chain(z.iter().map(|c| c / s))
                .collect();
            let pm = DMatrix::from_fn(r, m, |i, j| ph.get(i, j).eval(&zeta));
            let f = DVector::from_iterator(r, phi_h.iter().map(|x| x.eval(&zeta)));
            let ppstar = &pm * pm.adjoint();
            let det = ppstar.determinant().re;
            let point = z.iter().map(|c| [c.re, c.im]).collect();
            if det.abs() < DEGENERATE_DET {
                return Ok(NormSample { point, norm: None, det_power: 0.0, degenerate: true });
            }
            let inv = ppstar
                .try_inverse()
                .ok_or_else(|| Error::Internal("pp* not invertible".into()))?;
            let v = pm.adjoint() * (inv * f);
            let norm = (det * v.norm_squared()).sqrt();
            Ok(NormSample {
                point,
                norm: Some(norm),
                det_power: det.powi(power),
                degenerate: false,
            })
        })
        .collect()
}
