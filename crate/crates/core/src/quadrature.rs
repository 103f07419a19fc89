//! Numerical checks of the projective integral formulas on P¹ and P².
//!
//! Everything is integrated in the chart `ζ = (1, w)`. The radius `t = |w|`
//! is compactified by `u = t / (1 + t)` and integrated with Gauss-Legendre
//! nodes; angles use the trapezoid rule.
//!
//! Orientation: with `dw ∧ dw̄ = −2i dV`, the form
//! `α₁ = −∂̄(ζ̄·dζ / 2πi|ζ|²)` has total mass `(−1)^n`. Reported values are
//! multiplied by `(−1)^n` so that `∫ α₁^n = 1`; the unoriented value is
//! reported alongside.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexes::binomial;
use crate::division::DivisionProblem;
use crate::error::{Error, Result};
use crate::hefer::{HeferTower, TowerFlavor};
use crate::multilinear::LambdaIndex;
use crate::poly::Poly;

pub const MIN_RESOLUTION: usize = 16;
/// Resolution ceiling for four-dimensional grids.
const MAX_RESOLUTION_P2: usize = 128;
/// Absolute floor for the weighted `|p|²` on the grid.
const RANK_DROP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Starting points per axis.
    pub resolution: usize,
    pub tolerance: f64,
    #[serde(default = "default_max_resolution")]
    pub max_resolution: usize,
}

fn default_max_resolution() -> usize {
    1024
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            resolution: 32,
            tolerance: 1e-4,
            max_resolution: default_max_resolution(),
        }
    }
}

impl QuadratureSpec {
    pub fn new(resolution: usize, tolerance: f64) -> Self {
        QuadratureSpec {
            resolution,
            tolerance,
            max_resolution: default_max_resolution(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < MIN_RESOLUTION {
            return Err(Error::InvalidInput(format!(
                "resolution must be at least {MIN_RESOLUTION} points per axis"
            )));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        if self.max_resolution < self.resolution {
            return Err(Error::InvalidInput("max_resolution is below resolution".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadReport {
    /// Oriented value as `[re, im]`.
    pub value: [f64; 2],
    /// Value under the literal orientation, `(−1)^n · value`.
    pub raw_value: [f64; 2],
    pub error_estimate: f64,
    pub resolution: usize,
    pub tolerance: f64,
    /// Exact value the integral should reproduce, when known.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<[f64; 2]>,
    pub passed: bool,
}

impl QuadReport {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value[0], self.value[1])
    }

    fn build(value: Complex64, sign: f64, err: f64, res: usize, tol: f64, reference: Option<Complex64>) -> Self {
        let passed = err <= tol && reference.is_none_or(|r| (value - r).norm() <= tol);
        QuadReport {
            value: [value.re, value.im],
            raw_value: [sign * value.re, sign * value.im],
            error_estimate: err,
            resolution: res,
            tolerance: tol,
            reference: reference.map(|r| [r.re, r.im]),
            passed,
        }
    }
}

fn orientation(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Gauss-Legendre nodes and weights moved to `[a, b]`.
fn gauss(deg: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(deg).expect("degree ≥ 2");
    let (h, c) = ((b - a) / 2.0, (a + b) / 2.0);
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (c + h * x, h * w))
        .collect()
}

fn angles(count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / count as f64))
        .collect()
}

fn ordered_sum(v: Vec<Complex64>) -> Complex64 {
    v.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}

/// `∫_{ℂ^n} f dV` on the compactified polar grid with `res` points per axis.
pub fn integrate_chart<F>(n: usize, res: usize, f: F) -> Complex64
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let radial = gauss(res, 0.0, 1.0);
    let phases = angles(res);
    let dtheta = 2.0 * PI / res as f64;
    match n {
        1 => ordered_sum(
            radial
                .par_iter()
                .map(|&(u, wu)| {
                    let t = u / (1.0 - u);
                    let jac = t / ((1.0 - u) * (1.0 - u));
                    let s = ordered_sum(phases.iter().map(|e| f(&[e * t])).collect());
                    s * (wu * jac * dtheta)
                })
                .collect(),
        ),
        2 => {
            let polar = gauss(res, 0.0, PI / 2.0);
            ordered_sum(
                radial
                    .par_iter()
                    .map(|&(u, wu)| {
                        let t = u / (1.0 - u);
                        let jac = t * t * t / ((1.0 - u) * (1.0 - u));
                        let mut acc = Complex64::new(0.0, 0.0);
                        for &(psi, wp) in &polar {
                            let (c, s) = (psi.cos(), psi.sin());
                            let mut inner = Complex64::new(0.0, 0.0);
                            for e1 in &phases {
                                for e2 in &phases {
                                    inner += f(&[e1 * (t * c), e2 * (t * s)]);
                                }
                            }
                            acc += inner * (wp * c * s);
                        }
                        acc * (wu * jac * dtheta * dtheta)
                    })
                    .collect(),
            )
        }
        _ => panic!("chart integration supports n = 1, 2"),
    }
}

/// Doubles the resolution until two successive estimates agree within the
/// tolerance. Returns `(value, difference, resolution)`.
fn adaptive(
    n: usize,
    spec: &QuadratureSpec,
    integral: impl Fn(usize) -> Complex64,
) -> Result<(Complex64, f64, usize)> {
    spec.validate()?;
    let ceiling = if n >= 2 {
        spec.max_resolution.min(MAX_RESOLUTION_P2)
    } else {
        spec.max_resolution
    };
    let mut res = spec.resolution;
    let mut prev = integral(res);
    loop {
        let next = res * 2;
        if next > ceiling {
            return Err(Error::ToleranceNotReached {
                tolerance: spec.tolerance,
                estimate: prev.norm(),
                resolution: res,
            });
        }
        let cur = integral(next);
        let err = (cur - prev).norm();
        if err <= spec.tolerance {
            return Ok((cur, err, next));
        }
        prev = cur;
        res = next;
    }
}

/// `α = α₀ + α₁` for a fixed `z = (1, z')`, read in the chart.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaForm {
    pub z: Vec<Complex64>,
}

impl AlphaForm {
    pub fn new(z: Vec<Complex64>) -> Self {
        AlphaForm { z }
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// `α₀ = (1 + z'·w̄) / (1 + |w|²)`.
    pub fn alpha0(&self, w: &[Complex64]) -> Complex64 {
        let omega = 1.0 + w.iter().map(|x| x.norm_sqr()).sum::<f64>();
        let dot: Complex64 = self.z.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
        (Complex64::new(1.0, 0.0) + dot) / omega
    }

    /// `g_{jk}`, where `α₁ = (2πi)^{-1} Σ g_{jk} dw_j ∧ dw̄_k`.
    pub fn alpha1_metric(w: &[Complex64]) -> DMatrix<Complex64> {
        let n = w.len();
        let omega = 1.0 + w.iter().map(|x| x.norm_sqr()).sum::<f64>();
        DMatrix::from_fn(n, n, |j, k| {
            let delta = if j == k { omega } else { 0.0 };
            (Complex64::new(delta, 0.0) - w[j].conj() * w[k]) / (omega * omega)
        })
    }

    /// Density of `α₁^n` against `dV` under the literal orientation:
    /// `n! det(g) (−1/π)^n`.
    pub fn top_density(w: &[Complex64]) -> f64 {
        let n = w.len();
        let det = Self::alpha1_metric(w).determinant().re;
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        fact * det * (-1.0 / PI).powi(n as i32)
    }
}

/// `∫_{Pⁿ} α₁ⁿ`, expected to be 1.
pub fn fubini_study_mass(n: usize, spec: &QuadratureSpec) -> Result<QuadReport> {
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidInput(format!("n must be 1 or 2, got {n}")));
    }
    let sign = orientation(n);
    let (v, err, res) = adaptive(n, spec, |res| {
        integrate_chart(n, res, |w| Complex64::new(sign * AlphaForm::top_density(w), 0.0))
    })?;
    Ok(QuadReport::build(v, sign, err, res, spec.tolerance, Some(Complex64::new(1.0, 0.0))))
}

/// `∫ (g ∧ α^{n+ρ})_{n,n}` with the weight `g = φ(ζ)`, which is
/// `C(n+ρ, n) φ α₀^ρ α₁^n`; the reference value is `φ(1, z')`.
pub fn reproducing_check(phi: &Poly, z: &[Complex64], spec: &QuadratureSpec) -> Result<QuadReport> {
    let n = phi
        .nvars()
        .checked_sub(1)
        .ok_or_else(|| Error::InvalidInput("φ needs homogeneous coordinates".into()))?;
    if !(1..=2).contains(&n) || z.len() != n {
        return Err(Error::InvalidInput(format!(
            "need n ∈ {{1, 2}} and a point with n coordinates, got n = {n}, {} coordinates",
            z.len()
        )));
    }
    let rho = phi.degree().unwrap_or(0);
    if !phi.is_zero() && !phi.is_homogeneous(rho) {
        return Err(Error::InvalidInput("φ must be homogeneous".into()));
    }
    let alpha = AlphaForm::new(z.to_vec());
    let c = binomial(n + rho as usize, n) as f64;
    let sign = orientation(n);
    let at = |w: &[Complex64]| -> Vec<Complex64> {
        std::iter::once(Complex64::new(1.0, 0.0)).chain(w.iter().copied()).collect()
    };
    let (v, err, res) = adaptive(n, spec, |res| {
        integrate_chart(n, res, |w| {
            phi.eval(&at(w)) * alpha.alpha0(w).powu(rho) * (c * sign * AlphaForm::top_density(w))
        })
    })?;
    let reference = phi.eval(&at(z));
    Ok(QuadReport::build(v, sign, err, res, spec.tolerance, Some(reference)))
}

/// `I_{α,β,R} = ∫_{∂D_R} w^α w̄^β ∂|w|² ∧ (∂∂̄|w|²)^{n−1}`.
///
/// Parametrized by `w = R e^{iθ}` for `n = 1` and by
/// `w = R (cos ψ e^{iθ₁}, sin ψ e^{iθ₂})` for `n = 2`, in that order.
pub fn sphere_moment(
    alpha: &[u32],
    beta: &[u32],
    radius: f64,
    spec: &QuadratureSpec,
) -> Result<QuadReport> {
    let n = alpha.len();
    if beta.len() != n || !(1..=2).contains(&n) {
        return Err(Error::InvalidInput("multi-indices must both have length 1 or 2".into()));
    }
    let mono = |w: &[Complex64]| -> Complex64 {
        w.iter()
            .zip(alpha.iter().zip(beta))
            .map(|(x, (&a, &b))| x.powu(a) * x.conj().powu(b))
            .product()
    };
    let i = Complex64::new(0.0, 1.0);
    let integral = |res: usize| -> Complex64 {
        let phases = angles(res);
        let dtheta = 2.0 * PI / res as f64;
        match n {
            1 => ordered_sum(
                phases
                    .iter()
                    .map(|e| {
                        let w = e * radius;
                        // w̄ dw with dw = i w dθ
                        mono(&[w]) * w.conj() * i * w * dtheta
                    })
                    .collect(),
            ),
            _ => {
                let polar = gauss(res, 0.0, PI / 2.0);
                ordered_sum(
                    polar
                        .par_iter()
                        .map(|&(psi, wp)| {
                            let (c, s) = (psi.cos(), psi.sin());
                            let mut acc = Complex64::new(0.0, 0.0);
                            for e1 in &phases {
                                for e2 in &phases {
                                    let w1 = e1 * (radius * c);
                                    let w2 = e2 * (radius * s);
                                    // rows: d/dψ, d/dθ₁, d/dθ₂
                                    let dw1 = [e1 * (-radius * s), i * w1, Complex64::new(0.0, 0.0)];
                                    let dw2 = [e2 * (radius * c), Complex64::new(0.0, 0.0), i * w2];
                                    let conj = |v: &[Complex64; 3]| v.map(|x| x.conj());
                                    let form = w1.conj() * det3(&dw1, &dw2, &conj(&dw2))
                                        + w2.conj() * det3(&dw2, &dw1, &conj(&dw1));
                                    acc += mono(&[w1, w2]) * form;
                                }
                            }
                            acc * (wp * dtheta * dtheta)
                        })
                        .collect(),
                )
            }
        }
    };
    let (v, err, res) = adaptive(1, spec, integral)?;
    Ok(QuadReport::build(v, 1.0, err, res, spec.tolerance, None))
}

fn det3(a: &[Complex64; 3], b: &[Complex64; 3], c: &[Complex64; 3]) -> Complex64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Right inverse `σ = p̄ / |p|²` of a single row, in the metric where
/// `|p_j|² = |P_j(w)|² (1 + |w|²)^{−d_j}`.
#[derive(Clone, Debug)]
pub struct MinimalInverse {
    entries: Vec<Poly>,
    derivs: Vec<Vec<Poly>>,
    degrees: Vec<i64>,
}

impl MinimalInverse {
    pub fn new(row: &[Poly], degrees: &[i64]) -> Self {
        let n = row.first().map_or(0, Poly::nvars);
        MinimalInverse {
            entries: row.to_vec(),
            derivs: row.iter().map(|p| (0..n).map(|k| p.derivative(k)).collect()).collect(),
            degrees: degrees.to_vec(),
        }
    }

    /// Weighted `|p(w)|²`.
    pub fn weighted_norm(&self, w: &[Complex64]) -> f64 {
        let omega = 1.0 + w.iter().map(|x| x.norm_sqr()).sum::<f64>();
        self.entries
            .iter()
            .zip(&self.degrees)
            .map(|(p, &d)| p.eval(w).norm_sqr() * omega.powi(-d as i32))
            .sum()
    }

    pub fn sigma(&self, w: &[Complex64]) -> Vec<Complex64> {
        let omega = 1.0 + w.iter().map(|x| x.norm_sqr()).sum::<f64>();
        let s = self.weighted_norm(w);
        self.entries
            .iter()
            .zip(&self.degrees)
            .map(|(p, &d)| p.eval(w).conj() * omega.powi(-d as i32) / s)
            .collect()
    }

    /// `∂σ_j/∂w̄_k`, by the quotient rule.
    pub fn dbar_sigma(&self, w: &[Complex64]) -> Vec<Vec<Complex64>> {
        let n = w.len();
        let omega = 1.0 + w.iter().map(|x| x.norm_sqr()).sum::<f64>();
        let vals: Vec<Complex64> = self.entries.iter().map(|p| p.eval(w)).collect();
        let dvals: Vec<Vec<Complex64>> = self
            .derivs
            .iter()
            .map(|ds| ds.iter().map(|d| d.eval(w)).collect())
            .collect();
        let a: Vec<Complex64> = vals
            .iter()
            .zip(&self.degrees)
            .map(|(v, &d)| v.conj() * omega.powi(-d as i32))
            .collect();
        let s: f64 = vals.iter().zip(&a).map(|(v, x)| (v * x).re).sum();
        // ∂/∂w̄_k of conj(p_j) ω^{−d_j}
        let da = |j: usize, k: usize| -> Complex64 {
            let d = self.degrees[j] as i32;
            dvals[j][k].conj() * omega.powi(-d) - vals[j].conj() * (d as f64) * omega.powi(-d - 1) * w[k]
        };
        (0..self.entries.len())
            .map(|j| {
                (0..n)
                    .map(|k| {
                        let ds: Complex64 = (0..self.entries.len()).map(|l| vals[l] * da(l, k)).sum();
                        (da(j, k) * s - a[j] * ds) / (s * s)
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisionNumeric {
    pub z: [f64; 2],
    pub q: Vec<[f64; 2]>,
    /// `|Σ P_i(z') Q_i(z') − Φ(z')|`.
    pub residual: f64,
    pub error_estimate: f64,
    pub resolution: usize,
    pub min_weighted_norm: f64,
}

/// `Q_i(z') = ∫ (h¹ U φ)_i ∧ α^{1+ρ}` for a single row `P` on P¹ with no
/// common zero, where `U₁ = σ`, `U₂ = σ ∧ ∂̄σ` and `h₂¹` comes from the
/// projective Koszul tower.
pub fn division_formula_numeric(
    prob: &DivisionProblem,
    tower: &HeferTower,
    z: Complex64,
    spec: &QuadratureSpec,
) -> Result<DivisionNumeric> {
    prob.validate()?;
    if prob.n != 1 || prob.p.nrows() != 1 {
        return Err(Error::InvalidInput("the numeric division formula needs n = 1 and r = 1".into()));
    }
    if tower.flavor != TowerFlavor::Projective || tower.n != 1 {
        return Err(Error::InvalidInput("expected a projective tower over P¹".into()));
    }
    let m = prob.p.ncols();
    if tower.complex.levels[1].rank() != m {
        return Err(Error::InvalidInput("tower does not match the problem".into()));
    }
    let rho = prob.rho;
    if rho < 0 {
        return Err(Error::InvalidInput("ρ must be non-negative".into()));
    }
    let inv = MinimalInverse::new(prob.p.row(0), prob.p.col_degrees());

    // rank check on the starting grid; a zero between nodes shows up as a
    // minimum of order (spacing)² relative to the maximum
    let res0 = spec.resolution.max(MIN_RESOLUTION);
    let (mut min_norm, mut max_norm) = (f64::INFINITY, 0.0f64);
    for &(u, _) in &gauss(res0, 0.0, 1.0) {
        let t = u / (1.0 - u);
        for e in angles(res0) {
            let s = inv.weighted_norm(&[e * t]);
            min_norm = min_norm.min(s);
            max_norm = max_norm.max(s);
        }
    }
    if min_norm <= RANK_DROP.max(max_norm / (res0 * res0) as f64) {
        return Err(Error::RankDropOnGrid { min_norm });
    }

    // h₂¹ coefficients of dζ₁, by (i, J)
    let pairs = LambdaIndex::all(m, 2);
    let h21 = if tower.length() >= 2 { Some(tower.get(2, 1)) } else { None };
    let dz1 = LambdaIndex::single(1);
    let h_coeff = |i: usize, col: usize| -> Option<Poly> {
        h21.as_ref()
            .and_then(|h| h.get(i, col))
            .and_then(|f| f.coeff(&dz1).cloned())
    };
    let hs: Vec<Vec<Option<Poly>>> = (0..m)
        .map(|i| (0..pairs.len()).map(|c| h_coeff(i, c)).collect())
        .collect();
    let alpha = AlphaForm::new(vec![z]);
    let phi = &prob.phi[0];
    let i2pi = Complex64::new(0.0, 2.0 * PI);
    // dw ∧ dw̄ = −2i dV, then the orientation sign for n = 1
    let to_dv = Complex64::new(0.0, -2.0) * orientation(1);

    let integrand = |i: usize, w: &[Complex64]| -> Complex64 {
        let omega = 1.0 + w[0].norm_sqr();
        let a0 = alpha.alpha0(w);
        let f = phi.eval(w);
        let sigma = inv.sigma(w);
        let dsig = inv.dbar_sigma(w);
        let mut val = sigma[i] * f * (rho as f64 + 1.0) * a0.powi(rho as i32) / (i2pi * omega * omega);
        let zeta = [Complex64::new(1.0, 0.0), w[0], z];
        for (c, pair) in pairs.iter().enumerate() {
            let Some(h) = &hs[i][c] else { continue };
            let (j, k) = (pair.as_slice()[0], pair.as_slice()[1]);
            let u2 = sigma[j] * dsig[k][0] - sigma[k] * dsig[j][0];
            val += h.eval(&zeta) * u2 * f * a0.powi(rho as i32 + 1);
        }
        val * to_dv
    };

    let mut q = Vec::with_capacity(m);
    let (mut err_max, mut res_max) = (0.0f64, 0usize);
    for i in 0..m {
        let (v, err, res) = adaptive(1, spec, |res| integrate_chart(1, res, |w| integrand(i, w)))?;
        q.push(v);
        err_max = err_max.max(err);
        res_max = res_max.max(res);
    }
    let zs = [z];
    let lhs: Complex64 = (0..m).map(|i| prob.p.get(0, i).eval(&zs) * q[i]).sum();
    let residual = (lhs - phi.eval(&zs)).norm();
    Ok(DivisionNumeric {
        z: [z.re, z.im],
        q: q.iter().map(|c| [c.re, c.im]).collect(),
        residual,
        error_estimate: err_max,
        resolution: res_max,
        min_weighted_norm: min_norm,
    })
}

/// Least-squares fit of `ys` by a polynomial of the given degree in `xs`.
/// Returns the coefficients (constant first) and the largest residual.
pub fn polynomial_fit(xs: &[Complex64], ys: &[Complex64], degree: usize) -> (Vec<Complex64>, f64) {
    let v = DMatrix::from_fn(xs.len(), degree + 1, |i, j| xs[i].powu(j as u32));
    let b = DMatrix::from_fn(ys.len(), 1, |i, _| ys[i]);
    let svd = v.clone().svd(true, true);
    let c = svd.solve(&b, 1e-12).expect("both factors requested");
    let res = (&v * &c - &b).iter().map(|x| x.norm()).fold(0.0, f64::max);
    (c.iter().copied().collect(), res)
}

/// Smallest degree whose least-squares fit stays within `tol`.
pub fn fitted_degree(xs: &[Complex64], ys: &[Complex64], tol: f64) -> usize {
    let top = xs.len().saturating_sub(1);
    (0..top).find(|&d| polynomial_fit(xs, ys, d).1 <= tol).unwrap_or(top)
}
