//! Sparse multivariate polynomials over ℚ with a tracked power of 2πi.
//!
//! A [`Poly`] stores `Σ c_e x^e · (2πi)^tau`. Coefficients are exact
//! rationals; the transcendental factor only ever shows up as an integer
//! exponent, so products add `tau` and sums demand equal `tau`.
//!
//! Variable convention: in an `n + 1` variable homogeneous context index 0 is
//! the homogenizing variable ζ₀. Affine polynomials in `n` variables use
//! indices `0..n` for z₁..zₙ, which become indices `1..=n` after
//! [`Poly::homogenize`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Formats as `num/den`, the form used by every JSON document.
pub fn rat_to_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("bad rational `{s}`")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(Rat::new(parse_int(n)?, d))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
    tau: i32,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
            tau: 0,
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rat::one())
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable {i} out of range for {nvars} variables");
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, Rat::one())
    }

    pub fn monomial(nvars: usize, exponent: Vec<u32>, c: Rat) -> Self {
        assert_eq!(exponent.len(), nvars);
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exponent, c);
        }
        p
    }

    /// Builds from (exponent, coefficient) pairs, merging duplicates.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rat)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars);
            p.add_term(e, c);
        }
        p
    }

    /// Convenience constructor from small integer coefficients.
    pub fn from_int_terms(nvars: usize, terms: &[(&[u32], i64)]) -> Self {
        Self::from_terms(nvars, terms.iter().map(|(e, c)| (e.to_vec(), rat(*c))))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn tau(&self) -> i32 {
        self.tau
    }

    /// Returns the same coefficients tagged with a new power of 2πi.
    pub fn with_tau(mut self, tau: i32) -> Self {
        self.tau = if self.is_zero() { 0 } else { tau };
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exponent: &[u32]) -> Rat {
        self.terms.get(exponent).cloned().unwrap_or_else(Rat::zero)
    }

    pub(crate) fn add_term(&mut self, e: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
        if self.terms.is_empty() {
            self.tau = 0;
        }
    }

    /// Total degree; `None` stands for the −∞ degree of the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Degree as a signed integer with the zero polynomial mapped to `i64::MIN`.
    pub fn degree_i64(&self) -> i64 {
        self.degree().map_or(i64::MIN, i64::from)
    }

    /// Total degree counted only over the variables in `vars`.
    pub fn degree_in(&self, vars: &[usize]) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| vars.iter().map(|&v| e[v]).sum())
            .max()
    }

    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() == d)
    }

    pub fn is_homogeneous_in(&self, vars: &[usize], d: u32) -> bool {
        self.terms
            .keys()
            .all(|e| vars.iter().map(|&v| e[v]).sum::<u32>() == d)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
            tau: self.tau,
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        self.combine(other, false)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly> {
        self.combine(other, true)
    }

    fn combine(&self, other: &Poly, negate: bool) -> Result<Poly> {
        if self.nvars != other.nvars {
            return Err(Error::NvarsMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        if !self.is_zero() && !other.is_zero() && self.tau != other.tau {
            return Err(Error::TauMismatch {
                left: self.tau,
                right: other.tau,
            });
        }
        let tau = if self.is_zero() { other.tau } else { self.tau };
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), if negate { -c } else { c.clone() });
        }
        out.tau = if out.is_zero() { 0 } else { tau };
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        if self.nvars != other.nvars {
            return Err(Error::NvarsMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out.tau = if out.is_zero() {
            0
        } else {
            self.tau + other.tau
        };
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// ζ₀^ρ · φ(ζ'/ζ₀) in `n + 1` variables, ζ₀ at index 0.
    pub fn homogenize(&self, rho: i64) -> Result<Poly> {
        if let Some(d) = self.degree() {
            if i64::from(d) > rho {
                return Err(Error::DegreeCap { degree: d, cap: rho });
            }
        }
        let mut out = Poly::zero(self.nvars + 1);
        for (e, c) in &self.terms {
            let d: u32 = e.iter().sum();
            let mut h = Vec::with_capacity(self.nvars + 1);
            h.push((rho - i64::from(d)) as u32);
            h.extend_from_slice(e);
            out.add_term(h, c.clone());
        }
        Ok(out.with_tau(self.tau))
    }

    /// Substitutes ζ₀ = 1 and drops variable 0.
    pub fn dehomogenize(&self) -> Poly {
        assert!(self.nvars >= 1, "dehomogenize needs at least one variable");
        let mut out = Poly::zero(self.nvars - 1);
        for (e, c) in &self.terms {
            out.add_term(e[1..].to_vec(), c.clone());
        }
        out.with_tau(self.tau)
    }

    /// Relabels variables: variable `i` of `self` becomes `map[i]` in a
    /// polynomial with `nvars` variables.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Poly {
        assert_eq!(map.len(), self.nvars);
        let mut out = Poly::zero(nvars);
        for (e, c) in &self.terms {
            let mut f = vec![0u32; nvars];
            for (i, &k) in e.iter().enumerate() {
                f[map[i]] += k;
            }
            out.add_term(f, c.clone());
        }
        out.with_tau(self.tau)
    }

    /// Multiplies by the monomial `x^e`.
    pub fn shift(&self, e: &[u32]) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(f, c)| (f.iter().zip(e).map(|(a, b)| a + b).collect(), c.clone()))
                .collect(),
            tau: self.tau,
        }
    }

    pub fn derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut f = e.clone();
                f[var] -= 1;
                out.add_term(f, c * rat(i64::from(e[var])));
            }
        }
        out.with_tau(self.tau)
    }

    /// Divides exactly by `x_var^k`; fails if some term has a smaller power.
    pub fn div_var_power(&self, var: usize, k: u32) -> Option<Poly> {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] < k {
                return None;
            }
            let mut f = e.clone();
            f[var] -= k;
            out.add_term(f, c.clone());
        }
        Some(out.with_tau(self.tau))
    }

    /// Exact rational value, ignoring the (2πi)^tau factor.
    pub fn eval_rat(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }

    /// Numeric value including the (2πi)^tau factor.
    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = Complex64::new(rat_to_f64(c), 0.0);
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= x.powu(k);
                }
            }
            acc += t;
        }
        acc * tau_factor(self.tau)
    }

    /// Largest absolute value among the coefficients.
    pub fn max_abs_coeff(&self) -> Rat {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

/// (2πi)^tau as a complex number.
pub fn tau_factor(tau: i32) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI).powi(tau)
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{i}")?,
                    _ => write!(f, "*x{i}^{k}")?,
                }
            }
        }
        if self.tau != 0 {
            write!(f, " [(2πi)^{}]", self.tau)?;
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.checked_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.checked_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rat::one())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    nvars: usize,
    tau: i32,
    terms: Vec<(Vec<u32>, String)>,
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            nvars: self.nvars,
            tau: self.tau,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), rat_to_string(c)))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PolyRepr::deserialize(d)?;
        let mut p = Poly::zero(repr.nvars);
        for (e, c) in repr.terms {
            if e.len() != repr.nvars {
                return Err(D::Error::custom(format!(
                    "exponent {e:?} does not have {} entries",
                    repr.nvars
                )));
            }
            p.add_term(e, parse_rat(&c).map_err(D::Error::custom)?);
        }
        Ok(p.with_tau(repr.tau))
    }
}

/// Dense grid of polynomials, row-major, with optional per-column degree caps.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMatrix {
    nrows: usize,
    ncols: usize,
    entries: Vec<Poly>,
    col_degrees: Vec<i64>,
}

impl PolyMatrix {
    pub fn zeros(nrows: usize, ncols: usize, nvars: usize) -> Self {
        PolyMatrix {
            nrows,
            ncols,
            entries: vec![Poly::zero(nvars); nrows * ncols],
            col_degrees: Vec::new(),
        }
    }

    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        let entries: Vec<Poly> = rows.into_iter().flatten().collect();
        if let Some(first) = entries.first() {
            if entries.iter().any(|p| p.nvars() != first.nvars()) {
                return Err(Error::InvalidInput("matrix entries disagree on nvars".into()));
            }
        }
        Ok(PolyMatrix {
            nrows,
            ncols,
            entries,
            col_degrees: Vec::new(),
        })
    }

    /// Attaches declared column degree caps and validates them.
    pub fn with_col_degrees(mut self, col_degrees: Vec<i64>) -> Result<Self> {
        if col_degrees.len() != self.ncols {
            return Err(Error::InvalidInput(format!(
                "{} column degrees for {} columns",
                col_degrees.len(),
                self.ncols
            )));
        }
        self.col_degrees = col_degrees;
        self.check_column_caps()?;
        Ok(self)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nvars(&self) -> usize {
        self.entries.first().map_or(0, Poly::nvars)
    }

    pub fn col_degrees(&self) -> &[i64] {
        &self.col_degrees
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.ncols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.entries[i * self.ncols + j] = p;
    }

    pub fn row(&self, i: usize) -> &[Poly] {
        &self.entries[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> PolyMatrix {
        PolyMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            entries: self.entries.iter().map(f).collect(),
            col_degrees: self.col_degrees.clone(),
        }
    }

    pub fn checked_mul(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::InvalidInput(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let nvars = self.nvars().max(other.nvars());
        let mut out = PolyMatrix::zeros(self.nrows, other.ncols, nvars);
        for i in 0..self.nrows {
            for j in 0..other.ncols {
                let mut acc = Poly::zero(nvars);
                for k in 0..self.ncols {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.checked_add(&a.checked_mul(b)?)?;
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Matrix times column vector.
    pub fn apply(&self, v: &[Poly]) -> Result<Vec<Poly>> {
        if v.len() != self.ncols {
            return Err(Error::InvalidInput("vector length mismatch".into()));
        }
        (0..self.nrows)
            .map(|i| {
                let mut acc = Poly::zero(self.nvars());
                for (j, q) in v.iter().enumerate() {
                    acc = acc.checked_add(&self.get(i, j).checked_mul(q)?)?;
                }
                Ok(acc)
            })
            .collect()
    }

    /// Every entry respects its column cap; caps are sorted non-increasing.
    pub fn check_column_caps(&self) -> Result<()> {
        if self.col_degrees.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(format!(
                "column degrees {:?} are not sorted non-increasing",
                self.col_degrees
            )));
        }
        for j in 0..self.ncols {
            let cap = self.col_degrees[j];
            for i in 0..self.nrows {
                if let Some(d) = self.get(i, j).degree() {
                    if i64::from(d) > cap {
                        return Err(Error::DegreeCap { degree: d, cap });
                    }
                }
            }
        }
        Ok(())
    }

    /// Homogenizes column j with degree `col_degrees[j]`.
    pub fn homogenize_columns(&self) -> Result<PolyMatrix> {
        let mut out = PolyMatrix::zeros(self.nrows, self.ncols, self.nvars() + 1);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                out.set(i, j, self.get(i, j).homogenize(self.col_degrees[j])?);
            }
        }
        out.col_degrees = self.col_degrees.clone();
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct PolyMatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Poly>>,
    #[serde(default)]
    col_degrees: Vec<i64>,
}

impl Serialize for PolyMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyMatrixRepr {
            rows: self.nrows,
            cols: self.ncols,
            entries: (0..self.nrows).map(|i| self.row(i).to_vec()).collect(),
            col_degrees: self.col_degrees.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PolyMatrixRepr::deserialize(d)?;
        if repr.entries.len() != repr.rows || repr.entries.iter().any(|r| r.len() != repr.cols) {
            return Err(D::Error::custom("matrix shape does not match rows/cols"));
        }
        let mut m = PolyMatrix::from_rows(repr.entries).map_err(D::Error::custom)?;
        m.nrows = repr.rows;
        m.ncols = repr.cols;
        if !repr.col_degrees.is_empty() {
            m = m.with_col_degrees(repr.col_degrees).map_err(D::Error::custom)?;
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(nvars: usize, i: usize) -> Poly {
        Poly::var(nvars, i)
    }

    #[test]
    fn homogenize_examples() {
        // z₁ + 1 at ρ = 1 → ζ₀ + ζ₁
        let phi = &z(1, 0) + &Poly::one(1);
        let h = phi.homogenize(1).unwrap();
        assert_eq!(h, &z(2, 0) + &z(2, 1));

        // z₁z₂ at ρ = 3 → ζ₀ζ₁ζ₂
        let phi = &z(2, 0) * &z(2, 1);
        let h = phi.homogenize(3).unwrap();
        assert_eq!(h, Poly::from_int_terms(3, &[(&[1, 1, 1], 1)]));

        // 1 − z₁ at ρ = 1 round trips
        let phi = &Poly::one(1) - &z(1, 0);
        let h = phi.homogenize(1).unwrap();
        assert_eq!(h, &z(2, 0) - &z(2, 1));
        assert_eq!(h.dehomogenize(), phi);
    }

    #[test]
    fn homogenize_rejects_low_cap() {
        let phi = z(1, 0).pow(3);
        assert_eq!(
            phi.homogenize(2),
            Err(Error::DegreeCap { degree: 3, cap: 2 })
        );
    }

    #[test]
    fn dehomogenize_examples() {
        let p = &z(2, 0).pow(2) + &(&z(2, 0) * &z(2, 1));
        assert_eq!(p.dehomogenize(), &Poly::one(1) + &z(1, 0));
        let p = &z(3, 1) * &z(3, 2);
        assert_eq!(p.dehomogenize(), &z(2, 0) * &z(2, 1));
    }

    #[test]
    fn homogeneity_checks() {
        let p = &(&z(3, 0) * &z(3, 1)) + &z(3, 2).pow(2);
        assert!(p.is_homogeneous(2));
        let q = &z(3, 0) + &z(3, 1).pow(2);
        for d in 0..5 {
            assert!(!q.is_homogeneous(d));
        }
        assert!(Poly::zero(3).is_homogeneous(7));
    }

    #[test]
    fn eval_examples() {
        let c = |x: f64| Complex64::new(x, 0.0);
        assert!((z(1, 0).pow(2).eval(&[c(3.0)]) - c(9.0)).norm() < 1e-12);
        let p = &z(2, 0) * &z(2, 1);
        assert!((p.eval(&[c(2.0), c(5.0)]) - c(10.0)).norm() < 1e-12);
        let q = p.clone().with_tau(-1);
        let v = q.eval(&[c(2.0), c(5.0)]);
        let expected = c(10.0) / Complex64::new(0.0, 2.0 * PI);
        assert!((v - expected).norm() < 1e-12);
    }

    #[test]
    fn partial_cancellation_keeps_tau() {
        let a = z(2, 0).with_tau(-1);
        let b = (&z(2, 1) - &z(2, 0)).with_tau(-1);
        assert_eq!((&a + &b).tau(), -1);
        assert_eq!((&a - &a).tau(), 0);
    }

    #[test]
    fn tau_rules() {
        let a = z(1, 0).with_tau(1);
        let b = Poly::one(1).with_tau(2);
        assert_eq!(
            a.checked_add(&b),
            Err(Error::TauMismatch { left: 1, right: 2 })
        );
        assert_eq!((&a * &b).tau(), 3);
        // zero is compatible with any tau and has tau 0 itself
        assert_eq!((&a - &a).tau(), 0);
        assert_eq!((&Poly::zero(1) + &a).tau(), 1);
    }

    #[test]
    fn degree_sentinel() {
        assert_eq!(Poly::zero(2).degree(), None);
        assert_eq!(Poly::one(2).degree(), Some(0));
    }

    #[test]
    fn json_encoding() {
        let p = Poly::from_terms(2, vec![(vec![1, 0], rat_frac(3, 4)), (vec![0, 2], rat(-2))])
            .with_tau(-1);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"nvars":2,"tau":-1,"terms":[[[0,2],"-2/1"],[[1,0],"3/4"]]}"#
        );
        let back: Poly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let short: Poly = serde_json::from_str(r#"{"nvars":1,"tau":0,"terms":[[[1],"2"],[[1],"-2"]]}"#).unwrap();
        assert!(short.is_zero());
    }

    #[test]
    fn matrix_caps_validated() {
        let m = PolyMatrix::from_rows(vec![vec![z(1, 0), Poly::one(1)]]).unwrap();
        assert!(m.clone().with_col_degrees(vec![1, 1]).is_ok());
        assert!(m.clone().with_col_degrees(vec![0, 1]).is_err());
        assert!(m.with_col_degrees(vec![1]).is_err());
    }
}
