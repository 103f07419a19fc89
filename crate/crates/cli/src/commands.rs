//! Library entry points behind each subcommand.

use anyhow::{bail, Context, Result};
use hefdiv_core::complexes::{
    affine_slice, build_buchsbaum_rim, build_eagon_northcott, build_koszul, BuildOptions, GradedComplex,
};
use hefdiv_core::division::{
    degree_bound, macaulay_certificate, minimal_cap, solve_with_bound, BoundMethod, BoundQuery, DivisionProblem,
    DivisionSolution,
};
use hefdiv_core::hefer::{build_hefer_tower, homogenize_tower, HeferTower};
use hefdiv_core::quadrature::{
    division_formula_numeric, fubini_study_mass, reproducing_check, sphere_moment, DivisionNumeric, QuadReport,
    QuadratureSpec,
};
use hefdiv_core::{Poly, PolyMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ComplexChoice {
    Koszul,
    BuchsbaumRim,
    EagonNorthcott,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FlavorChoice {
    Affine,
    Projective,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum QuadKind {
    FsMass,
    Reproduce,
    Moments,
    Divide,
}

pub fn bound(q: &BoundQuery) -> Result<i64> {
    Ok(degree_bound(q)?)
}

/// Declared column degrees, filled from the entries when absent.
pub fn with_degrees(p: PolyMatrix) -> Result<PolyMatrix> {
    if !p.col_degrees().is_empty() {
        p.check_column_caps()?;
        return Ok(p);
    }
    let degs = (0..p.ncols())
        .map(|j| (0..p.nrows()).map(|i| p.get(i, j).degree_i64().max(0)).max().unwrap_or(0))
        .collect();
    let p = p.with_col_degrees(degs)?;
    p.check_column_caps()?;
    Ok(p)
}

/// Reads a matrix given either bare or as the `P` of a problem.
pub fn parse_matrix(v: serde_json::Value) -> Result<PolyMatrix> {
    let v = match v {
        serde_json::Value::Object(mut o) if o.contains_key("P") => o.remove("P").expect("checked"),
        other => other,
    };
    with_degrees(serde_json::from_value(v).context("not a polynomial matrix")?)
}

pub fn parse_problem(v: serde_json::Value) -> Result<DivisionProblem> {
    let raw: DivisionProblem = serde_json::from_value(v).context("not a division problem")?;
    let n = raw.n;
    let prob = DivisionProblem::new(with_degrees(raw.p)?, raw.phi, raw.rho)?;
    if prob.n != n {
        bail!("problem declares n = {n} but P has {} variables", prob.n);
    }
    Ok(prob)
}

pub fn complex(p: &PolyMatrix, kind: ComplexChoice, opts: &BuildOptions) -> Result<GradedComplex> {
    Ok(match kind {
        ComplexChoice::Koszul => build_koszul(p, opts)?,
        ComplexChoice::BuchsbaumRim => build_buchsbaum_rim(p, opts)?,
        ComplexChoice::EagonNorthcott => build_eagon_northcott(p, opts)?,
    })
}

pub fn hefer(p: &PolyMatrix, kind: ComplexChoice, flavor: FlavorChoice, opts: &BuildOptions) -> Result<HeferTower> {
    if kind == ComplexChoice::EagonNorthcott {
        bail!(hefdiv_core::Error::InvalidInput(
            "Hefer towers are built for koszul and buchsbaum-rim complexes".into()
        ));
    }
    let c = complex(p, kind, opts)?;
    let affine = build_hefer_tower(&affine_slice(&c)?)?;
    Ok(match flavor {
        FlavorChoice::Affine => affine,
        FlavorChoice::Projective => homogenize_tower(&affine, &c)?,
    })
}

/// Solves at the method's bound; with `minimize`, also reports the least
/// feasible cap below it.
pub fn solve(prob: &DivisionProblem, method: BoundMethod, minimize: bool) -> Result<DivisionSolution> {
    let mut sol = solve_with_bound(prob, method)?.into_result()?;
    if minimize && method != BoundMethod::Fuhrmann {
        sol.minimal_cap = minimal_cap(prob, sol.cap_used)?;
    }
    Ok(sol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "Q")]
    pub q: PolyMatrix,
    pub cap: i64,
    pub identity_verified: bool,
}

pub fn certify(p: &PolyMatrix) -> Result<Certificate> {
    let q = macaulay_certificate(p)?;
    let prob = DivisionProblem::new(p.clone(), vec![Poly::one(p.nvars()); p.nrows()], 0)?;
    let cap = degree_bound(&prob.query(BoundMethod::Mountie))?;
    let prod = p.checked_mul(&q)?;
    let verified = (0..p.nrows()).all(|i| {
        (0..p.nrows()).all(|k| {
            let want = if i == k { Poly::one(p.nvars()) } else { Poly::zero(p.nvars()) };
            *prod.get(i, k) == want
        })
    });
    Ok(Certificate { q, cap, identity_verified: verified })
}

/// Input of `quadcheck`; which fields are needed depends on the kind.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadcheckSpec {
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub max_resolution: Option<usize>,
    /// fs-mass
    #[serde(default)]
    pub n: Option<usize>,
    /// reproduce: homogeneous φ in `n + 1` variables
    #[serde(default)]
    pub phi: Option<Poly>,
    /// reproduce and divide: affine points as `[[re, im], …]`
    #[serde(default)]
    pub points: Option<Vec<Vec<[f64; 2]>>>,
    /// moments
    #[serde(default)]
    pub alpha: Option<Vec<u32>>,
    #[serde(default)]
    pub beta: Option<Vec<u32>>,
    #[serde(default)]
    pub radius: Option<f64>,
    /// divide
    #[serde(default)]
    pub problem: Option<DivisionProblem>,
}

impl QuadcheckSpec {
    pub fn quadrature(&self) -> Result<QuadratureSpec> {
        let d = QuadratureSpec::default();
        let spec = QuadratureSpec {
            resolution: self.resolution.unwrap_or(d.resolution),
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            max_resolution: self.max_resolution.unwrap_or(d.max_resolution),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn points(&self) -> Result<Vec<Vec<Complex64>>> {
        let pts = self.points.as_ref().context("spec needs \"points\"")?;
        Ok(pts
            .iter()
            .map(|p| p.iter().map(|c| Complex64::new(c[0], c[1])).collect())
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuadItem {
    Integral(QuadReport),
    Division(DivisionNumeric),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadcheckOutput {
    pub kind: String,
    pub spec: QuadratureSpec,
    pub reports: Vec<QuadItem>,
    pub passed: bool,
}

pub fn quadcheck(kind: QuadKind, s: &QuadcheckSpec) -> Result<QuadcheckOutput> {
    let spec = s.quadrature()?;
    let (name, reports) = match kind {
        QuadKind::FsMass => {
            let n = s.n.context("spec needs \"n\"")?;
            ("fs-mass", vec![QuadItem::Integral(fubini_study_mass(n, &spec)?)])
        }
        QuadKind::Reproduce => {
            let phi = s.phi.as_ref().context("spec needs \"phi\"")?;
            let reports = s
                .points()?
                .iter()
                .map(|z| reproducing_check(phi, z, &spec).map(QuadItem::Integral))
                .collect::<hefdiv_core::Result<_>>()?;
            ("reproduce", reports)
        }
        QuadKind::Moments => {
            let alpha = s.alpha.as_ref().context("spec needs \"alpha\"")?;
            let beta = s.beta.as_ref().context("spec needs \"beta\"")?;
            let radius = s.radius.unwrap_or(1.0);
            ("moments", vec![QuadItem::Integral(sphere_moment(alpha, beta, radius, &spec)?)])
        }
        QuadKind::Divide => {
            let raw = s.problem.clone().context("spec needs \"problem\"")?;
            let prob = parse_problem(serde_json::to_value(raw)?)?;
            let opts = BuildOptions::default();
            let tower = hefer(&prob.p, ComplexChoice::Koszul, FlavorChoice::Projective, &opts)?;
            let reports = s
                .points()?
                .iter()
                .map(|z| {
                    let z = *z.first().context("empty point")?;
                    Ok(QuadItem::Division(division_formula_numeric(&prob, &tower, z, &spec)?))
                })
                .collect::<Result<_>>()?;
            ("divide", reports)
        }
    };
    let passed = reports.iter().all(|r| match r {
        QuadItem::Integral(q) => q.passed,
        QuadItem::Division(d) => d.residual <= spec.tolerance && d.error_estimate <= spec.tolerance,
    });
    Ok(QuadcheckOutput {
        kind: name.to_string(),
        spec,
        reports,
        passed,
    })
}
