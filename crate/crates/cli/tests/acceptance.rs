//! Acceptance suite. Run with `cargo test -p hefdiv-cli --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hefdiv_cli::corpus::{self, Profile};
use hefdiv_cli::manifest::sha256_hex;
use hefdiv_cli::to_json;
use hefdiv_core::complexes::{
    affine_slice, buchsbaum_rim_rank, build_buchsbaum_rim, build_eagon_northcott, build_koszul, eagon_northcott_rank,
    BuildOptions, GradedComplex,
};
use hefdiv_core::division::{
    degree_bound, fuhrmann_reduce, macaulay_certificate, solve_with_bound, BoundMethod, DivisionProblem,
};
use hefdiv_core::hefer::{build_hefer_tower, homogenize_tower, HeferTower};
use hefdiv_core::quadrature::{
    division_formula_numeric, fitted_degree, reproducing_check, sphere_moment, QuadratureSpec,
};
use hefdiv_core::{Poly, PolyMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;

type Check = Result<Vec<String>, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, String> {
    e2s(to_json(v))
}

/// Draws until the matrix passes the builder's surjectivity check.
fn generic_matrix(rng: &mut ChaCha8Rng, n: usize, r: usize, m: usize, max_deg: u32) -> (PolyMatrix, GradedComplex) {
    loop {
        let p = corpus::random_matrix(rng, n, r, m, max_deg);
        let built = if r == 1 {
            build_koszul(&p, &BuildOptions::default())
        } else {
            build_buchsbaum_rim(&p, &BuildOptions::default())
        };
        if let Ok(c) = built {
            return (p, c);
        }
    }
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    rng.set_stream(101);
    let mut out = Vec::new();
    for i in 0..50 {
        let n = rng.gen_range(1..=2);
        let r = rng.gen_range(1..=2);
        let m = rng.gen_range(r + 1..=5);
        let (p, _) = generic_matrix(&mut rng, n, r, m, 2);
        let br = e2s(build_buchsbaum_rim(&p, &BuildOptions::default()))?;
        let en = e2s(build_eagon_northcott(&p, &BuildOptions::default()))?;
        e2s(br.validate()).map_err(|e| format!("instance {i}: BR {e}"))?;
        e2s(en.validate()).map_err(|e| format!("instance {i}: EN {e}"))?;
        for (k, &rk) in br.ranks().iter().enumerate() {
            ensure(rk as u64 == buchsbaum_rim_rank(m, r, k), || {
                format!("instance {i}: BR level {k} has rank {rk}, formula {}", buchsbaum_rim_rank(m, r, k))
            })?;
        }
        for (k, &rk) in en.ranks().iter().enumerate() {
            ensure(rk as u64 == eagon_northcott_rank(m, r, k), || {
                format!("instance {i}: EN level {k} has rank {rk}")
            })?;
        }
        out.push(json(&br)?);
        out.push(json(&en)?);
    }
    Ok(out)
}

fn check_tower(t: &HeferTower, what: &str) -> Result<(), String> {
    e2s(t.check_relation()).map_err(|e| format!("{what}: {e}"))?;
    e2s(t.check_degrees()).map_err(|e| format!("{what}: {e}"))
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    rng.set_stream(102);
    let mut out = Vec::new();
    for i in 0..30 {
        let r = if i < 20 { 1 } else { 2 };
        let n = rng.gen_range(1..=2);
        let m = rng.gen_range(r + 1..=r + 2);
        let (_, c) = generic_matrix(&mut rng, n, r, m, 2);
        let affine = e2s(build_hefer_tower(&e2s(affine_slice(&c))?))?;
        check_tower(&affine, &format!("instance {i} affine"))?;
        let projective = e2s(homogenize_tower(&affine, &c))?;
        check_tower(&projective, &format!("instance {i} projective"))?;
        out.push(json(&affine)?);
        out.push(json(&projective)?);
    }
    Ok(out)
}

fn criterion_3() -> Check {
    let mut out = Vec::new();
    for inst in e2s(corpus::generate(SEED, Profile::MacaulayR1, None))? {
        let prob = &inst.problem;
        let sol = e2s(e2s(solve_with_bound(prob, BoundMethod::Macaulay))?.into_result())
            .map_err(|e| format!("{}: {e}", inst.name))?;
        let cert = e2s(macaulay_certificate(&prob.p)).map_err(|e| format!("{}: certificate {e}", inst.name))?;
        let pq = e2s(prob.p.checked_mul(&cert))?;
        ensure(pq.get(0, 0) == &Poly::one(prob.n), || format!("{}: P Q ≠ 1", inst.name))?;
        out.push(json(&sol)?);
        out.push(json(&cert)?);
    }
    for inst in e2s(corpus::generate(SEED, Profile::BrR2, None))? {
        let sol = e2s(e2s(solve_with_bound(&inst.problem, BoundMethod::Eliot))?.into_result())
            .map_err(|e| format!("{}: {e}", inst.name))?;
        out.push(json(&sol)?);
    }
    Ok(out)
}

fn criterion_4() -> Check {
    let mut out = Vec::new();
    for inst in e2s(corpus::generate(SEED, Profile::BrR2, None))? {
        let prob = &inst.problem;
        let sol = e2s(e2s(fuhrmann_reduce(prob))?.into_result()).map_err(|e| format!("{}: {e}", inst.name))?;
        let pq = e2s(prob.p.apply(&sol.q))?;
        ensure(pq == prob.phi, || format!("{}: P Q ≠ Φ", inst.name))?;
        let bound = e2s(degree_bound(&prob.query(BoundMethod::Fuhrmann)))?;
        for j in 0..prob.p.ncols() {
            for i in 0..prob.p.nrows() {
                let d = (prob.p.get(i, j) * &sol.q[j]).degree_i64();
                ensure(d <= bound, || format!("{}: deg P_{i}{j} Q_{j} = {d} > {bound}", inst.name))?;
            }
        }
        out.push(json(&sol)?);
    }
    Ok(out)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Homogeneous `φ` of degree `ρ` in `ζ₀, …, ζ_n` and its value at `(1, z)`.
fn weight_cases() -> Vec<(Poly, Vec<Complex64>, f64)> {
    let probes = [c(0.3, -0.2), c(-1.5, 0.5), c(2.0, 1.0)];
    let (z0, z1) = (Poly::var(2, 0), Poly::var(2, 1));
    let phis = [
        Poly::constant(2, hefdiv_core::poly::rat(3)),
        &z1 - &z0.scale(&hefdiv_core::poly::rat(2)),
        &(&z1 * &z1) + &(&z0 * &z1),
    ];
    let mut cases = Vec::new();
    for phi in phis {
        for z in probes {
            cases.push((phi.clone(), vec![z], 1e-4));
        }
    }
    let one = Poly::constant(3, hefdiv_core::poly::rat(-2));
    for z in [[c(0.1, 0.2), c(-0.4, 0.0)], [c(1.0, -1.0), c(0.5, 0.5)], [c(-2.0, 0.0), c(0.0, 3.0)]] {
        cases.push((one.clone(), z.to_vec(), 1e-3));
    }
    cases
}

fn criterion_5() -> Check {
    let mut worst: f64 = 0.0;
    for (phi, z, tol) in weight_cases() {
        let report = e2s(reproducing_check(&phi, &z, &QuadratureSpec::new(32, tol / 10.0)))?;
        let mut point = vec![c(1.0, 0.0)];
        point.extend_from_slice(&z);
        let want = phi.eval(&point);
        let err = (report.value() - want).norm();
        worst = worst.max(err / tol);
        ensure(err <= tol, || format!("ρ = {:?}, z = {z:?}: |{} − {want}| = {err:.2e}", phi.degree(), report.value()))?;
    }
    Ok(vec![format!("worst error / tolerance {worst:.2e}")])
}

fn multi_indices(n: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for a in 0..=max {
        if n == 1 {
            out.push(vec![a]);
        } else {
            for b in 0..=max - a {
                out.push(vec![a, b]);
            }
        }
    }
    out
}

fn criterion_6() -> Check {
    let spec = QuadratureSpec::new(16, 1e-10);
    for n in 1..=2 {
        let idx = multi_indices(n, 2);
        for a in &idx {
            let diag = e2s(sphere_moment(a, a, 1.0, &spec))?.value();
            let doubled = e2s(sphere_moment(a, a, 2.0, &spec))?.value();
            let total: u32 = a.iter().sum();
            let want = 2f64.powi(2 * (total as i32 + n as i32));
            let ratio = (doubled / diag - want).norm() / want;
            ensure(ratio <= 1e-3, || format!("α = {a:?}: ratio off by {ratio:.2e}"))?;
            for b in &idx {
                if a == b {
                    continue;
                }
                let v = e2s(sphere_moment(a, b, 1.0, &spec))?.value();
                let rel = v.norm() / diag.norm();
                ensure(rel <= 1e-6, || format!("α = {a:?}, β = {b:?}: {rel:.2e} of the diagonal"))?;
            }
        }
    }
    Ok(Vec::new())
}

fn criterion_7() -> Check {
    let z = Poly::var(1, 0);
    let one = Poly::one(1);
    let cases = [
        (vec![z.clone(), &one - &z], one.clone(), 0),
        (vec![z.clone(), &one - &z], &z * &z, 2),
        (vec![&z * &z, &one - &z], &z - &one.scale(&hefdiv_core::poly::rat(3)), 1),
        (vec![&(&z * &z) + &one, &z * &z], one.clone(), 0),
    ];
    let xs: Vec<Complex64> = [0.0, 0.25, 1.0 / 3.0, 0.5, 0.75].iter().map(|&x| c(x, 0.0)).collect();
    let spec = QuadratureSpec::new(32, 1e-8);
    for (k, (row, phi, rho)) in cases.into_iter().enumerate() {
        let prob = e2s(DivisionProblem::new(e2s(PolyMatrix::from_rows(vec![row]))?, vec![phi], rho))?;
        let c_hom = e2s(build_koszul(&prob.p, &BuildOptions::default()))?;
        let tower = e2s(homogenize_tower(&e2s(build_hefer_tower(&e2s(affine_slice(&c_hom))?))?, &c_hom))?;
        let mut qs = vec![Vec::new(); prob.p.ncols()];
        for &x in &xs {
            let out = e2s(division_formula_numeric(&prob, &tower, x, &spec))?;
            ensure(out.residual <= 1e-4, || format!("case {k}, z = {x}: residual {:.2e}", out.residual))?;
            for (i, q) in out.q.iter().enumerate() {
                qs[i].push(c(q[0], q[1]));
            }
        }
        // μ = min(n, m − 1) = 1 for n = 1
        let d = prob.p.col_degrees();
        let bound = rho + d[0] + d[1];
        for (i, ys) in qs.iter().enumerate() {
            let fitted = fitted_degree(&xs, ys, 1e-4) as i64;
            ensure(fitted + d[i] <= bound, || format!("case {k}: deg Q_{i} ≈ {fitted}, bound {}", bound - d[i]))?;
        }
    }
    Ok(Vec::new())
}

fn digest(run: &[Check]) -> Vec<Option<String>> {
    run.iter()
        .map(|r| r.as_ref().ok().map(|outs| sha256_hex(outs.join("\n").as_bytes())))
        .collect()
}

fn main() -> ExitCode {
    // libtest flags such as --nocapture are accepted and ignored
    let names = [
        "complex validity",
        "Hefer tower relations",
        "degree-bound solvability",
        "Fuhrmann reduction",
        "reproducing formula",
        "sphere moments",
        "division formula numerics",
        "determinism",
    ];
    let runs: [fn() -> Check; 7] =
        [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7];
    let mut results: Vec<(Check, Duration)> = Vec::new();
    for f in runs {
        let t = Instant::now();
        results.push((f(), t.elapsed()));
    }
    let t = Instant::now();
    let first: Vec<Check> = results[..4].iter().map(|(r, _)| r.clone()).collect();
    let again: Vec<Check> = [criterion_1, criterion_2, criterion_3, criterion_4].iter().map(|f| f()).collect();
    let det = if digest(&first).iter().any(Option::is_none) {
        Err("criteria 1-4 did not all produce output".to_string())
    } else if digest(&first) != digest(&again) {
        Err(format!("digests differ: {:?} vs {:?}", digest(&first), digest(&again)))
    } else {
        Ok(Vec::new())
    };
    results.push((det, t.elapsed()));

    let mut failed = 0;
    for (i, ((res, time), name)) in results.iter().zip(names).enumerate() {
        match res {
            Ok(_) => println!("criterion {} {name}: PASS ({:.1}s)", i + 1, time.as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({:.1}s): {e}", i + 1, time.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
