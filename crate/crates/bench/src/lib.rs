//! Fixed inputs shared by the benchmarks.

use hefdiv_core::division::DivisionProblem;
use hefdiv_core::poly::rat;
use hefdiv_core::{Poly, PolyMatrix};

/// `(z₁² + z₂, z₁z₂ − 1, z₂² + z₁)` in two variables.
pub fn koszul_row() -> PolyMatrix {
    let v = |i| Poly::var(2, i);
    let one = Poly::one(2);
    let row = vec![
        &v(0).pow(2) + &v(1),
        &(&v(0) * &v(1)) - &one,
        &v(1).pow(2) + &v(0),
    ];
    PolyMatrix::from_rows(vec![row])
        .and_then(|m| m.with_col_degrees(vec![2, 2, 2]))
        .expect("well formed")
}

/// 2 × 3 matrix with linear entries in one variable.
pub fn br_matrix() -> PolyMatrix {
    let z = Poly::var(1, 0);
    let c = |k: i64| Poly::constant(1, rat(k));
    let rows = vec![
        vec![&z + &c(1), c(2), &z - &c(3)],
        vec![c(1), &z - &c(1), &z + &c(2)],
    ];
    PolyMatrix::from_rows(rows)
        .and_then(|m| m.with_col_degrees(vec![1, 1, 1]))
        .expect("well formed")
}

/// Bezout problem `(z², (1 − z)²) Q = 1`.
pub fn bezout_problem() -> DivisionProblem {
    let z = Poly::var(1, 0);
    let w = &Poly::one(1) - &z;
    let p = PolyMatrix::from_rows(vec![vec![z.pow(2), w.pow(2)]]).expect("one row");
    DivisionProblem::new(p, vec![Poly::one(1)], 0).expect("valid")
}
