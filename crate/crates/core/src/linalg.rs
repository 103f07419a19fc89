//! Exact sparse linear solves over ℚ by fraction-free elimination.
//!
//! Rows are cleared of denominators once and then combined with integer
//! multipliers only, dividing each updated row by its content. Pivot columns
//! are taken left to right, so the free columns of an underdetermined system
//! are always the rightmost dependent ones; those are set to zero. Callers
//! control tie-breaking through the column order they choose.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::poly::Rat;

/// A sparse row: column index → coefficient.
pub type SparseRow = BTreeMap<usize, Rat>;

#[derive(Debug, Clone)]
pub struct LinearSystem {
    ncols: usize,
    rows: Vec<(SparseRow, Rat)>,
}

impl LinearSystem {
    pub fn new(ncols: usize) -> Self {
        LinearSystem {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn push_row(&mut self, row: SparseRow, rhs: Rat) {
        debug_assert!(row.keys().all(|&c| c < self.ncols));
        self.rows.push((row, rhs));
    }

    /// Returns the solution with free variables set to zero, or `None` when
    /// the system is inconsistent.
    pub fn solve(&self) -> Option<Vec<Rat>> {
        let rhs_col = self.ncols;
        let mut rows: Vec<BTreeMap<usize, BigInt>> = self
            .rows
            .iter()
            .filter_map(|(row, rhs)| {
                let mut full: BTreeMap<usize, Rat> =
                    row.iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (*k, v.clone())).collect();
                if !rhs.is_zero() {
                    full.insert(rhs_col, rhs.clone());
                }
                if full.is_empty() {
                    None
                } else {
                    Some(clear_denominators(&full))
                }
            })
            .collect();

        let mut pivots: Vec<(usize, BTreeMap<usize, BigInt>)> = Vec::new();
        for col in 0..self.ncols {
            // sparsest row holding this column, earliest on ties
            let pick = rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r.keys().next() == Some(&col))
                .min_by_key(|(i, r)| (r.len(), *i))
                .map(|(i, _)| i);
            let Some(pi) = pick else { continue };
            let pivot = rows.swap_remove(pi);
            let pv = pivot[&col].clone();
            for r in rows.iter_mut() {
                if let Some(c) = r.get(&col).cloned() {
                    let g = pv.gcd(&c);
                    let (mr, mp) = (&pv / &g, &c / &g);
                    let mut next: BTreeMap<usize, BigInt> = BTreeMap::new();
                    for (k, v) in r.iter() {
                        next.insert(*k, v * &mr);
                    }
                    for (k, v) in pivot.iter() {
                        let e = next.entry(*k).or_insert_with(BigInt::zero);
                        *e -= v * &mp;
                    }
                    next.retain(|_, v| !v.is_zero());
                    normalize_content(&mut next);
                    *r = next;
                }
            }
            rows.retain(|r| !r.is_empty());
            pivots.push((col, pivot));
        }
        // anything left only touches the right-hand side
        if rows.iter().any(|r| r.contains_key(&rhs_col)) {
            return None;
        }

        let mut x = vec![Rat::zero(); self.ncols];
        for (col, row) in pivots.iter().rev() {
            let mut acc = Rat::from_integer(row.get(&rhs_col).cloned().unwrap_or_default());
            for (k, v) in row.range(col + 1..rhs_col) {
                if !x[*k].is_zero() {
                    acc -= Rat::from_integer(v.clone()) * &x[*k];
                }
            }
            x[*col] = acc / Rat::from_integer(row[col].clone());
        }
        Some(x)
    }
}

fn clear_denominators(row: &BTreeMap<usize, Rat>) -> BTreeMap<usize, BigInt> {
    let l = row
        .values()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let mut out: BTreeMap<usize, BigInt> = row
        .iter()
        .map(|(k, v)| (*k, v.numer() * (&l / v.denom())))
        .collect();
    normalize_content(&mut out);
    out
}

fn normalize_content(row: &mut BTreeMap<usize, BigInt>) {
    let g = row.values().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for v in row.values_mut() {
            *v = &*v / &g;
        }
    }
    if let Some(first) = row.values().next() {
        if first.is_negative() {
            for v in row.values_mut() {
                *v = -&*v;
            }
        }
    }
}

/// Exact rank of a dense rational matrix.
pub fn rank(matrix: &[Vec<Rat>]) -> usize {
    let mut m: Vec<Vec<Rat>> = matrix.to_vec();
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..nrows {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] / &m[r][c];
            for j in c..ncols {
                let t = &f * &m[r][j];
                m[i][j] -= t;
            }
        }
        r += 1;
        if r == nrows {
            break;
        }
    }
    r
}
