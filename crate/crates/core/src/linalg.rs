//! Dense exact linear algebra over a finite field.  Matrices here are tiny
//! (at most 10 x 10), so plain Gauss-Jordan with full row reduction is all we
//! need.

use std::sync::Arc;

use crate::field::{FieldCtx, FieldElement};

pub type Matrix = Vec<Vec<FieldElement>>;

/// Reduce `m` in place to reduced row echelon form; returns the rank.
/// Column order is left to right, so the result is canonical.
pub fn rref(m: &mut Matrix) -> usize {
    if m.is_empty() {
        return 0;
    }
    let rows = m.len();
    let cols = m[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let pivot = (rank..rows).find(|&r| !m[r][col].is_zero());
        let Some(pivot) = pivot else { continue };
        m.swap(rank, pivot);
        let inv = m[rank][col].inv().unwrap();
        for c in col..cols {
            m[rank][c] = &m[rank][c] * &inv;
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..cols {
                    m[r][c] = &m[r][c] - &(&factor * &m[rank][c]);
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Basis of the right kernel of `m`, one vector per free column, in
/// ascending free-column order.  Rows of `m` are consumed.
pub fn kernel_basis(ctx: &Arc<FieldCtx>, mut m: Matrix, cols: usize) -> Vec<Vec<FieldElement>> {
    if m.is_empty() {
        // everything is in the kernel of the empty map
        return (0..cols)
            .map(|j| {
                let mut v = vec![ctx.zero(); cols];
                v[j] = ctx.one();
                v
            })
            .collect();
    }
    debug_assert!(m.iter().all(|row| row.len() == cols));
    let rank = rref(&mut m);
    let mut pivot_cols = Vec::with_capacity(rank);
    let mut lead = 0;
    for row in m.iter().take(rank) {
        while lead < cols && row[lead].is_zero() {
            lead += 1;
        }
        pivot_cols.push(lead);
        lead += 1;
    }
    let mut basis = Vec::new();
    for j in 0..cols {
        if pivot_cols.contains(&j) {
            continue;
        }
        let mut v = vec![ctx.zero(); cols];
        v[j] = ctx.one();
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -&m[r][j];
        }
        basis.push(v);
    }
    basis
}

/// Solve m x = b; returns one solution if the system is consistent.
pub fn solve(ctx: &Arc<FieldCtx>, m: &Matrix, b: &[FieldElement]) -> Option<Vec<FieldElement>> {
    let rows = m.len();
    assert_eq!(rows, b.len());
    if rows == 0 {
        return Some(Vec::new());
    }
    let cols = m[0].len();
    let mut aug: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    rref(&mut aug);
    let mut x = vec![ctx.zero(); cols];
    for row in &aug {
        let lead = row[..cols].iter().position(|c| !c.is_zero());
        match lead {
            Some(j) => x[j] = row[cols].clone(),
            None => {
                if !row[cols].is_zero() {
                    return None; // 0 = nonzero row: inconsistent
                }
            }
        }
    }
    Some(x)
}
