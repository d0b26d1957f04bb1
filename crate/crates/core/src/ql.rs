//! Householder QL factorization `A = Q L`.
//!
//! Columns are reduced right to left: the reflector for column `k` acts on
//! rows `0..=k` and annihilates everything above the diagonal entry. A final
//! pass flips signs so that `diag(L) >= 0`, which makes `L` a function of
//! `A` alone.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QlFactors {
    pub orthogonal: Matrix,
    pub lower: Matrix,
}

pub fn ql_decompose(a: &Matrix) -> Result<QlFactors> {
    let (orthogonal, lower) = factor(a, true)?;
    Ok(QlFactors { orthogonal, lower })
}

/// The lower triangular factor alone, skipping the accumulation of `Q`.
pub fn ql_lower(a: &Matrix) -> Result<Matrix> {
    Ok(factor(a, false)?.1)
}

fn factor(a: &Matrix, accumulate: bool) -> Result<(Matrix, Matrix)> {
    let n = a.ensure_square()?;
    let mut w = a.clone();
    let mut q = if accumulate {
        Matrix::identity(n)
    } else {
        Matrix::zeros(1, 1)
    };
    let mut v = vec![0.0; n];

    for k in (1..n).rev() {
        let sigma: f64 = (0..k).map(|i| w[(i, k)] * w[(i, k)]).sum();
        if sigma == 0.0 {
            continue;
        }
        let alpha = w[(k, k)];
        let norm = (alpha * alpha + sigma).sqrt();
        let beta = if alpha >= 0.0 { -norm } else { norm };
        for i in 0..k {
            v[i] = w[(i, k)];
        }
        v[k] = alpha - beta;
        let tau = 2.0 / (sigma + v[k] * v[k]);

        // W <- H W on rows 0..=k; columns right of k are already zero there.
        for j in 0..k {
            let s: f64 = (0..=k).map(|i| v[i] * w[(i, j)]).sum();
            let f = tau * s;
            for i in 0..=k {
                w[(i, j)] -= f * v[i];
            }
        }
        for i in 0..k {
            w[(i, k)] = 0.0;
        }
        w[(k, k)] = beta;

        // Q <- Q H
        for r in (0..n).filter(|_| accumulate) {
            let row = &mut q.row_mut(r)[..=k];
            let s: f64 = row.iter().zip(&v[..=k]).map(|(a, b)| a * b).sum();
            let f = tau * s;
            for (x, &vi) in row.iter_mut().zip(&v[..=k]) {
                *x -= f * vi;
            }
        }
    }

    for i in 0..n {
        if w[(i, i)] < 0.0 {
            for x in &mut w.row_mut(i)[..=i] {
                *x = -*x;
            }
            for r in (0..n).filter(|_| accumulate) {
                q[(r, i)] = -q[(r, i)];
            }
        }
    }

    Ok((q, w))
}
