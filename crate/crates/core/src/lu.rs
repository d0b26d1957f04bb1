//! LU factorization with partial (row) pivoting, linear solves and inversion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Relative pivot threshold used by [`invert`] and [`solve`].
pub const DEFAULT_PIVOT_TOLERANCE: f64 = 1e-13;

/// Factors of `P A = L U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LuFactors {
    /// Row `i` of `P A` is row `permutation[i]` of `A`.
    pub permutation: Vec<usize>,
    /// Unit lower triangular factor.
    pub lower: Matrix,
    pub upper: Matrix,
    /// Sign of the permutation, `+1` or `-1`.
    pub parity: i8,
}

/// Factors a square matrix with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] as soon as the chosen pivot has
/// magnitude `<= pivot_tolerance * max |a_ij|`.
pub fn lu_decompose(a: &Matrix, pivot_tolerance: f64) -> Result<LuFactors> {
    let n = a.ensure_square()?;
    let threshold = pivot_tolerance * a.max_abs();
    let mut work = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut parity = 1i8;

    for k in 0..n {
        let (p, pivot_abs) =
            (k..n)
                .map(|i| (i, work[(i, k)].abs()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot_abs <= threshold {
            return Err(Error::SingularMatrix {
                step: k,
                pivot: pivot_abs,
            });
        }
        if p != k {
            swap_rows(&mut work, p, k);
            perm.swap(p, k);
            parity = -parity;
        }
        let pivot = work[(k, k)];
        for i in (k + 1)..n {
            let factor = work[(i, k)] / pivot;
            work[(i, k)] = factor;
            if factor != 0.0 {
                for j in (k + 1)..n {
                    let ukj = work[(k, j)];
                    work[(i, j)] -= factor * ukj;
                }
            }
        }
    }

    let mut lower = Matrix::identity(n);
    let mut upper = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if j < i {
                lower[(i, j)] = work[(i, j)];
            } else {
                upper[(i, j)] = work[(i, j)];
            }
        }
    }
    Ok(LuFactors {
        permutation: perm,
        lower,
        upper,
        parity,
    })
}

fn swap_rows(m: &mut Matrix, a: usize, b: usize) {
    let cols = m.cols();
    let data = m.as_mut_slice();
    for j in 0..cols {
        data.swap(a * cols + j, b * cols + j);
    }
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.permutation.len()
    }

    /// Solves `A x = b` by forward and back substitution.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: (n, 1),
                got: (b.len(), 1),
            });
        }
        let mut x: Vec<f64> = self.permutation.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let s = dot(&self.lower.row(i)[..i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.upper.row(i);
            let s = dot(&row[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }

    /// `A^{-1}`, one solve per identity column.
    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e).expect("dimension checked");
            e[j] = 0.0;
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }

    /// `P A` reassembled from the permutation, for residual checks.
    pub fn permute_rows(&self, a: &Matrix) -> Matrix {
        let rows: Vec<&[f64]> = self.permutation.iter().map(|&p| a.row(p)).collect();
        Matrix::from_rows(&rows).expect("rows of a valid matrix")
    }
}

/// Inverse of a square nonsingular matrix.
pub fn invert(a: &Matrix) -> Result<Matrix> {
    Ok(lu_decompose(a, DEFAULT_PIVOT_TOLERANCE)?.inverse())
}

/// Solves `A x = b` without forming `A^{-1}`.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    lu_decompose(a, DEFAULT_PIVOT_TOLERANCE)?.solve(b)
}
