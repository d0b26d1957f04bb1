//! Forward substitution for lower triangular systems, in binary64 or in
//! emulated binary32, and its componentwise backward error.
//!
//! Binary32 is emulated by rounding the binary64 result of every scalar
//! operation to the nearest `f32`. For `+ - * /` on binary32 operands this
//! double rounding is innocuous, so the emulation matches native single
//! precision without fused multiply-add.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionMode {
    /// binary64.
    Working,
    /// Emulated binary32.
    Reduced,
}

impl PrecisionMode {
    /// Unit roundoff of the mode: `2^-53` or `2^-24`.
    pub fn eps_mach(self) -> f64 {
        match self {
            PrecisionMode::Working => f64::EPSILON / 2.0,
            PrecisionMode::Reduced => (f32::EPSILON / 2.0) as f64,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PrecisionMode::Working => "working",
            PrecisionMode::Reduced => "reduced",
        }
    }

    /// Rounds a binary64 value to the mode's format.
    #[inline]
    pub fn round(self, v: f64) -> f64 {
        match self {
            PrecisionMode::Working => v,
            PrecisionMode::Reduced => v as f32 as f64,
        }
    }
}

impl std::fmt::Display for PrecisionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PrecisionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "working" => Ok(PrecisionMode::Working),
            "reduced" => Ok(PrecisionMode::Reduced),
            _ => Err(Error::InvalidArgument(format!(
                "unknown precision `{s}` (expected working or reduced)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BackwardErrorReport {
    /// Smallest `eps` such that `(L + E) x^ = b` with `|e_ij| <= eps |l_ij|`.
    pub epsilon_cw: f64,
    /// `(n + 2) * eps_mach`.
    pub bound: f64,
    pub satisfied: bool,
    /// `b - L x^`.
    pub residual: Vec<f64>,
}

fn check_triangular(l: &Matrix, b: &[f64]) -> Result<usize> {
    let n = l.ensure_square()?;
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: (n, 1),
            got: (b.len(), 1),
        });
    }
    if let Some((row, col)) = l.first_upper_nonzero() {
        return Err(Error::NotLowerTriangular { row, col });
    }
    Ok(n)
}

/// Solves `L x = b` by forward substitution.
///
/// `x_1 = b_1 / l_11`, then `x_i = (b_i - w) / l_ii` with
/// `w = sum_{j<i} l_ij x_j` accumulated left to right. In reduced mode the
/// entries of `L` and `b` are first rounded to binary32, and so is every
/// intermediate result.
pub fn forward_substitution(l: &Matrix, b: &[f64], precision: PrecisionMode) -> Result<Vec<f64>> {
    let n = check_triangular(l, b)?;
    if let Some(row) = (0..n).find(|&i| l[(i, i)] == 0.0 || precision.round(l[(i, i)]) == 0.0) {
        return Err(Error::ZeroDiagonal { row });
    }
    let fl = |v: f64| precision.round(v);
    let mut x = vec![0.0; n];
    for i in 0..n {
        let row = l.row(i);
        let bi = fl(b[i]);
        let num = if i == 0 {
            bi
        } else {
            let mut w = fl(fl(row[0]) * x[0]);
            for j in 1..i {
                w = fl(w + fl(fl(row[j]) * x[j]));
            }
            fl(bi - w)
        };
        x[i] = fl(num / fl(row[i]));
    }
    Ok(x)
}

/// `a * b` as an unevaluated sum `p + e`.
#[inline]
fn two_product(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `a + b` as an unevaluated sum `s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// `b_i - (L x)_i` in twice the working precision.
fn compensated_residual(row: &[f64], x: &[f64], bi: f64) -> f64 {
    let (mut s, mut c) = (bi, 0.0);
    for (&l, &xj) in row.iter().zip(x) {
        let (p, ep) = two_product(-l, xj);
        let (t, et) = two_sum(s, p);
        s = t;
        c += ep + et;
    }
    s + c
}

/// Componentwise backward error of `x_hat` as a solution of `L x = b`:
/// `max_i |b_i - (L x_hat)_i| / sum_j |l_ij| |x_hat_j|`, with `0/0 = 0` and
/// `r/0 = inf` for `r != 0`, and `inf` when the row involves non-finite
/// values. The residual is accumulated in compensated
/// arithmetic so that the measurement is accurate well below `eps_mach`.
///
/// `precision` only selects the `(n + 2) * eps_mach` bound in the report.
pub fn componentwise_backward_error(
    l: &Matrix,
    b: &[f64],
    x_hat: &[f64],
    precision: PrecisionMode,
) -> Result<BackwardErrorReport> {
    let n = l.ensure_square()?;
    for v in [b, x_hat] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: (n, 1),
                got: (v.len(), 1),
            });
        }
    }
    let mut residual = Vec::with_capacity(n);
    let mut epsilon_cw = 0.0_f64;
    for i in 0..n {
        let row = &l.row(i)[..=i];
        let r = compensated_residual(row, &x_hat[..=i], b[i]);
        let denom: f64 = row.iter().zip(x_hat).map(|(l, x)| (l * x).abs()).sum();
        let e = if !r.is_finite() || !denom.is_finite() {
            // Overflow in the solve leaves no finite backward error.
            f64::INFINITY
        } else if r == 0.0 {
            0.0
        } else if denom == 0.0 {
            f64::INFINITY
        } else {
            r.abs() / denom
        };
        epsilon_cw = epsilon_cw.max(e);
        residual.push(r);
    }
    let bound = (n as f64 + 2.0) * precision.eps_mach();
    Ok(BackwardErrorReport {
        epsilon_cw,
        bound,
        satisfied: epsilon_cw <= bound,
        residual,
    })
}

/// Checks the rounding hypothesis `(n + 2) * eps_mach < 1` for dimension `n`.
pub fn check_hypothesis(n: usize, precision: PrecisionMode) -> Result<()> {
    let value = (n as f64 + 2.0) * precision.eps_mach();
    if value >= 1.0 {
        return Err(Error::HypothesisViolated { n, value });
    }
    Ok(())
}

/// Solves `L x = b` in `precision` and measures the componentwise backward
/// error of the computed solution.
///
/// In reduced mode the error is measured against the binary32-rounded `L`
/// and `b` actually used by the solver. A solve that overflows lies outside
/// the rounding model `fl(x) = x (1 + delta)` and fails with
/// [`Error::RangeExceeded`] instead of producing a report.
pub fn verify_backward_stability(
    l: &Matrix,
    b: &[f64],
    precision: PrecisionMode,
) -> Result<BackwardErrorReport> {
    check_hypothesis(l.rows(), precision)?;
    let x = forward_substitution(l, b, precision)?;
    if let Some(row) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::RangeExceeded { row });
    }
    match precision {
        PrecisionMode::Working => componentwise_backward_error(l, b, &x, precision),
        PrecisionMode::Reduced => {
            let lr = Matrix::from_vec(
                l.rows(),
                l.cols(),
                l.as_slice().iter().map(|&v| precision.round(v)).collect(),
            );
            let br: Vec<f64> = b.iter().map(|&v| precision.round(v)).collect();
            componentwise_backward_error(&lr, &br, &x, precision)
        }
    }
}
