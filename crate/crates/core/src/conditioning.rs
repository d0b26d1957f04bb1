//! Closed-form condition numbers, distance to the singular set and the
//! nearest singular perturbation.
//!
//! Throughout, `pair = (r, s)` measures the input matrix in `||.||_rs` and
//! its inverse in `||.||_sr`, so `kappa_rs(A) = ||A||_rs ||A^{-1}||_sr`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lu::invert;
use crate::matrix::Matrix;
use crate::norms::{operator_norm, rank_one_interpolator, vector_norm, NormPair};

/// The matrix problems whose conditioning is studied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// `A -> A^{-1}`.
    Inversion,
    /// `x -> A x` for fixed `A`.
    MatVec,
    /// `b -> A^{-1} b` for fixed `A`.
    SolveFixedA,
    /// `A -> A^{-1} b` for fixed `b`.
    SolveFixedB,
    /// `(A, b) -> A^{-1} b`, componentwise input error, normwise output.
    SolveBoth,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::Inversion,
        ProblemKind::MatVec,
        ProblemKind::SolveFixedA,
        ProblemKind::SolveFixedB,
        ProblemKind::SolveBoth,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Inversion => "inversion",
            ProblemKind::MatVec => "mat-vec",
            ProblemKind::SolveFixedA => "solve-fixed-a",
            ProblemKind::SolveFixedB => "solve-fixed-b",
            ProblemKind::SolveBoth => "solve-both",
        }
    }

    /// Whether the problem takes a vector alongside the matrix.
    pub fn needs_vector(self) -> bool {
        !matches!(self, ProblemKind::Inversion | ProblemKind::SolveFixedB)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown problem kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionReport {
    pub kind: ProblemKind,
    pub value: f64,
    /// `kappa_rs(A)` whenever `A` is square.
    pub kappa: Option<f64>,
    /// Factor with `value = alpha * kappa` for square matrix-vector
    /// products; `1` for the other problems.
    pub alpha: f64,
    /// `||A^{-1}||_sr ||b||_s / ||A^{-1} b||_r`, present for `SolveBoth`.
    pub mixed_term: Option<f64>,
}

/// `A^{-1}` together with the norms the closed forms are built from.
struct Inverted {
    inverse: Matrix,
    norm_a: f64,
    norm_inv: f64,
}

impl Inverted {
    fn new(a: &Matrix, pair: NormPair) -> Result<Self> {
        a.ensure_square()?;
        let inverse = invert(a)?;
        let norm_a = pair.norm(a)?;
        let norm_inv = pair.swapped().norm(&inverse)?;
        Ok(Self {
            inverse,
            norm_a,
            norm_inv,
        })
    }

    fn kappa(&self) -> f64 {
        self.norm_a * self.norm_inv
    }

    /// `||A^{-1}||_sr ||b||_s / ||A^{-1} b||_r`.
    fn solve_term(&self, b: &[f64], pair: NormPair) -> Result<f64> {
        check_len(b, self.inverse.cols())?;
        let nb = vector_norm(b, pair.s);
        if nb == 0.0 {
            return Err(Error::ZeroVector);
        }
        let x = self.inverse.matvec(b)?;
        Ok(self.norm_inv * nb / vector_norm(&x, pair.r))
    }
}

fn check_len(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: (n, 1),
            got: (v.len(), 1),
        });
    }
    Ok(())
}

/// `kappa_rs(A)`, or infinity when `A` is singular to working accuracy.
pub fn kappa(a: &Matrix, pair: NormPair) -> Result<f64> {
    match Inverted::new(a, pair) {
        Ok(inv) => Ok(inv.kappa()),
        Err(Error::SingularMatrix { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Condition number of `kind` at the given instance. `vector` is `x` for
/// `MatVec` and `b` for `SolveFixedA` / `SolveBoth`; it is ignored otherwise.
pub fn condition_closed_form(
    kind: ProblemKind,
    a: &Matrix,
    vector: Option<&[f64]>,
    pair: NormPair,
) -> Result<ConditionReport> {
    let need_vector =
        || vector.ok_or_else(|| Error::InvalidArgument(format!("{kind} requires a vector")));
    match kind {
        ProblemKind::Inversion | ProblemKind::SolveFixedB => {
            let k = Inverted::new(a, pair)?.kappa();
            Ok(ConditionReport {
                kind,
                value: k,
                kappa: Some(k),
                alpha: 1.0,
                mixed_term: None,
            })
        }
        ProblemKind::MatVec => matvec_condition(a, need_vector()?, pair),
        ProblemKind::SolveFixedA => {
            let inv = Inverted::new(a, pair)?;
            Ok(ConditionReport {
                kind,
                value: inv.solve_term(need_vector()?, pair)?,
                kappa: Some(inv.kappa()),
                alpha: 1.0,
                mixed_term: None,
            })
        }
        ProblemKind::SolveBoth => mixed_condition(a, need_vector()?, pair),
    }
}

fn matvec_condition(a: &Matrix, x: &[f64], pair: NormPair) -> Result<ConditionReport> {
    check_len(x, a.cols())?;
    let nx = vector_norm(x, pair.r);
    let nax = vector_norm(&a.matvec(x)?, pair.s);
    if nx == 0.0 || nax == 0.0 {
        return Err(Error::ZeroVector);
    }
    let norm_a = pair.norm(a)?;
    let value = norm_a * nx / nax;
    let (kappa, alpha) = if a.is_square() {
        match Inverted::new(a, pair) {
            Ok(inv) => (Some(inv.kappa()), nx / (inv.norm_inv * nax)),
            Err(Error::SingularMatrix { .. }) => (Some(f64::INFINITY), 0.0),
            Err(e) => return Err(e),
        }
    } else {
        (None, 1.0)
    };
    Ok(ConditionReport {
        kind: ProblemKind::MatVec,
        value,
        kappa,
        alpha,
        mixed_term: None,
    })
}

/// Mixed condition number of `(A, b) -> A^{-1} b`:
/// `kappa_rs(A) + ||A^{-1}||_sr ||b||_s / ||A^{-1} b||_r`.
pub fn mixed_condition(a: &Matrix, b: &[f64], pair: NormPair) -> Result<ConditionReport> {
    let inv = Inverted::new(a, pair)?;
    let term = inv.solve_term(b, pair)?;
    let k = inv.kappa();
    Ok(ConditionReport {
        kind: ProblemKind::SolveBoth,
        value: k + term,
        kappa: Some(k),
        alpha: 1.0,
        mixed_term: Some(term),
    })
}

/// `d_rs(A, Sigma) = 1 / ||A^{-1}||_sr`.
pub fn distance_to_singularity(a: &Matrix, pair: NormPair) -> Result<f64> {
    Ok(1.0 / Inverted::new(a, pair)?.norm_inv)
}

/// The direction along which `A^{-1}` is stretched the most.
#[derive(Debug, Clone)]
pub(crate) struct WorstDirection {
    /// `||y||_s = 1` with `||A^{-1} y||_r = ||A^{-1}||_sr`.
    pub y: Vec<f64>,
    /// `A^{-1} y / ||A^{-1} y||_r`.
    pub x: Vec<f64>,
    /// `||A^{-1} y||_r`.
    pub stretch: f64,
}

pub(crate) fn worst_direction(a: &Matrix, pair: NormPair) -> Result<WorstDirection> {
    a.ensure_square()?;
    let inverse = invert(a)?;
    let attained = operator_norm(&inverse, pair.s, pair.r, pair.max_enum_dim)?;
    let y = attained.attainer;
    let image = inverse.matvec(&y)?;
    let stretch = vector_norm(&image, pair.r);
    let x = image.iter().map(|v| v / stretch).collect();
    Ok(WorstDirection { y, x, stretch })
}

/// A perturbation `E` of minimal `||E||_rs` making `A + E` singular.
///
/// With `y` attaining `||A^{-1}||_sr` and `x = A^{-1} y / ||A^{-1} y||_r`,
/// `E = B / ||A^{-1} y||_r` where `B` is the rank-one interpolator sending
/// `x` to `-y`; then `(A + E) x = 0` and `||E||_rs = 1 / ||A^{-1}||_sr`.
pub fn nearest_singular_perturbation(a: &Matrix, pair: NormPair) -> Result<Matrix> {
    let w = worst_direction(a, pair)?;
    let neg_y: Vec<f64> = w.y.iter().map(|v| -v).collect();
    let b = rank_one_interpolator(&w.x, &neg_y, pair.r, pair.s)?;
    Ok(b.scaled(1.0 / w.stretch))
}
