//! Vector norms, dual witnesses and mixed `(r, s)` operator norms for
//! `r, s` in `{1, 2, inf}`.
//!
//! Six of the nine index pairs have closed forms. The remaining three,
//! `(inf, 1)`, `(inf, 2)` and `(2, 1)`, are NP-hard in general and are
//! computed exactly by enumerating sign vectors, which is only allowed up to
//! a configurable dimension.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::svd::dominant_right_singular_vector;

/// Default bound on the dimension enumerated over by the exact methods.
pub const DEFAULT_MAX_ENUM_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormIndex {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Infinity,
}

impl NormIndex {
    pub const ALL: [NormIndex; 3] = [NormIndex::One, NormIndex::Two, NormIndex::Infinity];

    /// Dual exponent: `1* = inf`, `2* = 2`, `inf* = 1`.
    pub fn dual(self) -> NormIndex {
        match self {
            NormIndex::One => NormIndex::Infinity,
            NormIndex::Two => NormIndex::Two,
            NormIndex::Infinity => NormIndex::One,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NormIndex::One => "1",
            NormIndex::Two => "2",
            NormIndex::Infinity => "inf",
        }
    }
}

impl fmt::Display for NormIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "one" => Ok(NormIndex::One),
            "2" | "two" => Ok(NormIndex::Two),
            "inf" | "infinity" => Ok(NormIndex::Infinity),
            other => Err(Error::InvalidArgument(format!(
                "norm index must be 1, 2 or inf, got {other:?}"
            ))),
        }
    }
}

/// The pair `(r, s)` selecting `||A||_rs = sup ||Ax||_s / ||x||_r`, plus the
/// enumeration limit for the NP-hard pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormPair {
    pub r: NormIndex,
    pub s: NormIndex,
    pub max_enum_dim: usize,
}

impl NormPair {
    pub fn new(r: NormIndex, s: NormIndex) -> Self {
        Self {
            r,
            s,
            max_enum_dim: DEFAULT_MAX_ENUM_DIM,
        }
    }

    pub fn with_max_enum_dim(mut self, max_enum_dim: usize) -> Self {
        self.max_enum_dim = max_enum_dim;
        self
    }

    /// `(s, r)`: the pair under which `A^{-1}` is measured.
    pub fn swapped(self) -> Self {
        Self {
            r: self.s,
            s: self.r,
            ..self
        }
    }

    /// All nine pairs with the default enumeration limit.
    pub fn all() -> impl Iterator<Item = NormPair> {
        NormIndex::ALL
            .into_iter()
            .flat_map(|r| NormIndex::ALL.into_iter().map(move |s| NormPair::new(r, s)))
    }

    /// `||A||_rs` for this pair.
    pub fn norm(&self, a: &Matrix) -> Result<f64> {
        Ok(operator_norm(a, self.r, self.s, self.max_enum_dim)?.value)
    }
}

impl fmt::Display for NormPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.r, self.s)
    }
}

pub fn vector_norm(x: &[f64], r: NormIndex) -> f64 {
    match r {
        NormIndex::One => x.iter().map(|v| v.abs()).sum(),
        NormIndex::Two => {
            let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if scale == 0.0 {
                return 0.0;
            }
            scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
        }
        NormIndex::Infinity => x.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

/// A vector `u` with `||u||_{r*} = 1` and `u . x = ||x||_r`.
///
/// Ties for `r = inf` go to the lowest index of maximal magnitude; for
/// `r = 1` zero components get sign `+1`.
pub fn dual_witness(x: &[f64], r: NormIndex) -> Result<Vec<f64>> {
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let sign = |v: f64| if v < 0.0 { -1.0 } else { 1.0 };
    Ok(match r {
        NormIndex::One => x.iter().map(|&v| sign(v)).collect(),
        NormIndex::Two => {
            let n = vector_norm(x, NormIndex::Two);
            x.iter().map(|v| v / n).collect()
        }
        NormIndex::Infinity => {
            let mut k = 0;
            for (i, v) in x.iter().enumerate() {
                if v.abs() > x[k].abs() {
                    k = i;
                }
            }
            let mut u = vec![0.0; x.len()];
            u[k] = sign(x[k]);
            u
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NormMethod {
    ClosedForm,
    VertexEnumeration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormResult {
    pub value: f64,
    pub method: NormMethod,
    /// Unit vector in the `r`-norm realizing the supremum.
    pub attainer: Vec<f64>,
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// `||A||_rs` computed exactly, with a norm-attaining unit vector.
pub fn operator_norm(
    a: &Matrix,
    r: NormIndex,
    s: NormIndex,
    max_enum_dim: usize,
) -> Result<OperatorNormResult> {
    use NormIndex::*;
    let (m, n) = a.shape();
    match (r, s) {
        (One, _) => {
            // Extreme points of the 1-ball are +-e_j.
            let (k, value) =
                (0..n)
                    .map(|j| (j, vector_norm(&a.column(j), s)))
                    .fold(
                        (0, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            Ok(OperatorNormResult {
                value,
                method: NormMethod::ClosedForm,
                attainer: unit(n, k),
            })
        }
        (_, Infinity) => {
            let rd = r.dual();
            let (k, value) =
                (0..m)
                    .map(|i| (i, vector_norm(a.row(i), rd)))
                    .fold(
                        (0, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            let attainer = if value == 0.0 {
                unit(n, 0)
            } else {
                dual_witness(a.row(k), rd)?
            };
            Ok(OperatorNormResult {
                value,
                method: NormMethod::ClosedForm,
                attainer,
            })
        }
        (Two, Two) => {
            let (value, attainer) = dominant_right_singular_vector(a)?;
            Ok(OperatorNormResult {
                value,
                method: NormMethod::ClosedForm,
                attainer,
            })
        }
        (Infinity, _) => {
            if n > max_enum_dim {
                return Err(Error::DimensionTooLarge {
                    dim: n,
                    limit: max_enum_dim,
                });
            }
            let z = best_sign_vector(
                n,
                |z| vector_norm(&a.matvec(z).expect("shape"), s),
                |j| a.column(j),
                m,
                s,
            );
            let value = vector_norm(&a.matvec(&z)?, s);
            Ok(OperatorNormResult {
                value,
                method: NormMethod::VertexEnumeration,
                attainer: z,
            })
        }
        (Two, One) => {
            // ||A||_{2,1} = max over sign vectors z of ||A^T z||_2.
            if m > max_enum_dim {
                return Err(Error::DimensionTooLarge {
                    dim: m,
                    limit: max_enum_dim,
                });
            }
            let z = best_sign_vector(
                m,
                |z| vector_norm(&a.tr_matvec(z).expect("shape"), Two),
                |i| a.row(i).to_vec(),
                n,
                Two,
            );
            let w = a.tr_matvec(&z)?;
            let norm = vector_norm(&w, Two);
            let attainer = if norm == 0.0 {
                unit(n, 0)
            } else {
                w.iter().map(|v| v / norm).collect()
            };
            // ||A x||_1 >= z . A x = ||A^T z||_2, with equality at the maximizer.
            let value = vector_norm(&a.matvec(&attainer)?, One);
            Ok(OperatorNormResult {
                value,
                method: NormMethod::VertexEnumeration,
                attainer,
            })
        }
    }
}

/// Maximizes `||M z||_norm` over `z in {-1, 1}^dim` with `z_0 = +1`
/// (the objective is even), walking the sign vectors in Gray-code order so
/// each step is a rank-one update by `2 * generator(j)`.
///
/// `objective` recomputes the value from scratch; it is used only to break
/// near-ties produced by accumulated rounding in the incremental walk.
fn best_sign_vector(
    dim: usize,
    objective: impl Fn(&[f64]) -> f64,
    generator: impl Fn(usize) -> Vec<f64>,
    out_len: usize,
    norm: NormIndex,
) -> Vec<f64> {
    let mut z = vec![1.0; dim];
    let gens: Vec<Vec<f64>> = (0..dim).map(generator).collect();
    let mut image = vec![0.0; out_len];
    for g in &gens {
        for (o, v) in image.iter_mut().zip(g) {
            *o += v;
        }
    }
    let mut best = z.clone();
    let mut best_val = vector_norm(&image, norm);
    let mut candidates: Vec<Vec<f64>> = vec![best.clone()];

    if dim > 1 {
        let steps: u64 = 1u64 << (dim - 1);
        for step in 1..steps {
            // Flip the bit that changes between Gray codes step-1 and step;
            // bit b flips coordinate b + 1 so that z_0 stays fixed.
            let j = step.trailing_zeros() as usize + 1;
            let delta = -2.0 * z[j];
            z[j] = -z[j];
            for (o, v) in image.iter_mut().zip(&gens[j]) {
                *o += delta * v;
            }
            let val = vector_norm(&image, norm);
            if val > best_val * (1.0 + 1e-12) {
                best_val = val;
                best.clone_from(&z);
                candidates.clear();
                candidates.push(z.clone());
            } else if val >= best_val * (1.0 - 1e-12) {
                candidates.push(z.clone());
            }
        }
    }

    if candidates.len() > 1 {
        let mut top = f64::NEG_INFINITY;
        for c in candidates {
            let v = objective(&c);
            if v > top {
                top = v;
                best = c;
            }
        }
    }
    best
}

/// Rank-one interpolator: for `||x||_r = ||y||_s = 1` returns
/// `B = y u^T` with `u` the dual witness of `x`, so `B x = y` and
/// `||B||_rs = 1`.
pub fn rank_one_interpolator(x: &[f64], y: &[f64], r: NormIndex, s: NormIndex) -> Result<Matrix> {
    const UNIT_TOL: f64 = 1e-12;
    for (v, idx) in [(x, r), (y, s)] {
        let norm = vector_norm(v, idx);
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnitVector { norm });
        }
    }
    let u = dual_witness(x, r)?;
    Ok(Matrix::outer(y, &u))
}
