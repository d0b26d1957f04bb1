//! Singular values by one-sided (Hestenes) Jacobi rotations.
//!
//! Column pairs are rotated until every pair is orthogonal to a relative
//! tolerance of `1e-14`; the singular values are then the column norms.
//! Wide inputs are handled through their transpose so that the columns being
//! orthogonalized never outnumber the ambient dimension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Sweep cap before [`Error::NoConvergence`].
pub const MAX_SWEEPS: usize = 30;

/// Relative orthogonality threshold `|a_p . a_q| <= tol * |a_p| |a_q|`.
pub const ROTATION_TOLERANCE: f64 = 1e-14;

/// Nonincreasing, nonnegative singular values; `min(rows, cols)` of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularValues {
    pub values: Vec<f64>,
}

impl SingularValues {
    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("at least one singular value")
    }

    /// Spectral condition number `sigma_max / sigma_min` (infinite when the
    /// smallest value is zero).
    pub fn condition(&self) -> f64 {
        if self.min() == 0.0 {
            f64::INFINITY
        } else {
            self.max() / self.min()
        }
    }
}

/// Column-major working copy: `cols` columns of length `len`.
struct Columns {
    len: usize,
    data: Vec<f64>,
}

impl Columns {
    fn of(a: &Matrix) -> Self {
        let (m, n) = a.shape();
        let mut data = vec![0.0; m * n];
        for i in 0..m {
            for (j, &v) in a.row(i).iter().enumerate() {
                data[j * m + i] = v;
            }
        }
        Self { len: m, data }
    }

    fn count(&self) -> usize {
        self.data.len() / self.len
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.len..(j + 1) * self.len]
    }

    fn pair_mut(&mut self, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
        debug_assert!(p < q);
        let len = self.len;
        let (head, tail) = self.data.split_at_mut(q * len);
        (&mut head[p * len..(p + 1) * len], &mut tail[..len])
    }

    fn norm(&self, j: usize) -> f64 {
        self.col(j).iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (u, v) = (*a, *b);
        *a = c * u - s * v;
        *b = s * u + c * v;
    }
}

/// Orthogonalizes the columns of `w` in place, applying the same rotations
/// to `v` when given.
fn jacobi_sweeps(w: &mut Columns, mut v: Option<&mut Columns>) -> Result<()> {
    let n = w.count();
    let mut norms: Vec<f64> = (0..n)
        .map(|j| w.col(j).iter().map(|x| x * x).sum())
        .collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let (cp, cq) = w.pair_mut(p, q);
                let gamma: f64 = cp.iter().zip(cq.iter()).map(|(a, b)| a * b).sum();
                if gamma.abs() <= ROTATION_TOLERANCE * (alpha.sqrt() * beta.sqrt()) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(cp, cq, c, s);
                norms[p] = cp.iter().map(|x| x * x).sum();
                norms[q] = cq.iter().map(|x| x * x).sum();
                if let Some(v) = v.as_deref_mut() {
                    let (vp, vq) = v.pair_mut(p, q);
                    rotate(vp, vq, c, s);
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
}

fn sorted_norms(w: &Columns) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = (0..w.count()).map(|j| (j, w.norm(j))).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

/// Singular values of `a` in nonincreasing order.
pub fn singular_values(a: &Matrix) -> Result<SingularValues> {
    let mut w = if a.rows() >= a.cols() {
        Columns::of(a)
    } else {
        Columns::of(&a.transpose())
    };
    jacobi_sweeps(&mut w, None)?;
    let k = a.rows().min(a.cols());
    let values = sorted_norms(&w)
        .into_iter()
        .take(k)
        .map(|(_, s)| s)
        .collect();
    Ok(SingularValues { values })
}

/// Largest singular value of `a` together with a unit right singular vector.
pub fn dominant_right_singular_vector(a: &Matrix) -> Result<(f64, Vec<f64>)> {
    let n = a.cols();
    if a.rows() >= n {
        let mut w = Columns::of(a);
        let mut v = Columns::of(&Matrix::identity(n));
        jacobi_sweeps(&mut w, Some(&mut v))?;
        let (j, sigma) = sorted_norms(&w)[0];
        Ok((sigma, v.col(j).to_vec()))
    } else {
        // Columns of A^T converge to sigma_i times the right singular vectors of A.
        let mut w = Columns::of(&a.transpose());
        jacobi_sweeps(&mut w, None)?;
        let (j, sigma) = sorted_norms(&w)[0];
        let vector = if sigma == 0.0 {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            e
        } else {
            w.col(j).iter().map(|x| x / sigma).collect()
        };
        Ok((sigma, vector))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, NormalSampler};

    fn gaussian(m: usize, n: usize, seed: u64) -> Matrix {
        let mut g = NormalSampler::new(substream(seed, 5, 0));
        Matrix::new(m, n, g.sample_vec(m * n)).unwrap()
    }

    fn householder(v: &[f64]) -> Matrix {
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let mut h = Matrix::identity(v.len());
        for i in 0..v.len() {
            for j in 0..v.len() {
                h[(i, j)] -= 2.0 * v[i] * v[j] / vv;
            }
        }
        h
    }

    /// Power iteration on `A^T A`, independent of the Jacobi path.
    fn power_sigma_max(a: &Matrix) -> f64 {
        let ata = a.transpose().matmul(a).unwrap();
        let mut x = vec![1.0; a.cols()];
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let y = ata.matvec(&x).unwrap();
            let norm = y.iter().map(|t| t * t).sum::<f64>().sqrt();
            x = y.iter().map(|t| t / norm).collect();
            lambda = norm;
        }
        lambda.sqrt()
    }

    #[test]
    fn small_examples() {
        let d = singular_values(&Matrix::from_diag(&[3.0, -4.0])).unwrap();
        assert_eq!(d.values, vec![4.0, 3.0]);

        for &theta in &[0.3_f64, 1.0, 2.5, -0.7] {
            let (s, c) = theta.sin_cos();
            let r = Matrix::from_rows(&[[c, -s], [s, c]]).unwrap();
            let sv = singular_values(&r).unwrap();
            for v in sv.values {
                assert!((v - 1.0).abs() < 1e-15);
            }
        }

        let nil = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(singular_values(&nil).unwrap().values, vec![1.0, 0.0]);
    }

    #[test]
    fn rectangular_shapes() {
        let a = gaussian(3, 7, 1);
        let b = a.transpose();
        let sa = singular_values(&a).unwrap().values;
        let sb = singular_values(&b).unwrap().values;
        assert_eq!(sa.len(), 3);
        for (x, y) in sa.iter().zip(&sb) {
            assert!((x - y).abs() <= 1e-12 * sa[0]);
        }
    }

    #[test]
    fn orthogonal_invariance() {
        for seed in 0..20 {
            let a = gaussian(6, 6, seed);
            let mut g = NormalSampler::new(substream(seed, 6, 0));
            let h1 = householder(&g.sample_vec(6));
            let h2 = householder(&g.sample_vec(6));
            let b = h1.matmul(&a).unwrap().matmul(&h2).unwrap();
            let sa = singular_values(&a).unwrap().values;
            let sb = singular_values(&b).unwrap().values;
            for (x, y) in sa.iter().zip(&sb) {
                assert!((x - y).abs() <= 1e-10 * sa[0]);
            }
        }
    }

    #[test]
    fn agrees_with_power_iteration() {
        for seed in 0..10 {
            let a = gaussian(5, 4, seed);
            let s = singular_values(&a).unwrap().max();
            let p = power_sigma_max(&a);
            assert!((s - p).abs() <= 1e-8 * p, "{s} vs {p}");
        }
    }

    #[test]
    fn frobenius_identity() {
        for seed in 0..20 {
            let a = gaussian(4 + seed as usize % 3, 5, seed);
            let fro = a.frobenius_norm();
            let sum: f64 = singular_values(&a)
                .unwrap()
                .values
                .iter()
                .map(|s| s * s)
                .sum();
            assert!((fro * fro - sum).abs() <= 1e-10 * sum);
            assert!((fro - sum.sqrt()).abs() <= 1e-12 * fro.max(1.0));
        }
    }

    #[test]
    fn dominant_vector_attains_spectral_norm() {
        for (m, n) in [(4, 4), (6, 3), (2, 5)] {
            let a = gaussian(m, n, 40 + m as u64);
            let (sigma, v) = dominant_right_singular_vector(&a).unwrap();
            let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((nv - 1.0).abs() < 1e-12);
            let av = a.matvec(&v).unwrap();
            let nav: f64 = av.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((nav - sigma).abs() <= 1e-12 * sigma);
            assert!((sigma - singular_values(&a).unwrap().max()).abs() <= 1e-12 * sigma);
        }
    }

    #[test]
    fn values_sorted_nonnegative() {
        let a = gaussian(8, 8, 77);
        let s = singular_values(&a).unwrap().values;
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.iter().all(|&x| x >= 0.0));
    }
}
