//! Condition numbers from their definition: the limit, as `delta -> 0`, of
//! the supremum of output relative error over input relative error across
//! perturbations of size at most `delta`.
//!
//! The supremum is approximated by random perturbations on the `delta`-sphere
//! of the input error model, plus a deterministic worst-direction probe built
//! from the rank-one interpolator whenever the models are the normwise ones
//! the closed forms refer to.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditioning::{condition_closed_form, worst_direction, ProblemKind};
use crate::error::{Error, Result};
use crate::lu::{invert, solve};
use crate::matrix::Matrix;
use crate::norms::{operator_norm, rank_one_interpolator, vector_norm, NormIndex, NormPair};
use crate::rng::{substream, NormalSampler};

/// How a relative error is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ErrorModel {
    /// `||x~ - x||_r / ||x||_r` for vectors.
    Normwise(NormIndex),
    /// `||A~ - A||_rs / ||A||_rs` for matrices.
    Operator(NormPair),
    /// `max_i |x~_i - x_i| / |x_i|`.
    ComponentwiseMax,
    /// `sum_i |x~_i - x_i| / |x_i|`.
    ComponentwiseSum,
}

/// A vector or matrix argument to [`relerror`].
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Vector(&'a [f64]),
    Matrix(&'a Matrix),
}

impl<'a> From<&'a [f64]> for Operand<'a> {
    fn from(v: &'a [f64]) -> Self {
        Operand::Vector(v)
    }
}

impl<'a> From<&'a Vec<f64>> for Operand<'a> {
    fn from(v: &'a Vec<f64>) -> Self {
        Operand::Vector(v)
    }
}

impl<'a> From<&'a Matrix> for Operand<'a> {
    fn from(m: &'a Matrix) -> Self {
        Operand::Matrix(m)
    }
}

impl Operand<'_> {
    fn entries(&self) -> &[f64] {
        match self {
            Operand::Vector(v) => v,
            Operand::Matrix(m) => m.as_slice(),
        }
    }
}

/// Relative error of `approx` with respect to `exact` under `model`.
pub fn relerror<'a, 'b>(
    approx: impl Into<Operand<'a>>,
    exact: impl Into<Operand<'b>>,
    model: ErrorModel,
) -> Result<f64> {
    let (approx, exact) = (approx.into(), exact.into());
    let (xt, x) = (approx.entries(), exact.entries());
    if xt.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: (x.len(), 1),
            got: (xt.len(), 1),
        });
    }
    match model {
        ErrorModel::Normwise(r) => {
            let Operand::Vector(x) = exact else {
                return Err(Error::InvalidArgument(
                    "normwise vector model applied to a matrix".into(),
                ));
            };
            let nx = vector_norm(x, r);
            if nx == 0.0 {
                return Err(Error::ZeroVector);
            }
            let diff: Vec<f64> = xt.iter().zip(x).map(|(a, b)| a - b).collect();
            Ok(vector_norm(&diff, r) / nx)
        }
        ErrorModel::Operator(pair) => {
            let (Operand::Matrix(at), Operand::Matrix(a)) = (approx, exact) else {
                return Err(Error::InvalidArgument(
                    "operator-norm model applied to a vector".into(),
                ));
            };
            let na = pair.norm(a)?;
            if na == 0.0 {
                return Err(Error::ZeroVector);
            }
            Ok(pair.norm(&at.sub(a)?)? / na)
        }
        ErrorModel::ComponentwiseMax | ErrorModel::ComponentwiseSum => {
            let mut acc = 0.0_f64;
            for (i, (a, b)) in xt.iter().zip(x).enumerate() {
                if *b == 0.0 {
                    return Err(Error::ZeroComponent { index: i });
                }
                let e = (a - b).abs() / b.abs();
                acc = if model == ErrorModel::ComponentwiseMax {
                    acc.max(e)
                } else {
                    acc + e
                };
            }
            Ok(acc)
        }
    }
}

/// The perturbation `E = delta * B` along which inversion is most sensitive.
///
/// With `y` attaining `||A^{-1}||_sr`, `x = A^{-1} y / ||A^{-1} y||_r` and `B`
/// the rank-one interpolator with `B x = y`, one has `||E||_rs = delta` and the
/// ratio of relative errors of `(A - E)^{-1}` and `A - E` tends to
/// `kappa_rs(A)` as `delta -> 0`.
pub fn worst_inversion_perturbation(a: &Matrix, pair: NormPair, delta: f64) -> Result<Matrix> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let w = worst_direction(a, pair)?;
    let e = rank_one_interpolator(&w.x, &w.y, pair.r, pair.s)?.scaled(delta);
    match invert(&a.sub(&e)?) {
        Ok(_) => Ok(e),
        Err(Error::SingularMatrix { .. }) => Err(Error::DeltaTooLarge { delta }),
        Err(err) => Err(err),
    }
}

/// `relerror((A - E)^{-1}, A^{-1}) / relerror(A - E, A)` for the worst
/// perturbation with `||E||_rs = delta`.
pub fn inversion_directional_ratio(a: &Matrix, pair: NormPair, delta: f64) -> Result<f64> {
    let e = worst_inversion_perturbation(a, pair, delta)?;
    let perturbed = a.sub(&e)?;
    let out = relerror(
        &invert(&perturbed)?,
        &invert(a)?,
        ErrorModel::Operator(pair.swapped()),
    )?;
    let inp = relerror(&perturbed, a, ErrorModel::Operator(pair))?;
    Ok(out / inp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimatorConfig {
    /// Strictly decreasing perturbation sizes.
    pub deltas: Vec<f64>,
    pub samples_per_delta: usize,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            deltas: vec![1e-4, 1e-5, 1e-6, 1e-7],
            samples_per_delta: 1000,
            seed: 0,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.deltas.is_empty() {
            return Err(Error::InvalidArgument("deltas must be nonempty".into()));
        }
        if self.deltas.iter().any(|d| !d.is_finite() || *d <= 0.0) {
            return Err(Error::InvalidArgument(
                "deltas must be positive and finite".into(),
            ));
        }
        if self.deltas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument(
                "deltas must be strictly decreasing".into(),
            ));
        }
        if self.samples_per_delta == 0 {
            return Err(Error::InvalidArgument(
                "samples_per_delta must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeltaEstimate {
    pub delta: f64,
    pub sampled_sup_ratio: f64,
    pub directional_ratio: Option<f64>,
    /// Perturbations that landed on a singular matrix and were redrawn.
    pub discarded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimateReport {
    pub kind: ProblemKind,
    pub per_delta: Vec<DeltaEstimate>,
    /// Largest ratio observed at the smallest delta.
    pub estimate: f64,
    pub closed_form: Option<f64>,
    /// Every observed ratio stays below the closed form up to second-order
    /// slack; vacuously true without a closed form.
    pub first_order_bound_check: bool,
}

/// A problem instance: the kind, its data and the norms it is measured in.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub kind: ProblemKind,
    pub matrix: &'a Matrix,
    /// `x` for `MatVec`, `b` for the solve problems.
    pub vector: Option<&'a [f64]>,
    pub pair: NormPair,
}

impl<'a> Problem<'a> {
    pub fn new(
        kind: ProblemKind,
        matrix: &'a Matrix,
        vector: Option<&'a [f64]>,
        pair: NormPair,
    ) -> Self {
        Self {
            kind,
            matrix,
            vector,
            pair,
        }
    }

    /// Input and output error models under which the closed forms hold.
    pub fn default_models(&self) -> (ErrorModel, ErrorModel) {
        let p = self.pair;
        match self.kind {
            ProblemKind::Inversion => (ErrorModel::Operator(p), ErrorModel::Operator(p.swapped())),
            ProblemKind::MatVec => (ErrorModel::Normwise(p.r), ErrorModel::Normwise(p.s)),
            ProblemKind::SolveFixedA => (ErrorModel::Normwise(p.s), ErrorModel::Normwise(p.r)),
            ProblemKind::SolveFixedB => (ErrorModel::Operator(p), ErrorModel::Normwise(p.r)),
            ProblemKind::SolveBoth => (ErrorModel::ComponentwiseMax, ErrorModel::Normwise(p.r)),
        }
    }

    fn vector(&self) -> Result<&'a [f64]> {
        self.vector
            .ok_or_else(|| Error::InvalidArgument(format!("{} requires a vector", self.kind)))
    }

    fn b_for_solve(&self) -> Result<&'a [f64]> {
        match self.kind {
            ProblemKind::SolveFixedB => self
                .vector
                .ok_or_else(|| Error::InvalidArgument("solve-fixed-b requires b".into())),
            _ => self.vector(),
        }
    }
}

/// Perturbed input of a problem.
enum Input {
    Vector(Vec<f64>),
    Matrix(Matrix),
    Pair(Matrix, Vec<f64>),
}

/// Exact output of a problem.
enum Output {
    Vector(Vec<f64>),
    Matrix(Matrix),
}

impl Output {
    fn operand(&self) -> Operand<'_> {
        match self {
            Output::Vector(v) => Operand::Vector(v),
            Output::Matrix(m) => Operand::Matrix(m),
        }
    }
}

struct Evaluator<'a> {
    problem: Problem<'a>,
    input_model: ErrorModel,
    output_model: ErrorModel,
    exact_output: Output,
}

impl<'a> Evaluator<'a> {
    fn new(
        problem: Problem<'a>,
        input_model: ErrorModel,
        output_model: ErrorModel,
    ) -> Result<Self> {
        if problem.kind == ProblemKind::SolveBoth
            && !matches!(
                input_model,
                ErrorModel::ComponentwiseMax | ErrorModel::ComponentwiseSum
            )
        {
            return Err(Error::InvalidArgument(
                "solve-both measures its (A, b) input componentwise".into(),
            ));
        }
        let exact = Self::output(&problem, &Self::base_input(&problem)?)?;
        Ok(Self {
            problem,
            input_model,
            output_model,
            exact_output: exact,
        })
    }

    fn base_input(problem: &Problem<'a>) -> Result<Input> {
        Ok(match problem.kind {
            ProblemKind::Inversion | ProblemKind::SolveFixedB => {
                Input::Matrix(problem.matrix.clone())
            }
            ProblemKind::MatVec | ProblemKind::SolveFixedA => {
                Input::Vector(problem.vector()?.to_vec())
            }
            ProblemKind::SolveBoth => {
                Input::Pair(problem.matrix.clone(), problem.vector()?.to_vec())
            }
        })
    }

    fn output(problem: &Problem<'a>, input: &Input) -> Result<Output> {
        let a = problem.matrix;
        Ok(match (problem.kind, input) {
            (ProblemKind::Inversion, Input::Matrix(m)) => Output::Matrix(invert(m)?),
            (ProblemKind::MatVec, Input::Vector(x)) => Output::Vector(a.matvec(x)?),
            (ProblemKind::SolveFixedA, Input::Vector(b)) => Output::Vector(solve(a, b)?),
            (ProblemKind::SolveFixedB, Input::Matrix(m)) => {
                Output::Vector(solve(m, problem.b_for_solve()?)?)
            }
            (ProblemKind::SolveBoth, Input::Pair(m, b)) => Output::Vector(solve(m, b)?),
            _ => unreachable!("input shape matches problem kind"),
        })
    }

    /// Input relative error of a perturbed input.
    fn input_error(&self, input: &Input) -> Result<f64> {
        let p = &self.problem;
        match input {
            Input::Vector(v) => relerror(v, p.vector()?, self.input_model),
            Input::Matrix(m) => relerror(m, p.matrix, self.input_model),
            Input::Pair(m, b) => {
                let ea = relerror(m, p.matrix, ErrorModel::Operator(p.pair))?;
                let eb = relerror(b, p.vector()?, ErrorModel::Normwise(p.pair.s))?;
                Ok(match self.input_model {
                    ErrorModel::ComponentwiseSum => ea + eb,
                    _ => ea.max(eb),
                })
            }
        }
    }

    /// Output-over-input ratio for a perturbed input, `None` when the
    /// perturbed problem is singular.
    fn ratio(&self, input: &Input) -> Result<Option<f64>> {
        let out = match Self::output(&self.problem, input) {
            Ok(o) => o,
            Err(Error::SingularMatrix { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let out_err = relerror(
            out.operand(),
            self.exact_output.operand(),
            self.output_model,
        )?;
        let in_err = self.input_error(input)?;
        if in_err == 0.0 {
            return Ok(None);
        }
        Ok(Some(out_err / in_err))
    }

    /// Random perturbation scaled so its input error is exactly `delta`
    /// (up to the rounding of forming `x + dx`).
    fn random_input(&self, delta: f64, g: &mut NormalSampler<impl rand::Rng>) -> Result<Input> {
        let p = &self.problem;
        let componentwise = matches!(
            self.input_model,
            ErrorModel::ComponentwiseMax | ErrorModel::ComponentwiseSum
        );
        let direction = |base: &[f64], g: &mut NormalSampler<_>| -> Vec<f64> {
            base.iter()
                .map(|&v| {
                    if componentwise {
                        v * g.sample()
                    } else {
                        g.sample()
                    }
                })
                .collect()
        };
        // Directions are built with zero scale first; their size is
        // measured with the same model and rescaled to delta.
        match p.kind {
            ProblemKind::MatVec | ProblemKind::SolveFixedA => {
                let x = p.vector()?;
                let d = direction(x, g);
                let size = relerror(&add(x, &d), x, self.input_model)?;
                Ok(Input::Vector(axpy_new(x, &d, delta / size)))
            }
            ProblemKind::Inversion | ProblemKind::SolveFixedB => {
                let a = p.matrix;
                let d = Matrix::new(a.rows(), a.cols(), direction(a.as_slice(), g))?;
                let size = relerror(&a.add(&d)?, a, self.input_model)?;
                Ok(Input::Matrix(a.add(&d.scaled(delta / size))?))
            }
            ProblemKind::SolveBoth => {
                let (a, b) = (p.matrix, p.vector()?);
                let da = Matrix::new(a.rows(), a.cols(), {
                    let mut v = Vec::with_capacity(a.rows() * a.cols());
                    for _ in 0..a.rows() * a.cols() {
                        v.push(g.sample());
                    }
                    v
                })?;
                let db: Vec<f64> = (0..b.len()).map(|_| g.sample()).collect();
                let ea = p.pair.norm(&da)? / p.pair.norm(a)?;
                let eb = vector_norm(&db, p.pair.s) / vector_norm(b, p.pair.s);
                let size = match self.input_model {
                    ErrorModel::ComponentwiseSum => ea + eb,
                    _ => ea.max(eb),
                };
                let c = delta / size;
                Ok(Input::Pair(a.add(&da.scaled(c))?, axpy_new(b, &db, c)))
            }
        }
    }

    /// Whether the models are the normwise ones the closed forms refer to.
    fn uses_default_models(&self) -> bool {
        (self.input_model, self.output_model) == self.problem.default_models()
    }

    /// Input perturbed along the first-order worst direction, with input
    /// relative error `delta`.
    fn worst_input(&self, delta: f64) -> Result<Input> {
        let p = &self.problem;
        let pair = p.pair;
        let a = p.matrix;
        Ok(match p.kind {
            ProblemKind::Inversion => {
                let e = worst_inversion_perturbation(a, pair, delta * pair.norm(a)?)?;
                Input::Matrix(a.sub(&e)?)
            }
            ProblemKind::MatVec => {
                let x = p.vector()?;
                let dir = operator_norm(a, pair.r, pair.s, pair.max_enum_dim)?.attainer;
                Input::Vector(axpy_new(x, &dir, delta * vector_norm(x, pair.r)))
            }
            ProblemKind::SolveFixedA => {
                let b = p.vector()?;
                let w = worst_direction(a, pair)?;
                Input::Vector(axpy_new(b, &w.y, delta * vector_norm(b, pair.s)))
            }
            ProblemKind::SolveFixedB => {
                let x = solve(a, p.b_for_solve()?)?;
                let da = self.worst_matrix_push(&x, delta)?;
                Input::Matrix(a.add(&da)?)
            }
            ProblemKind::SolveBoth => {
                let b = p.vector()?;
                let x = solve(a, b)?;
                let w = worst_direction(a, pair)?;
                let da = self.worst_matrix_push(&x, delta)?;
                let db = delta * vector_norm(b, pair.s);
                Input::Pair(a.add(&da)?, axpy_new(b, &w.y, db))
            }
        })
    }

    /// `dA = -delta ||A||_rs B` with `B x^ = y`, so that `-dA x` points along
    /// the direction `A^{-1}` stretches most.
    fn worst_matrix_push(&self, x: &[f64], delta: f64) -> Result<Matrix> {
        let pair = self.problem.pair;
        let a = self.problem.matrix;
        let w = worst_direction(a, pair)?;
        let nx = vector_norm(x, pair.r);
        if nx == 0.0 {
            return Err(Error::ZeroVector);
        }
        let xhat: Vec<f64> = x.iter().map(|v| v / nx).collect();
        let b = rank_one_interpolator(&xhat, &w.y, pair.r, pair.s)?;
        Ok(b.scaled(-delta * pair.norm(a)?))
    }
}

fn add(x: &[f64], d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + b).collect()
}

fn axpy_new(x: &[f64], d: &[f64], c: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + c * b).collect()
}

/// Resampling attempts per sample before giving up.
const MAX_ATTEMPTS: u64 = 10;

/// Estimates the condition number of `problem` from its definition.
///
/// For every delta in the schedule, `samples_per_delta` random perturbations
/// with input error `delta` are drawn (sample `i` at delta index `k` uses
/// substream `(seed, k, i)`), and the largest output/input ratio is kept.
/// When the models are the default normwise ones, the ratio along the
/// worst first-order direction is recorded as well.
pub fn estimate_condition(
    problem: &Problem<'_>,
    input_model: ErrorModel,
    output_model: ErrorModel,
    config: &EstimatorConfig,
) -> Result<EstimateReport> {
    config.validate()?;
    let eval = Evaluator::new(*problem, input_model, output_model)?;
    let closed_form = if eval.uses_default_models() {
        Some(
            condition_closed_form(problem.kind, problem.matrix, problem.vector, problem.pair)?
                .value,
        )
    } else {
        None
    };

    let mut per_delta = Vec::with_capacity(config.deltas.len());
    for (k, &delta) in config.deltas.iter().enumerate() {
        let draws: Vec<(f64, usize)> = (0..config.samples_per_delta as u64)
            .into_par_iter()
            .map(|i| -> Result<(f64, usize)> {
                for attempt in 0..MAX_ATTEMPTS {
                    let rng = substream(config.seed, k as u64, i | attempt << 48);
                    let mut g = NormalSampler::new(rng);
                    let input = eval.random_input(delta, &mut g)?;
                    if let Some(r) = eval.ratio(&input)? {
                        return Ok((r, attempt as usize));
                    }
                }
                Err(Error::SingularMatrix {
                    step: 0,
                    pivot: 0.0,
                })
            })
            .collect::<Result<_>>()?;
        let sampled_sup_ratio = draws.iter().fold(0.0_f64, |m, d| m.max(d.0));
        let discarded = draws.iter().map(|d| d.1).sum();

        let directional_ratio = if eval.uses_default_models() {
            match eval.worst_input(delta) {
                Ok(input) => eval.ratio(&input)?,
                Err(Error::DeltaTooLarge { .. }) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        per_delta.push(DeltaEstimate {
            delta,
            sampled_sup_ratio,
            directional_ratio,
            discarded,
        });
    }

    let last = per_delta.last().expect("nonempty schedule");
    let estimate = last
        .directional_ratio
        .map_or(last.sampled_sup_ratio, |d| d.max(last.sampled_sup_ratio));

    let first_order_bound_check = closed_form.is_none_or(|c| {
        per_delta.iter().all(|d| {
            let bound = c * (1.0 + 10.0 * d.delta * c.max(1.0));
            d.sampled_sup_ratio <= bound && d.directional_ratio.is_none_or(|r| r <= bound)
        })
    });

    Ok(EstimateReport {
        kind: problem.kind,
        per_delta,
        estimate,
        closed_form,
        first_order_bound_check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditioning::kappa;
    use NormIndex::*;

    fn pair(r: NormIndex, s: NormIndex) -> NormPair {
        NormPair::new(r, s)
    }

    fn small_config(seed: u64) -> EstimatorConfig {
        EstimatorConfig {
            samples_per_delta: 200,
            seed,
            ..EstimatorConfig::default()
        }
    }

    #[test]
    fn relerror_examples() {
        let x = [1.0, 0.0];
        let e = relerror(&[1.1, 0.0][..], &x[..], ErrorModel::Normwise(Two)).unwrap();
        assert!((e - 0.1).abs() < 1e-15);
        let x = [1.0, 2.0];
        let xt = [1.1, 2.2];
        let e = relerror(&xt[..], &x[..], ErrorModel::ComponentwiseMax).unwrap();
        assert!((e - 0.1).abs() < 1e-15);
        let e = relerror(&xt[..], &x[..], ErrorModel::ComponentwiseSum).unwrap();
        assert!((e - 0.2).abs() < 1e-15);
    }

    #[test]
    fn relerror_errors() {
        let z = [1.0, 0.0];
        assert_eq!(
            relerror(&[1.0, 0.1][..], &z[..], ErrorModel::ComponentwiseMax),
            Err(Error::ZeroComponent { index: 1 })
        );
        assert_eq!(
            relerror(&[1.0][..], &[0.0][..], ErrorModel::Normwise(One)),
            Err(Error::ZeroVector)
        );
        let m = Matrix::identity(2);
        assert!(matches!(
            relerror(&m, &m, ErrorModel::Normwise(Two)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            relerror(&[1.0][..], &[1.0][..], ErrorModel::Operator(pair(One, One))),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn relerror_matrix_models() {
        let a = Matrix::from_diag(&[1.0, 2.0]);
        let at = Matrix::from_diag(&[1.0, 2.2]);
        let e = relerror(&at, &a, ErrorModel::Operator(pair(Two, Two))).unwrap();
        assert!((e - 0.1).abs() < 1e-14);
        let full = Matrix::from_rows(&[[1.0, 2.0], [4.0, 8.0]]).unwrap();
        let ft = Matrix::from_rows(&[[1.1, 2.0], [4.0, 8.0]]).unwrap();
        let e = relerror(&ft, &full, ErrorModel::ComponentwiseMax).unwrap();
        assert!((e - 0.1).abs() < 1e-14);
        assert_eq!(
            relerror(&at, &a, ErrorModel::ComponentwiseMax),
            Err(Error::ZeroComponent { index: 1 })
        );
    }

    #[test]
    fn worst_inversion_diag() {
        let d = Matrix::from_diag(&[1.0, 2.0]);
        let delta = 1e-3;
        let e = worst_inversion_perturbation(&d, pair(Two, Two), delta).unwrap();
        let expected = Matrix::from_rows(&[[delta, 0.0], [0.0, 0.0]]).unwrap();
        assert!(e.sub(&expected).unwrap().max_abs() < 1e-18);
        assert!((pair(Two, Two).norm(&e).unwrap() - delta).abs() <= 1e-12 * delta);

        let r = inversion_directional_ratio(&d, pair(Two, Two), 1e-7).unwrap();
        assert!((r - 2.0).abs() <= 1e-4 * 2.0, "{r}");
        let r = inversion_directional_ratio(&Matrix::identity(3), pair(Two, Two), 1e-7).unwrap();
        assert!((r - 1.0).abs() <= 1e-4, "{r}");
    }

    #[test]
    fn worst_inversion_errors() {
        let d = Matrix::from_diag(&[1.0, 2.0]);
        assert_eq!(
            worst_inversion_perturbation(&d, pair(Two, Two), 1.0),
            Err(Error::DeltaTooLarge { delta: 1.0 })
        );
        assert!(matches!(
            worst_inversion_perturbation(&d, pair(Two, Two), 0.0),
            Err(Error::InvalidArgument(_))
        ));
        let s = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(
            worst_inversion_perturbation(&s, pair(Two, Two), 1e-3),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn estimate_inversion_diag() {
        let d = Matrix::from_diag(&[1.0, 2.0]);
        let problem = Problem::new(ProblemKind::Inversion, &d, None, pair(Two, Two));
        let (im, om) = problem.default_models();
        let rep = estimate_condition(&problem, im, om, &EstimatorConfig::default()).unwrap();
        assert_eq!(rep.closed_form, Some(kappa(&d, pair(Two, Two)).unwrap()));
        assert!((rep.estimate - 2.0).abs() <= 0.05 * 2.0);
        let dir = rep.per_delta.last().unwrap().directional_ratio.unwrap();
        assert!((dir - 2.0).abs() <= 1e-4 * 2.0);
        assert!(rep.first_order_bound_check);
        assert_eq!(rep.per_delta.len(), 4);
    }

    #[test]
    fn estimate_matvec_identity() {
        let i2 = Matrix::identity(2);
        let x = [1.0, 1.0];
        let problem = Problem::new(ProblemKind::MatVec, &i2, Some(&x), pair(Two, Two));
        let (im, om) = problem.default_models();
        let rep = estimate_condition(&problem, im, om, &small_config(1)).unwrap();
        assert!((rep.estimate - 1.0).abs() <= 0.05);
        assert!(rep.first_order_bound_check);
    }

    #[test]
    fn estimate_solve_both_identity() {
        let i2 = Matrix::identity(2);
        let b = [1.0, 0.0];
        let problem = Problem::new(ProblemKind::SolveBoth, &i2, Some(&b), pair(Two, Two));
        let (im, om) = problem.default_models();
        let rep = estimate_condition(&problem, im, om, &small_config(2)).unwrap();
        assert_eq!(rep.closed_form, Some(2.0));
        assert!((rep.estimate - 2.0).abs() <= 0.1 * 2.0, "{}", rep.estimate);
    }

    #[test]
    fn estimates_never_exceed_closed_forms() {
        let a = Matrix::from_rows(&[[2.0, 1.0, 0.0], [0.5, 3.0, -1.0], [1.0, 0.0, 1.5]]).unwrap();
        let v = [1.0, -2.0, 0.5];
        for kind in ProblemKind::ALL {
            for p in [pair(Two, Two), pair(One, Infinity), pair(Infinity, One)] {
                let problem = Problem::new(kind, &a, Some(&v), p);
                let (im, om) = problem.default_models();
                let rep = estimate_condition(&problem, im, om, &small_config(3)).unwrap();
                let c = rep.closed_form.unwrap();
                for d in &rep.per_delta {
                    assert!(d.sampled_sup_ratio <= c + 100.0 * d.delta * c, "{kind} {p}");
                }
                assert!(rep.first_order_bound_check, "{kind} {p}");
                // The worst-direction probe makes every normwise estimate sharp.
                assert!(
                    (rep.estimate - c).abs() <= 1e-3 * c,
                    "{kind} {p}: {} vs {c}",
                    rep.estimate
                );
            }
        }
    }

    #[test]
    fn more_samples_never_lower_the_estimate() {
        let a = Matrix::from_rows(&[[2.0, 1.0], [0.5, 3.0]]).unwrap();
        let problem = Problem::new(
            ProblemKind::SolveFixedB,
            &a,
            Some(&[1.0, 1.0]),
            pair(One, One),
        );
        let models = (ErrorModel::ComponentwiseMax, ErrorModel::Normwise(One));
        let mut cfg = small_config(9);
        let base = estimate_condition(&problem, models.0, models.1, &cfg).unwrap();
        cfg.samples_per_delta *= 2;
        let more = estimate_condition(&problem, models.0, models.1, &cfg).unwrap();
        for (x, y) in base.per_delta.iter().zip(&more.per_delta) {
            assert!(y.sampled_sup_ratio >= x.sampled_sup_ratio);
        }
        assert!(more.estimate >= base.estimate);
        assert_eq!(base.closed_form, None);
        assert!(base.per_delta.iter().all(|d| d.directional_ratio.is_none()));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = Matrix::from_rows(&[[2.0, 1.0], [0.5, 3.0]]).unwrap();
        let problem = Problem::new(ProblemKind::Inversion, &a, None, pair(Infinity, Two));
        let (im, om) = problem.default_models();
        let x = estimate_condition(&problem, im, om, &small_config(5)).unwrap();
        let y = estimate_condition(&problem, im, om, &small_config(5)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn config_validation() {
        let bad = EstimatorConfig {
            deltas: vec![1e-5, 1e-4],
            ..EstimatorConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = EstimatorConfig {
            deltas: vec![],
            ..EstimatorConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = EstimatorConfig {
            samples_per_delta: 0,
            ..EstimatorConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(EstimatorConfig::default().validate().is_ok());
    }

    #[test]
    fn solve_both_rejects_normwise_input() {
        let i2 = Matrix::identity(2);
        let problem = Problem::new(
            ProblemKind::SolveBoth,
            &i2,
            Some(&[1.0, 0.0]),
            pair(Two, Two),
        );
        assert!(matches!(
            estimate_condition(
                &problem,
                ErrorModel::Normwise(Two),
                ErrorModel::Normwise(Two),
                &small_config(0)
            ),
            Err(Error::InvalidArgument(_))
        ));
    }
}
