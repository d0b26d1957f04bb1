//! Condition numbers of matrix problems, computed in closed form and
//! checked against their limit-of-suprema definitions.
//!
//! The crate covers mixed `(r, s)` operator norms for `r, s in {1, 2, inf}`,
//! the condition numbers of inversion, matrix-vector products and linear
//! solves, distance to the singular set together with the nearest singular
//! perturbation, sampling estimators of condition numbers, backward error of
//! forward substitution in emulated single precision, and Monte Carlo
//! experiments on random triangular matrices.

pub mod conditioning;
pub mod empirical;
pub mod error;
pub mod lu;
pub mod matrix;
pub mod norms;
pub mod ql;
pub mod random_lab;
pub mod rng;
pub mod svd;
pub mod triangular;

pub use conditioning::{
    condition_closed_form, distance_to_singularity, kappa, mixed_condition,
    nearest_singular_perturbation, ConditionReport, ProblemKind,
};
pub use empirical::{
    estimate_condition, inversion_directional_ratio, relerror, worst_inversion_perturbation,
    DeltaEstimate, ErrorModel, EstimateReport, EstimatorConfig, Operand, Problem,
};
pub use error::{Error, Result};
pub use lu::{invert, lu_decompose, solve, LuFactors, DEFAULT_PIVOT_TOLERANCE};
pub use matrix::Matrix;
pub use norms::{
    dual_witness, operator_norm, rank_one_interpolator, vector_norm, NormIndex, NormMethod,
    NormPair, OperatorNormResult, DEFAULT_MAX_ENUM_DIM,
};
pub use ql::{ql_decompose, ql_lower, QlFactors};
pub use random_lab::{
    run_experiment, sample_matrix, EnsembleKind, ExperimentConfig, ExperimentSummary, Statistic,
    Verdict,
};
pub use svd::{singular_values, SingularValues};
pub use triangular::{
    check_hypothesis, componentwise_backward_error, forward_substitution,
    verify_backward_stability, BackwardErrorReport, PrecisionMode,
};

/// Frobenius norm of `a`.
pub fn frobenius_norm(a: &Matrix) -> f64 {
    a.frobenius_norm()
}
