//! Monte Carlo experiments on random lower triangular matrices.
//!
//! Three ensembles are sampled: unit lower triangular with Gaussian entries
//! below the diagonal, lower triangular with Gaussian entries on and below it,
//! and the lower triangular QL factor of a dense Gaussian matrix. Each trial
//! draws from its own substream keyed by `(seed, size index, trial index)`,
//! so summaries do not depend on how trials are scheduled across threads.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ql::ql_lower;
use crate::rng::{substream, NormalSampler};
use crate::svd::singular_values;
use crate::triangular::{forward_substitution, PrecisionMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnsembleKind {
    UnitLowerGaussian,
    LowerGaussian,
    QLPushforward,
}

impl EnsembleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnsembleKind::UnitLowerGaussian => "UnitLowerGaussian",
            EnsembleKind::LowerGaussian => "LowerGaussian",
            EnsembleKind::QLPushforward => "QLPushforward",
        }
    }
}

impl std::fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Statistic {
    /// `||L^{-1}||_F^2`.
    FrobInvSq,
    /// Column sums `sum_i s_ik^2` of `S = L^{-1}`, one per column `k`.
    ColSumsSq,
    /// `kappa_2(L)^2`.
    KappaSq,
    /// `ln kappa_2(L)`.
    LogKappa,
}

impl Statistic {
    pub fn as_str(self) -> &'static str {
        match self {
            Statistic::FrobInvSq => "frobInvSq",
            Statistic::ColSumsSq => "colSumsSq",
            Statistic::KappaSq => "kappaSq",
            Statistic::LogKappa => "logKappa",
        }
    }

    fn compatible_with(self, ensemble: EnsembleKind) -> bool {
        match self {
            Statistic::FrobInvSq | Statistic::ColSumsSq | Statistic::KappaSq => {
                ensemble == EnsembleKind::UnitLowerGaussian
            }
            Statistic::LogKappa => ensemble != EnsembleKind::UnitLowerGaussian,
        }
    }
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub ensemble: EnsembleKind,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidArgument("sizes must be nonempty".into()));
        }
        if self.sizes.contains(&0) {
            return Err(Error::InvalidArgument("sizes must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Verdict {
    Matches,
    ExceedsBound,
    Violates,
}

/// Sample moments and order statistics of one scalar statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Moments {
    pub sample_mean: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub sample_std_error: f64,
    pub min: f64,
    pub max: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

impl Moments {
    /// Moments of `values`; the values are sorted in place.
    pub fn of(values: &mut [f64]) -> Self {
        let t = values.len() as f64;
        let mean = pairwise_sum(values) / t;
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = if values.len() > 1 {
            pairwise_sum(&dev) / (t - 1.0)
        } else {
            0.0
        };
        values.sort_by(f64::total_cmp);
        Self {
            sample_mean: mean,
            sample_std_error: (var / t).sqrt(),
            min: values[0],
            max: values[values.len() - 1],
            q05: quantile(values, 0.05),
            q50: quantile(values, 0.50),
            q95: quantile(values, 0.95),
        }
    }

    /// `|mean - target| <= 4 * std_error`.
    pub fn within_four_std_errors(&self, target: f64) -> bool {
        (self.sample_mean - target).abs() <= 4.0 * self.sample_std_error
    }
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 64 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Linearly interpolated quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ColumnSummary {
    /// One-based column index.
    pub k: usize,
    #[serde(flatten)]
    pub moments: Moments,
    /// `2^(n-k)`.
    pub prediction: f64,
    pub within_four_std_errors: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SizeSummary {
    pub n: usize,
    /// Moments of the statistic; for `colSumsSq` these are of their total,
    /// `||L^{-1}||_F^2`.
    #[serde(flatten)]
    pub moments: Moments,
    /// The predicted value or lower bound at this `n`: `2^n - 1` for the
    /// Frobenius statistics, `(2^n - 1) / n` for `kappaSq`,
    /// `n ln 2 - ln n - 1` for Gaussian `logKappa`, `ln n` for the QL factor.
    pub prediction: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<ColumnSummary>>,
    /// `n (2^n - 1)`, the larger constant stated for `E[kappa^2]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stated_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exceeds_stated_bound: Option<bool>,
    /// Samples with `kappa^2 < ||L^{-1}||_F^2 / n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pointwise_violations: Option<usize>,
    /// `mean - ln n` for the QL factor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centered_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentSummary {
    pub ensemble: EnsembleKind,
    pub statistic: Statistic,
    pub trials: usize,
    pub seed: u64,
    pub per_size: Vec<SizeSummary>,
    pub verdict: Verdict,
    /// Largest `|centered(n_{i+1}) - centered(n_i)|` for the QL factor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_centered_step: Option<f64>,
}

/// Allowed drift of `mean - ln n` between consecutive sizes.
pub const CENTERED_STEP_TOLERANCE: f64 = 0.3;

/// Draws one matrix of size `n` from `ensemble`.
pub fn sample_matrix<R: Rng>(
    ensemble: EnsembleKind,
    n: usize,
    g: &mut NormalSampler<R>,
) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::EmptyMatrix { rows: 0, cols: 0 });
    }
    match ensemble {
        EnsembleKind::UnitLowerGaussian | EnsembleKind::LowerGaussian => {
            let unit = ensemble == EnsembleKind::UnitLowerGaussian;
            let mut l = Matrix::zeros(n, n);
            for i in 0..n {
                let row = l.row_mut(i);
                for x in &mut row[..i] {
                    *x = g.sample();
                }
                row[i] = if unit { 1.0 } else { g.sample() };
            }
            Ok(l)
        }
        EnsembleKind::QLPushforward => {
            let a = Matrix::from_vec(n, n, g.sample_vec(n * n));
            ql_lower(&a)
        }
    }
}

/// Squared column norms of `L^{-1}`, via one triangular solve per column.
pub fn inverse_column_sums(l: &Matrix) -> Result<Vec<f64>> {
    let n = l.ensure_square()?;
    let mut e = vec![0.0; n];
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        e[k] = 1.0;
        let s = forward_substitution(l, &e, PrecisionMode::Working)?;
        e[k] = 0.0;
        out.push(s.iter().map(|v| v * v).sum());
    }
    Ok(out)
}

/// What one trial records.
struct Trial {
    value: f64,
    columns: Vec<f64>,
    pointwise_violation: bool,
}

fn run_trial(
    ensemble: EnsembleKind,
    statistic: Statistic,
    n: usize,
    g: &mut NormalSampler<impl Rng>,
) -> Result<Trial> {
    let l = sample_matrix(ensemble, n, g)?;
    Ok(match statistic {
        Statistic::FrobInvSq | Statistic::ColSumsSq => {
            let columns = inverse_column_sums(&l)?;
            Trial {
                value: columns.iter().sum(),
                columns: if statistic == Statistic::ColSumsSq {
                    columns
                } else {
                    Vec::new()
                },
                pointwise_violation: false,
            }
        }
        Statistic::KappaSq => {
            let kappa = singular_values(&l)?.condition();
            let frob: f64 = inverse_column_sums(&l)?.iter().sum();
            let kappa_sq = kappa * kappa;
            Trial {
                value: kappa_sq,
                columns: Vec::new(),
                // Equality holds at n = 1; allow for rounding in both sides.
                pointwise_violation: kappa_sq < frob / n as f64 * (1.0 - 1e-10),
            }
        }
        Statistic::LogKappa => Trial {
            value: singular_values(&l)?.condition().ln(),
            columns: Vec::new(),
            pointwise_violation: false,
        },
    })
}

/// Runs `config.trials` trials at every size and summarizes `statistic`.
pub fn run_experiment(
    config: &ExperimentConfig,
    statistic: Statistic,
) -> Result<ExperimentSummary> {
    config.validate()?;
    if !statistic.compatible_with(config.ensemble) {
        return Err(Error::IncompatibleStatistic {
            statistic: statistic.as_str(),
            ensemble: config.ensemble.as_str(),
        });
    }

    let mut per_size = Vec::with_capacity(config.sizes.len());
    for (size_index, &n) in config.sizes.iter().enumerate() {
        let trials: Vec<Trial> = (0..config.trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut g = NormalSampler::new(substream(config.seed, size_index as u64, t));
                run_trial(config.ensemble, statistic, n, &mut g)
            })
            .collect::<Result<_>>()?;
        per_size.push(summarize_size(config.ensemble, statistic, n, &trials));
    }

    let mut max_centered_step = None;
    let verdict = match (statistic, config.ensemble) {
        (Statistic::LogKappa, EnsembleKind::QLPushforward) => {
            let step = per_size
                .windows(2)
                .map(|w| (w[1].centered_mean.unwrap() - w[0].centered_mean.unwrap()).abs())
                .fold(0.0_f64, f64::max);
            max_centered_step = Some(step);
            if step <= CENTERED_STEP_TOLERANCE {
                Verdict::Matches
            } else {
                Verdict::Violates
            }
        }
        _ => {
            let first = per_size[0].verdict;
            if per_size.iter().all(|s| s.verdict == first) {
                first
            } else {
                Verdict::Violates
            }
        }
    };

    Ok(ExperimentSummary {
        ensemble: config.ensemble,
        statistic,
        trials: config.trials,
        seed: config.seed,
        per_size,
        verdict,
        max_centered_step,
    })
}

fn summarize_size(
    ensemble: EnsembleKind,
    statistic: Statistic,
    n: usize,
    trials: &[Trial],
) -> SizeSummary {
    let mut values: Vec<f64> = trials.iter().map(|t| t.value).collect();
    let moments = Moments::of(&mut values);
    let nf = n as f64;
    let two_n_minus_one = 2f64.powi(n as i32) - 1.0;
    let mut summary = SizeSummary {
        n,
        prediction: 0.0,
        verdict: Verdict::Violates,
        columns: None,
        stated_bound: None,
        exceeds_stated_bound: None,
        pointwise_violations: None,
        centered_mean: None,
        moments,
    };
    let mean = summary.moments.sample_mean;
    match statistic {
        Statistic::FrobInvSq => {
            summary.prediction = two_n_minus_one;
            if summary.moments.within_four_std_errors(two_n_minus_one) {
                summary.verdict = Verdict::Matches;
            }
        }
        Statistic::ColSumsSq => {
            summary.prediction = two_n_minus_one;
            let columns: Vec<ColumnSummary> = (0..n)
                .map(|k| {
                    let mut col: Vec<f64> = trials.iter().map(|t| t.columns[k]).collect();
                    let moments = Moments::of(&mut col);
                    let prediction = 2f64.powi((n - k - 1) as i32);
                    ColumnSummary {
                        k: k + 1,
                        within_four_std_errors: moments.within_four_std_errors(prediction),
                        moments,
                        prediction,
                    }
                })
                .collect();
            if columns.iter().all(|c| c.within_four_std_errors) {
                summary.verdict = Verdict::Matches;
            }
            summary.columns = Some(columns);
        }
        Statistic::KappaSq => {
            let violations = trials.iter().filter(|t| t.pointwise_violation).count();
            let stated = nf * two_n_minus_one;
            summary.prediction = two_n_minus_one / nf;
            summary.stated_bound = Some(stated);
            summary.exceeds_stated_bound = Some(mean >= stated);
            summary.pointwise_violations = Some(violations);
            if violations == 0 && mean >= summary.prediction {
                summary.verdict = Verdict::ExceedsBound;
            }
        }
        Statistic::LogKappa => match ensemble {
            EnsembleKind::QLPushforward => {
                summary.prediction = nf.ln();
                summary.centered_mean = Some(mean - nf.ln());
                summary.verdict = Verdict::Matches;
            }
            _ => {
                summary.prediction = nf * std::f64::consts::LN_2 - nf.ln() - 1.0;
                if mean >= summary.prediction {
                    summary.verdict = Verdict::ExceedsBound;
                }
            }
        },
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ql::ql_decompose;

    fn config(
        ensemble: EnsembleKind,
        sizes: Vec<usize>,
        trials: usize,
        seed: u64,
    ) -> ExperimentConfig {
        ExperimentConfig {
            ensemble,
            sizes,
            trials,
            seed,
        }
    }

    #[test]
    fn unit_lower_samples() {
        let mut g = NormalSampler::new(substream(1, 0, 0));
        let one = sample_matrix(EnsembleKind::UnitLowerGaussian, 1, &mut g).unwrap();
        assert_eq!(one, Matrix::identity(1));
        let l = sample_matrix(EnsembleKind::UnitLowerGaussian, 3, &mut g).unwrap();
        assert_eq!(l.diagonal(), vec![1.0; 3]);
        assert!(l.is_lower_triangular());
        assert!(l[(1, 0)] != 0.0 && l[(2, 0)] != 0.0 && l[(2, 1)] != 0.0);
    }

    #[test]
    fn lower_gaussian_samples() {
        let mut g = NormalSampler::new(substream(2, 0, 0));
        let l = sample_matrix(EnsembleKind::LowerGaussian, 5, &mut g).unwrap();
        assert!(l.is_lower_triangular());
        assert!(l.diagonal().iter().all(|&d| d != 0.0 && d != 1.0));
    }

    #[test]
    fn ql_samples_preserve_conditioning() {
        for seed in 0..10 {
            let mut g = NormalSampler::new(substream(seed, 3, 0));
            let l = sample_matrix(EnsembleKind::QLPushforward, 8, &mut g).unwrap();
            let mut g = NormalSampler::new(substream(seed, 3, 0));
            let a = Matrix::new(8, 8, g.sample_vec(64)).unwrap();
            let f = ql_decompose(&a).unwrap();
            assert_eq!(f.lower, l);
            assert!(l.is_lower_triangular());
            assert!(l.diagonal().iter().all(|&d| d >= 0.0));
            let (ka, kl) = (
                singular_values(&a).unwrap().condition(),
                singular_values(&l).unwrap().condition(),
            );
            assert!((ka - kl).abs() <= 1e-10 * ka);
        }
    }

    #[test]
    fn frob_inv_sq_at_one_is_exact() {
        let s = run_experiment(
            &config(EnsembleKind::UnitLowerGaussian, vec![1], 50, 0),
            Statistic::FrobInvSq,
        )
        .unwrap();
        let m = &s.per_size[0].moments;
        assert_eq!(m.sample_mean, 1.0);
        assert_eq!(m.sample_std_error, 0.0);
        assert_eq!(s.verdict, Verdict::Matches);
    }

    #[test]
    fn frob_inv_sq_two_by_two() {
        let s = run_experiment(
            &config(EnsembleKind::UnitLowerGaussian, vec![2], 200_000, 42),
            Statistic::FrobInvSq,
        )
        .unwrap();
        assert!(s.per_size[0].moments.within_four_std_errors(3.0));
        assert_eq!(s.verdict, Verdict::Matches);
    }

    #[test]
    fn exact_law_for_two_by_two() {
        // L = [[1, 0], [l, 1]] has L^{-1} = [[1, 0], [-l, 1]], so the
        // statistic is 2 + l^2 with the l drawn by the sampler.
        let mut g = NormalSampler::new(substream(7, 0, 0));
        let l = sample_matrix(EnsembleKind::UnitLowerGaussian, 2, &mut g).unwrap();
        let sums = inverse_column_sums(&l).unwrap();
        let x = l[(1, 0)];
        assert!((sums[0] - (1.0 + x * x)).abs() <= 1e-15 * (1.0 + x * x));
        assert_eq!(sums[1], 1.0);
    }

    #[test]
    fn column_sums_small() {
        let s = run_experiment(
            &config(EnsembleKind::UnitLowerGaussian, vec![3, 4], 50_000, 3),
            Statistic::ColSumsSq,
        )
        .unwrap();
        for size in &s.per_size {
            let cols = size.columns.as_ref().unwrap();
            assert_eq!(cols.len(), size.n);
            assert_eq!(cols.last().unwrap().prediction, 1.0);
            assert_eq!(cols.last().unwrap().moments.sample_std_error, 0.0);
        }
        assert_eq!(s.verdict, Verdict::Matches);
    }

    #[test]
    fn kappa_sq_reports_both_bounds() {
        let s = run_experiment(
            &config(EnsembleKind::UnitLowerGaussian, vec![1, 2, 4, 6], 2000, 11),
            Statistic::KappaSq,
        )
        .unwrap();
        for size in &s.per_size {
            assert_eq!(size.pointwise_violations, Some(0));
            let n = size.n as f64;
            assert_eq!(
                size.stated_bound,
                Some(n * (2f64.powi(size.n as i32) - 1.0))
            );
            assert_eq!(size.prediction, (2f64.powi(size.n as i32) - 1.0) / n);
            assert!(size.exceeds_stated_bound.is_some());
        }
        assert_eq!(s.verdict, Verdict::ExceedsBound);
    }

    #[test]
    fn log_kappa_lower_gaussian() {
        let s = run_experiment(
            &config(EnsembleKind::LowerGaussian, vec![10], 2000, 5),
            Statistic::LogKappa,
        )
        .unwrap();
        assert!((s.per_size[0].prediction - 3.628887).abs() < 1e-6);
        assert_eq!(s.verdict, Verdict::ExceedsBound);
    }

    #[test]
    fn ql_centered_means() {
        let s = run_experiment(
            &config(EnsembleKind::QLPushforward, vec![4, 8], 500, 5),
            Statistic::LogKappa,
        )
        .unwrap();
        for size in &s.per_size {
            let c = size.centered_mean.unwrap();
            assert!((c - (size.moments.sample_mean - (size.n as f64).ln())).abs() < 1e-15);
        }
        assert!(s.max_centered_step.is_some());
    }

    #[test]
    fn incompatible_statistics() {
        for (ens, stat) in [
            (EnsembleKind::LowerGaussian, Statistic::FrobInvSq),
            (EnsembleKind::QLPushforward, Statistic::KappaSq),
            (EnsembleKind::UnitLowerGaussian, Statistic::LogKappa),
        ] {
            assert!(matches!(
                run_experiment(&config(ens, vec![2], 10, 0), stat),
                Err(Error::IncompatibleStatistic { .. })
            ));
        }
        assert!(run_experiment(
            &config(EnsembleKind::LowerGaussian, vec![], 10, 0),
            Statistic::LogKappa
        )
        .is_err());
        assert!(run_experiment(
            &config(EnsembleKind::LowerGaussian, vec![2], 0, 0),
            Statistic::LogKappa
        )
        .is_err());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = config(EnsembleKind::UnitLowerGaussian, vec![3, 5], 3000, 99);
        let a = run_experiment(&cfg, Statistic::ColSumsSq).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let b = pool
            .install(|| run_experiment(&cfg, Statistic::ColSumsSq))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quantiles_interpolate() {
        let mut v = vec![4.0, 1.0, 3.0, 2.0, 5.0];
        let m = Moments::of(&mut v);
        assert_eq!((m.min, m.q50, m.max), (1.0, 3.0, 5.0));
        assert!((m.q05 - 1.2).abs() < 1e-15);
        assert!((m.q95 - 4.8).abs() < 1e-15);
        assert_eq!(m.sample_mean, 3.0);
        assert!((m.sample_std_error - (2.5f64 / 5.0).sqrt()).abs() < 1e-15);
    }
}
