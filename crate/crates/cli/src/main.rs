mod args;
mod error;
mod io;
mod report;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use condlab::random_lab::{run_experiment, EnsembleKind, ExperimentConfig, Statistic, Verdict};
use condlab::{
    condition_closed_form, distance_to_singularity, estimate_condition, forward_substitution,
    kappa, mixed_condition, nearest_singular_perturbation, operator_norm,
    verify_backward_stability, EstimatorConfig, Matrix, NormPair, Problem, ProblemKind,
};

use args::{Cli, Command, CondArgs, ExperimentKind, Format, PairArgs};
use error::{exit, CliError};
use report::{Output, ReportEnvelope, TOOL_VERSION};

/// A finished command: its input echo, output and exit code.
struct Run {
    inputs: Value,
    output: Output,
    code: i32,
}

impl Run {
    fn ok(inputs: Value, output: Output) -> Self {
        Self {
            inputs,
            output,
            code: exit::OK,
        }
    }
}

fn pair_of(p: &PairArgs, max_enum_dim: usize) -> NormPair {
    NormPair::new(p.r, p.s).with_max_enum_dim(max_enum_dim)
}

fn echo_matrix(path: &Path, a: &Matrix, p: &PairArgs) -> Value {
    json!({
        "matrix": path.display().to_string(),
        "dims": [a.rows(), a.cols()],
        "r": p.r.as_str(),
        "s": p.s.as_str(),
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn load_problem(args: &CondArgs) -> Result<(Matrix, Option<Vec<f64>>, Value), CliError> {
    let a = io::read_matrix(&args.matrix)?;
    let vector = args.vector.as_deref().map(io::read_vector).transpose()?;
    if args.kind.needs_vector() && vector.is_none() {
        return Err(CliError::Input(format!("{} requires --vector", args.kind)));
    }
    let mut inputs = echo_matrix(&args.matrix, &a, &args.pair);
    inputs["kind"] = args.kind.as_str().into();
    if let Some(p) = &args.vector {
        inputs["vector"] = p.display().to_string().into();
    }
    Ok((a, vector, inputs))
}

fn execute(cli: &Cli) -> Result<Run, CliError> {
    let med = cli.max_enum_dim;
    let run = match &cli.command {
        Command::Norm(m) => {
            let a = io::read_matrix(&m.matrix)?;
            let res = operator_norm(&a, m.pair.r, m.pair.s, med)?;
            Run::ok(
                echo_matrix(&m.matrix, &a, &m.pair),
                Output::Report(to_value(&res)),
            )
        }
        Command::Kappa(m) => {
            let a = io::read_matrix(&m.matrix)?;
            let pair = pair_of(&m.pair, med);
            let k = condition_closed_form(ProblemKind::Inversion, &a, None, pair)?.value;
            Run::ok(
                echo_matrix(&m.matrix, &a, &m.pair),
                Output::Report(json!({ "kappa": k })),
            )
        }
        Command::Cond(c) => {
            let (a, v, inputs) = load_problem(c)?;
            let rep = condition_closed_form(c.kind, &a, v.as_deref(), pair_of(&c.pair, med))?;
            Run::ok(inputs, Output::Report(to_value(&rep)))
        }
        Command::Mixed(m) => {
            let a = io::read_matrix(&m.matrix)?;
            let b = io::read_vector(&m.vector)?;
            let rep = mixed_condition(&a, &b, pair_of(&m.pair, med))?;
            let mut inputs = echo_matrix(&m.matrix, &a, &m.pair);
            inputs["vector"] = m.vector.display().to_string().into();
            Run::ok(inputs, Output::Report(to_value(&rep)))
        }
        Command::Dist(m) => {
            let a = io::read_matrix(&m.matrix)?;
            let pair = pair_of(&m.pair, med);
            let d = distance_to_singularity(&a, pair)?;
            let norm = pair.norm(&a)?;
            let identity = (kappa(&a, pair)? * d - norm).abs() <= 1e-12 * norm;
            Run::ok(
                echo_matrix(&m.matrix, &a, &m.pair),
                Output::Report(json!({ "distance": d, "check_kappa_identity": identity })),
            )
        }
        Command::NearestSingular(m) => {
            let a = io::read_matrix(&m.matrix)?;
            let pair = pair_of(&m.pair, med);
            let e = nearest_singular_perturbation(&a, pair)?;
            let rows: Vec<Vec<f64>> = (0..e.rows()).map(|i| e.row(i).to_vec()).collect();
            let payload = json!({
                "perturbation": rows,
                "norm": pair.norm(&e)?,
                "distance": distance_to_singularity(&a, pair)?,
            });
            Run::ok(
                echo_matrix(&m.matrix, &a, &m.pair),
                Output::Matrix(payload, e),
            )
        }
        Command::Estimate(e) => {
            let (a, v, mut inputs) = load_problem(&e.problem)?;
            let config = EstimatorConfig {
                deltas: e.delta.clone(),
                samples_per_delta: e.samples,
                seed: e.seed,
            };
            inputs["seed"] = e.seed.into();
            inputs["config"] = to_value(&config);
            let problem = Problem::new(
                e.problem.kind,
                &a,
                v.as_deref(),
                pair_of(&e.problem.pair, med),
            );
            let (im, om) = problem.default_models();
            let rep = estimate_condition(&problem, im, om, &config)?;
            Run::ok(inputs, Output::Report(to_value(&rep)))
        }
        Command::SolveTri(t) => {
            let l = io::read_matrix(&t.matrix)?;
            let b = io::read_vector(&t.vector)?;
            let x = forward_substitution(&l, &b, t.precision)?;
            let inputs = tri_inputs(t, &l);
            Run::ok(inputs, Output::Vector(json!({ "solution": x.clone() }), x))
        }
        Command::VerifyTri(t) => {
            let l = io::read_matrix(&t.matrix)?;
            let b = io::read_vector(&t.vector)?;
            let rep = verify_backward_stability(&l, &b, t.precision)?;
            let code = if rep.satisfied {
                exit::OK
            } else {
                exit::BOUND_VIOLATED
            };
            Run {
                inputs: tri_inputs(t, &l),
                output: Output::Report(to_value(&rep)),
                code,
            }
        }
        Command::Experiment(x) => {
            let (ensemble, statistic) = match x.kind {
                ExperimentKind::FrobInv if x.columns => {
                    (EnsembleKind::UnitLowerGaussian, Statistic::ColSumsSq)
                }
                ExperimentKind::FrobInv => (EnsembleKind::UnitLowerGaussian, Statistic::FrobInvSq),
                ExperimentKind::KappaSq => (EnsembleKind::UnitLowerGaussian, Statistic::KappaSq),
                ExperimentKind::LogKappa => (EnsembleKind::LowerGaussian, Statistic::LogKappa),
                ExperimentKind::Ql => (EnsembleKind::QLPushforward, Statistic::LogKappa),
            };
            let config = ExperimentConfig {
                ensemble,
                sizes: x.n.clone(),
                trials: x.trials,
                seed: x.seed,
            };
            let summary = run_experiment(&config, statistic)?;
            let code = if summary.verdict == Verdict::Violates {
                exit::BOUND_VIOLATED
            } else {
                exit::OK
            };
            Run {
                inputs: json!({ "seed": x.seed, "config": to_value(&config), "statistic": statistic.as_str() }),
                output: Output::Experiment(summary),
                code,
            }
        }
    };
    Ok(run)
}

fn tri_inputs(t: &args::TriArgs, l: &Matrix) -> Value {
    json!({
        "matrix": t.matrix.display().to_string(),
        "vector": t.vector.display().to_string(),
        "dims": [l.rows(), l.cols()],
        "precision": t.precision.as_str(),
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Norm(_) => "norm",
        Command::Kappa(_) => "kappa",
        Command::Cond(_) => "cond",
        Command::Mixed(_) => "mixed",
        Command::Dist(_) => "dist",
        Command::NearestSingular(_) => "nearest-singular",
        Command::Estimate(_) => "estimate",
        Command::SolveTri(_) => "solve-tri",
        Command::VerifyTri(_) => "verify-tri",
        Command::Experiment(x) => match x.kind {
            ExperimentKind::FrobInv => "experiment frob-inv",
            ExperimentKind::KappaSq => "experiment kappa-sq",
            ExperimentKind::LogKappa => "experiment log-kappa",
            ExperimentKind::Ql => "experiment ql",
        },
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("THREADS") {
        let n: usize = v.parse().map_err(|_| {
            CliError::Input(format!("THREADS must be a positive integer, got `{v}`"))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot configure {n} threads: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() {
                exit::MALFORMED_INPUT
            } else {
                exit::OK
            };
            return ExitCode::from(code as u8);
        }
    };
    let result = configure_threads().and_then(|_| execute(&cli));
    let run = match result {
        Ok(run) => run,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = match cli.format {
        Format::Json => {
            let envelope = ReportEnvelope {
                command: command_name(&cli.command).to_string(),
                inputs: run.inputs,
                payload: run.output.payload(),
                tool_version: TOOL_VERSION,
            };
            serde_json::to_string_pretty(&envelope).expect("envelope serializes") + "\n"
        }
        Format::Csv => run.output.to_csv(),
    };
    let mut stdout = std::io::stdout().lock();
    if stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .is_err()
    {
        return ExitCode::from(exit::MALFORMED_INPUT as u8);
    }
    ExitCode::from(run.code as u8)
}
