//! `goalpost`: place target levels for agents described in a JSON file.

mod input;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use goalpost_core::approx::{approx_solution, best_simultaneous_on_frontier, simultaneity_factor};
use goalpost_core::fptas::fptas_max_min;
use goalpost_core::learning::{
    deviation_experiment, required_samples_groups, required_samples_single, ExperimentParams,
};
use goalpost_core::model::group_totals;
use goalpost_core::oracle::{Oracle, DEFAULT_MAX_SUBSETS};
use goalpost_core::pareto::{max_min_solution, pareto_frontier, ParetoFrontier};
use goalpost_core::welfare::{
    max_total_improvement, max_total_with_min_improvers, optimal_target_count_sweep, BudgetCurve,
};
use goalpost_core::{Rational, TargetSet};
use serde_json::{json, Value};

use input::{load_instance, load_population, InputError};

const MAX_SUBSETS_VAR: &str = "GOALPOST_MAX_SUBSETS";

#[derive(Parser)]
#[command(name = "goalpost", version, about = "Exact target-level placement solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the result here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Solve {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    k: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum total improvement with at most k targets
    Solve(Solve),
    /// Maximum total improvement with at least n-lb improving agents
    SolveLb {
        #[command(flatten)]
        base: Solve,
        #[arg(long)]
        n_lb: usize,
    },
    /// Optimal value for every budget up to k
    Sweep(Solve),
    /// Pareto frontier of per-group welfare (integral instances)
    Pareto(Solve),
    /// Exact max-min group welfare (integral instances)
    Maxmin(Solve),
    /// Max-min group welfare within a factor 1 - epsilon
    Fptas {
        #[command(flatten)]
        base: Solve,
        #[arg(long)]
        epsilon: Rational,
    },
    /// Simultaneously approximate placement for every group
    FairApprox(Solve),
    /// Simultaneity factor of given targets, or the best one on the frontier
    Factor {
        #[arg(long)]
        instance: PathBuf,
        /// Budget each group's optimum is computed with
        #[arg(long)]
        budget: usize,
        /// Comma-separated target levels; omit to scan the frontier
        #[arg(long)]
        targets: Option<String>,
    },
    /// Exhaustive optimum, frontier and max-min over subsets of potential targets
    Oracle {
        #[command(flatten)]
        base: Solve,
        #[arg(long)]
        n_lb: Option<usize>,
    },
    /// Sample size needed for uniform convergence
    LearnBound {
        #[arg(long)]
        epsilon: Rational,
        #[arg(long)]
        delta: Rational,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta_max: Rational,
        /// Number of groups; switches to the per-group bound
        #[arg(long, requires = "alpha_min")]
        groups: Option<usize>,
        #[arg(long, requires = "groups")]
        alpha_min: Option<Rational>,
    },
    /// Monte-Carlo deviation between sampled and expected improvement
    LearnExperiment {
        /// Distribution file
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        epsilon: Rational,
        #[arg(long)]
        delta: Rational,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Success threshold is constant times epsilon
        #[arg(long, default_value = "1")]
        constant: Rational,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::SolveLb { .. } => "solve-lb",
            Command::Sweep(_) => "sweep",
            Command::Pareto(_) => "pareto",
            Command::Maxmin(_) => "maxmin",
            Command::Fptas { .. } => "fptas",
            Command::FairApprox(_) => "fair-approx",
            Command::Factor { .. } => "factor",
            Command::Oracle { .. } => "oracle",
            Command::LearnBound { .. } => "learn-bound",
            Command::LearnExperiment { .. } => "learn-experiment",
        }
    }
}

/// Errors reported as `{"error": code, "detail": ...}` with exit status 1.
#[derive(Debug)]
struct Failure {
    code: &'static str,
    detail: String,
}

impl From<goalpost_core::Error> for Failure {
    fn from(e: goalpost_core::Error) -> Self {
        Failure {
            code: e.code(),
            detail: e.to_string(),
        }
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure {
            code: e.code(),
            detail: e.to_string(),
        }
    }
}

enum Output {
    Json(Value),
    Csv(String),
}

fn targets_json(targets: &TargetSet) -> Value {
    json!(targets.levels())
}

fn oracle() -> Result<Oracle, Failure> {
    match std::env::var(MAX_SUBSETS_VAR) {
        Err(_) => Ok(Oracle::with_cap(DEFAULT_MAX_SUBSETS)),
        Ok(raw) => raw.trim().parse().map(Oracle::with_cap).map_err(|_| Failure {
            code: "InvalidEnvironment",
            detail: format!("{MAX_SUBSETS_VAR} must be a non-negative integer, got {raw:?}"),
        }),
    }
}

fn parse_targets(raw: &str) -> Result<TargetSet, Failure> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Rational>().map_err(Failure::from))
        .collect()
}

fn frontier_json(frontier: &ParetoFrontier) -> Value {
    json!(frontier
        .points
        .iter()
        .map(|p| json!({"tuple": p.tuple, "targets": targets_json(&p.targets)}))
        .collect::<Vec<_>>())
}

fn join(values: &[Rational], sep: &str) -> String {
    values.iter().map(Rational::to_string).collect::<Vec<_>>().join(sep)
}

fn sweep_csv(curve: &BudgetCurve) -> String {
    let mut out = String::from("k,value,targets\n");
    for e in &curve.entries {
        let _ = writeln!(out, "{},{},{}", e.k, e.value, join(e.targets.levels(), ";"));
    }
    out
}

fn frontier_csv(frontier: &ParetoFrontier, groups: usize) -> String {
    let mut header: Vec<String> = (0..groups).map(|l| format!("group_{l}")).collect();
    header.push("targets".into());
    let mut out = header.join(",");
    out.push('\n');
    for p in &frontier.points {
        let _ = writeln!(
            out,
            "{},{}",
            join(&p.tuple.per_group, ","),
            join(p.targets.levels(), ";")
        );
    }
    out
}

fn run(command: &Command, format: Format) -> Result<Output, Failure> {
    let name = command.name();
    let value = match command {
        Command::Solve(Solve { instance, k }) => {
            let inst = load_instance(instance)?;
            let sol = max_total_improvement(&inst, *k);
            json!({"command": name, "k": k, "targets": targets_json(&sol.targets), "value": sol.value})
        }
        Command::SolveLb {
            base: Solve { instance, k },
            n_lb,
        } => {
            let inst = load_instance(instance)?;
            match max_total_with_min_improvers(&inst, *k, *n_lb) {
                Some(sol) => json!({
                    "command": name, "k": k, "n_lb": n_lb, "feasible": true,
                    "targets": targets_json(&sol.targets), "value": sol.value,
                }),
                None => json!({
                    "command": name, "k": k, "n_lb": n_lb, "feasible": false,
                    "targets": [], "value": null,
                }),
            }
        }
        Command::Sweep(Solve { instance, k }) => {
            let inst = load_instance(instance)?;
            let curve = optimal_target_count_sweep(&inst, *k);
            if format == Format::Csv {
                return Ok(Output::Csv(sweep_csv(&curve)));
            }
            let entries: Vec<Value> = curve
                .entries
                .iter()
                .map(|e| json!({"k": e.k, "value": e.value, "targets": targets_json(&e.targets)}))
                .collect();
            json!({"command": name, "k": k, "entries": entries, "min_k_for_max": curve.min_k_for_max})
        }
        Command::Pareto(Solve { instance, k }) => {
            let inst = load_instance(instance)?;
            let frontier = pareto_frontier(&inst, *k)?;
            if format == Format::Csv {
                return Ok(Output::Csv(frontier_csv(&frontier, inst.num_groups())));
            }
            json!({"command": name, "k": k, "frontier": frontier_json(&frontier)})
        }
        Command::Maxmin(Solve { instance, k }) => {
            let inst = load_instance(instance)?;
            let (value, point) = max_min_solution(&inst, *k)?;
            json!({
                "command": name, "k": k, "value": value,
                "tuple": point.tuple, "targets": targets_json(&point.targets),
            })
        }
        Command::Fptas {
            base: Solve { instance, k },
            epsilon,
        } => {
            let inst = load_instance(instance)?;
            let out = fptas_max_min(&inst, *k, epsilon)?;
            json!({
                "command": name, "k": k, "epsilon": epsilon, "value": out.value,
                "branch": out.branch, "targets": targets_json(&out.targets),
                "tuple": group_totals(&inst, &out.targets),
            })
        }
        Command::FairApprox(Solve { instance, k }) => {
            let inst = load_instance(instance)?;
            let trace = approx_solution(&inst, *k)?;
            json!({
                "command": name, "k": k, "targets": targets_json(&trace.targets),
                "report": trace.report, "alpha": trace.alpha_k,
                "alpha_ceil": trace.alpha_ceil, "trace": trace,
            })
        }
        Command::Factor {
            instance,
            budget,
            targets,
        } => {
            let inst = load_instance(instance)?;
            match targets {
                Some(raw) => {
                    let set = parse_targets(raw)?;
                    json!({
                        "command": name, "k": budget, "targets": targets_json(&set),
                        "tuple": group_totals(&inst, &set),
                        "alpha": simultaneity_factor(&inst, &set, *budget),
                    })
                }
                None => {
                    let (alpha, point) = best_simultaneous_on_frontier(&inst, *budget)?;
                    json!({
                        "command": name, "k": budget, "targets": targets_json(&point.targets),
                        "tuple": point.tuple, "alpha": alpha,
                    })
                }
            }
        }
        Command::Oracle {
            base: Solve { instance, k },
            n_lb,
        } => {
            let inst = load_instance(instance)?;
            let oracle = oracle()?;
            let best = oracle.optimum(&inst, *k)?;
            let mut value = json!({
                "command": name, "k": k, "targets": targets_json(&best.targets),
                "value": best.value,
                "frontier": frontier_json(&oracle.pareto(&inst, *k)?),
                "max_min": oracle.max_min(&inst, *k)?,
            });
            if let Some(n_lb) = n_lb {
                value["n_lb"] = json!(n_lb);
                value["feasible"] = json!(oracle.lower_bound_feasible(&inst, *k, *n_lb)?);
            }
            value
        }
        Command::LearnBound {
            epsilon,
            delta,
            k,
            delta_max,
            groups,
            alpha_min,
        } => {
            let mut value = json!({
                "command": name, "k": k, "epsilon": epsilon, "delta": delta,
                "delta_max": delta_max,
            });
            let n = match (groups, alpha_min) {
                (Some(g), Some(a)) => {
                    value["groups"] = json!(g);
                    value["alpha_min"] = json!(a);
                    required_samples_groups(epsilon, delta, *k, delta_max, *g, a)?
                }
                _ => required_samples_single(epsilon, delta, *k, delta_max)?,
            };
            value["n"] = json!(n);
            value
        }
        Command::LearnExperiment {
            instance,
            k,
            epsilon,
            delta,
            trials,
            seed,
            constant,
        } => {
            let population = load_population(instance)?;
            let mut params =
                ExperimentParams::new(*k, epsilon.clone(), delta.clone(), *trials, *seed);
            params.constant = constant.clone();
            params.max_subsets = oracle()?.max_subsets;
            let report = deviation_experiment(&population, &params)?;
            json!({
                "command": name, "k": k, "epsilon": epsilon, "delta": delta,
                "constant": constant, "seed": seed, "report": report,
            })
        }
    };
    Ok(Output::Json(value))
}

fn emit(text: &str, out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    text
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let csv_ok = matches!(cli.command, Command::Sweep(_) | Command::Pareto(_));
    if cli.format == Format::Csv && !csv_ok {
        Cli::command()
            .error(
                ErrorKind::ArgumentConflict,
                format!("--format csv is only available for sweep and pareto, not {}", cli.command.name()),
            )
            .exit();
    }

    let (text, status) = match run(&cli.command, cli.format) {
        Ok(Output::Json(value)) => (pretty(&value), ExitCode::SUCCESS),
        Ok(Output::Csv(text)) => (text, ExitCode::SUCCESS),
        Err(f) => {
            let body = pretty(&json!({"error": f.code, "detail": f.detail}));
            print!("{body}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(&text, cli.out.as_ref()) {
        let body = pretty(&json!({"error": "Io", "detail": e.to_string()}));
        print!("{body}");
        return ExitCode::from(1);
    }
    status
}
