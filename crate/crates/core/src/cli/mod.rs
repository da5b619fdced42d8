//! Batch front end behind the `psidyn` binary.
//!
//! A run reads one TOML configuration (see [`RunConfig`]), executes its tasks
//! in order and writes `manifest.json` plus per-task artifacts into the output
//! directory. Exit status: 0 when every task finished and every hard assertion
//! held, 1 when a task errored or an assertion failed, 2 on configuration
//! errors.

mod config;

pub use config::{
    BuiltSymbol, CoefficientConfig, ConfigError, DuhamelConfig, Family, ForcingConfig, ForcingKind, GridConfig,
    InitialBuiltin, InitialConfig, MatrixConfig, Plan, PsiExpConfig, QuadratureConfig, RunConfig, Scalar,
    SymbolConfig, TaskConfig, WeightFamily, SPEC_VERSION,
};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::propagator::{kernel_snapshot_with, solve, write_trajectory, DuhamelSpec, TimeMesh};
use crate::spaces::{check_proposition, PropId};
use crate::spectral::{write_field, write_field_csv};
use crate::verify::{gronwall_gap, representation_residual, weak_form_residual, TestFunction};
use crate::wellposedness::{
    check_condition_a, check_condition_b, check_log_conditions, check_second_order, check_weight_lower_bounds,
    check_weighted, check_weighted_integral, LogCheckOptions,
};

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "PSIDYN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "psidyn", version, about = "Solve and check Cauchy problems with time-measurable Fourier symbols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory (overrides the config's `output_dir`).
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; 0 or absent uses all cores.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Seed for randomized checks (overrides the config's `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute every task of a configuration.
    Run { config: PathBuf },
    /// Print the plan of a configuration without computing anything.
    Describe { config: PathBuf },
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

/// Result of a run that got past configuration.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub exit_code: i32,
    pub output_dir: PathBuf,
    pub manifest: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskStatus {
    /// Finished, no assertion configured.
    Done,
    Passed,
    Failed,
    Error,
}

impl TaskStatus {
    fn name(self) -> &'static str {
        match self {
            TaskStatus::Done => "done",
            TaskStatus::Passed => "passed",
            TaskStatus::Failed => "failed",
            TaskStatus::Error => "error",
        }
    }
}

struct TaskOutput {
    report: Value,
    passed: Option<bool>,
    artifacts: Vec<PathBuf>,
}

fn base_dir(config: &Path) -> PathBuf {
    config.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Loads and validates a configuration.
pub fn load_plan(config: &Path) -> Result<Plan, ConfigError> {
    RunConfig::load(config)?.plan(&base_dir(config))
}

/// Human-readable plan of a configuration.
pub fn describe(config: &Path) -> Result<String, ConfigError> {
    let plan = load_plan(config)?;
    let cfg = &plan.config;
    let g = plan.grid;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "config: {}", config.display());
    let _ = writeln!(w, "spec_version: {}", cfg.spec_version);
    let _ = writeln!(
        w,
        "grid: dim {} n {} extent {} (dx {}, dxi {}, frequency radius {})",
        g.dim(),
        g.n(),
        g.extent(),
        g.dx(),
        g.dxi(),
        g.r_grid()
    );
    let _ = writeln!(w, "modes: {} (n^d = {}^{})", g.len(), g.n(), g.dim());
    let desc = plan.problem.symbol().descriptor();
    let _ = writeln!(
        w,
        "symbol: {} {} (zero mode: {:?})",
        desc.family,
        desc.parameters,
        cfg.symbol.zero_mode
    );
    let _ = writeln!(w, "initial: {}", cfg.initial.describe());
    let _ = writeln!(w, "forcing: {}", cfg.forcing.describe());
    let _ = writeln!(w, "times: {:?} (horizon {})", cfg.times, plan.horizon);
    let _ = writeln!(w, "quadrature: {}", serde_json::to_string(&plan.quad).unwrap_or_default());
    let _ = writeln!(
        w,
        "duhamel: {} ({} nodes over all output times)",
        serde_json::to_string(&plan.duhamel).unwrap_or_default(),
        plan.duhamel.node_count(plan.horizon, &cfg.times)
    );
    let _ = writeln!(w, "tasks: {}", cfg.tasks.len());
    for (i, task) in cfg.tasks.iter().enumerate() {
        let mut params = serde_json::to_value(task).unwrap_or(Value::Null);
        if let Some(m) = params.as_object_mut() {
            m.remove("kind");
        }
        let _ = writeln!(w, "  {}. {} {}", i + 1, task.name(), params);
    }
    if cfg.tasks.is_empty() {
        let _ = writeln!(w, "warning: no tasks");
    }
    Ok(out)
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, ConfigError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| ConfigError(format!("thread pool: {e}")))
}

/// Executes every task of `config` and writes `manifest.json`. Configuration
/// errors are returned before anything is written.
pub fn run(config: &Path, opts: &RunOptions) -> Result<RunSummary, ConfigError> {
    let plan = load_plan(config)?;
    let base = base_dir(config);
    let output_dir = match (&opts.output_dir, &plan.config.output_dir) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) if d.is_absolute() => d.clone(),
        (None, Some(d)) => base.join(d),
        (None, None) => base.join("psidyn-out"),
    };
    fs::create_dir_all(&output_dir)
        .map_err(|e| ConfigError(format!("cannot create output directory {}: {e}", output_dir.display())))?;
    let seed = opts.seed.or(plan.config.seed);
    let pool = thread_pool(opts.threads)?;

    let mut tasks = Vec::new();
    let mut exit_code = 0;
    for (i, task) in plan.config.tasks.iter().enumerate() {
        let dir = output_dir.join(format!("task_{:02}_{}", i + 1, task.name()));
        let outcome = pool.install(|| run_task(&plan, task, &dir, seed));
        let entry = match outcome {
            Ok(out) => {
                let status = match out.passed {
                    None => TaskStatus::Done,
                    Some(true) => TaskStatus::Passed,
                    Some(false) => TaskStatus::Failed,
                };
                if status == TaskStatus::Failed {
                    exit_code = 1;
                }
                let artifacts: Vec<String> = out
                    .artifacts
                    .iter()
                    .map(|p| p.strip_prefix(&output_dir).unwrap_or(p).display().to_string())
                    .collect();
                json!({
                    "index": i + 1,
                    "kind": task.name(),
                    "status": status.name(),
                    "report": out.report,
                    "artifacts": artifacts,
                })
            }
            Err(e) => {
                exit_code = 1;
                json!({
                    "index": i + 1,
                    "kind": task.name(),
                    "status": TaskStatus::Error.name(),
                    "error": e.to_string(),
                })
            }
        };
        tasks.push(entry);
    }

    let manifest = json!({
        "spec_version": SPEC_VERSION,
        "config": plan.config,
        "seed": seed,
        "grid": plan.grid,
        "symbol": plan.problem.symbol().descriptor().to_json(&plan.quad),
        "duhamel": plan.duhamel,
        "horizon": plan.horizon,
        "tasks": tasks,
        "exit_code": exit_code,
    });
    let path = output_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
    Ok(RunSummary {
        exit_code,
        output_dir,
        manifest,
    })
}

fn horizon_or(t: Option<f64>, plan: &Plan) -> f64 {
    t.unwrap_or(plan.horizon)
}

fn expect(finite: bool, expect_finite: Option<bool>) -> Option<bool> {
    expect_finite.map(|e| e == finite)
}

/// Duhamel mesh with every interval halved.
fn refined(duhamel: &DuhamelSpec, horizon: f64) -> DuhamelSpec {
    let mesh = match &duhamel.mesh {
        TimeMesh::Uniform { steps } => TimeMesh::Uniform { steps: 2 * steps },
        TimeMesh::Nodes { .. } => {
            let nodes = duhamel.mesh_nodes(horizon);
            let mut fine: Vec<f64> = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            fine.extend(nodes);
            fine.sort_by(f64::total_cmp);
            TimeMesh::Nodes { nodes: fine }
        }
    };
    DuhamelSpec { mesh, rule: duhamel.rule }
}

fn run_task(plan: &Plan, task: &TaskConfig, dir: &Path, seed: Option<u64>) -> Result<TaskOutput> {
    let problem = &plan.problem;
    let quad = &plan.quad;
    let times = &plan.config.times;
    match task {
        TaskConfig::Solve { forbid_overflow } => {
            let traj = solve(problem, times, quad, &plan.duhamel)?;
            let artifacts = write_trajectory(dir, &traj)?;
            Ok(TaskOutput {
                report: traj.manifest(),
                passed: forbid_overflow.then(|| !traj.any_overflow()),
                artifacts,
            })
        }
        TaskConfig::Kernel { s, t } => {
            let t = horizon_or(*t, plan);
            let k = kernel_snapshot_with(problem.symbol(), *s, t, &plan.grid, quad, problem.zero_mode())?;
            fs::create_dir_all(dir)?;
            let bin = dir.join("kernel.field");
            let csv = dir.join("kernel.csv");
            write_field(&bin, &k)?;
            write_field_csv(&csv, &k)?;
            Ok(TaskOutput {
                report: json!({ "s": s, "t": t, "max_abs": k.max_abs(), "l1": k.lq_norm(1.0) }),
                passed: None,
                artifacts: vec![bin, csv],
            })
        }
        TaskConfig::CondA { t, radius, expect_finite } | TaskConfig::CondB { t, radius, expect_finite } => {
            let t = horizon_or(*t, plan);
            let report = if matches!(task, TaskConfig::CondA { .. }) {
                check_condition_a(problem, t, *radius, quad)?
            } else {
                check_condition_b(problem, t, *radius, quad)?
            };
            Ok(TaskOutput {
                passed: expect(report.finite, *expect_finite),
                report: report.to_json(),
                artifacts: Vec::new(),
            })
        }
        TaskConfig::Weighted {
            t,
            radius,
            p,
            q,
            weights,
            gamma,
            expect_finite,
        } => {
            let t = horizon_or(*t, plan);
            let w = weights.build(*gamma);
            let lp_inf = check_weighted(problem, &w, *p, *q, t, *radius, quad)?;
            let integral = check_weighted_integral(problem, &w, *q, t, *radius, quad)?;
            let lower = check_weight_lower_bounds(&w, &plan.grid, t, *radius, quad)?;
            let finite = lp_inf.finite && integral.finite && lower.finite;
            Ok(TaskOutput {
                report: json!({
                    "lp_inf": lp_inf.to_json(),
                    "integral": integral.to_json(),
                    "lower_bounds": lower.to_json(),
                }),
                passed: expect(finite, *expect_finite),
                artifacts: Vec::new(),
            })
        }
        TaskConfig::LogConditions {
            t,
            radius,
            s_samples,
            expect_finite,
        } => {
            let BuiltSymbol::Log(sym) = &plan.symbol else {
                return Err(Error::InvalidArgument("task requires log-family symbol".into()));
            };
            let t = horizon_or(*t, plan);
            let opts = LogCheckOptions {
                s_samples: *s_samples,
                policy: problem.zero_mode(),
            };
            let report = check_log_conditions(sym, &plan.grid, t, *radius, quad, opts)?;
            Ok(TaskOutput {
                passed: expect(report.all_finite(), *expect_finite),
                report: report.to_json(),
                artifacts: Vec::new(),
            })
        }
        TaskConfig::SecondOrder { t, p, expect_finite } => {
            let BuiltSymbol::SecondOrder(sym) = &plan.symbol else {
                return Err(Error::InvalidArgument("task requires second_order symbol".into()));
            };
            let report = check_second_order(sym, *p, horizon_or(*t, plan), quad)?;
            Ok(TaskOutput {
                passed: expect(report.finite, *expect_finite),
                report: report.to_json(),
                artifacts: Vec::new(),
            })
        }
        TaskConfig::SpacesProps { props, params } => {
            let mut params = *params;
            if let Some(s) = seed {
                params.seed = s;
            }
            let list = props.clone().unwrap_or_else(|| PropId::ALL.to_vec());
            let mut reports = Vec::new();
            let mut passed = true;
            for prop in list {
                let r = check_proposition(prop, &params)?;
                passed &= r.diagnostic || r.passed;
                reports.push(r.to_json());
            }
            Ok(TaskOutput {
                report: json!({ "propositions": reports }),
                passed: Some(passed),
                artifacts: Vec::new(),
            })
        }
        TaskConfig::Residuals { radius, bumps, threshold } => {
            let traj = solve(problem, times, quad, &plan.duhamel)?;
            let mut rep = representation_residual(&traj, problem, *radius)?;
            if let Some(th) = threshold {
                rep = rep.with_threshold(*th);
            }
            fs::create_dir_all(dir)?;
            let radii = bumps.clone().unwrap_or_else(|| vec![*radius, radius / 2.0, radius / 4.0]);
            let mut weak = Vec::new();
            let mut artifacts = Vec::new();
            for (i, r0) in radii.iter().enumerate() {
                let phi = TestFunction::bump(&plan.grid, *r0)?;
                let w = weak_form_residual(&traj, problem, &phi)?;
                let path = dir.join(format!("weak_{}.csv", i + 1));
                w.write_csv(&path)?;
                artifacts.push(path);
                weak.push(w.to_json());
            }
            let fine = solve(problem, times, quad, &refined(&plan.duhamel, plan.horizon))?;
            let gap = gronwall_gap(&traj, &fine, problem.symbol(), quad, *radius)?;
            let rep_csv = dir.join("representation.csv");
            let gap_csv = dir.join("gap.csv");
            rep.write_csv(&rep_csv)?;
            gap.write_csv(&gap_csv)?;
            artifacts.insert(0, rep_csv);
            artifacts.push(gap_csv);
            Ok(TaskOutput {
                passed: rep.passed,
                report: json!({
                    "representation": rep.to_json(),
                    "weak_form": weak,
                    "gap_to_refined_mesh": gap.to_json(),
                }),
                artifacts,
            })
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Describe { config } => match describe(&config) {
            Ok(text) => {
                print!("{text}");
                0
            }
            Err(e) => {
                eprintln!("config error: {e}");
                2
            }
        },
        Command::Run { config } => {
            let opts = RunOptions {
                output_dir: cli.output_dir,
                threads: cli.threads,
                seed: cli.seed,
            };
            match run(&config, &opts) {
                Ok(summary) => {
                    for t in summary.manifest["tasks"].as_array().into_iter().flatten() {
                        let detail = t.get("error").and_then(Value::as_str).unwrap_or("");
                        let field = |k: &str| t[k].as_str().unwrap_or_default().to_string();
                        eprintln!("task {} {}: {} {}", t["index"], field("kind"), field("status"), detail);
                    }
                    eprintln!("manifest: {}", summary.output_dir.join("manifest.json").display());
                    summary.exit_code
                }
                Err(e) => {
                    eprintln!("config error: {e}");
                    2
                }
            }
        }
    }
}
