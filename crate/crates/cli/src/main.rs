//! `trstl`: monitor trajectories, export MILP encodings, synthesize and plot
//! missions.
//!
//! Exit codes: 0 success, 1 specification violated, 2 invalid input,
//! 3 infeasible, 4 solver limit reached, 5 monitor disagrees with the solver.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use trstl_core::bench::{load_benchmarks, run_benchmarks, Scale};
use trstl_core::encoder::EncodeError;
use trstl_core::milp::SolveStatus;
use trstl_core::mission::{Mission, TrajectoryFile};
use trstl_core::monitor::MonitorReport;
use trstl_core::solver::{export_lp, import_solution, SolverConfig, SolverError, DEFAULT_MAX_BINARIES};
use trstl_core::svg::render_svg;
use trstl_core::synthesis::{SynthesisError, SynthesisRun};
use trstl_core::{Rational, Scalar};

const EXIT_VIOLATED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_LIMIT: u8 = 4;
const EXIT_MISMATCH: u8 = 5;

/// Error carrying the process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn fail(code: u8, error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code,
        error: error.into(),
    }
}

trait OrExit<T> {
    fn or_exit(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| fail(code, e))
    }
}

#[derive(Parser)]
#[command(name = "trstl", version, about = "Time-robust STL monitoring and trajectory synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a trajectory against a mission's formula.
    Monitor {
        mission: PathBuf,
        trajectory: PathBuf,
        /// Report every segment instead of segment 0 only.
        #[arg(long)]
        full: bool,
    },
    /// Encode a mission as a MILP, print counts and optionally write an LP file.
    Encode {
        mission: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the mission's number of waypoints.
        #[arg(long = "k")]
        k: Option<usize>,
    },
    /// Synthesize a trajectory and verify it with the monitor.
    Synth {
        mission: PathBuf,
        #[arg(long, value_enum, default_value_t = SolverKind::Builtin)]
        solver: SolverKind,
        /// `name value` solution file of an external solver.
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Where to write the trajectory JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Try K = 2, 3, ... up to this value and keep the first success.
        #[arg(long = "auto-k")]
        auto_k: Option<usize>,
        #[arg(long, default_value_t = 600.0)]
        time_limit: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_BINARIES)]
        max_binaries: usize,
        /// Include wall-clock time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Draw the mission and a trajectory as SVG.
    Plot {
        mission: PathBuf,
        trajectory: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Built-in benchmark library.
    Bench {
        #[command(subcommand)]
        action: BenchAction,
    },
}

#[derive(Subcommand)]
enum BenchAction {
    /// Run every case of one scale and print a summary line per case.
    Run {
        #[arg(long, value_enum, default_value_t = ScaleArg::Desk)]
        scale: ScaleArg,
        /// Write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 30.0)]
        time_limit: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverKind {
    Builtin,
    External,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .or_exit(EXIT_INPUT)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .or_exit(EXIT_INPUT)
}

fn load_mission(path: &Path) -> Result<Mission, Failure> {
    Mission::from_json(&read(path)?)
        .with_context(|| format!("loading mission {}", path.display()))
        .or_exit(EXIT_INPUT)
}

fn load_trajectory(path: &Path) -> Result<trstl_core::Trajectory64, Failure> {
    TrajectoryFile::from_json(&read(path)?)
        .and_then(|f| f.to_trajectory())
        .with_context(|| format!("loading trajectory {}", path.display()))
        .or_exit(EXIT_INPUT)
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn monitor(mission: &Path, trajectory: &Path, full: bool) -> Result<u8, Failure> {
    let m = load_mission(mission)?;
    let traj = load_trajectory(trajectory)?;
    let exact = traj.convert::<Rational>();
    let regions = m.regions.iter().map(|(k, r)| (k.clone(), r.convert())).collect();
    let eps = Rational::from_f64_lossy(m.workspace.epsilon);
    let report = MonitorReport::build(&m.resolved_formula(), &exact, &regions, &eps, full).or_exit(EXIT_INPUT)?;
    print_json(&report);
    Ok(if report.satisfied { 0 } else { EXIT_VIOLATED })
}

fn encode(mission: &Path, out: Option<&Path>, k: Option<usize>) -> Result<u8, Failure> {
    let m = load_mission(mission)?;
    let (model, art) = m.encode(k.unwrap_or(m.file.k)).or_exit(EXIT_INPUT)?;
    if let Some(path) = out {
        write(path, &export_lp(&model))?;
    }
    print_json(&trstl_core::mission::CountsRecord::from(&art.counts));
    Ok(0)
}

struct SynthOptions {
    solver: SolverKind,
    solution: Option<PathBuf>,
    out: Option<PathBuf>,
    auto_k: Option<usize>,
    cfg: SolverConfig,
    timing: bool,
}

fn synth(mission: &Path, opts: &SynthOptions) -> Result<u8, Failure> {
    let m = load_mission(mission)?;
    if m.file.theta_star > m.workspace.horizon {
        return Err(fail(
            EXIT_INFEASIBLE,
            anyhow!(
                "theta_star = {} exceeds the horizon {}; no trajectory can be that robust",
                m.file.theta_star,
                m.workspace.horizon
            ),
        ));
    }
    let ks: Vec<usize> = match opts.auto_k {
        Some(max) => (2..=max).collect(),
        None => vec![m.file.k],
    };
    let mut last = None;
    for &k in &ks {
        let run = match opts.solver {
            SolverKind::Builtin => m.synthesize(k, &opts.cfg),
            SolverKind::External => external_run(&m, k, opts.solution.as_deref())?,
        };
        let run = match run {
            Ok(r) => r,
            Err(SynthesisError::Encode(EncodeError::InfeasibleEndpoints { .. })) if opts.auto_k.is_some() => continue,
            Err(SynthesisError::Encode(e @ EncodeError::InfeasibleEndpoints { .. })) => {
                return Err(fail(EXIT_INFEASIBLE, e))
            }
            Err(SynthesisError::Solver(e @ SolverError::TooManyBinaries { .. })) => return Err(fail(EXIT_LIMIT, e)),
            Err(e) => return Err(fail(EXIT_INPUT, e)),
        };
        log::info!("K = {k}: {:?} after {} nodes", run.status, run.stats.nodes);
        match run.status {
            SolveStatus::Infeasible => {
                last = Some(run);
                continue;
            }
            SolveStatus::TimedOut => {
                return Err(fail(EXIT_LIMIT, anyhow!("solver limit reached at K = {k} without a feasible trajectory")))
            }
            SolveStatus::Optimal | SolveStatus::Feasible => return finish_synth(&m, run, opts),
        }
    }
    let tried = match last {
        Some(r) => format!("K = {}", r.k),
        None => "every K".into(),
    };
    Err(fail(EXIT_INFEASIBLE, anyhow!("mission is infeasible ({tried})")))
}

fn external_run(m: &Mission, k: usize, solution: Option<&Path>) -> Result<Result<SynthesisRun, SynthesisError>, Failure> {
    let path = solution.ok_or_else(|| fail(EXIT_INPUT, anyhow!("--solver external needs --solution")))?;
    let (model, art) = match m.encode(k) {
        Ok(x) => x,
        Err(e) => return Ok(Err(e.into())),
    };
    let imported = import_solution(&model, &read(path)?).or_exit(EXIT_INPUT)?;
    for name in &imported.missing {
        log::warn!("solution file has no value for {name}; using 0");
    }
    let violations = model.violations(&imported.solution.values, 1e-6);
    if let Some(v) = violations.first() {
        return Err(fail(EXIT_INPUT, anyhow!("imported solution violates the model: {v}")));
    }
    Ok(m.adopt_solution(k, &art, imported.solution))
}

fn finish_synth(m: &Mission, run: SynthesisRun, opts: &SynthOptions) -> Result<u8, Failure> {
    let traj = run.trajectory.as_ref().expect("solved runs carry a trajectory");
    let mut report = run.report.clone().expect("solved runs carry a report");
    if !opts.timing {
        report.seconds = None;
    }
    if let Some(path) = &opts.out {
        write(path, &TrajectoryFile::from(traj).to_json())?;
    }
    print_json(&report);
    if !run.verified(m) {
        return Err(fail(
            EXIT_MISMATCH,
            anyhow!(
                "monitor rejects the synthesized trajectory (theta = {}, satisfied = {})",
                report.theta_monitor,
                report.satisfied
            ),
        ));
    }
    if run.status == SolveStatus::Feasible {
        log::warn!("solver limit reached; the trajectory is verified but not proven optimal");
        return Ok(EXIT_LIMIT);
    }
    Ok(0)
}

fn plot(mission: &Path, trajectory: Option<&Path>, out: &Path) -> Result<u8, Failure> {
    let m = load_mission(mission)?;
    let traj = trajectory.map(load_trajectory).transpose()?;
    let plot = render_svg(&m, traj.as_ref()).or_exit(EXIT_INPUT)?;
    for w in &plot.warnings {
        log::warn!("{w}");
    }
    write(out, &plot.svg)?;
    Ok(0)
}

fn bench(scale: ScaleArg, json: Option<&Path>, time_limit: f64) -> Result<u8, Failure> {
    let scale = match scale {
        ScaleArg::Desk => Scale::Desk,
        ScaleArg::Paper => Scale::Paper,
    };
    let cases: Vec<_> = load_benchmarks().into_iter().filter(|c| c.scale == scale).collect();
    let results = run_benchmarks(&cases, Duration::from_secs_f64(time_limit));
    for r in &results {
        println!("{}", r.summary());
    }
    if let Some(path) = json {
        write(path, &serde_json::to_string_pretty(&results).expect("report serializes"))?;
    }
    Ok(if results.iter().all(|r| r.passed) { 0 } else { EXIT_VIOLATED })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Monitor {
            mission,
            trajectory,
            full,
        } => monitor(&mission, &trajectory, full),
        Command::Encode { mission, out, k } => encode(&mission, out.as_deref(), k),
        Command::Synth {
            mission,
            solver,
            solution,
            out,
            auto_k,
            time_limit,
            max_binaries,
            timing,
        } => {
            if !(time_limit > 0.0) {
                return Err(fail(EXIT_INPUT, anyhow!("--time-limit must be positive")));
            }
            let cfg = SolverConfig {
                time_limit: Duration::from_secs_f64(time_limit),
                max_binaries: Some(max_binaries),
                ..SolverConfig::default()
            };
            let opts = SynthOptions {
                solver,
                solution,
                out,
                auto_k,
                cfg,
                timing,
            };
            synth(&mission, &opts)
        }
        Command::Plot {
            mission,
            trajectory,
            out,
        } => plot(&mission, trajectory.as_deref(), &out),
        Command::Bench {
            action: BenchAction::Run { scale, json, time_limit },
        } => bench(scale, json.as_deref(), time_limit),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
