//! Command-line harness: config ingestion, both engines, the soft-switching analyzer, the
//! design calculator and the acceptance suite.
//!
//! Exit codes: 0 success, 1 invalid input or domain error, 2 convergence failure,
//! 3 acceptance failure.

pub mod checks;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ppconv_core::analytic::{waveforms, AnalyticError};
use ppconv_core::design::{design, duty_for_gain, DesignError, DesignInputs};
use ppconv_core::{
    analyze, build_schedule, compare_to_reference, simulate, solve_steady_state, AnalyzeError, ConverterParams,
    ReferenceTable, SimError, SteadyStateSolution, Thresholds, WaveformSet,
};
use thiserror::Error;

use checks::Evidence;
use config::{Config, ConfigError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ppconv", version, about = "Soft-switching current-fed push-pull converter toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form steady state and its waveforms.
    Analytic(RunArgs),
    /// Transient simulation to periodic steady state.
    Simulate(RunArgs),
    /// Soft-switching report and reference comparison.
    Analyze(AnalyzeArgs),
    /// Component values for a target operating point.
    Design(DesignArgs),
    /// Run both engines and the acceptance checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Configuration file; the reference fixture when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Samples over the final period.
    #[arg(long)]
    samples: Option<usize>,
    /// Period limit for the transient engine.
    #[arg(long)]
    periods: Option<usize>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Output directory for waveforms.csv and events.csv; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write gates.csv.
    #[arg(long, requires = "out")]
    gates_csv: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Analytic,
    Transient,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long, value_enum, default_value = "transient")]
    engine: Engine,
    /// ZCS threshold, percent of peak i_S1.
    #[arg(long, default_value_t = 2.0)]
    thresh_zcs: f64,
    /// ZVS threshold, percent of Vo1.
    #[arg(long, default_value_t = 2.0)]
    thresh_zvs: f64,
    /// Output directory for report.csv; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DesignArgs {
    #[arg(long, value_parser = si)]
    vi: f64,
    /// Target Vo2; Vo1 is twice this.
    #[arg(long, value_parser = si)]
    vo2: f64,
    #[arg(long, value_parser = si)]
    n: f64,
    #[arg(long, value_parser = si)]
    fs: f64,
    /// Load resistance on each output.
    #[arg(long, value_parser = si)]
    load: f64,
    /// Peak-to-peak input ripple, percent of I_L.
    #[arg(long, value_parser = si, default_value = "15")]
    ripple_pct: f64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
}

fn si(s: &str) -> Result<f64, String> {
    config::parse_si(s).ok_or_else(|| format!("not a number: {s}"))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Analyze(#[from] AnalyzeError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{0} acceptance check(s) failed")]
    Acceptance(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sim(SimError::NoConvergence { .. } | SimError::Degenerate { .. }) => EXIT_NO_CONVERGENCE,
            CliError::Analytic(AnalyticError::NoSteadyState(_)) => EXIT_NO_CONVERGENCE,
            CliError::Acceptance(_) => EXIT_ACCEPTANCE,
            _ => EXIT_INVALID,
        }
    }
}

/// Runs the command line with the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Analytic(a) => cmd_run(a, false, out, err),
        Command::Simulate(a) => cmd_run(a, true, out, err),
        Command::Analyze(a) => cmd_analyze(a, out, err),
        Command::Design(a) => cmd_design(a, out),
        Command::Verify(a) => cmd_verify(a, out, err),
    }
}

fn load_config(a: &ConfigArgs, err: &mut dyn Write) -> Result<Config, CliError> {
    let mut c = match &a.config {
        Some(p) => config::load(p)?,
        None => Config::reference(),
    };
    if let Some(s) = a.samples {
        c.sim.samples = s;
    }
    if let Some(p) = a.periods {
        c.sim.max_periods = p;
    }
    c.sim.validate()?;
    for w in &c.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(c)
}

fn run_analytic(p: &ConverterParams, samples: usize) -> Result<(SteadyStateSolution, WaveformSet), CliError> {
    let sol = solve_steady_state(p)?;
    Ok((sol, waveforms(p, &sol, samples)))
}

fn run_transient(c: &Config) -> Result<WaveformSet, CliError> {
    let s = build_schedule(&c.params, &c.params.derive());
    Ok(simulate(&c.params, &s, &c.sim)?)
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| CliError::Io { path, source })
}

fn emit(out: &mut dyn Write, body: &str) -> Result<(), CliError> {
    out.write_all(body.as_bytes()).map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
}

fn cmd_run(a: RunArgs, transient: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let c = load_config(&a.cfg, err)?;
    let hash = c.hash();
    let (w, summary) = if transient {
        let w = run_transient(&c)?;
        let s = output::waveform_summary(&w);
        (w, s)
    } else {
        let (sol, w) = run_analytic(&c.params, c.sim.samples)?;
        (w, output::solution_summary(&sol))
    };
    match &a.out {
        Some(dir) => {
            write_file(dir, "waveforms.csv", &output::waveforms_csv(&w, &hash))?;
            write_file(dir, "events.csv", &output::events_csv(&w, &hash))?;
            if a.gates_csv {
                let s = build_schedule(&c.params, &c.params.derive());
                write_file(dir, "gates.csv", &output::gates_csv(&s, &w, &hash))?;
            }
            emit(out, &summary)
        }
        None => {
            let _ = err.write_all(summary.as_bytes());
            emit(out, &output::waveforms_csv(&w, &hash))
        }
    }
}

fn cmd_analyze(a: AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    for (name, v) in [("--thresh-zcs", a.thresh_zcs), ("--thresh-zvs", a.thresh_zvs)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::Usage(format!("{name} must be a positive percentage (got {v})")));
        }
    }
    let c = load_config(&a.cfg, err)?;
    let hash = c.hash();
    let w = match a.engine {
        Engine::Analytic => run_analytic(&c.params, c.sim.samples)?.1,
        Engine::Transient => run_transient(&c)?,
    };
    let r = analyze(&w, &Thresholds { zcs_pct: a.thresh_zcs, zvs_pct: a.thresh_zvs })?;
    let rows = compare_to_reference(&r, &ReferenceTable::targets());
    let csv = output::report_csv(&rows, a.engine == Engine::Transient, &hash);
    let text = format!("{}\n{}", output::report_text(&r), output::comparison_text(&rows));
    match &a.out {
        Some(dir) => {
            write_file(dir, "report.csv", &csv)?;
            emit(out, &text)
        }
        None => {
            let _ = err.write_all(text.as_bytes());
            emit(out, &csv)
        }
    }
}

fn cmd_design(a: DesignArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(a.load.is_finite() && a.load > 0.0) {
        return Err(CliError::Usage(format!("--load must be positive (got {})", a.load)));
    }
    if !(a.ripple_pct.is_finite() && a.ripple_pct > 0.0) {
        return Err(CliError::Usage(format!("--ripple-pct must be positive (got {})", a.ripple_pct)));
    }
    let d = duty_for_gain(a.n, a.vi, a.vo2)?;
    // Vo1 = 2 Vo2 on the same load: P = (4 + 1) Vo2^2 / R.
    let i_l = 5.0 * a.vo2 * a.vo2 / (a.load * a.vi);
    let inp = DesignInputs { vi: a.vi, vo2_target: a.vo2, n: a.n, d, i_l, delta_ii: 0.01 * a.ripple_pct * i_l, fs: a.fs };
    let r = design(&inp)?;
    let mut s = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(s, "D        = {d:.4}");
    let _ = writeln!(s, "gain     = {:.6} (Vo2 = {:.4} V, Vo1 = {:.4} V)", r.gain, r.gain * a.vi, 2.0 * r.gain * a.vi);
    let _ = writeln!(s, "I_L      = {i_l:.4} A (ripple {:.4} A p-p)", inp.delta_ii);
    let _ = writeln!(s, "L        = {:.4} uH", r.l * 1e6);
    let _ = writeln!(s, "LLK each = {:.4} uH (L_LKT = {:.4} uH)", r.llk_each * 1e6, r.l_lkt() * 1e6);
    let _ = writeln!(s, "D_ext    = {:.3e}", r.d_ext);
    let _ = writeln!(s, "\n# config");
    let _ = writeln!(s, "vi = {}", a.vi);
    let _ = writeln!(s, "n = {}", a.n);
    let _ = writeln!(s, "d = {d}");
    let _ = writeln!(s, "fs = {}", a.fs);
    let _ = writeln!(s, "l = {}", r.l);
    let _ = writeln!(s, "llk = {}", r.llk_each);
    let _ = writeln!(s, "r1 = {}", a.load);
    let _ = writeln!(s, "r2 = {}", a.load);
    emit(out, &s)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let c = load_config(&a.cfg, err)?;
    let ideal = ConverterParams { csn: [0.0; 6], ..c.params };
    let samples = c.sim.samples;
    let (analytic, transient) = std::thread::scope(|s| {
        let h = s.spawn(|| run_analytic(&ideal, samples));
        let t = run_transient(&c);
        (h.join().expect("analytic engine thread panicked"), t)
    });
    let (sol, analytic) = analytic?;
    let transient = transient?;
    let ev = Evidence { params: c.params, sol, analytic, transient };

    let report = analyze(&ev.transient, &Thresholds::default())?;
    let rows = compare_to_reference(&report, &ReferenceTable::targets());
    let mut s = format!("params-hash {}\n\n", c.hash());
    s.push_str(&output::solution_summary(&ev.sol));
    s.push_str(&output::waveform_summary(&ev.transient));
    s.push('\n');
    s.push_str(&output::report_text(&report));
    s.push_str("\nreference comparison (transient)\n");
    s.push_str(&output::comparison_text(&rows));
    s.push_str("\nacceptance\n");

    let results = verify_checks(&ev);
    let failed = results.iter().filter(|r| r.failed()).count();
    for r in &results {
        s.push_str(&format!("  {r}\n"));
    }
    emit(out, &s)?;
    if failed > 0 {
        Err(CliError::Acceptance(failed))
    } else {
        Ok(())
    }
}

/// Acceptance checks with the deterministic samples used by `verify`.
pub fn verify_checks(ev: &Evidence) -> Vec<checks::Check> {
    checks::run_all(
        ev,
        checks::spread_params(checks::tol::NODE_MIN_CASES),
        checks::spread_design_cases(checks::tol::ROUNDTRIP_MIN_CASES),
    )
}
