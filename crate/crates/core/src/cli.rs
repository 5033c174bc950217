//! Batch front end: `run`, `validate`, `verify` and `classify`.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 runtime error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::{summary_table, ViolationReport, DEFAULT_EPSILON};
use crate::config::{Format, RawConfig, RunConfig};
use crate::correlations::{uniform_grid, Channel, CorrelationEngine, CorrelationTrace, FtDenominator, TraceKind, TraceMetadata};
use crate::dressed_lattice::LatticeSystem;
use crate::dynamics::{BareSector, CollapseKind};
use crate::oracle::{lindblad_steady_state, photon_number, regression_g2, regression_h_theta, OracleModel};
use crate::plot::trace_svg;

/// Environment variable holding the number of sweep workers.
pub const WORKERS_ENV: &str = "LATTICE_QED_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cavity-lattice", version, about = "Photon correlations of a lattice-trapped atom in a driven cavity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a configuration: traces, violation reports and a summary table.
    Run {
        config: PathBuf,
        /// Write here instead of the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List every problem with a configuration without running it.
    Validate { config: PathBuf },
    /// Cross-check the amplitude hierarchy against the master-equation oracle.
    Verify {
        /// Fewer drive strengths and samples.
        #[arg(long)]
        fast: bool,
    },
    /// Classify trace CSVs. Kind and channel come from the JSON sidecar when present.
    Classify {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        /// Fallback trace kind (g2 or htheta) for CSVs without a sidecar.
        #[arg(long)]
        kind: Option<String>,
        /// Fallback channel for CSVs without a sidecar.
        #[arg(long)]
        channel: Option<String>,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

/// Parses arguments and runs the command, returning the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match cli.command {
        Command::Run { config, out: dir } => cmd_run(&config, dir.as_deref(), out, err),
        Command::Validate { config } => cmd_validate(&config, out, err),
        Command::Verify { fast } => cmd_verify(fast, out),
        Command::Classify { traces, epsilon, kind, channel, json } => {
            cmd_classify(&traces, epsilon, kind.as_deref(), channel.as_deref(), json, out, err)
        }
    }
}

fn read_config(path: &Path) -> Result<RawConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    RawConfig::parse(&text).map_err(|e| e.to_string())
}

fn cmd_validate(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match read_config(path) {
        Err(e) => {
            let _ = writeln!(err, "{e}");
            EXIT_CONFIG
        }
        Ok(raw) => {
            let diag = raw.diagnostics();
            for d in &diag {
                let _ = writeln!(out, "{d}");
            }
            if diag.is_empty() {
                let _ = writeln!(out, "{}: ok", path.display());
                EXIT_OK
            } else {
                EXIT_CONFIG
            }
        }
    }
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Everything computed for one sweep point.
#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub label: String,
    pub system: LatticeSystem,
    pub report: Option<ViolationReport>,
    /// Channels or stages that could not be computed.
    pub errors: Vec<String>,
    /// Whether re-classifying the written CSVs reproduced the flags.
    pub roundtrip_audit: Option<bool>,
    #[serde(skip)]
    pub traces: Vec<CorrelationTrace>,
}

/// All traces and the report for one parameter set. Per-channel failures are
/// recorded and the remaining channels still run.
pub fn compute_point(cfg: &RunConfig, label: &str, sys: &LatticeSystem) -> PointReport {
    let mut errors = Vec::new();
    let mut traces = Vec::new();
    match CorrelationEngine::new(sys) {
        Err(e) => errors.push(format!("setup: {e}")),
        Ok(engine) => {
            let grid = uniform_grid(cfg.tau_max, cfg.points);
            let mut paths = Vec::new();
            for kind in [CollapseKind::T, CollapseKind::F] {
                if cfg.channels.iter().any(|c| c.trigger() == kind) {
                    paths.push((kind, engine.conditioned(kind, &grid)));
                }
            }
            for &ch in &cfg.channels {
                let path = match paths.iter().find(|(k, _)| *k == ch.trigger()).map(|(_, p)| p) {
                    Some(Ok(p)) => p,
                    Some(Err(e)) => {
                        errors.push(format!("{ch}: {e}"));
                        continue;
                    }
                    None => continue,
                };
                match engine.g2_on(ch, path) {
                    Ok(t) => traces.push(t),
                    Err(e) => errors.push(format!("g2_{ch}: {e}")),
                }
                for &theta in &cfg.thetas {
                    match engine.h_theta_on(ch, theta, path, cfg.htheta) {
                        Ok(t) => traces.push(t),
                        Err(e) => errors.push(format!("h_{ch} theta={theta}: {e}")),
                    }
                }
            }
        }
    }
    let report = match ViolationReport::from_traces(&traces, cfg.epsilon) {
        Ok(r) => Some(r),
        Err(e) => {
            errors.push(format!("classifier: {e}"));
            None
        }
    };
    PointReport { label: label.to_string(), system: sys.clone(), report, errors, roundtrip_audit: None, traces }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> String + '_ {
    move |e| format!("{}: {e}", path.display())
}

/// Writes one point's files and fills in its round-trip audit.
fn write_point(cfg: &RunConfig, dir: &Path, point: &mut PointReport) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut reread = Vec::new();
    for t in &point.traces {
        let label = t.label();
        if cfg.wants(Format::Csv) {
            let mut buf = Vec::new();
            t.write_csv(&mut buf).map_err(|e| e.to_string())?;
            let path = dir.join(format!("{label}.csv"));
            write_atomic(&path, &buf).map_err(io_err(&path))?;
            reread.push(CorrelationTrace::read_csv(buf.as_slice(), Some(t.metadata())).map_err(|e| e.to_string())?);
        }
        if cfg.wants(Format::Json) {
            let path = dir.join(format!("{label}.json"));
            let json = serde_json::to_vec_pretty(&t.metadata()).map_err(|e| e.to_string())?;
            write_atomic(&path, &json).map_err(io_err(&path))?;
        }
        if cfg.wants(Format::Svg) {
            let path = dir.join(format!("{label}.svg"));
            write_atomic(&path, trace_svg(t).as_bytes()).map_err(io_err(&path))?;
        }
    }
    if cfg.wants(Format::Csv) {
        let again = ViolationReport::from_traces(&reread, cfg.epsilon).ok();
        point.roundtrip_audit = Some(again.as_ref() == point.report.as_ref());
    }
    let path = dir.join("report.json");
    let json = serde_json::to_vec_pretty(point).map_err(|e| e.to_string())?;
    write_atomic(&path, &json).map_err(io_err(&path))
}

fn worker_count(err: &mut dyn Write) -> Option<usize> {
    let raw = std::env::var(WORKERS_ENV).ok()?;
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => Some(n),
        _ => {
            let _ = writeln!(err, "ignoring {WORKERS_ENV}={raw:?}: expected a positive integer");
            None
        }
    }
}

/// Computes every point of a configuration in parallel, in point order.
pub fn run_points(cfg: &RunConfig, workers: Option<usize>) -> Result<Vec<PointReport>, String> {
    let points = cfg.points();
    let work = || points.par_iter().map(|(label, sys)| compute_point(cfg, label, sys)).collect::<Vec<_>>();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| format!("thread pool: {e}"))?;
    Ok(pool.install(work))
}

fn cmd_run(path: &Path, out_dir: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cfg = match read_config(path).and_then(|raw| raw.validate().map_err(|e| e.to_string())) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return EXIT_CONFIG;
        }
    };
    let root = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.directory.clone());
    if let Err(e) = fs::create_dir_all(&root) {
        let _ = writeln!(err, "cannot create output directory {}: {e}", root.display());
        return EXIT_RUNTIME;
    }
    let mut points = match run_points(&cfg, worker_count(err)) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return EXIT_RUNTIME;
        }
    };
    for p in &mut points {
        let dir = if p.label.is_empty() { root.clone() } else { root.join(&p.label) };
        if let Err(e) = write_point(&cfg, &dir, p) {
            let _ = writeln!(err, "{e}");
            return EXIT_RUNTIME;
        }
        for e in &p.errors {
            let _ = writeln!(err, "{}: {e}", if p.label.is_empty() { "run" } else { &p.label });
        }
    }
    let rows: Vec<(String, Result<ViolationReport, String>)> = points
        .iter()
        .map(|p| {
            let label = if p.label.is_empty() { "run".to_string() } else { p.label.clone() };
            (label, p.report.clone().ok_or_else(|| p.errors.join("; ")))
        })
        .collect();
    let table = summary_table(&rows);
    let summary = root.join("summary.txt");
    if let Err(e) = write_atomic(&summary, table.as_bytes()) {
        let _ = writeln!(err, "{}: {e}", summary.display());
        return EXIT_RUNTIME;
    }
    let _ = write!(out, "{table}");
    let traces: usize = points.iter().map(|p| p.traces.len()).sum();
    let _ = writeln!(out, "{traces} traces over {} point(s) written to {}", points.len(), root.display());
    if points.iter().all(|p| p.traces.is_empty()) {
        let _ = writeln!(err, "no trace could be computed");
        return EXIT_RUNTIME;
    }
    EXIT_OK
}

fn sidecar(csv: &Path) -> Option<TraceMetadata> {
    let text = fs::read_to_string(csv.with_extension("json")).ok()?;
    serde_json::from_str(&text).ok()
}

fn cmd_classify(
    paths: &[PathBuf],
    epsilon: f64,
    kind: Option<&str>,
    channel: Option<&str>,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let fallback_kind = match kind.map(str::to_ascii_lowercase).as_deref() {
        None | Some("g2") => TraceKind::G2,
        Some("htheta") | Some("h") => TraceKind::Htheta,
        Some(other) => {
            let _ = writeln!(err, "unknown trace kind {other:?}; expected g2 or htheta");
            return EXIT_CONFIG;
        }
    };
    let fallback_channel = match channel.map(str::parse::<Channel>).transpose() {
        Ok(c) => c.unwrap_or(Channel::TT),
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return EXIT_CONFIG;
        }
    };
    let mut traces = Vec::new();
    for p in paths {
        let meta = sidecar(p).unwrap_or(TraceMetadata {
            kind: fallback_kind,
            channel: fallback_channel,
            theta: (fallback_kind == TraceKind::Htheta).then_some(0.0),
            samples: 0,
            max_imag: 0.0,
            system: None,
        });
        let file = match fs::File::open(p) {
            Ok(f) => f,
            Err(e) => {
                let _ = writeln!(err, "{}: {e}", p.display());
                return EXIT_CONFIG;
            }
        };
        match CorrelationTrace::read_csv(file, Some(meta)) {
            Ok(t) => traces.push(t),
            Err(e) => {
                let _ = writeln!(err, "{}: {e}", p.display());
                return EXIT_CONFIG;
            }
        }
    }
    match ViolationReport::from_traces(&traces, epsilon) {
        Ok(r) => {
            if json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&r).unwrap_or_default());
            } else {
                let _ = write!(out, "{}", r.to_table());
                for w in &r.warnings {
                    let _ = writeln!(out, "warning: {w}");
                }
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            EXIT_CONFIG
        }
    }
}

/// One line of the oracle cross-check.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyLine {
    pub quantity: String,
    pub drive: f64,
    pub deviation: f64,
}

/// Largest pointwise relative deviation, absolute where the reference is zero.
pub fn max_relative_deviation(reference: &[f64], other: &[f64]) -> f64 {
    reference
        .iter()
        .zip(other)
        .map(|(a, b)| if *a == 0.0 { (a - b).abs() } else { ((a - b) / a).abs() })
        .fold(0.0, f64::max)
}

/// Oracle-vs-hierarchy deviations for a stationary atom at g/γ = 1, κ/γ = 1.6.
pub fn verify_lines(drives: &[f64], samples: usize) -> crate::Result<Vec<VerifyLine>> {
    let grid = uniform_grid(10.0, samples);
    let mut out = Vec::new();
    for &y in drives {
        let sys = LatticeSystem { drive: y, ..LatticeSystem::stationary(1.0, 1.6, 1.0) };
        let engine = CorrelationEngine::new(&sys)?;
        let model = OracleModel::new(&sys, 3, 0)?;
        let ss = lindblad_steady_state(&model)?;
        let n_ref = engine.steady.population(BareSector::G1);
        out.push(VerifyLine { quantity: "<a^dag a>".into(), drive: y, deviation: (photon_number(&model, &ss) / n_ref - 1.0).abs() });
        for ch in Channel::ALL {
            let a = engine.g2(ch, &grid)?;
            let b = regression_g2(&model, &ss, ch, &grid)?;
            out.push(VerifyLine { quantity: format!("g2_{ch}"), drive: y, deviation: max_relative_deviation(&a.values, &b.trace.values) });
        }
        for ch in [Channel::TT, Channel::FT] {
            let a = engine.h_theta(ch, 0.0, &grid, Default::default())?;
            let b = regression_h_theta(&model, &ss, ch, 0.0, &grid, FtDenominator::Cavity)?;
            out.push(VerifyLine { quantity: format!("h_{ch}"), drive: y, deviation: max_relative_deviation(&a.values, &b.trace.values) });
        }
    }
    Ok(out)
}

fn cmd_verify(fast: bool, out: &mut dyn Write) -> i32 {
    let (drives, samples): (&[f64], usize) = if fast { (&[1e-2, 1e-3], 100) } else { (&[1e-2, 1e-3, 1e-4], 400) };
    let lines = match verify_lines(drives, samples) {
        Ok(l) => l,
        Err(e) => {
            let _ = writeln!(out, "verify failed: {e}");
            return EXIT_RUNTIME;
        }
    };
    let _ = writeln!(out, "{:<12} {:>8} {:>12}", "quantity", "Y", "max dev");
    for l in &lines {
        let _ = writeln!(out, "{:<12} {:>8.0e} {:>12.3e}", l.quantity, l.drive, l.deviation);
    }
    // The hierarchy is the Y → 0 limit, so deviations must fall at least as Y².
    let mut ok = true;
    let quantities: Vec<String> = lines.iter().filter(|l| l.drive == drives[0]).map(|l| l.quantity.clone()).collect();
    for q in &quantities {
        let devs: Vec<&VerifyLine> = lines.iter().filter(|l| &l.quantity == q).collect();
        for w in devs.windows(2) {
            // Deviations at rounding level carry no order information.
            if w[1].deviation < 1e-11 {
                continue;
            }
            let order = (w[0].deviation / w[1].deviation).ln() / (w[0].drive / w[1].drive).ln();
            let pass = order >= 1.9;
            ok &= pass;
            let _ = writeln!(
                out,
                "{q}: order {order:.3} between Y = {:.0e} and {:.0e} [{}]",
                w[0].drive,
                w[1].drive,
                if pass { "PASS" } else { "FAIL" }
            );
        }
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_RUNTIME
    }
}
