//! Command-line front end: `fov`, `range`, `detect`, `simulate`, `sweep`.
//!
//! Exit codes: 0 on success, 1 for configuration or input errors, 2 for
//! I/O failures.

pub mod config;
pub mod trace;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::channel::BeamId;
use crate::detector::{sliding_std, DetectionOutcome};
use crate::scenario::{
    detection_range, fov_grid, simulate_trajectory, threshold_sweep, ExperimentConfig, GridSpec,
    TraceEnsemble,
};
use crate::{Error, Result};

pub use config::{parse_config, to_config_text};
pub use trace::{TraceFile, TraceMeta};

#[derive(Debug, Parser)]
#[command(
    name = "guardbeam",
    version,
    about = "Guard-beam mmWave blockage prediction"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Configuration file (`key = value` lines); defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `experiment.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Noiseless combined level over a grid of blocker positions.
    Fov {
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.5)]
        xmin: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 5.5)]
        xmax: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
        ymin: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        ymax: f64,
        /// Grid spacing, metres.
        #[arg(long, default_value_t = 0.005)]
        res: f64,
        /// Beams to combine, e.g. `main,guard1` (default: detector beams).
        #[arg(long, value_delimiter = ',')]
        beams: Option<Vec<BeamId>>,
    },
    /// Monte-Carlo detection range.
    Range {
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        beams: Option<Vec<BeamId>>,
    },
    /// Runs the detector on a recorded trace.
    Detect {
        /// Trace CSV; a `.meta` sidecar next to it supplies ground truth.
        trace: PathBuf,
    },
    /// Simulates one walk and writes its trace plus a `.meta` sidecar.
    Simulate {
        /// Trajectory index (0-based).
        #[arg(long, default_value_t = 0)]
        trajectory: usize,
    },
    /// Prediction time and accuracy per threshold.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<f64>,
    },
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 2,
        _ => 1,
    }
}

pub fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => parse_config(&std::fs::read_to_string(p)?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Error::InvalidConfig("--threads must be at least 1".into()));
        }
        // ignore the error if a pool already exists (repeated in-process calls)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let g = &cli.global;
    let out = g.out.as_deref();
    match &cli.command {
        Command::Detect { trace } => {
            let report = cmd_detect(trace, g.config.as_deref())?;
            if report.contains("\nreport.triggered,false") {
                eprintln!("no detection");
            }
            emit(out, &report)
        }
        cmd => {
            let mut cfg = load_config(g.config.as_deref())?;
            if let Some(s) = g.seed {
                cfg.seed = s;
            }
            let text = match cmd {
                Command::Fov {
                    xmin,
                    xmax,
                    ymin,
                    ymax,
                    res,
                    beams,
                } => {
                    let grid = GridSpec {
                        x_min: *xmin,
                        x_max: *xmax,
                        y_min: *ymin,
                        y_max: *ymax,
                        resolution: *res,
                    };
                    cmd_fov(&cfg, &grid, beams.as_deref())?
                }
                Command::Range { runs, beams } => {
                    if let Some(n) = runs {
                        cfg.monte_carlo_runs = *n;
                    }
                    if let Some(b) = beams {
                        cfg.detector.beam_subset = b.clone();
                    }
                    cmd_range(&cfg)?
                }
                Command::Simulate { trajectory } => {
                    let path =
                        out.ok_or_else(|| Error::InvalidConfig("simulate requires --out".into()))?;
                    return cmd_simulate(&cfg, *trajectory, cfg.seed, path);
                }
                Command::Sweep { thresholds } => cmd_sweep(&cfg, thresholds)?,
                Command::Detect { .. } => unreachable!(),
            };
            emit(out, &text)
        }
    }
}

/// `x_m,y_m,z_level` grid; shadowed cells have an empty level.
pub fn cmd_fov(
    cfg: &ExperimentConfig,
    grid: &GridSpec,
    beams: Option<&[BeamId]>,
) -> Result<String> {
    grid.validate()?;
    let half = cfg.scene.wavelength() / 2.0;
    if grid.resolution > half {
        eprintln!(
            "warning: resolution {} m is coarser than half a wavelength ({half:.5} m); fringes will alias",
            grid.resolution
        );
    }
    let subset = beams.unwrap_or(&cfg.detector.beam_subset);
    let fov = fov_grid(cfg, subset, grid)?;
    let mut s = String::from("x_m,y_m,z_level\n");
    for (iy, y) in fov.ys.iter().enumerate() {
        for (ix, x) in fov.xs.iter().enumerate() {
            let _ = writeln!(s, "{x},{y},{}", opt(fov.get(ix, iy)));
        }
    }
    Ok(s)
}

pub const RANGE_HEADER: &str =
    "run_id,trajectory_id,seed,triggered,r_det_mm,t_d_ms,t_s_ms,t_p_ms,class";

/// One row per run, then `summary.*` footer rows.
pub fn cmd_range(cfg: &ExperimentConfig) -> Result<String> {
    if cfg.monte_carlo_runs == 0 {
        return Err(Error::InvalidConfig("--runs must be at least 1".into()));
    }
    let est = detection_range(cfg)?;
    let mut s = format!("{RANGE_HEADER}\n");
    for r in &est.records {
        let o = &r.outcome;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.run_id,
            r.trajectory_id,
            r.seed,
            o.triggered,
            opt(r.r_det_mm),
            opt(o.t_d_ms),
            opt(o.t_s_ms),
            opt(o.t_p_ms),
            o.class.as_str()
        );
    }
    let pad = ",,,,,,,";
    let mut footer = |k: &str, v: String| {
        let _ = writeln!(s, "summary.{k},{v}{pad}");
    };
    footer("runs", est.records.len().to_string());
    footer("censored", est.censored.to_string());
    if let Some(sm) = est.summary {
        footer("mean_r_det_mm", sm.mean.to_string());
        footer("median_r_det_mm", sm.median.to_string());
        footer("q1_r_det_mm", sm.q1.to_string());
        footer("q3_r_det_mm", sm.q3.to_string());
        footer("min_r_det_mm", sm.min.to_string());
        footer("max_r_det_mm", sm.max.to_string());
        footer("std_err_r_det_mm", sm.std_err.to_string());
    }
    Ok(s)
}

/// Writes the trace for one run and its sidecar.
pub fn cmd_simulate(
    cfg: &ExperimentConfig,
    trajectory: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    cfg.validate()?;
    let beams = cfg.beam_set()?;
    let run = simulate_trajectory(cfg, &beams, trajectory, seed)?;
    std::fs::write(out, TraceFile::from_run(&run).to_csv())?;
    std::fs::write(
        TraceMeta::sidecar_path(out),
        TraceMeta::from_run(&run, cfg).to_text(),
    )?;
    Ok(())
}

/// Per-sample σ(t) and crossing flags, followed by `report.*` rows.
///
/// The detector settings come from `config`, else from the sidecar, else
/// from the defaults.
pub fn cmd_detect(trace_path: &Path, config: Option<&Path>) -> Result<String> {
    let trace = TraceFile::read(trace_path)?;
    let meta_path = TraceMeta::sidecar_path(trace_path);
    let meta = if meta_path.exists() {
        Some(TraceMeta::read(&meta_path)?)
    } else {
        None
    };
    let cfg = match (config, &meta) {
        (Some(p), _) => load_config(Some(p))?,
        (None, Some(m)) => m.config.clone(),
        (None, None) => ExperimentConfig::default(),
    };
    let det = &cfg.detector;
    let w = det.window_samples()?;
    if let Some(stride) = trace.sample_interval_ms() {
        if stride != det.sample_interval_ms as i64 {
            return Err(Error::InvalidConfig(format!(
                "trace stride {stride} ms differs from the configured {} ms",
                det.sample_interval_ms
            )));
        }
    }
    if trace.len() < w {
        return Err(Error::InsufficientData(format!(
            "trace has {} samples, the window needs {w}",
            trace.len()
        )));
    }
    let levels = trace.combined_levels(&det.beam_subset)?;
    let sigma = sliding_std(&levels, w);
    let mut s = String::from("t_ms,level,sigma,crossed\n");
    let mut first = None;
    for (k, (&t, &z)) in trace.t_ms.iter().zip(&levels).enumerate() {
        let sg = (k + 1 >= w).then(|| sigma[k + 1 - w]);
        let crossed = sg.is_some_and(|v| v >= det.threshold);
        if crossed && first.is_none() {
            first = Some(t as f64);
        }
        let _ = writeln!(s, "{t},{z},{},{}", opt(sg), crossed as u8);
    }
    let t0 = trace.t_ms[0] as f64;
    let t_d = first.map(|t| t - t0);
    let outcome = DetectionOutcome::new(
        t_d,
        meta.as_ref().and_then(|m| m.t_s_ms),
        meta.as_ref().and_then(|m| m.eligible_from_ms),
    );
    let pad = ",,";
    let mut report = |k: &str, v: String| {
        let _ = writeln!(s, "report.{k},{v}{pad}");
    };
    report("triggered", outcome.triggered.to_string());
    report("t_d_ms", opt(outcome.t_d_ms));
    if meta.is_some() {
        report("t_s_ms", opt(outcome.t_s_ms));
        report("t_p_ms", opt(outcome.t_p_ms));
        report("class", outcome.class.as_str().to_string());
    }
    Ok(s)
}

pub const SWEEP_HEADER: &str =
    "sigma_th,mean_tp_ms,accuracy,true_detections,false_detections,misdetections,events";

pub fn cmd_sweep(cfg: &ExperimentConfig, thresholds: &[f64]) -> Result<String> {
    if thresholds.is_empty() {
        return Err(Error::InvalidConfig("empty threshold list".into()));
    }
    let ensemble = TraceEnsemble::build(cfg)?;
    let rows = threshold_sweep(&ensemble, thresholds)?;
    let mut s = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.sigma_th,
            opt(r.mean_tp_ms),
            opt(r.accuracy),
            r.true_detections,
            r.false_detections,
            r.misdetections,
            r.events
        );
    }
    Ok(s)
}
