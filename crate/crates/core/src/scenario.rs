//! End-to-end experiments: walking-blocker trajectories, field-of-view
//! grids, detection range and the prediction-time/accuracy trade-off.
//!
//! Every run derives its randomness from `(experiment seed, run index)`,
//! so results do not depend on how runs are scheduled across threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beampattern::BeamSpec;
use crate::channel::{
    baseline_amplitude, channel_response, los_component, nlos_component, received_sample, BeamId,
    BeamSet, NoiseModel, SceneConfig,
};
use crate::detector::{detect_with, DetectionOutcome, DetectorConfig, OutcomeClass};
use crate::geometry::{BlockerBody, LinkGeometry, Point2};
use crate::stats::Summary;
use crate::{Error, Result};

/// Mean prediction times measured on hardware for the main beam and the
/// two guard beams (Φ = 7°, Φ = 14°), ms. Kept for report annotation.
pub const MEASURED_MEAN_TP_MS: [(&str, f64); 3] = [
    ("main", 110.6),
    ("guard_phi7", 166.97),
    ("guard_phi14", 119.8),
];

/// Straight-line walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub start: Point2,
    pub direction: (f64, f64),
    /// Nominal speed before per-run jitter, m/s.
    pub speed: f64,
}

impl Trajectory {
    /// Perpendicular walk towards the link, crossing it at `fraction` of the
    /// way from Tx to Rx, starting `start_r` metres away on the guard side.
    pub fn crossing(geom: &LinkGeometry, fraction: f64, start_r: f64, speed: f64) -> Self {
        let start = geom.to_world(start_r, fraction * geom.d_o());
        let toward = geom.to_world(0.0, fraction * geom.d_o());
        Self {
            start,
            direction: (toward.x - start.x, toward.y - start.y),
            speed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scene: SceneConfig,
    pub geometry: LinkGeometry,
    pub tx_beam: BeamSpec,
    pub beams: Vec<(BeamId, BeamSpec)>,
    pub detector: DetectorConfig,
    pub trajectories: Vec<Trajectory>,
    /// Relative uniform speed jitter applied per run (0.2 = ±20 %).
    pub speed_jitter: f64,
    pub body_radius: f64,
    pub duration_s: f64,
    pub sample_interval_ms: u32,
    pub monte_carlo_runs: usize,
    pub seed: u64,
    /// Alarms count as legitimate once the body centre is this close to
    /// the link, m.
    pub eligibility_m: f64,
    /// Approach speed used by detection-range runs, m/s.
    pub range_speed_mps: f64,
    pub range_duration_s: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let geometry = LinkGeometry::along_x(5.0).expect("5 m link");
        let trajectories = [0.25, 0.5, 0.75]
            .iter()
            .map(|&f| Trajectory::crossing(&geometry, f, 2.5, 1.0))
            .collect();
        Self {
            scene: SceneConfig::default(),
            geometry,
            tx_beam: BeamSpec::tx(7.0),
            beams: vec![
                (BeamId::Main, BeamSpec::main(7.0)),
                (BeamId::Guard(1), BeamSpec::guard(7.0, 7.0)),
                (BeamId::Guard(2), BeamSpec::guard(7.0, 14.0)),
            ],
            detector: DetectorConfig::default(),
            trajectories,
            speed_jitter: 0.2,
            body_radius: BlockerBody::DEFAULT_RADIUS,
            duration_s: 5.0,
            sample_interval_ms: 10,
            monte_carlo_runs: 60,
            seed: 0,
            eligibility_m: 2.0,
            range_speed_mps: 0.25,
            range_duration_s: 12.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.detector.validate()?;
        if self.detector.sample_interval_ms != self.sample_interval_ms {
            return Err(Error::InvalidConfig(
                "detector and experiment sample intervals differ".into(),
            ));
        }
        let w = self.detector.window_samples()?;
        if self.total_samples(self.duration_s) < w {
            return Err(Error::InvalidConfig(
                "duration shorter than one detection window".into(),
            ));
        }
        self.tx_beam.validate()?;
        for (id, spec) in &self.beams {
            spec.validate()?;
            if self.beams.iter().filter(|(other, _)| other == id).count() > 1 {
                return Err(Error::InvalidConfig(format!("beam {id} declared twice")));
            }
        }
        if !self.beams.iter().any(|(id, _)| *id == BeamId::Main) {
            return Err(Error::InvalidConfig("a main beam must be declared".into()));
        }
        for id in &self.detector.beam_subset {
            if !self.beams.iter().any(|(b, _)| b == id) {
                return Err(Error::InvalidConfig(format!(
                    "detector uses undeclared beam {id}"
                )));
            }
        }
        if !(0.0..1.0).contains(&self.speed_jitter) {
            return Err(Error::InvalidConfig(
                "speed jitter must lie in [0, 1)".into(),
            ));
        }
        if self.body_radius.is_nan()
            || self.body_radius <= 0.0
            || self.eligibility_m.is_nan()
            || self.eligibility_m <= 0.0
        {
            return Err(Error::InvalidConfig(
                "body radius and eligibility must be positive".into(),
            ));
        }
        if [self.range_speed_mps, self.range_duration_s]
            .iter()
            .any(|v| v.is_nan() || *v <= 0.0)
        {
            return Err(Error::InvalidConfig(
                "range speed and duration must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn dt_s(&self) -> f64 {
        self.sample_interval_ms as f64 / 1000.0
    }

    pub fn total_samples(&self, duration_s: f64) -> usize {
        (duration_s * 1000.0 / self.sample_interval_ms as f64).round() as usize
    }

    pub fn beam_set(&self) -> Result<BeamSet> {
        BeamSet::synthesize(&self.tx_beam, &self.beams)
    }

    /// Copy with the slow approach used for detection-range runs.
    pub fn for_range(&self) -> Self {
        let mut c = self.clone();
        for t in &mut c.trajectories {
            t.speed = self.range_speed_mps;
        }
        c.duration_s = self.range_duration_s;
        c
    }

    /// Seed of run `run`.
    pub fn run_seed(&self, run: usize) -> u64 {
        splitmix64(self.seed ^ splitmix64(run as u64 ^ 0xA076_1D64_78BD_642F))
    }

    pub fn trajectory_of(&self, run: usize) -> usize {
        run % self.trajectories.len().max(1)
    }

    pub fn with_preset(mut self, preset: &Preset) -> Self {
        self.beams = preset.beams.clone();
        self.detector.beam_subset = preset.subset.clone();
        self.detector.threshold = preset.threshold;
        self
    }

    /// Stable 64-bit fingerprint of every field.
    pub fn fingerprint(&self) -> u64 {
        format!("{self:?}")
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
                (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
            })
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// One receive beam's normalized complex samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamTrace {
    pub id: BeamId,
    pub values: Vec<Complex64>,
}

/// Output of one simulated walk. Samples stop at the shadowing time.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRun {
    pub trajectory_id: usize,
    pub seed: u64,
    pub speed: f64,
    pub sample_interval_ms: u32,
    pub traces: Vec<BeamTrace>,
    /// |r| of the body centre at each recorded sample, m.
    pub ranges: Vec<f64>,
    pub t_s_index: Option<usize>,
    pub eligible_from_index: Option<usize>,
}

impl TrajectoryRun {
    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn t_s_ms(&self) -> Option<f64> {
        self.t_s_index
            .map(|k| k as f64 * self.sample_interval_ms as f64)
    }

    pub fn eligible_from_ms(&self) -> Option<f64> {
        self.eligible_from_index
            .map(|k| k as f64 * self.sample_interval_ms as f64)
    }

    pub fn trace(&self, id: BeamId) -> Option<&BeamTrace> {
        self.traces.iter().find(|t| t.id == id)
    }

    /// `|Σ ŷ|` over `subset` at every sample.
    pub fn combined_levels(&self, subset: &[BeamId]) -> Result<Vec<f64>> {
        if subset.is_empty() {
            return Err(Error::InvalidConfig("empty beam subset".into()));
        }
        let traces = subset
            .iter()
            .map(|id| {
                self.trace(*id)
                    .ok_or_else(|| Error::InvalidConfig(format!("beam {id} not simulated")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((0..self.len())
            .map(|k| combine(traces.iter().map(|t| t.values[k])))
            .collect())
    }
}

/// Magnitude of the complex sum, in iteration order.
pub fn combine(values: impl IntoIterator<Item = Complex64>) -> f64 {
    values
        .into_iter()
        .fold(Complex64::new(0.0, 0.0), |acc, v| acc + v)
        .norm()
}

/// Simulates one walk of trajectory `trajectory` with per-run `seed`.
pub fn simulate_trajectory(
    cfg: &ExperimentConfig,
    beams: &BeamSet,
    trajectory: usize,
    seed: u64,
) -> Result<TrajectoryRun> {
    let traj = cfg
        .trajectories
        .get(trajectory)
        .ok_or_else(|| Error::InvalidScenario(format!("no trajectory {trajectory}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factor = if cfg.speed_jitter > 0.0 {
        1.0 + rng.gen_range(-cfg.speed_jitter..=cfg.speed_jitter)
    } else {
        1.0
    };
    let body = BlockerBody::new(
        cfg.body_radius,
        traj.speed * factor,
        traj.start,
        traj.direction,
    )?;
    simulate_body(cfg, beams, &body, trajectory, seed)
}

/// Simulates a given body path; noise is keyed by `seed`.
pub fn simulate_body(
    cfg: &ExperimentConfig,
    beams: &BeamSet,
    body: &BlockerBody,
    trajectory: usize,
    seed: u64,
) -> Result<TrajectoryRun> {
    let geom = &cfg.geometry;
    if geom.in_shadowing_area(body.start, body) {
        return Err(Error::InvalidScenario(
            "trajectory starts inside the shadowing area".into(),
        ));
    }
    let dt = cfg.dt_s();
    let total = cfg.total_samples(cfg.duration_s);
    let t_s_index = geom.shadowing_index(body, dt).filter(|&k| k < total);
    let n = t_s_index.unwrap_or(total);

    let baseline = baseline_amplitude(geom, beams, &cfg.scene)?;
    let noise = NoiseModel::new(&cfg.scene, seed);
    let mut streams: Vec<_> = beams
        .rx
        .iter()
        .map(|b| noise.stream(b.id.index()))
        .collect();
    let mut traces: Vec<BeamTrace> = beams
        .rx
        .iter()
        .map(|b| BeamTrace {
            id: b.id,
            values: Vec::with_capacity(n),
        })
        .collect();
    let mut ranges = Vec::with_capacity(n);
    let mut eligible_from_index = None;

    for k in 0..n {
        let t = k as f64 * dt;
        let p = body.position(t);
        let (r, _) = geom.to_local(p);
        ranges.push(r.abs());
        if eligible_from_index.is_none() && geom.distance_to_segment(p) <= cfg.eligibility_m {
            eligible_from_index = Some(k);
        }
        let h = channel_response(geom, Some((p, body)), beams, &cfg.scene)?;
        for ((trace, stream), (hb, beam)) in traces
            .iter_mut()
            .zip(&mut streams)
            .zip(h.iter().zip(&beams.rx))
        {
            let y = received_sample(*hb, &cfg.scene, stream.next_sample(), beam.id, t);
            trace.values.push(y.value / baseline);
        }
    }

    Ok(TrajectoryRun {
        trajectory_id: trajectory,
        seed,
        speed: body.speed,
        sample_interval_ms: cfg.sample_interval_ms,
        traces,
        ranges,
        t_s_index,
        eligible_from_index,
    })
}

/// Blocker-free trace of `n` samples (the body never enters the scene).
pub fn simulate_quiescent(
    cfg: &ExperimentConfig,
    beams: &BeamSet,
    n: usize,
    seed: u64,
) -> Result<TrajectoryRun> {
    let geom = &cfg.geometry;
    let baseline = baseline_amplitude(geom, beams, &cfg.scene)?;
    let h = channel_response(geom, None, beams, &cfg.scene)?;
    let noise = NoiseModel::new(&cfg.scene, seed);
    let traces = beams
        .rx
        .iter()
        .zip(&h)
        .map(|(b, hb)| {
            let values = noise
                .stream(b.id.index())
                .take(n)
                .enumerate()
                .map(|(k, w)| {
                    let t = k as f64 * cfg.dt_s();
                    received_sample(*hb, &cfg.scene, w, b.id, t).value / baseline
                })
                .collect();
            BeamTrace { id: b.id, values }
        })
        .collect();
    Ok(TrajectoryRun {
        trajectory_id: usize::MAX,
        seed,
        speed: 0.0,
        sample_interval_ms: cfg.sample_interval_ms,
        traces,
        ranges: vec![f64::INFINITY; n],
        t_s_index: None,
        eligible_from_index: None,
    })
}

/// Per-run result of a detection experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub run_id: usize,
    pub trajectory_id: usize,
    pub seed: u64,
    pub outcome: DetectionOutcome,
    /// |r| of the body centre at the detection instant, mm.
    pub r_det_mm: Option<f64>,
}

/// Applies the detector to cached levels. Traces shorter than a window
/// cannot trigger.
pub fn evaluate_levels(
    levels: &[f64],
    ranges: &[f64],
    t_s_index: Option<usize>,
    eligible_from_index: Option<usize>,
    window: usize,
    threshold: f64,
    dt_ms: f64,
) -> (DetectionOutcome, Option<f64>) {
    let index = detect_with(levels, window, threshold, dt_ms)
        .ok()
        .and_then(|d| d.index);
    let outcome = DetectionOutcome::new(
        index.map(|i| i as f64 * dt_ms),
        t_s_index.map(|k| k as f64 * dt_ms),
        eligible_from_index.map(|k| k as f64 * dt_ms),
    );
    (outcome, index.map(|i| ranges[i] * 1000.0))
}

pub fn evaluate_run(run: &TrajectoryRun, det: &DetectorConfig, run_id: usize) -> Result<RunRecord> {
    let levels = run.combined_levels(&det.beam_subset)?;
    let (outcome, r_det_mm) = evaluate_levels(
        &levels,
        &run.ranges,
        run.t_s_index,
        run.eligible_from_index,
        det.window_samples()?,
        det.threshold,
        det.sample_interval_ms as f64,
    );
    Ok(RunRecord {
        run_id,
        trajectory_id: run.trajectory_id,
        seed: run.seed,
        outcome,
        r_det_mm,
    })
}

/// Runs `cfg.monte_carlo_runs` walks in parallel, ordered by run index.
pub fn run_monte_carlo(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let beams = cfg.beam_set()?;
    (0..cfg.monte_carlo_runs)
        .into_par_iter()
        .map(|i| {
            let run = simulate_trajectory(cfg, &beams, cfg.trajectory_of(i), cfg.run_seed(i))?;
            evaluate_run(&run, &cfg.detector, i)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeEstimate {
    pub records: Vec<RunRecord>,
    /// Over triggered runs only.
    pub summary: Option<Summary>,
    /// Runs that never triggered.
    pub censored: usize,
}

/// Slow-approach Monte-Carlo estimate of how far from the link the blocker
/// is when the alarm fires.
pub fn detection_range(cfg: &ExperimentConfig) -> Result<RangeEstimate> {
    let records = run_monte_carlo(&cfg.for_range())?;
    let r: Vec<f64> = records.iter().filter_map(|r| r.r_det_mm).collect();
    Ok(RangeEstimate {
        censored: records.len() - r.len(),
        summary: Summary::of(&r),
        records,
    })
}

/// Mean, spread and extremes of `t_p` over true detections.
pub fn prediction_time_stats(outcomes: &[DetectionOutcome]) -> Option<Summary> {
    let tp: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.class == OutcomeClass::TrueDetection)
        .filter_map(|o| o.t_p_ms)
        .collect();
    Summary::of(&tp)
}

/// Levels and ground truth of one run, reused across thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct CachedRun {
    pub trajectory_id: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
    pub ranges: Vec<f64>,
    pub t_s_index: Option<usize>,
    pub eligible_from_index: Option<usize>,
}

/// Simulated runs of one configuration, keyed by its fingerprint.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEnsemble {
    pub config_hash: u64,
    pub window: usize,
    pub dt_ms: f64,
    pub runs: Vec<CachedRun>,
}

impl TraceEnsemble {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let beams = cfg.beam_set()?;
        let runs = (0..cfg.monte_carlo_runs)
            .into_par_iter()
            .map(|i| {
                let run = simulate_trajectory(cfg, &beams, cfg.trajectory_of(i), cfg.run_seed(i))?;
                Ok(CachedRun {
                    trajectory_id: run.trajectory_id,
                    seed: run.seed,
                    levels: run.combined_levels(&cfg.detector.beam_subset)?,
                    ranges: run.ranges,
                    t_s_index: run.t_s_index,
                    eligible_from_index: run.eligible_from_index,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config_hash: cfg.fingerprint(),
            window: cfg.detector.window_samples()?,
            dt_ms: cfg.sample_interval_ms as f64,
            runs,
        })
    }

    pub fn evaluate(&self, threshold: f64) -> Vec<(DetectionOutcome, Option<f64>)> {
        self.runs
            .iter()
            .map(|r| {
                evaluate_levels(
                    &r.levels,
                    &r.ranges,
                    r.t_s_index,
                    r.eligible_from_index,
                    self.window,
                    threshold,
                    self.dt_ms,
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub sigma_th: f64,
    /// Over true detections; `None` when there are none.
    pub mean_tp_ms: Option<f64>,
    /// True detections over runs with a blockage event.
    pub accuracy: Option<f64>,
    pub true_detections: usize,
    pub false_detections: usize,
    pub misdetections: usize,
    pub events: usize,
}

impl SweepRow {
    pub fn from_outcomes(sigma_th: f64, outcomes: &[DetectionOutcome]) -> Self {
        let count = |c| outcomes.iter().filter(|o| o.class == c).count();
        let events = outcomes.iter().filter(|o| o.t_s_ms.is_some()).count();
        let true_detections = count(OutcomeClass::TrueDetection);
        Self {
            sigma_th,
            mean_tp_ms: prediction_time_stats(outcomes).map(|s| s.mean),
            accuracy: (events > 0).then(|| true_detections as f64 / events as f64),
            true_detections,
            false_detections: outcomes
                .iter()
                .filter(|o| o.class == OutcomeClass::FalseDetection && o.t_s_ms.is_some())
                .count(),
            misdetections: count(OutcomeClass::Misdetection),
            events,
        }
    }
}

/// Prediction time and accuracy for each threshold over one ensemble.
pub fn threshold_sweep(ensemble: &TraceEnsemble, thresholds: &[f64]) -> Result<Vec<SweepRow>> {
    if let Some(bad) = thresholds.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidConfig(format!(
            "threshold must be positive, got {bad}"
        )));
    }
    Ok(thresholds
        .iter()
        .map(|&th| {
            let outcomes: Vec<_> = ensemble.evaluate(th).into_iter().map(|(o, _)| o).collect();
            SweepRow::from_outcomes(th, &outcomes)
        })
        .collect())
}

/// Rectangular sampling grid in world coordinates, metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub resolution: f64,
}

impl GridSpec {
    fn axis(lo: f64, hi: f64, res: f64) -> Vec<f64> {
        let n = ((hi - lo) / res + 1e-9).floor() as usize;
        (0..=n).map(|i| lo + i as f64 * res).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(Error::InvalidConfig(
                "grid resolution must be positive".into(),
            ));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(Error::InvalidConfig("empty grid".into()));
        }
        Ok(())
    }
}

/// Noiseless combined level per cell; `None` marks shadowed cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FovGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major: `values[iy * xs.len() + ix]`.
    pub values: Vec<Option<f64>>,
}

impl FovGrid {
    pub fn get(&self, ix: usize, iy: usize) -> Option<f64> {
        self.values[iy * self.xs.len() + ix]
    }
}

/// Noiseless normalized `|Σ ŷ|` with the body centred at `p`; `None`
/// inside the shadowing area or on the extension of the link.
pub fn level_at(
    cfg: &ExperimentConfig,
    beams: &BeamSet,
    subset: &[BeamId],
    p: Option<Point2>,
) -> Result<Option<f64>> {
    let geom = &cfg.geometry;
    let body = BlockerBody::new(cfg.body_radius, 1.0, p.unwrap_or(geom.tx()), (1.0, 0.0))?;
    if let Some(p) = p {
        // on the link's own line the reflection is degenerate
        if geom.in_shadowing_area(p, &body) || geom.to_local(p).0.abs() < 1e-12 {
            return Ok(None);
        }
    }
    let idx = subset
        .iter()
        .map(|id| {
            beams
                .position(*id)
                .ok_or_else(|| Error::InvalidConfig(format!("beam {id} not declared")))
        })
        .collect::<Result<Vec<_>>>()?;
    if idx.is_empty() {
        return Err(Error::InvalidConfig("empty beam subset".into()));
    }
    let baseline = baseline_amplitude(geom, beams, &cfg.scene)?;
    let h = channel_response(geom, p.map(|p| (p, &body)), beams, &cfg.scene)?;
    let amp = cfg.scene.tx_power_mw.sqrt();
    Ok(Some(combine(idx.iter().map(|&i| amp * h[i] / baseline))))
}

/// Noiseless normalized `|Σ ŷ|` for a bare point reflector at `p`, with no
/// shadowing mask. Useful for fringe studies close to the link.
pub fn point_reflector_level(
    cfg: &ExperimentConfig,
    beams: &BeamSet,
    subset: &[BeamId],
    p: Point2,
) -> Result<f64> {
    let geom = &cfg.geometry;
    let pos = geom.blocker_angles(p)?;
    let baseline = baseline_amplitude(geom, beams, &cfg.scene)?;
    let amp = cfg.scene.tx_power_mw.sqrt();
    let mut sum = Complex64::new(0.0, 0.0);
    for id in subset {
        let beam = beams
            .get(*id)
            .ok_or_else(|| Error::InvalidConfig(format!("beam {id} not declared")))?;
        sum += los_component(geom, &beams.tx, &beam.pattern, &cfg.scene)
            + nlos_component(geom, &pos, &beams.tx, &beam.pattern, &cfg.scene)?;
    }
    Ok((amp * sum / baseline).norm())
}

/// Field-of-view heat map of the combined level over `grid`.
pub fn fov_grid(cfg: &ExperimentConfig, subset: &[BeamId], grid: &GridSpec) -> Result<FovGrid> {
    grid.validate()?;
    let beams = cfg.beam_set()?;
    let xs = GridSpec::axis(grid.x_min, grid.x_max, grid.resolution);
    let ys = GridSpec::axis(grid.y_min, grid.y_max, grid.resolution);
    let values = ys
        .par_iter()
        .map(|&y| {
            xs.iter()
                .map(|&x| level_at(cfg, &beams, subset, Some(Point2::new(x, y))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(FovGrid { xs, ys, values })
}

/// One of the six beam configurations compared in the detection-range study.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub beams: Vec<(BeamId, BeamSpec)>,
    pub subset: Vec<BeamId>,
    pub threshold: f64,
}

/// Main-only beams of 7° and 13°, and a 7° main beam combined with a
/// 7°/13° guard steered by 7° or 14°, with their default thresholds.
pub fn beam_presets() -> Vec<Preset> {
    let main_only = |name, hpbw, threshold| Preset {
        name,
        beams: vec![(BeamId::Main, BeamSpec::main(hpbw))],
        subset: vec![BeamId::Main],
        threshold,
    };
    let guarded = |name, hpbw, phi| Preset {
        name,
        beams: vec![
            (BeamId::Main, BeamSpec::main(7.0)),
            (BeamId::Guard(1), BeamSpec::guard(hpbw, phi)),
        ],
        subset: vec![BeamId::Main, BeamId::Guard(1)],
        threshold: 0.03,
    };
    vec![
        main_only("main7", 7.0, 0.03),
        main_only("main13", 13.0, 0.1),
        guarded("guard7_phi7", 7.0, 7.0),
        guarded("guard13_phi7", 13.0, 7.0),
        guarded("guard7_phi14", 7.0, 14.0),
        guarded("guard13_phi14", 13.0, 14.0),
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    beam_presets().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small(runs: usize) -> ExperimentConfig {
        ExperimentConfig {
            monte_carlo_runs: runs,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn default_config_is_valid() {
        ExperimentConfig::default().validate().unwrap();
        for p in beam_presets() {
            ExperimentConfig::default()
                .with_preset(&p)
                .validate()
                .unwrap();
        }
    }

    #[test]
    fn invalid_configs() {
        let mut c = ExperimentConfig::default();
        c.detector.beam_subset = vec![BeamId::Guard(5)];
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            duration_s: 0.05,
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn distant_walk_is_los_only() {
        let cfg = ExperimentConfig::default();
        let beams = cfg.beam_set().unwrap();
        // parallel to the link, 30 m away
        let body = BlockerBody::new(0.15, 1.0, Point2::new(-10.0, 30.0), (1.0, 0.0)).unwrap();
        let run = simulate_body(&cfg, &beams, &body, 0, 5).unwrap();
        assert_eq!(run.t_s_index, None);
        assert_eq!(run.len(), 500);
        let q = simulate_quiescent(&cfg, &beams, 500, 5).unwrap();
        for (a, b) in run.traces.iter().zip(&q.traces) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).norm() < 1e-3);
            }
        }
    }

    #[test]
    fn crossing_time_matches_kinematics() {
        let cfg = ExperimentConfig {
            speed_jitter: 0.0,
            ..ExperimentConfig::default()
        };
        let beams = cfg.beam_set().unwrap();
        let run = simulate_trajectory(&cfg, &beams, 1, 3).unwrap();
        let exact = (2.5 - 0.15) / 1.0;
        let ts = run.t_s_ms().unwrap() / 1000.0;
        assert!(ts >= exact - 1e-9 && ts <= exact + 0.01 + 1e-9);
        assert_eq!(run.len(), run.t_s_index.unwrap());
        assert_eq!(run.eligible_from_ms(), Some(500.0));
    }

    #[test]
    fn start_inside_is_rejected() {
        let cfg = ExperimentConfig::default();
        let beams = cfg.beam_set().unwrap();
        let body = BlockerBody::new(0.15, 1.0, Point2::new(2.5, 0.05), (0.0, 1.0)).unwrap();
        assert!(matches!(
            simulate_body(&cfg, &beams, &body, 0, 0),
            Err(Error::InvalidScenario(_))
        ));
    }

    #[test]
    fn noiseless_fringes_follow_path_difference() {
        let mut cfg = ExperimentConfig {
            speed_jitter: 0.0,
            ..ExperimentConfig::default()
        };
        cfg.scene = cfg.scene.noiseless();
        cfg.beams = vec![(BeamId::Main, BeamSpec::main(7.0))];
        let beams = cfg.beam_set().unwrap();
        // slow walk so every fringe is sampled many times
        let body = BlockerBody::new(0.15, 0.02, Point2::new(2.5, 0.4), (0.0, -1.0)).unwrap();
        cfg.duration_s = 13.0;
        let run = simulate_body(&cfg, &beams, &body, 0, 0).unwrap();
        let z = run.combined_levels(&[BeamId::Main]).unwrap();
        let lambda = cfg.scene.wavelength();
        let dd = |r: f64| 2.0 * 2.5f64.hypot(r) - 5.0;
        // level maxima where the path difference is a whole number of wavelengths
        let maxima: Vec<f64> = (1..z.len() - 1)
            .filter(|&k| z[k] > z[k - 1] && z[k] >= z[k + 1])
            .map(|k| run.ranges[k])
            .filter(|r| *r < 0.30)
            .collect();
        assert!(maxima.len() >= 3);
        let cycles: Vec<f64> = maxima.iter().map(|&r| dd(r) / lambda).collect();
        // the slowly growing reflection shifts peaks slightly off whole cycles
        for c in &cycles {
            assert!((c - c.round()).abs() < 0.1, "cycles = {c}");
        }
        // consecutive maxima are one wavelength of path difference apart
        for pair in cycles.windows(2) {
            assert!((pair[0] - pair[1] - 1.0).abs() < 0.05, "{pair:?}");
        }
    }

    #[test]
    fn determinism() {
        let a = run_monte_carlo(&small(12)).unwrap();
        let b = run_monte_carlo(&small(12)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_reflection_never_triggers() {
        let mut cfg = small(9).with_preset(&preset("guard7_phi14").unwrap());
        cfg.scene.reflection_coeff = 0.0;
        cfg.scene = cfg.scene.noiseless();
        let est = detection_range(&cfg).unwrap();
        assert!(est.records.iter().all(|r| !r.outcome.triggered));
        assert_eq!(est.censored, 9);
        assert!(est.summary.is_none());
    }

    #[test]
    fn r_det_bounded_by_start() {
        let cfg = small(30).with_preset(&preset("guard7_phi7").unwrap());
        for r in run_monte_carlo(&cfg).unwrap() {
            if r.outcome.class == OutcomeClass::TrueDetection {
                assert!(r.r_det_mm.unwrap() <= 2500.0 + 1e-9);
                assert!(r.outcome.t_p_ms.unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn grid_matches_trajectory() {
        let mut cfg = ExperimentConfig {
            speed_jitter: 0.0,
            ..ExperimentConfig::default()
        };
        cfg.scene = cfg.scene.noiseless();
        let beams = cfg.beam_set().unwrap();
        let subset = [BeamId::Main, BeamId::Guard(1)];
        let run = simulate_trajectory(&cfg, &beams, 0, 1).unwrap();
        let levels = run.combined_levels(&subset).unwrap();
        let traj = cfg.trajectories[0];
        let body =
            BlockerBody::new(cfg.body_radius, traj.speed, traj.start, traj.direction).unwrap();
        for k in (0..run.len()).step_by(7) {
            let p = body.position(k as f64 * cfg.dt_s());
            let z = level_at(&cfg, &beams, &subset, Some(p)).unwrap().unwrap();
            assert!((z - levels[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn point_reflector_matches_body_outside_mask() {
        let cfg = ExperimentConfig::default();
        let beams = cfg.beam_set().unwrap();
        let subset = [BeamId::Main, BeamId::Guard(2)];
        for (x, y) in [(1.0, 0.4), (2.5, -0.7), (4.2, 1.3)] {
            let p = Point2::new(x, y);
            let a = level_at(&cfg, &beams, &subset, Some(p)).unwrap().unwrap();
            let b = point_reflector_level(&cfg, &beams, &subset, p).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert!(point_reflector_level(&cfg, &beams, &subset, Point2::new(2.5, 0.05)).is_ok());
    }

    #[test]
    fn fov_reference_and_mask() {
        let cfg = ExperimentConfig {
            beams: vec![(BeamId::Main, BeamSpec::main(7.0))],
            ..ExperimentConfig::default()
        };
        let beams = cfg.beam_set().unwrap();
        assert_eq!(
            level_at(&cfg, &beams, &[BeamId::Main], None).unwrap(),
            Some(1.0)
        );
        let g = fov_grid(
            &cfg,
            &[BeamId::Main],
            &GridSpec {
                x_min: 2.0,
                x_max: 3.0,
                y_min: -0.2,
                y_max: 0.2,
                resolution: 0.05,
            },
        )
        .unwrap();
        assert_eq!(g.xs.len(), 21);
        assert_eq!(g.ys.len(), 9);
        let iy0 = g.ys.iter().position(|y| y.abs() < 1e-9).unwrap();
        assert_eq!(g.get(10, iy0), None);
        assert!(g.get(10, 0).is_some());
        assert!(fov_grid(
            &cfg,
            &[BeamId::Main],
            &GridSpec {
                x_min: 1.0,
                x_max: 1.0,
                y_min: 0.0,
                y_max: 1.0,
                resolution: 0.1
            }
        )
        .is_err());
        assert!(fov_grid(
            &cfg,
            &[BeamId::Main],
            &GridSpec {
                x_min: 0.0,
                x_max: 1.0,
                y_min: 0.0,
                y_max: 1.0,
                resolution: 0.0
            }
        )
        .is_err());
    }

    fn fringe_contrast(cfg: &ExperimentConfig, subset: &[BeamId], r_lo: f64, r_hi: f64) -> f64 {
        let beams = cfg.beam_set().unwrap();
        let base = level_at(cfg, &beams, subset, None).unwrap().unwrap();
        let mut dev: f64 = 0.0;
        let mut r = r_lo;
        while r <= r_hi {
            for s in [1.25, 2.5, 3.75] {
                let p = cfg.geometry.to_world(r, s);
                let z = level_at(cfg, &beams, subset, Some(p)).unwrap().unwrap();
                dev = dev.max((z - base).abs());
            }
            r += 0.001;
        }
        dev
    }

    #[test]
    fn main_beam_fringes_fade_beyond_200_mm() {
        let cfg = ExperimentConfig::default();
        let near = fringe_contrast(&cfg, &[BeamId::Main], 0.16, 0.2);
        let mid_far = {
            let beams = cfg.beam_set().unwrap();
            let mut dev: f64 = 0.0;
            for k in 0..300 {
                let r = 0.5 + k as f64 * 0.001;
                let z = level_at(
                    &cfg,
                    &beams,
                    &[BeamId::Main],
                    Some(cfg.geometry.to_world(r, 2.5)),
                )
                .unwrap()
                .unwrap();
                dev = dev.max((z - 1.0).abs());
            }
            dev
        };
        assert!(mid_far < 0.25 * near, "{mid_far} vs {near}");
    }

    #[test]
    fn guard_widens_field_of_view() {
        let cfg = ExperimentConfig::default();
        let main = fringe_contrast(&cfg, &[BeamId::Main], 0.4, 0.6);
        let guard = fringe_contrast(&cfg, &[BeamId::Main, BeamId::Guard(2)], 0.4, 0.6);
        assert!(guard > 3.0 * main, "{guard} vs {main}");
    }

    #[test]
    fn sweep_basics() {
        let cfg = small(15).with_preset(&preset("main7").unwrap());
        let ens = TraceEnsemble::build(&cfg).unwrap();
        assert!(threshold_sweep(&ens, &[0.0]).is_err());
        let rows = threshold_sweep(&ens, &[1e-6, 0.03, 1e6]).unwrap();
        // everything fires on noise immediately at a tiny threshold
        assert_eq!(rows[0].accuracy, Some(0.0));
        assert_eq!(rows[0].false_detections, rows[0].events);
        assert_eq!(rows[2].accuracy, Some(0.0));
        assert_eq!(rows[2].mean_tp_ms, None);
        for r in &rows {
            assert_eq!(
                r.true_detections + r.false_detections + r.misdetections,
                r.events
            );
        }
        let direct = run_monte_carlo(&cfg).unwrap();
        let outcomes: Vec<_> = direct.iter().map(|r| r.outcome).collect();
        assert_eq!(SweepRow::from_outcomes(0.03, &outcomes), rows[1]);
    }

    #[test]
    fn prediction_time_summary() {
        let o = |tp: f64| DetectionOutcome::new(Some(1000.0 - tp), Some(1000.0), Some(0.0));
        let s = prediction_time_stats(&[o(100.0), o(200.0)]).unwrap();
        assert_eq!(s.mean, 150.0);
        assert!(prediction_time_stats(&[]).is_none());
        let miss = DetectionOutcome::new(None, Some(1000.0), Some(0.0));
        assert!(prediction_time_stats(&[miss]).is_none());
    }

    #[test]
    fn run_seeds_differ() {
        let c = ExperimentConfig::default();
        assert_ne!(c.run_seed(0), c.run_seed(1));
        let _ = PI;
    }
}
