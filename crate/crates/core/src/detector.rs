//! Sliding-window standard deviation detector.
//!
//! The detector watches a stream of received levels and raises a blockage
//! alarm the first time the standard deviation over the trailing window
//! reaches the threshold. The window at sample `t` holds the `W` newest
//! samples including `t`, and the alarm is timestamped with that newest
//! sample.

use crate::channel::BeamId;
use crate::stats::quantile;
use crate::{Error, Result};

/// Default calibration multiplier applied to the quiescent 99th percentile.
pub const DEFAULT_CALIBRATION_K: f64 = 1.2;

/// Recompute the window moments from scratch this often to bound the
/// drift of the incremental update.
const REFRESH_INTERVAL: u64 = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Window duration τ_d, ms.
    pub window_ms: u32,
    /// Sample spacing Δt, ms.
    pub sample_interval_ms: u32,
    /// σ_th on the normalized level scale.
    pub threshold: f64,
    /// Beams whose received samples are summed before taking the magnitude.
    pub beam_subset: Vec<BeamId>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            window_ms: 100,
            sample_interval_ms: 10,
            threshold: 0.03,
            beam_subset: vec![BeamId::Main],
        }
    }
}

impl DetectorConfig {
    /// Window length in samples, `W = τ_d / Δt`.
    pub fn window_samples(&self) -> Result<usize> {
        if self.sample_interval_ms == 0 {
            return Err(Error::InvalidConfig(
                "sample interval must be positive".into(),
            ));
        }
        if !self.window_ms.is_multiple_of(self.sample_interval_ms) {
            return Err(Error::InvalidConfig(format!(
                "window {} ms is not a multiple of the sample interval {} ms",
                self.window_ms, self.sample_interval_ms
            )));
        }
        let w = (self.window_ms / self.sample_interval_ms) as usize;
        if w < 2 {
            return Err(Error::InvalidConfig(
                "the window must span at least two samples".into(),
            ));
        }
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        self.window_samples()?;
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "threshold must be positive, got {}",
                self.threshold
            )));
        }
        if self.beam_subset.is_empty() {
            return Err(Error::InvalidConfig("empty beam subset".into()));
        }
        Ok(())
    }
}

/// Population standard deviation over a sliding window, updated in O(1)
/// per sample with Welford-style add/replace steps.
#[derive(Debug, Clone)]
pub struct SlidingStd {
    buf: Vec<f64>,
    head: usize,
    len: usize,
    mean: f64,
    m2: f64,
    pushes: u64,
}

impl SlidingStd {
    pub fn new(window: usize) -> Self {
        assert!(window >= 2, "window must hold at least two samples");
        Self {
            buf: vec![0.0; window],
            head: 0,
            len: 0,
            mean: 0.0,
            m2: 0.0,
            pushes: 0,
        }
    }

    pub fn window(&self) -> usize {
        self.buf.len()
    }

    /// Adds a sample; returns σ once the window is full.
    pub fn push(&mut self, x: f64) -> Option<f64> {
        let w = self.buf.len();
        if self.len < w {
            self.len += 1;
            let delta = x - self.mean;
            self.mean += delta / self.len as f64;
            self.m2 += delta * (x - self.mean);
        } else {
            let old = self.buf[self.head];
            let mean = self.mean + (x - old) / w as f64;
            self.m2 += (x - old) * (x - mean + old - self.mean);
            self.mean = mean;
        }
        self.buf[self.head] = x;
        self.head = (self.head + 1) % w;
        self.pushes += 1;
        if self.pushes.is_multiple_of(REFRESH_INTERVAL) {
            self.refresh();
        }
        (self.len == w).then(|| (self.m2.max(0.0) / w as f64).sqrt())
    }

    fn refresh(&mut self) {
        let vals = &self.buf[..self.len];
        let n = self.len as f64;
        self.mean = vals.iter().sum::<f64>() / n;
        self.m2 = vals.iter().map(|v| (v - self.mean).powi(2)).sum();
    }
}

/// σ(t) for every index `t ≥ W − 1`; element `k` belongs to index `k + W − 1`.
pub fn sliding_std(levels: &[f64], window: usize) -> Vec<f64> {
    let mut s = SlidingStd::new(window);
    levels.iter().filter_map(|&x| s.push(x)).collect()
}

/// Result of feeding one sample to a [`Detector`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub index: usize,
    pub sigma: Option<f64>,
    /// σ(t) ≥ σ_th at this sample.
    pub crossed: bool,
}

/// Single-stream detector state machine. The first crossing is latched.
#[derive(Debug, Clone)]
pub struct Detector {
    std: SlidingStd,
    threshold: f64,
    next_index: usize,
    detected: Option<usize>,
}

impl Detector {
    pub fn new(window: usize, threshold: f64) -> Self {
        Self {
            std: SlidingStd::new(window),
            threshold,
            next_index: 0,
            detected: None,
        }
    }

    pub fn from_config(cfg: &DetectorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self::new(cfg.window_samples()?, cfg.threshold))
    }

    pub fn push(&mut self, level: f64) -> Step {
        let index = self.next_index;
        self.next_index += 1;
        let sigma = self.std.push(level);
        let crossed = sigma.is_some_and(|s| s >= self.threshold);
        if crossed && self.detected.is_none() {
            self.detected = Some(index);
        }
        Step {
            index,
            sigma,
            crossed,
        }
    }

    /// Index of the first crossing, if any.
    pub fn detection(&self) -> Option<usize> {
        self.detected
    }

    pub fn samples_seen(&self) -> usize {
        self.next_index
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub triggered: bool,
    pub index: Option<usize>,
    pub t_d_ms: Option<f64>,
}

/// Batch detection over a level trace sampled every `cfg.sample_interval_ms`.
pub fn detect(levels: &[f64], cfg: &DetectorConfig) -> Result<Detection> {
    cfg.validate()?;
    let w = cfg.window_samples()?;
    detect_with(levels, w, cfg.threshold, cfg.sample_interval_ms as f64)
}

pub fn detect_with(levels: &[f64], window: usize, threshold: f64, dt_ms: f64) -> Result<Detection> {
    if levels.len() < window {
        return Err(Error::InsufficientData(format!(
            "{} samples, the window needs {window}",
            levels.len()
        )));
    }
    let mut std = SlidingStd::new(window);
    let index = levels
        .iter()
        .enumerate()
        .find_map(|(i, &x)| std.push(x).filter(|&s| s >= threshold).map(|_| i));
    Ok(Detection {
        triggered: index.is_some(),
        index,
        t_d_ms: index.map(|i| i as f64 * dt_ms),
    })
}

/// `k ×` the 99th percentile of σ(t) over a blocker-free trace.
pub fn calibrate_threshold(quiescent: &[f64], window: usize, k: f64) -> Result<f64> {
    if window < 2 {
        return Err(Error::InvalidCalibration(
            "window must hold at least two samples".into(),
        ));
    }
    if quiescent.len() < 10 * window {
        return Err(Error::InvalidCalibration(format!(
            "{} quiescent samples, at least {} required",
            quiescent.len(),
            10 * window
        )));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidCalibration(format!(
            "multiplier must be positive, got {k}"
        )));
    }
    Ok(k * quantile(&sliding_std(quiescent, window), 0.99))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeClass {
    TrueDetection,
    FalseDetection,
    Misdetection,
    NoEvent,
}

impl OutcomeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeClass::TrueDetection => "true_detection",
            OutcomeClass::FalseDetection => "false_detection",
            OutcomeClass::Misdetection => "misdetection",
            OutcomeClass::NoEvent => "no_event",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Self::TrueDetection,
            Self::FalseDetection,
            Self::Misdetection,
            Self::NoEvent,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
    }
}

/// Classifies a (latched) detection against the ground truth.
///
/// `eligible_from_ms` is the time the blocker entered the region where an
/// alarm is considered legitimate; `None` when it never did.
pub fn classify(
    t_d_ms: Option<f64>,
    t_s_ms: Option<f64>,
    eligible_from_ms: Option<f64>,
) -> OutcomeClass {
    match (t_d_ms, t_s_ms) {
        (Some(td), Some(ts)) if td >= ts => OutcomeClass::Misdetection,
        (Some(td), Some(_)) => {
            if eligible_from_ms.is_some_and(|e| td >= e) {
                OutcomeClass::TrueDetection
            } else {
                OutcomeClass::FalseDetection
            }
        }
        (Some(_), None) => OutcomeClass::FalseDetection,
        (None, Some(_)) => OutcomeClass::Misdetection,
        (None, None) => OutcomeClass::NoEvent,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionOutcome {
    pub triggered: bool,
    pub t_d_ms: Option<f64>,
    pub t_s_ms: Option<f64>,
    /// `t_s − t_d` whenever both exist.
    pub t_p_ms: Option<f64>,
    pub class: OutcomeClass,
}

impl DetectionOutcome {
    pub fn new(t_d_ms: Option<f64>, t_s_ms: Option<f64>, eligible_from_ms: Option<f64>) -> Self {
        let t_p_ms = match (t_d_ms, t_s_ms) {
            (Some(td), Some(ts)) => Some(ts - td),
            _ => None,
        };
        Self {
            triggered: t_d_ms.is_some(),
            t_d_ms,
            t_s_ms,
            t_p_ms,
            class: classify(t_d_ms, t_s_ms, eligible_from_ms),
        }
    }
}
