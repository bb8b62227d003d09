//! Rectangular complex traces (`t_ms,beam,i,q`) and their `.meta` sidecars.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::config::{parse_config, to_config_text};
use crate::channel::BeamId;
use crate::scenario::{BeamTrace, ExperimentConfig, TrajectoryRun};
use crate::{Error, Result};

pub const TRACE_HEADER: &str = "t_ms,beam,i,q";

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub t_ms: Vec<i64>,
    pub beams: Vec<BeamTrace>,
}

impl TraceFile {
    pub fn from_run(run: &TrajectoryRun) -> Self {
        Self {
            t_ms: (0..run.len())
                .map(|k| k as i64 * run.sample_interval_ms as i64)
                .collect(),
            beams: run.traces.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.t_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_ms.is_empty()
    }

    /// Stride between samples, or `None` for traces shorter than two samples.
    pub fn sample_interval_ms(&self) -> Option<i64> {
        (self.t_ms.len() >= 2).then(|| self.t_ms[1] - self.t_ms[0])
    }

    pub fn beam(&self, id: BeamId) -> Option<&BeamTrace> {
        self.beams.iter().find(|b| b.id == id)
    }

    /// `|Σ ŷ|` over `subset` at every sample.
    pub fn combined_levels(&self, subset: &[BeamId]) -> Result<Vec<f64>> {
        let traces = subset
            .iter()
            .map(|id| {
                self.beam(*id)
                    .ok_or_else(|| Error::InvalidConfig(format!("trace has no beam {id}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if traces.is_empty() {
            return Err(Error::InvalidConfig("empty beam subset".into()));
        }
        Ok((0..self.len())
            .map(|k| crate::scenario::combine(traces.iter().map(|t| t.values[k])))
            .collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * self.len() * self.beams.len() + 16);
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for (k, t) in self.t_ms.iter().enumerate() {
            for b in &self.beams {
                let v = b.values[k];
                let _ = writeln!(out, "{t},{},{:.16e},{:.16e}", b.id, v.re, v.im);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        match lines.next() {
            Some((_, h)) if h.trim() == TRACE_HEADER => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("expected header '{TRACE_HEADER}'"),
                })
            }
        }
        let mut t_ms: Vec<i64> = Vec::new();
        let mut beams: Vec<BeamTrace> = Vec::new();
        let mut order_fixed = false;
        let mut slot = 0usize;
        for (line, raw) in lines {
            if raw.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse { line, msg };
            let f: Vec<&str> = raw.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(bad(format!("expected 4 fields, found {}", f.len())));
            }
            let t: i64 = f[0]
                .parse()
                .map_err(|_| bad(format!("invalid t_ms '{}'", f[0])))?;
            let id: BeamId = f[1]
                .parse()
                .map_err(|_| bad(format!("invalid beam '{}'", f[1])))?;
            let i: f64 = f[2]
                .parse()
                .map_err(|_| bad(format!("invalid i '{}'", f[2])))?;
            let q: f64 = f[3]
                .parse()
                .map_err(|_| bad(format!("invalid q '{}'", f[3])))?;

            let starts_block = t_ms.last() != Some(&t);
            if starts_block {
                if !t_ms.is_empty() {
                    if !order_fixed {
                        order_fixed = true;
                    } else if slot != beams.len() {
                        return Err(bad(format!(
                            "timestamp {} is missing beams",
                            t_ms.last().unwrap()
                        )));
                    }
                }
                if let Some(&prev) = t_ms.last() {
                    if t <= prev {
                        return Err(bad(format!("time {t} is not after {prev}")));
                    }
                    if t_ms.len() >= 2 && t - prev != t_ms[1] - t_ms[0] {
                        return Err(bad(format!(
                            "stride {} differs from {}",
                            t - prev,
                            t_ms[1] - t_ms[0]
                        )));
                    }
                }
                t_ms.push(t);
                slot = 0;
            }
            if !order_fixed {
                if beams.iter().any(|b| b.id == id) {
                    return Err(bad(format!("beam {id} repeated at t = {t}")));
                }
                beams.push(BeamTrace {
                    id,
                    values: Vec::new(),
                });
            } else if beams.get(slot).map(|b| b.id) != Some(id) {
                return Err(bad(format!("unexpected beam {id} at t = {t}")));
            }
            beams[slot].values.push(Complex64::new(i, q));
            slot += 1;
        }
        if order_fixed && slot != beams.len() {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: format!("timestamp {} is missing beams", t_ms.last().unwrap()),
            });
        }
        Ok(Self { t_ms, beams })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Ground truth and provenance stored next to a simulated trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub t_s_ms: Option<f64>,
    pub eligible_from_ms: Option<f64>,
    pub trajectory: usize,
    pub seed: u64,
    pub speed_mps: f64,
    pub config: ExperimentConfig,
}

impl TraceMeta {
    pub fn from_run(run: &TrajectoryRun, config: &ExperimentConfig) -> Self {
        Self {
            t_s_ms: run.t_s_ms(),
            eligible_from_ms: run.eligible_from_ms(),
            trajectory: run.trajectory_id,
            seed: run.seed,
            speed_mps: run.speed,
            config: config.clone(),
        }
    }

    pub fn sidecar_path(trace: &Path) -> PathBuf {
        let mut s = trace.as_os_str().to_owned();
        s.push(".meta");
        PathBuf::from(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(t) = self.t_s_ms {
            let _ = writeln!(out, "meta.t_s_ms = {t}");
        }
        if let Some(t) = self.eligible_from_ms {
            let _ = writeln!(out, "meta.eligible_from_ms = {t}");
        }
        let _ = writeln!(out, "meta.trajectory = {}", self.trajectory);
        let _ = writeln!(out, "meta.seed = {}", self.seed);
        let _ = writeln!(out, "meta.speed_mps = {}", self.speed_mps);
        out.push_str(&to_config_text(&self.config));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config_text = String::new();
        let mut meta = Self {
            t_s_ms: None,
            eligible_from_ms: None,
            trajectory: 0,
            seed: 0,
            speed_mps: 0.0,
            config: ExperimentConfig::default(),
        };
        for (i, line) in text.lines().enumerate() {
            let Some(rest) = line.trim().strip_prefix("meta.") else {
                config_text.push_str(line);
                config_text.push('\n');
                continue;
            };
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| bad("expected 'key = value'".into()))?;
            let v = v.trim();
            let num = || {
                v.parse::<f64>()
                    .map_err(|_| bad(format!("invalid number '{v}'")))
            };
            match k.trim() {
                "t_s_ms" => meta.t_s_ms = Some(num()?),
                "eligible_from_ms" => meta.eligible_from_ms = Some(num()?),
                "speed_mps" => meta.speed_mps = num()?,
                "trajectory" => {
                    meta.trajectory = v
                        .parse()
                        .map_err(|_| bad(format!("invalid trajectory '{v}'")))?
                }
                "seed" => meta.seed = v.parse().map_err(|_| bad(format!("invalid seed '{v}'")))?,
                other => return Err(bad(format!("unknown key 'meta.{other}'"))),
            }
            // keep line numbers aligned for config errors
            config_text.push('\n');
        }
        meta.config = parse_config(&config_text)?;
        Ok(meta)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
