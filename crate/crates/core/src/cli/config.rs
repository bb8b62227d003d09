//! Flat `key = value` configuration files.
//!
//! ```text
//! # comments start with '#'
//! scene.frequency_hz = 26000000000
//! beams = main, guard1
//! beam.guard1.steering_deg = 14
//! detector.sigma_th = 0.03
//! trajectory.1.start = 2.5, 2.5
//! ```
//!
//! Unknown keys are errors. Missing keys keep their defaults.
//! [`to_config_text`] writes every key and parses back to the same value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::beampattern::BeamSpec;
use crate::channel::BeamId;
use crate::geometry::{LinkGeometry, Point2};
use crate::scenario::{preset, ExperimentConfig, Trajectory};
use crate::{Error, Result};

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Entries(BTreeMap<String, Entry>);

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected 'key = value', got '{content}'"),
            })?;
            let key = k.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: "empty key".into(),
                });
            }
            let entry = Entry {
                line,
                value: v.trim().to_string(),
                used: false,
            };
            if let Some(prev) = map.insert(key.clone(), entry) {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key '{key}' (first set on line {})", prev.line),
                });
            }
        }
        Ok(Self(map))
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.0.get_mut(key).map(|e| {
            e.used = true;
            (e.line, e.value.clone())
        })
    }

    fn get<T: FromStr>(&mut self, key: &str, target: &mut T) -> Result<()> {
        if let Some((line, v)) = self.take(key) {
            *target = v.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid value '{v}' for {key}"),
            })?;
        }
        Ok(())
    }

    fn get_list<T: FromStr>(&mut self, key: &str) -> Result<Option<(usize, Vec<T>)>> {
        let Some((line, v)) = self.take(key) else {
            return Ok(None);
        };
        let items = v
            .split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("invalid list item '{}' for {key}", s.trim()),
                })
            })
            .collect::<Result<Vec<T>>>()?;
        Ok(Some((line, items)))
    }

    fn get_pair(&mut self, key: &str) -> Result<Option<(f64, f64)>> {
        match self.get_list::<f64>(key)? {
            None => Ok(None),
            Some((_, v)) if v.len() == 2 => Ok(Some((v[0], v[1]))),
            Some((line, _)) => Err(Error::Parse {
                line,
                msg: format!("{key} expects two numbers"),
            }),
        }
    }

    fn finish(self) -> Result<()> {
        match self
            .0
            .into_iter()
            .filter(|(_, e)| !e.used)
            .min_by_key(|(_, e)| e.line)
        {
            Some((key, e)) => Err(Error::Parse {
                line: e.line,
                msg: format!("unknown key '{key}'"),
            }),
            None => Ok(()),
        }
    }
}

fn default_guard(k: u8) -> BeamSpec {
    BeamSpec::guard(7.0, 7.0 * k as f64)
}

/// Parses a configuration document on top of the defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut e = Entries::parse(text)?;
    let mut cfg = ExperimentConfig::default();

    if let Some((line, name)) = e.take("preset") {
        let p = preset(&name).ok_or_else(|| Error::Parse {
            line,
            msg: format!("unknown preset '{name}'"),
        })?;
        cfg = cfg.with_preset(&p);
    }

    let s = &mut cfg.scene;
    e.get("scene.frequency_hz", &mut s.frequency_hz)?;
    e.get("scene.tx_power_mw", &mut s.tx_power_mw)?;
    e.get("scene.reflection_coeff", &mut s.reflection_coeff)?;
    e.get("scene.noise_dbm", &mut s.noise_dbm)?;
    e.get("scene.n_reflectors", &mut s.n_reflectors)?;
    e.get("scene.array_gain", &mut s.array_gain)?;

    let (mut tx, mut rx) = (cfg.geometry.tx(), cfg.geometry.rx());
    let tx_set = e.get_pair("link.tx")?;
    let rx_set = e.get_pair("link.rx")?;
    if let Some((x, y)) = tx_set {
        tx = Point2::new(x, y);
    }
    if let Some((x, y)) = rx_set {
        rx = Point2::new(x, y);
    }
    cfg.geometry = LinkGeometry::new(tx, rx)?;

    e.get("beam.tx.hpbw_deg", &mut cfg.tx_beam.hpbw_deg)?;
    if let Some((line, ids)) = e.get_list::<BeamId>("beams")? {
        let old = std::mem::take(&mut cfg.beams);
        for id in ids {
            if cfg.beams.iter().any(|(b, _)| *b == id) {
                return Err(Error::Parse {
                    line,
                    msg: format!("beam {id} listed twice"),
                });
            }
            let spec = old
                .iter()
                .find(|(b, _)| *b == id)
                .map(|(_, s)| *s)
                .unwrap_or(match id {
                    BeamId::Main => BeamSpec::main(7.0),
                    BeamId::Guard(k) => default_guard(k),
                });
            cfg.beams.push((id, spec));
        }
    }
    for (id, spec) in &mut cfg.beams {
        e.get(&format!("beam.{id}.hpbw_deg"), &mut spec.hpbw_deg)?;
        if *id != BeamId::Main {
            e.get(&format!("beam.{id}.steering_deg"), &mut spec.steering_deg)?;
        }
    }

    let d = &mut cfg.detector;
    e.get("detector.window_ms", &mut d.window_ms)?;
    e.get("detector.sample_interval_ms", &mut d.sample_interval_ms)?;
    e.get("detector.sigma_th", &mut d.threshold)?;
    if let Some((_, subset)) = e.get_list::<BeamId>("detector.beams")? {
        d.beam_subset = subset;
    }
    cfg.sample_interval_ms = cfg.detector.sample_interval_ms;

    e.get("experiment.duration_s", &mut cfg.duration_s)?;
    e.get("experiment.runs", &mut cfg.monte_carlo_runs)?;
    e.get("experiment.seed", &mut cfg.seed)?;
    e.get("experiment.speed_jitter", &mut cfg.speed_jitter)?;
    e.get("experiment.body_radius_m", &mut cfg.body_radius)?;
    e.get("experiment.eligibility_m", &mut cfg.eligibility_m)?;
    e.get("experiment.range_speed_mps", &mut cfg.range_speed_mps)?;
    e.get("experiment.range_duration_s", &mut cfg.range_duration_s)?;

    let mut trajectories = Vec::new();
    for k in 1.. {
        let start = e.get_pair(&format!("trajectory.{k}.start"))?;
        let dir = e.get_pair(&format!("trajectory.{k}.direction"))?;
        let mut speed = f64::NAN;
        e.get(&format!("trajectory.{k}.speed_mps"), &mut speed)?;
        match (start, dir) {
            (None, None) if speed.is_nan() => break,
            (Some(start), Some(direction)) if !speed.is_nan() => trajectories.push(Trajectory {
                start: Point2::new(start.0, start.1),
                direction,
                speed,
            }),
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "trajectory.{k} needs start, direction and speed_mps"
                )))
            }
        }
    }
    if !trajectories.is_empty() {
        cfg.trajectories = trajectories;
    }

    e.finish()?;
    cfg.validate()?;
    Ok(cfg)
}

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Complete configuration document for `cfg`.
pub fn to_config_text(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    let s = &cfg.scene;
    kv("scene.frequency_hz", s.frequency_hz.to_string());
    kv("scene.tx_power_mw", s.tx_power_mw.to_string());
    kv("scene.reflection_coeff", s.reflection_coeff.to_string());
    kv("scene.noise_dbm", s.noise_dbm.to_string());
    kv("scene.n_reflectors", s.n_reflectors.to_string());
    kv("scene.array_gain", s.array_gain.to_string());
    let (tx, rx) = (cfg.geometry.tx(), cfg.geometry.rx());
    kv("link.tx", join([tx.x, tx.y]));
    kv("link.rx", join([rx.x, rx.y]));
    kv("beam.tx.hpbw_deg", cfg.tx_beam.hpbw_deg.to_string());
    kv("beams", join(cfg.beams.iter().map(|(id, _)| id)));
    for (id, spec) in &cfg.beams {
        kv(&format!("beam.{id}.hpbw_deg"), spec.hpbw_deg.to_string());
        if *id != BeamId::Main {
            kv(
                &format!("beam.{id}.steering_deg"),
                spec.steering_deg.to_string(),
            );
        }
    }
    let d = &cfg.detector;
    kv("detector.window_ms", d.window_ms.to_string());
    kv(
        "detector.sample_interval_ms",
        d.sample_interval_ms.to_string(),
    );
    kv("detector.sigma_th", d.threshold.to_string());
    kv("detector.beams", join(&d.beam_subset));
    kv("experiment.duration_s", cfg.duration_s.to_string());
    kv("experiment.runs", cfg.monte_carlo_runs.to_string());
    kv("experiment.seed", cfg.seed.to_string());
    kv("experiment.speed_jitter", cfg.speed_jitter.to_string());
    kv("experiment.body_radius_m", cfg.body_radius.to_string());
    kv("experiment.eligibility_m", cfg.eligibility_m.to_string());
    kv(
        "experiment.range_speed_mps",
        cfg.range_speed_mps.to_string(),
    );
    kv(
        "experiment.range_duration_s",
        cfg.range_duration_s.to_string(),
    );
    for (i, t) in cfg.trajectories.iter().enumerate() {
        let k = i + 1;
        kv(
            &format!("trajectory.{k}.start"),
            join([t.start.x, t.start.y]),
        );
        kv(
            &format!("trajectory.{k}.direction"),
            join([t.direction.0, t.direction.1]),
        );
        kv(&format!("trajectory.{k}.speed_mps"), t.speed.to_string());
    }
    out
}
