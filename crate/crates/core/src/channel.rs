//! Pre-shadowing channel for the main and guard receive beams.
//!
//! Each receive beam sees the direct path plus, while a blocker is nearby,
//! one specular reflection off the body. Every path contributes
//! `g_T · g_R · Γ · λ/(4πd) · e^{−j2πd/λ}`; the beams differ only in the
//! receive gain, which depends on where each beam is steered.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beampattern::{BeamPattern, BeamSpec, DEFAULT_SPACING};
use crate::geometry::{nlos_path_length, BlockerBody, BlockerPosition, LinkGeometry, Point2};
use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConfig {
    pub frequency_hz: f64,
    /// Transmit power `p_T`, milliwatts.
    pub tx_power_mw: f64,
    /// Real reflection coefficient of the body.
    pub reflection_coeff: f64,
    /// Average noise power per sample, dBm. `-inf` disables noise.
    pub noise_dbm: f64,
    /// Reflection points on the body.
    pub n_reflectors: usize,
    /// Include the `√N` peak amplitude gain of each array.
    pub array_gain: bool,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            frequency_hz: 26.0e9,
            tx_power_mw: 1.0,
            reflection_coeff: 0.62,
            noise_dbm: -93.8,
            n_reflectors: 1,
            array_gain: true,
        }
    }
}

impl SceneConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn noise_power_mw(&self) -> f64 {
        10f64.powf(self.noise_dbm / 10.0)
    }

    pub fn noiseless(mut self) -> Self {
        self.noise_dbm = f64::NEG_INFINITY;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
            return Err(Error::InvalidConfig("frequency must be positive".into()));
        }
        if !(self.tx_power_mw > 0.0 && self.tx_power_mw.is_finite()) {
            return Err(Error::InvalidConfig(
                "transmit power must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.reflection_coeff) {
            return Err(Error::InvalidConfig(
                "reflection coefficient must lie in [0, 1]".into(),
            ));
        }
        if self.noise_dbm.is_nan() || self.noise_dbm == f64::INFINITY {
            return Err(Error::InvalidConfig(
                "noise power must be finite or -inf".into(),
            ));
        }
        Ok(())
    }
}

/// Receive beam identifier. Guards are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BeamId {
    Main,
    Guard(u8),
}

impl BeamId {
    /// Stable index used to key noise streams.
    pub fn index(self) -> u64 {
        match self {
            BeamId::Main => 0,
            BeamId::Guard(k) => k as u64,
        }
    }
}

impl fmt::Display for BeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BeamId::Main => f.write_str("main"),
            BeamId::Guard(k) => write!(f, "guard{k}"),
        }
    }
}

impl FromStr for BeamId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "main" {
            return Ok(BeamId::Main);
        }
        s.strip_prefix("guard")
            .and_then(|k| k.parse::<u8>().ok())
            .filter(|&k| k >= 1)
            .map(BeamId::Guard)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown beam identifier '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RxBeam {
    pub id: BeamId,
    pub spec: BeamSpec,
    pub pattern: BeamPattern,
}

/// Tx beam plus the receive beams evaluated side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSet {
    pub tx: BeamPattern,
    pub rx: Vec<RxBeam>,
}

impl BeamSet {
    pub fn synthesize(tx: &BeamSpec, rx: &[(BeamId, BeamSpec)]) -> Result<Self> {
        let tx = BeamPattern::from_spec(tx, DEFAULT_SPACING)?;
        let rx = rx
            .iter()
            .map(|(id, spec)| {
                Ok(RxBeam {
                    id: *id,
                    spec: *spec,
                    pattern: BeamPattern::from_spec(spec, DEFAULT_SPACING)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { tx, rx })
    }

    /// Isotropic Tx and main Rx.
    pub fn unit_gains() -> Self {
        Self {
            tx: BeamPattern::isotropic(),
            rx: vec![RxBeam {
                id: BeamId::Main,
                spec: BeamSpec::main(179.0),
                pattern: BeamPattern::isotropic(),
            }],
        }
    }

    pub fn position(&self, id: BeamId) -> Option<usize> {
        self.rx.iter().position(|b| b.id == id)
    }

    pub fn get(&self, id: BeamId) -> Option<&RxBeam> {
        self.rx.iter().find(|b| b.id == id)
    }

    pub fn ids(&self) -> Vec<BeamId> {
        self.rx.iter().map(|b| b.id).collect()
    }
}

/// One received (or channel) value of one beam at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    pub value: Complex64,
    pub beam: BeamId,
    pub t: f64,
}

/// Circularly-symmetric complex Gaussian noise keyed by
/// `(seed, beam, sample index)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Linear average power `E|w|²`, mW.
    pub avg_power: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(scene: &SceneConfig, seed: u64) -> Self {
        Self {
            avg_power: scene.noise_power_mw(),
            seed,
        }
    }

    /// Noise draw for `index` on `beam`; independent of call order.
    pub fn draw(&self, beam: u64, index: u64) -> Complex64 {
        let mut s = self.stream(beam);
        s.rng.set_word_pos(index as u128 * 4);
        s.next_sample()
    }

    /// Sequential draws starting at index 0, identical to
    /// [`draw`](Self::draw) for successive indices.
    pub fn stream(&self, beam: u64) -> NoiseStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(beam);
        NoiseStream {
            rng,
            scale: self.avg_power.sqrt(),
        }
    }
}

pub struct NoiseStream {
    rng: ChaCha8Rng,
    scale: f64,
}

impl NoiseStream {
    pub fn next_sample(&mut self) -> Complex64 {
        // (0, 1] so that ln never sees zero
        let u1 = ((self.rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
        let u2 = (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        if self.scale == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.scale * (-u1.ln()).sqrt(), 2.0 * PI * u2)
    }
}

impl Iterator for NoiseStream {
    type Item = Complex64;

    fn next(&mut self) -> Option<Complex64> {
        Some(self.next_sample())
    }
}

fn amplitude(pattern: &BeamPattern, theta: f64, scene: &SceneConfig) -> f64 {
    let g = pattern.gain(theta);
    if scene.array_gain {
        g * pattern.array_gain()
    } else {
        g
    }
}

/// Free-space term `λ/(4πd)·e^{−j2πd/λ}`.
pub fn path_term(length: f64, scene: &SceneConfig) -> Complex64 {
    let lambda = scene.wavelength();
    Complex64::from_polar(lambda / (4.0 * PI * length), -2.0 * PI * length / lambda)
}

/// Direct-path component. The LOS sits at azimuth 0 at both ends, so a
/// guard beam steered by Φ sees it at −Φ from its own boresight.
pub fn los_component(
    geom: &LinkGeometry,
    tx: &BeamPattern,
    rx: &BeamPattern,
    scene: &SceneConfig,
) -> Complex64 {
    amplitude(tx, 0.0, scene) * amplitude(rx, 0.0, scene) * path_term(geom.d_o(), scene)
}

/// Single reflection off a point at `pos`.
pub fn nlos_component(
    _geom: &LinkGeometry,
    pos: &BlockerPosition,
    tx: &BeamPattern,
    rx: &BeamPattern,
    scene: &SceneConfig,
) -> Result<Complex64> {
    if scene.reflection_coeff == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let d_n = nlos_path_length(pos.r.abs(), pos.theta_t, pos.theta_r)?;
    if d_n == 0.0 {
        return Err(Error::Domain(
            "reflection point lies on the direct path".into(),
        ));
    }
    let side = pos.side();
    let g = amplitude(tx, side * pos.theta_t, scene) * amplitude(rx, side * pos.theta_r, scene);
    Ok(g * scene.reflection_coeff * path_term(d_n, scene))
}

/// Reflection points for a body: its centre, plus `n − 1` points evenly
/// spread over the perimeter when more than one reflector is configured.
pub fn reflection_points(center: Point2, radius: f64, n: usize) -> Vec<Point2> {
    match n {
        0 => Vec::new(),
        1 => vec![center],
        _ => {
            let extra = n - 1;
            std::iter::once(center)
                .chain((0..extra).map(|k| {
                    let a = 2.0 * PI * k as f64 / extra as f64;
                    Point2::new(center.x + radius * a.cos(), center.y + radius * a.sin())
                }))
                .collect()
        }
    }
}

/// Channel of every receive beam with an optional blocker at `blocker`.
pub fn channel_response(
    geom: &LinkGeometry,
    blocker: Option<(Point2, &BlockerBody)>,
    beams: &BeamSet,
    scene: &SceneConfig,
) -> Result<Vec<Complex64>> {
    let reflectors = match blocker {
        None => Vec::new(),
        Some((p, body)) => {
            if geom.in_shadowing_area(p, body) {
                return Err(Error::OutOfModel);
            }
            reflection_points(p, body.radius, scene.n_reflectors)
                .into_iter()
                .map(|q| geom.blocker_angles(q))
                .collect::<Result<Vec<_>>>()?
        }
    };
    beams
        .rx
        .iter()
        .map(|beam| {
            let mut h = los_component(geom, &beams.tx, &beam.pattern, scene);
            for pos in &reflectors {
                h += nlos_component(geom, pos, &beams.tx, &beam.pattern, scene)?;
            }
            Ok(h)
        })
        .collect()
}

/// `√p_T·h·x̂ + w` with the unit pilot `x̂ = 1`.
pub fn received_sample(
    channel: Complex64,
    scene: &SceneConfig,
    noise: Complex64,
    beam: BeamId,
    t: f64,
) -> ChannelSample {
    ChannelSample {
        value: scene.tx_power_mw.sqrt() * channel + noise,
        beam,
        t,
    }
}

/// Unblocked, noiseless main-beam amplitude `√p_T·|h_o|`.
pub fn baseline_amplitude(
    geom: &LinkGeometry,
    beams: &BeamSet,
    scene: &SceneConfig,
) -> Result<f64> {
    let main = beams
        .get(BeamId::Main)
        .ok_or_else(|| Error::InvalidConfig("the beam set has no main beam".into()))?;
    Ok(scene.tx_power_mw.sqrt() * los_component(geom, &beams.tx, &main.pattern, scene).norm())
}

pub fn normalized_level(sample: &ChannelSample, baseline: f64) -> Result<f64> {
    if !(baseline > 0.0 && baseline.is_finite()) {
        return Err(Error::InvalidCalibration(format!(
            "baseline must be positive, got {baseline}"
        )));
    }
    Ok(sample.value.norm() / baseline)
}

/// `|Σ ŷ|` over a beam subset sampled at the same instant.
pub fn combined_level(samples: &[ChannelSample]) -> Result<f64> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidConfig("empty beam subset".into()))?;
    if samples.iter().any(|s| s.t != first.t) {
        return Err(Error::InvalidConfig(
            "samples of different instants combined".into(),
        ));
    }
    Ok(samples.iter().map(|s| s.value).sum::<Complex64>().norm())
}

/// Diagnostic only: the product of Tx and Rx gains towards `p` is within
/// 40 dB of the boresight product.
pub fn in_detection_area(
    geom: &LinkGeometry,
    p: Point2,
    tx: &BeamPattern,
    rx: &BeamPattern,
) -> bool {
    let Ok(pos) = geom.blocker_angles(p) else {
        return false;
    };
    let side = pos.side();
    // both normalized patterns peak at 1
    let g = tx.gain(side * pos.theta_t) * rx.gain(side * pos.theta_r);
    20.0 * g.log10() > -40.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn link() -> LinkGeometry {
        LinkGeometry::along_x(5.0).unwrap()
    }

    fn iso() -> BeamPattern {
        BeamPattern::isotropic()
    }

    fn wrap(a: f64) -> f64 {
        let t = a.rem_euclid(2.0 * PI);
        if t > PI {
            t - 2.0 * PI
        } else {
            t
        }
    }

    #[test]
    fn wavelength_consistent() {
        let s = SceneConfig::default();
        assert!((s.wavelength() * s.frequency_hz / SPEED_OF_LIGHT - 1.0).abs() < 1e-6);
        assert!((s.wavelength() - 0.01153).abs() < 1e-5);
    }

    #[test]
    fn friis_baseline() {
        let s = SceneConfig::default();
        let h = los_component(&link(), &iso(), &iso(), &s);
        let oracle = 20.0 * (s.wavelength() / (4.0 * PI * 5.0)).log10();
        assert!((20.0 * h.norm().log10() - oracle).abs() < 1e-9);
        assert!((h.norm() - 1.835e-4).abs() < 1e-6);
        assert!((oracle + 74.7).abs() < 0.05);
    }

    #[test]
    fn los_distance_law() {
        let s = SceneConfig::default();
        let near = los_component(&link(), &iso(), &iso(), &s);
        let far = los_component(&LinkGeometry::along_x(10.0).unwrap(), &iso(), &iso(), &s);
        assert!((far.norm() * 2.0 - near.norm()).abs() < 1e-15);
        let advance = wrap(far.arg() - near.arg() + 2.0 * PI * 5.0 / s.wavelength());
        assert!(advance.abs() < 1e-6);
    }

    #[test]
    fn steered_guard_misses_los() {
        let s = SceneConfig::default();
        let beams = BeamSet::synthesize(
            &BeamSpec::tx(7.0),
            &[
                (BeamId::Main, BeamSpec::main(7.0)),
                (BeamId::Guard(2), BeamSpec::guard(7.0, 14.0)),
            ],
        )
        .unwrap();
        let main = los_component(&link(), &beams.tx, &beams.rx[0].pattern, &s);
        let guard = los_component(&link(), &beams.tx, &beams.rx[1].pattern, &s);
        let g14 = beams.rx[1].pattern.gain(0.0);
        assert!((guard.norm() / main.norm() - g14).abs() < 1e-12);
        assert!(guard.norm() < 0.2 * main.norm());
    }

    #[test]
    fn nlos_cases() {
        let g = link();
        let pos = g.blocker_angles(Point2::new(2.5, 2.5)).unwrap();
        let mut s = SceneConfig {
            reflection_coeff: 0.0,
            ..SceneConfig::default()
        };
        assert_eq!(
            nlos_component(&g, &pos, &iso(), &iso(), &s).unwrap(),
            Complex64::new(0.0, 0.0)
        );

        s.reflection_coeff = 0.62;
        let h = nlos_component(&g, &pos, &iso(), &iso(), &s).unwrap();
        let d_n = 2.0 * 2.5f64.hypot(2.5);
        let expect = 0.62 * s.wavelength() / (4.0 * PI * d_n);
        assert!((h.norm() - expect).abs() < 1e-15);
        assert!(wrap(h.arg() + 2.0 * PI * d_n / s.wavelength()).abs() < 1e-9);
    }

    #[test]
    fn nlos_null_annihilates() {
        let g = link();
        let s = SceneConfig {
            array_gain: false,
            ..SceneConfig::default()
        };
        let tx = BeamPattern::ula(15, 0.5, 0.0);
        let null = (1.0 / 7.5f64).asin();
        let r = 2.0 * null.tan();
        let pos = g.blocker_angles(Point2::new(2.0, r)).unwrap();
        let h = nlos_component(&g, &pos, &tx, &iso(), &s).unwrap();
        let d_n = nlos_path_length(r, pos.theta_t, pos.theta_r).unwrap();
        assert!(h.norm() <= 1e-9 * 0.62 * s.wavelength() / (4.0 * PI * d_n));
    }

    #[test]
    fn response_cases() {
        let g = link();
        let s = SceneConfig::default();
        let beams = BeamSet::unit_gains();
        let body = BlockerBody::new(0.15, 1.0, Point2::new(2.5, 1.0), (0.0, -1.0)).unwrap();
        let los = los_component(&g, &beams.tx, &beams.rx[0].pattern, &s);
        assert_eq!(channel_response(&g, None, &beams, &s).unwrap(), vec![los]);

        let no_refl = SceneConfig {
            reflection_coeff: 0.0,
            ..s
        };
        let h =
            channel_response(&g, Some((Point2::new(2.5, 1.0), &body)), &beams, &no_refl).unwrap();
        assert_eq!(h, vec![los]);

        let zero_n = SceneConfig {
            n_reflectors: 0,
            ..s
        };
        let h =
            channel_response(&g, Some((Point2::new(2.5, 1.0), &body)), &beams, &zero_n).unwrap();
        assert_eq!(h[0].re.to_bits(), los.re.to_bits());
        assert_eq!(h[0].im.to_bits(), los.im.to_bits());

        assert!(matches!(
            channel_response(&g, Some((Point2::new(2.5, 0.1), &body)), &beams, &s),
            Err(Error::OutOfModel)
        ));
    }

    #[test]
    fn interference_extremes() {
        // |h| swings between |h_o| ± |h_n| as the path difference sweeps λ/2
        let g = link();
        let s = SceneConfig::default();
        let beams = BeamSet::unit_gains();
        let body = BlockerBody::new(0.15, 1.0, Point2::new(0.0, 0.0), (1.0, 0.0)).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let (mut hn_min, mut hn_max) = (f64::INFINITY, 0.0f64);
        for k in 0..2000 {
            let r = 1.0 + k as f64 * 1e-4;
            let h =
                channel_response(&g, Some((Point2::new(2.5, r), &body)), &beams, &s).unwrap()[0];
            lo = lo.min(h.norm());
            hi = hi.max(h.norm());
            let pos = g.blocker_angles(Point2::new(2.5, r)).unwrap();
            let hn = nlos_component(&g, &pos, &beams.tx, &beams.rx[0].pattern, &s)
                .unwrap()
                .norm();
            hn_min = hn_min.min(hn);
            hn_max = hn_max.max(hn);
        }
        let ho = los_component(&g, &beams.tx, &beams.rx[0].pattern, &s).norm();
        assert!(hi <= ho + hn_max + 1e-12 && hi >= ho + hn_min - 1e-3 * ho);
        assert!(lo >= ho - hn_max - 1e-12 && lo <= ho - hn_min + 1e-3 * ho);
    }

    #[test]
    fn received_scaling() {
        let s = SceneConfig {
            tx_power_mw: 1.0,
            ..SceneConfig::default()
        };
        let h = Complex64::new(0.3, -0.2);
        let y = received_sample(h, &s, Complex64::new(0.0, 0.0), BeamId::Main, 0.0);
        assert_eq!(y.value, h);
        let s4 = SceneConfig {
            tx_power_mw: 4.0,
            ..s
        };
        let y4 = received_sample(h, &s4, Complex64::new(0.0, 0.0), BeamId::Main, 0.0);
        assert!((y4.value - 2.0 * h).norm() < 1e-15);
    }

    #[test]
    fn los_snr() {
        let s = SceneConfig::default();
        let h = los_component(&link(), &iso(), &iso(), &s);
        let snr = 10.0 * (s.tx_power_mw * h.norm_sqr() / s.noise_power_mw()).log10();
        assert!((snr - 19.07).abs() < 0.05, "{snr}");
    }

    #[test]
    fn normalization() {
        let y = ChannelSample {
            value: Complex64::new(2.5, 0.0),
            beam: BeamId::Main,
            t: 0.0,
        };
        assert_eq!(normalized_level(&y, 2.5).unwrap(), 1.0);
        assert!(normalized_level(&y, 0.0).is_err());
        assert!(normalized_level(&y, -1.0).is_err());

        let g = link();
        let s = SceneConfig::default();
        let beams = BeamSet::synthesize(
            &BeamSpec::tx(7.0),
            &[
                (BeamId::Main, BeamSpec::main(7.0)),
                (BeamId::Guard(1), BeamSpec::guard(7.0, 7.0)),
            ],
        )
        .unwrap();
        let base = baseline_amplitude(&g, &beams, &s).unwrap();
        let h = channel_response(&g, None, &beams, &s).unwrap();
        let main = received_sample(h[0], &s, Complex64::new(0.0, 0.0), BeamId::Main, 0.0);
        let guard = received_sample(h[1], &s, Complex64::new(0.0, 0.0), BeamId::Guard(1), 0.0);
        assert!((normalized_level(&main, base).unwrap() - 1.0).abs() < 1e-12);
        let gl = normalized_level(&guard, base).unwrap();
        assert!(gl > 0.0 && gl < 1.0);
    }

    #[test]
    fn pure_noise_level_is_rayleigh() {
        let s = SceneConfig::default();
        let g = link();
        let beams = BeamSet::unit_gains();
        let base = baseline_amplitude(&g, &beams, &s).unwrap();
        let noise = NoiseModel::new(&s, 7);
        let n = 200_000;
        let mean = noise
            .stream(0)
            .take(n)
            .map(|w| w.norm() / base)
            .sum::<f64>()
            / n as f64;
        // Rayleigh mean √(π)/2 · √P relative to the baseline
        let snr = s.tx_power_mw * los_component(&g, &beams.tx, &beams.rx[0].pattern, &s).norm_sqr()
            / s.noise_power_mw();
        let oracle = snr.powf(-0.5) * PI.sqrt() / 2.0;
        assert!((mean / oracle - 1.0).abs() < 0.01, "{mean} vs {oracle}");
    }

    #[test]
    fn combining() {
        let a = ChannelSample {
            value: Complex64::new(0.3, 0.4),
            beam: BeamId::Main,
            t: 1.0,
        };
        assert!((combined_level(&[a]).unwrap() - 0.5).abs() < 1e-15);
        let b = ChannelSample {
            beam: BeamId::Guard(1),
            ..a
        };
        assert!((combined_level(&[a, b]).unwrap() - 1.0).abs() < 1e-15);
        let c = ChannelSample {
            value: -a.value,
            beam: BeamId::Guard(1),
            t: 1.0,
        };
        assert_eq!(combined_level(&[a, c]).unwrap(), 0.0);
        assert!(combined_level(&[]).is_err());
        let late = ChannelSample { t: 2.0, ..b };
        assert!(combined_level(&[a, late]).is_err());
    }

    #[test]
    fn beam_ids() {
        assert_eq!("main".parse::<BeamId>().unwrap(), BeamId::Main);
        assert_eq!("guard2".parse::<BeamId>().unwrap(), BeamId::Guard(2));
        assert!("guard0".parse::<BeamId>().is_err());
        assert!("side".parse::<BeamId>().is_err());
        assert_eq!(BeamId::Guard(3).to_string(), "guard3");
    }

    #[test]
    fn noise_power_and_independence() {
        let s = SceneConfig::default();
        let noise = NoiseModel::new(&s, 42);
        let n = 1_000_000;
        let (mut p, mut re2, mut im2, mut reim) = (0.0, 0.0, 0.0, 0.0);
        for w in noise.stream(0).take(n) {
            p += w.norm_sqr();
            re2 += w.re * w.re;
            im2 += w.im * w.im;
            reim += w.re * w.im;
        }
        let p = p / n as f64;
        assert!((p / noise.avg_power - 1.0).abs() < 0.01);
        let corr = reim / (re2 * im2).sqrt();
        assert!(corr.abs() < 3.0 / (n as f64).sqrt(), "{corr}");
    }

    #[test]
    fn noise_random_access_matches_stream() {
        let noise = NoiseModel {
            avg_power: 1.0,
            seed: 9,
        };
        let seq: Vec<_> = noise.stream(3).take(50).collect();
        for (i, w) in seq.iter().enumerate() {
            assert_eq!(*w, noise.draw(3, i as u64));
        }
        assert_ne!(noise.draw(0, 5), noise.draw(1, 5));
        assert_eq!(
            NoiseModel {
                avg_power: 0.0,
                seed: 1
            }
            .draw(0, 3),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn detection_area_diagnostic() {
        let g = link();
        let tx = BeamPattern::ula(15, 0.5, 0.0);
        let rx = BeamPattern::ula(15, 0.5, 0.0);
        assert!(in_detection_area(&g, Point2::new(2.5, 0.1), &tx, &rx));
        // exactly on a pattern null
        let null = (1.0 / 7.5f64).asin();
        assert!(!in_detection_area(
            &g,
            Point2::new(2.5, 2.5 * null.tan()),
            &tx,
            &rx
        ));
    }

    proptest! {
        #[test]
        fn friis_consistency(d in 0.5f64..200.0, f in 1e9f64..100e9) {
            let s = SceneConfig { frequency_hz: f, ..SceneConfig::default() };
            let g = LinkGeometry::along_x(d).unwrap();
            let h = los_component(&g, &iso(), &iso(), &s);
            let oracle = -20.0 * (4.0 * PI * d / s.wavelength()).log10();
            prop_assert!((10.0 * h.norm_sqr().log10() - oracle).abs() < 1e-9);
        }

        #[test]
        fn mirror_reciprocity(s in 0.2f64..4.8, r in 0.2f64..2.0) {
            let g = link();
            let sc = SceneConfig::default();
            let b = BeamPattern::ula(15, 0.5, 0.0);
            let p = g.blocker_angles(Point2::new(s, r)).unwrap();
            let q = g.blocker_angles(Point2::new(5.0 - s, r)).unwrap();
            let a = nlos_component(&g, &p, &b, &b, &sc).unwrap();
            let m = nlos_component(&g, &q, &b, &b, &sc).unwrap();
            prop_assert!((a - m).norm() <= 1e-9 * a.norm().max(1e-30));
        }

        #[test]
        fn path_phase(len in 0.1f64..50.0) {
            let s = SceneConfig::default();
            let h = path_term(len, &s);
            prop_assert!(wrap(h.arg() + 2.0 * PI * len / s.wavelength()).abs() < 1e-9);
        }
    }
}
