//! Uniform linear array beam patterns.
//!
//! A beam is requested as a half-power beamwidth plus a steering offset
//! from the LOS direction. The array is sized with the smallest integer
//! element count whose broadside beam is at least as narrow as requested;
//! steering is a progressive phase shift, so the pattern is shifted in
//! sine space rather than rotated.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Largest array considered when sizing a beam.
pub const MAX_ELEMENTS: usize = 512;

/// Half-wavelength element spacing.
pub const DEFAULT_SPACING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BeamRole {
    Tx,
    RxMain,
    RxGuard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    /// Half-power beamwidth, degrees.
    pub hpbw_deg: f64,
    /// Boresight offset from the LOS direction, degrees. Positive values
    /// look towards the positive-`r` side of the link.
    pub steering_deg: f64,
    pub role: BeamRole,
}

impl BeamSpec {
    pub fn tx(hpbw_deg: f64) -> Self {
        Self {
            hpbw_deg,
            steering_deg: 0.0,
            role: BeamRole::Tx,
        }
    }

    pub fn main(hpbw_deg: f64) -> Self {
        Self {
            hpbw_deg,
            steering_deg: 0.0,
            role: BeamRole::RxMain,
        }
    }

    pub fn guard(hpbw_deg: f64, steering_deg: f64) -> Self {
        Self {
            hpbw_deg,
            steering_deg,
            role: BeamRole::RxGuard,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hpbw_deg > 0.0 && self.hpbw_deg < 180.0) {
            return Err(Error::InvalidConfig(format!(
                "beamwidth must lie in (0, 180) degrees, got {}",
                self.hpbw_deg
            )));
        }
        if !self.steering_deg.is_finite() || self.steering_deg.abs() >= 90.0 {
            return Err(Error::InvalidConfig(format!(
                "steering must lie in (-90, 90) degrees, got {}",
                self.steering_deg
            )));
        }
        if self.role != BeamRole::RxGuard && self.steering_deg != 0.0 {
            return Err(Error::InvalidConfig(
                "only guard beams may be steered off the LOS".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPattern {
    element_count: usize,
    /// Element spacing in wavelengths.
    spacing: f64,
    /// Steering angle, radians.
    steering: f64,
    requested_hpbw_deg: Option<f64>,
    achieved_hpbw_deg: f64,
}

impl BeamPattern {
    /// Single element: unit gain in every direction.
    pub fn isotropic() -> Self {
        Self::ula(1, DEFAULT_SPACING, 0.0)
    }

    pub fn ula(element_count: usize, spacing: f64, steering: f64) -> Self {
        assert!(element_count >= 1, "an array needs at least one element");
        assert!(spacing > 0.0, "element spacing must be positive");
        Self {
            element_count,
            spacing,
            steering,
            requested_hpbw_deg: None,
            achieved_hpbw_deg: half_power_beamwidth(element_count, spacing),
        }
    }

    pub fn from_spec(spec: &BeamSpec, spacing: f64) -> Result<Self> {
        spec.validate()?;
        let n = elements_for_hpbw(spec.hpbw_deg, spacing)?;
        let mut p = Self::ula(n, spacing, spec.steering_deg.to_radians());
        p.requested_hpbw_deg = Some(spec.hpbw_deg);
        Ok(p)
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn steering(&self) -> f64 {
        self.steering
    }

    /// Broadside half-power beamwidth of the synthesized array, degrees.
    pub fn achieved_hpbw_deg(&self) -> f64 {
        self.achieved_hpbw_deg
    }

    /// Requested minus achieved beamwidth; integer element counts leave a
    /// residual.
    pub fn hpbw_mismatch_deg(&self) -> Option<f64> {
        self.requested_hpbw_deg.map(|h| h - self.achieved_hpbw_deg)
    }

    /// Normalized array-factor magnitude at azimuth `theta` (radians),
    /// equal to 1 at the steering angle.
    pub fn gain(&self, theta: f64) -> f64 {
        let u = theta.sin() - self.steering.sin();
        array_factor(self.element_count, self.spacing, u)
    }

    /// Peak amplitude gain of the array, `√N`.
    pub fn array_gain(&self) -> f64 {
        (self.element_count as f64).sqrt()
    }
}

/// `|sin(N·ψ/2) / (N·sin(ψ/2))|` with `ψ = 2π·spacing·u`, `u` in sine space.
pub fn array_factor(n: usize, spacing: f64, u: f64) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let half_psi = PI * spacing * u;
    let den = n as f64 * half_psi.sin();
    if den.abs() < 1e-12 {
        // main lobe or grating lobe peak
        return 1.0;
    }
    ((n as f64 * half_psi).sin() / den).abs().min(1.0)
}

/// Broadside half-power beamwidth in degrees; 180 when the pattern never
/// drops to half power.
pub fn half_power_beamwidth(n: usize, spacing: f64) -> f64 {
    let power = |u: f64| array_factor(n, spacing, u).powi(2);
    // the main lobe ends at the first null, u = 1/(N·d)
    let mut hi = (1.0 / (n as f64 * spacing)).min(1.0);
    if power(hi) >= 0.5 {
        return 180.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if power(mid) >= 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2.0 * (0.5 * (lo + hi)).asin().to_degrees()
}

/// Smallest element count whose broadside HPBW does not exceed `hpbw_deg`.
pub fn elements_for_hpbw(hpbw_deg: f64, spacing: f64) -> Result<usize> {
    if !(hpbw_deg > 0.0 && hpbw_deg < 180.0) {
        return Err(Error::InvalidConfig(format!(
            "beamwidth must lie in (0, 180) degrees, got {hpbw_deg}"
        )));
    }
    // HPBW shrinks monotonically with N, so bisect on the count.
    if half_power_beamwidth(MAX_ELEMENTS, spacing) > hpbw_deg {
        return Err(Error::Capability {
            hpbw_deg,
            max_elements: MAX_ELEMENTS,
        });
    }
    let (mut lo, mut hi) = (1usize, MAX_ELEMENTS);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if half_power_beamwidth(mid, spacing) <= hpbw_deg {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}
