//! Two-dimensional link geometry.
//!
//! Blocker positions are expressed in link-local coordinates: `s` runs along
//! the Tx→Rx segment starting at the transmitter and `r` is the signed
//! perpendicular distance to the link, positive on the side the guard beam
//! looks at. Both beams are boresight-aligned with the direct path, so the
//! LOS azimuths are zero in this frame.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    tx: Point2,
    rx: Point2,
    d_o: f64,
    /// Unit vector Tx→Rx.
    axis: (f64, f64),
    /// Unit normal, axis rotated by +90°.
    normal: (f64, f64),
}

/// Blocker position relative to the link, with both azimuths measured from
/// the LOS direction at each end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockerPosition {
    /// Signed perpendicular distance to the link (m).
    pub r: f64,
    /// Along-link coordinate measured from Tx (m).
    pub s: f64,
    /// Azimuth Tx→blocker against the LOS (rad, non-negative).
    pub theta_t: f64,
    /// Azimuth Rx→blocker against the LOS (rad, non-negative).
    pub theta_r: f64,
}

impl BlockerPosition {
    /// Side of the link, `+1` on the guard side, `-1` otherwise.
    pub fn side(&self) -> f64 {
        if self.r < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

impl LinkGeometry {
    pub fn new(tx: Point2, rx: Point2) -> Result<Self> {
        let d_o = tx.distance(rx);
        if !d_o.is_finite() || d_o <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "Tx and Rx must be distinct finite points (d_o = {d_o})"
            )));
        }
        let axis = ((rx.x - tx.x) / d_o, (rx.y - tx.y) / d_o);
        Ok(Self {
            tx,
            rx,
            d_o,
            axis,
            normal: (-axis.1, axis.0),
        })
    }

    /// Tx at the origin, Rx on the positive x axis.
    pub fn along_x(distance: f64) -> Result<Self> {
        Self::new(Point2::new(0.0, 0.0), Point2::new(distance, 0.0))
    }

    pub fn tx(&self) -> Point2 {
        self.tx
    }

    pub fn rx(&self) -> Point2 {
        self.rx
    }

    /// LOS distance.
    pub fn d_o(&self) -> f64 {
        self.d_o
    }

    /// `(r, s)` of a world point.
    pub fn to_local(&self, p: Point2) -> (f64, f64) {
        let (dx, dy) = (p.x - self.tx.x, p.y - self.tx.y);
        let s = dx * self.axis.0 + dy * self.axis.1;
        let r = dx * self.normal.0 + dy * self.normal.1;
        (r, s)
    }

    pub fn to_world(&self, r: f64, s: f64) -> Point2 {
        Point2::new(
            self.tx.x + s * self.axis.0 + r * self.normal.0,
            self.tx.y + s * self.axis.1 + r * self.normal.1,
        )
    }

    /// Link-local coordinates and both azimuths of a blocker.
    pub fn blocker_angles(&self, p: Point2) -> Result<BlockerPosition> {
        if p == self.tx || p == self.rx {
            return Err(Error::Domain(
                "blocker coincides with a link endpoint".into(),
            ));
        }
        let (r, s) = self.to_local(p);
        Ok(BlockerPosition {
            r,
            s,
            theta_t: r.abs().atan2(s),
            theta_r: r.abs().atan2(self.d_o - s),
        })
    }

    /// Euclidean distance from `p` to the closed Tx–Rx segment.
    pub fn distance_to_segment(&self, p: Point2) -> f64 {
        let (r, s) = self.to_local(p);
        if s < 0.0 {
            r.hypot(s)
        } else if s > self.d_o {
            r.hypot(s - self.d_o)
        } else {
            r.abs()
        }
    }

    /// Whether the blocker disc touches the direct path. Tangency counts.
    pub fn in_shadowing_area(&self, p: Point2, body: &BlockerBody) -> bool {
        self.distance_to_segment(p) <= body.radius
    }

    /// First sample time `k·dt` at which the body overlaps the direct path,
    /// or `None` if its straight-line path never does.
    pub fn shadowing_time(&self, body: &BlockerBody, dt: f64) -> Option<f64> {
        self.shadowing_index(body, dt).map(|k| k as f64 * dt)
    }

    /// Sample index of [`shadowing_time`](Self::shadowing_time).
    pub fn shadowing_index(&self, body: &BlockerBody, dt: f64) -> Option<usize> {
        assert!(dt > 0.0, "sample interval must be positive");
        let (t0, t1) = self.shadowing_interval(body)?;
        let mut k = (t0 / dt).ceil().max(0.0) as usize;
        if k > 0 && self.in_shadowing_area(body.position((k - 1) as f64 * dt), body) {
            k -= 1;
        }
        // The exact interval is closed; a grazing pass can still fall
        // between two grid points.
        while (k as f64) * dt <= t1 + dt * 1e-9 {
            if self.in_shadowing_area(body.position(k as f64 * dt), body) {
                return Some(k);
            }
            k += 1;
        }
        None
    }

    /// Continuous time interval `[t0, t1]`, `t0 ≥ 0`, during which the body
    /// overlaps the segment. The overlap region is a capsule (the segment
    /// dilated by the body radius), so the straight path meets it in at
    /// most one interval.
    pub fn shadowing_interval(&self, body: &BlockerBody) -> Option<(f64, f64)> {
        let (r0, s0) = self.to_local(body.start);
        let v = body.velocity();
        let vs = v.0 * self.axis.0 + v.1 * self.axis.1;
        let vr = v.0 * self.normal.0 + v.1 * self.normal.1;
        let rho = body.radius;

        let strip = intersect(
            linear_interval(r0, vr, -rho, rho),
            linear_interval(s0, vs, 0.0, self.d_o),
        );
        let cap_tx = disc_interval((s0, r0), (vs, vr), (0.0, 0.0), rho);
        let cap_rx = disc_interval((s0, r0), (vs, vr), (self.d_o, 0.0), rho);

        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in [strip, cap_tx, cap_rx].into_iter().flatten() {
            lo = lo.min(a);
            hi = hi.max(b);
        }
        if hi < 0.0 || lo > hi {
            return None;
        }
        Some((lo.max(0.0), hi))
    }
}

fn intersect(a: Option<(f64, f64)>, b: Option<(f64, f64)>) -> Option<(f64, f64)> {
    let (a, b) = (a?, b?);
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    (lo <= hi).then_some((lo, hi))
}

/// `{t : lo ≤ x0 + k·t ≤ hi}`.
fn linear_interval(x0: f64, k: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    if k == 0.0 {
        return (lo..=hi)
            .contains(&x0)
            .then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let a = (lo - x0) / k;
    let b = (hi - x0) / k;
    Some((a.min(b), a.max(b)))
}

/// `{t : |p0 + v·t − c| ≤ rho}`.
fn disc_interval(p0: (f64, f64), v: (f64, f64), c: (f64, f64), rho: f64) -> Option<(f64, f64)> {
    let (dx, dy) = (p0.0 - c.0, p0.1 - c.1);
    let a = v.0 * v.0 + v.1 * v.1;
    let b = 2.0 * (dx * v.0 + dy * v.1);
    let cc = dx * dx + dy * dy - rho * rho;
    if a == 0.0 {
        return (cc <= 0.0).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let disc = b * b - 4.0 * a * cc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    Some(((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)))
}

/// Total reflected path length `r/sin θ_T + r/sin θ_R`.
///
/// For a guard beam the receive angle passed here is the physical arrival
/// angle, i.e. the guard-relative angle plus the steering offset.
pub fn nlos_path_length(r: f64, theta_t: f64, theta_r: f64) -> Result<f64> {
    if r < 0.0 || !r.is_finite() {
        return Err(Error::Domain(format!(
            "range must be non-negative, got {r}"
        )));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let (st, sr) = (theta_t.sin(), theta_r.sin());
    if st <= 0.0 || sr <= 0.0 {
        return Err(Error::Domain(
            "blocker collinear with a link endpoint".into(),
        ));
    }
    Ok(r / st + r / sr)
}

/// A walking person: a disc moving in a straight line at constant speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockerBody {
    pub radius: f64,
    pub speed: f64,
    pub start: Point2,
    /// Unit direction of travel.
    pub direction: (f64, f64),
}

impl BlockerBody {
    pub const DEFAULT_RADIUS: f64 = 0.15;

    pub fn new(radius: f64, speed: f64, start: Point2, direction: (f64, f64)) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "body radius must be > 0, got {radius}"
            )));
        }
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "speed must be > 0, got {speed}"
            )));
        }
        let norm = direction.0.hypot(direction.1);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidScenario(
                "direction must be a non-zero vector".into(),
            ));
        }
        Ok(Self {
            radius,
            speed,
            start,
            direction: (direction.0 / norm, direction.1 / norm),
        })
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.direction.0 * self.speed, self.direction.1 * self.speed)
    }

    pub fn position(&self, t: f64) -> Point2 {
        let (vx, vy) = self.velocity();
        Point2::new(self.start.x + t * vx, self.start.y + t * vy)
    }
}
