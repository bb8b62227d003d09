//! Guard-beam blockage prediction for mmWave links.
//!
//! The crate models the channel seen by a receiver while a person walks
//! towards a line-of-sight link, before the body actually shadows it. A
//! single reflection off the body interferes with the direct path and the
//! received level starts to fluctuate. A passive "guard" receive beam,
//! steered a few degrees away from the communication beam, widens the region
//! in which that fluctuation is visible, so the blockage can be predicted
//! earlier.
//!
//! Modules, bottom-up:
//!
//! - [`geometry`]: 2-D link geometry, blocker coordinates, shadowing region.
//! - [`beampattern`]: uniform linear array patterns sized from a beamwidth.
//! - [`channel`]: LOS/NLOS channel composition, noise and normalization.
//! - [`detector`]: sliding-window standard deviation detector.
//! - [`scenario`]: Monte-Carlo trajectories, field-of-view grids, metrics.
//! - [`cli`]: configuration files, trace files and the command front end.
//!
//! ```
//! use guardbeam::geometry::{LinkGeometry, Point2};
//!
//! let link = LinkGeometry::new(Point2::new(0.0, 0.0), Point2::new(5.0, 0.0)).unwrap();
//! let pos = link.blocker_angles(Point2::new(2.5, 2.5)).unwrap();
//! assert!((pos.theta_t.to_degrees() - 45.0).abs() < 1e-12);
//! ```

pub mod beampattern;
pub mod channel;
pub mod cli;
pub mod detector;
pub mod error;
pub mod geometry;
pub mod scenario;
pub mod stats;

pub use error::{Error, Result};
