//! Field of view of the main beam alone and with a guard beam: writes two
//! plot-ready CSV grids and prints how far from the link each one still
//! sees the body.
//!
//! `cargo run --release --example field_of_view -- [out_dir]`

use std::fmt::Write as _;

use guardbeam::channel::BeamId;
use guardbeam::scenario::{fov_grid, ExperimentConfig, GridSpec};

fn main() -> guardbeam::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| ".".into());
    let mut cfg = ExperimentConfig::default();
    cfg.scene = cfg.scene.noiseless();
    let grid = GridSpec {
        x_min: 0.5,
        x_max: 4.5,
        y_min: 0.0,
        y_max: 1.2,
        resolution: 0.005,
    };

    for (name, subset) in [
        ("main", vec![BeamId::Main]),
        ("main_guard14", vec![BeamId::Main, BeamId::Guard(2)]),
    ] {
        let fov = fov_grid(&cfg, &subset, &grid)?;
        let mut csv = String::from("x_m,y_m,z_level\n");
        // farthest row (per column) where the level departs from the LOS level by 3 %
        let mut reach = vec![0.0f64; fov.xs.len()];
        for (iy, y) in fov.ys.iter().enumerate() {
            for (ix, x) in fov.xs.iter().enumerate() {
                let z = fov.get(ix, iy);
                let _ = writeln!(
                    csv,
                    "{x},{y},{}",
                    z.map(|v| v.to_string()).unwrap_or_default()
                );
                if z.is_some_and(|v| (v - 1.0).abs() > 0.03) {
                    reach[ix] = reach[ix].max(*y);
                }
            }
        }
        let path = format!("{out}/fov_{name}.csv");
        std::fs::write(&path, csv)?;
        let mid = fov.xs.len() / 2;
        println!(
            "{name:>13}: visible up to {:.0} mm at mid-link, {:.0} mm at x = 1 m -> {path}",
            reach[mid] * 1e3,
            reach[100] * 1e3
        );
    }
    Ok(())
}
