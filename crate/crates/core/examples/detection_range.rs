//! Detection range of the six beam configurations: a body walks slowly
//! towards the link and the alarm position is recorded.
//!
//! `cargo run --release --example detection_range -- [runs]`

use guardbeam::scenario::{detection_range, beam_presets, ExperimentConfig};

fn main() -> guardbeam::Result<()> {
    let runs = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200);
    println!(
        "{:<15} {:>7} {:>9} {:>9} {:>9} {:>9}",
        "config", "σ_th", "mean mm", "median", "max", "censored"
    );
    for p in beam_presets() {
        let cfg = ExperimentConfig {
            monte_carlo_runs: runs,
            ..ExperimentConfig::default()
        }
        .with_preset(&p);
        let est = detection_range(&cfg)?;
        match est.summary {
            Some(s) => println!(
                "{:<15} {:>7} {:>9.0} {:>9.0} {:>9.0} {:>9}",
                p.name, p.threshold, s.mean, s.median, s.max, est.censored
            ),
            None => println!("{:<15} {:>7} no detections", p.name, p.threshold),
        }
    }
    Ok(())
}
