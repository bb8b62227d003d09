//! Feeds a simulated walk sample by sample into the streaming detector,
//! as a receiver would, and prints σ(t) around the alarm.

use guardbeam::detector::Detector;
use guardbeam::scenario::{preset, simulate_trajectory, ExperimentConfig};

fn main() -> guardbeam::Result<()> {
    let cfg =
        ExperimentConfig::default().with_preset(&preset("guard7_phi14").expect("known preset"));
    let run = simulate_trajectory(&cfg, &cfg.beam_set()?, 0, 7)?;
    let levels = run.combined_levels(&cfg.detector.beam_subset)?;
    let mut det = Detector::from_config(&cfg.detector)?;

    for (k, z) in levels.iter().enumerate() {
        let step = det.push(*z);
        if step.crossed && det.detection() == Some(k) {
            println!(
                "alarm at t = {} ms, body {:.0} mm from the link, σ = {:.4}",
                k * 10,
                run.ranges[k] * 1e3,
                step.sigma.unwrap_or(0.0)
            );
        }
    }
    match (det.detection(), run.t_s_ms()) {
        (Some(k), Some(ts)) => println!(
            "shadowing at t = {ts} ms, predicted {} ms ahead",
            ts - (k * 10) as f64
        ),
        (None, _) => println!("no alarm"),
        (Some(_), None) => println!("alarm without a blockage"),
    }
    Ok(())
}
