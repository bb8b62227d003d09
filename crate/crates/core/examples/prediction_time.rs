//! Prediction time of the main beam versus the main+guard combination at
//! thresholds calibrated on a blocker-free trace.

use guardbeam::detector::{calibrate_threshold, OutcomeClass, DEFAULT_CALIBRATION_K};
use guardbeam::scenario::{
    prediction_time_stats, preset, run_monte_carlo, simulate_quiescent, ExperimentConfig,
    MEASURED_MEAN_TP_MS,
};

fn main() -> guardbeam::Result<()> {
    for name in ["main7", "guard7_phi7", "guard7_phi14"] {
        let mut cfg = ExperimentConfig {
            monte_carlo_runs: 300,
            ..ExperimentConfig::default()
        }
        .with_preset(&preset(name).expect("known preset"));
        let beams = cfg.beam_set()?;
        let quiet = simulate_quiescent(&cfg, &beams, 20_000, 1)?;
        let w = cfg.detector.window_samples()?;
        cfg.detector.threshold = calibrate_threshold(
            &quiet.combined_levels(&cfg.detector.beam_subset)?,
            w,
            DEFAULT_CALIBRATION_K,
        )?;

        let outcomes: Vec<_> = run_monte_carlo(&cfg)?.iter().map(|r| r.outcome).collect();
        let hits = outcomes
            .iter()
            .filter(|o| o.class == OutcomeClass::TrueDetection)
            .count();
        let s = prediction_time_stats(&outcomes).expect("some true detections");
        println!(
            "{name:<13} σ_th {:.4}  t_p mean {:6.1} ms  median {:6.1} ms  IQR {:.0}-{:.0} ms  accuracy {:.1}%",
            cfg.detector.threshold,
            s.mean,
            s.median,
            s.q1,
            s.q3,
            100.0 * hits as f64 / outcomes.len() as f64
        );
    }
    println!("\nmeasured on hardware (for shape comparison only):");
    for (beam, tp) in MEASURED_MEAN_TP_MS {
        println!("  {beam:<12} {tp} ms");
    }
    Ok(())
}
