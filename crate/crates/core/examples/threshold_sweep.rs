//! Prediction time against accuracy as the threshold varies, over one
//! cached set of traces so every threshold sees the same noise.

use guardbeam::scenario::{preset, threshold_sweep, ExperimentConfig, TraceEnsemble};

fn main() -> guardbeam::Result<()> {
    let cfg = ExperimentConfig {
        monte_carlo_runs: 300,
        ..ExperimentConfig::default()
    }
    .with_preset(&preset("main7").expect("known preset"));
    let ensemble = TraceEnsemble::build(&cfg)?;
    let thresholds: Vec<f64> = (0..14).map(|i| 0.004 + 0.003 * i as f64).collect();

    println!(
        "{:>8} {:>12} {:>9} {:>6} {:>6} {:>6}",
        "σ_th", "mean t_p ms", "accuracy", "true", "false", "miss"
    );
    for r in threshold_sweep(&ensemble, &thresholds)? {
        println!(
            "{:>8.3} {:>12} {:>8.1}% {:>6} {:>6} {:>6}",
            r.sigma_th,
            r.mean_tp_ms
                .map(|t| format!("{t:.1}"))
                .unwrap_or_else(|| "-".into()),
            100.0 * r.accuracy.unwrap_or(0.0),
            r.true_detections,
            r.false_detections,
            r.misdetections
        );
    }
    Ok(())
}
