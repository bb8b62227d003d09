//! Simulates one walk, writes it as a trace file with its sidecar, reads
//! it back and runs the detector on the file alone.

use guardbeam::cli::{cmd_detect, cmd_simulate};
use guardbeam::scenario::{evaluate_run, preset, simulate_trajectory, ExperimentConfig};

fn main() -> guardbeam::Result<()> {
    let cfg =
        ExperimentConfig::default().with_preset(&preset("guard7_phi7").expect("known preset"));
    let dir = std::env::temp_dir().join("guardbeam-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("walk.csv");

    cmd_simulate(&cfg, 1, 2024, &path)?;
    println!("wrote {} and its .meta sidecar", path.display());

    let report = cmd_detect(&path, None)?;
    for line in report.lines().filter(|l| l.starts_with("report.")) {
        println!("  {}", line.trim_end_matches(','));
    }

    let run = simulate_trajectory(&cfg, &cfg.beam_set()?, 1, 2024)?;
    let direct = evaluate_run(&run, &cfg.detector, 0)?;
    println!(
        "in-process: t_d = {:?} ms, class = {}",
        direct.outcome.t_d_ms,
        direct.outcome.class.as_str()
    );
    Ok(())
}
