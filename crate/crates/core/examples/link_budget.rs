//! Free-space link budget of the unblocked 5 m link and the per-sample SNR
//! with and without the array gain of the 7° beams.

use guardbeam::beampattern::BeamSpec;
use guardbeam::channel::{channel_response, BeamId, BeamSet, NoiseModel, SceneConfig};
use guardbeam::geometry::LinkGeometry;

fn main() -> guardbeam::Result<()> {
    let scene = SceneConfig::default();
    let link = LinkGeometry::along_x(5.0)?;
    let noise_dbm = scene.noise_dbm;

    let iso = channel_response(&link, None, &BeamSet::unit_gains(), &scene)?[0];
    let loss_db = 20.0 * iso.norm().log10();
    println!("wavelength        {:.3} mm", scene.wavelength() * 1e3);
    println!("LOS channel gain  {loss_db:.2} dB (isotropic)");
    println!(
        "SNR               {:.2} dB at {noise_dbm} dBm noise",
        10.0 * (scene.tx_power_mw * iso.norm_sqr()).log10() - noise_dbm
    );

    let beams = BeamSet::synthesize(&BeamSpec::tx(7.0), &[(BeamId::Main, BeamSpec::main(7.0))])?;
    let h = channel_response(&link, None, &beams, &scene)?[0];
    println!(
        "SNR with 7° beams {:.2} dB ({} elements per array)",
        10.0 * (scene.tx_power_mw * h.norm_sqr()).log10() - noise_dbm,
        beams.rx[0].pattern.element_count()
    );

    // empirical check over a short noise realization
    let noise = NoiseModel::new(&scene, 1);
    let n = 100_000;
    let p: f64 = noise.stream(0).take(n).map(|w| w.norm_sqr()).sum::<f64>() / n as f64;
    println!(
        "measured noise    {:.2} dBm over {n} samples",
        10.0 * p.log10()
    );
    Ok(())
}
