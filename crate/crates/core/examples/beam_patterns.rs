//! Array sizes for the beamwidths in use, and the combined main+guard
//! pattern sampled across angles.

use guardbeam::beampattern::{half_power_beamwidth, BeamPattern, BeamSpec, DEFAULT_SPACING};

fn main() -> guardbeam::Result<()> {
    println!(
        "{:>10} {:>9} {:>14}",
        "HPBW req", "elements", "HPBW achieved"
    );
    for hpbw in [7.0, 13.0, 30.0, 101.5] {
        let p = BeamPattern::from_spec(&BeamSpec::main(hpbw), DEFAULT_SPACING)?;
        println!(
            "{hpbw:>9.1}° {:>9} {:>13.3}°",
            p.element_count(),
            half_power_beamwidth(p.element_count(), DEFAULT_SPACING)
        );
    }

    let main = BeamPattern::from_spec(&BeamSpec::main(7.0), DEFAULT_SPACING)?;
    let guard = BeamPattern::from_spec(&BeamSpec::guard(7.0, 14.0), DEFAULT_SPACING)?;
    println!("\nangle    main   guard(Φ=14°)");
    for deg in (-10..=30).step_by(2) {
        let th = (deg as f64).to_radians();
        let bar = |g: f64| "#".repeat((g * 20.0).round() as usize);
        println!(
            "{deg:>4}°  {:5.3}  {:5.3}  {:<20} {}",
            main.gain(th),
            guard.gain(th),
            bar(main.gain(th)),
            bar(guard.gain(th))
        );
    }
    Ok(())
}
