//! Propagates a 12-satellite ring and prints which satellites a HAP above
//! the equator can see over one orbital period.

use leohap::geometry::{
    elevation_angle, expand_constellation, propagate_satellite, visible_set, ConstellationEntry, LocalFrame,
};

fn main() -> leohap::Result<()> {
    let shell = ConstellationEntry::Shell {
        count: 12,
        altitude_m: 1e6,
        inclination_rad: 0.0,
        raan_rad: 0.0,
        phase_offset_rad: 0.0,
    };
    let elements = expand_constellation(&[shell])?;
    let period = elements[0].period();
    println!("orbital period at 1000 km: {period:.1} s");

    let hap = LocalFrame::at(0.0, 0.0).to_inertial([0.0, 0.0, 20_000.0]);
    let min_el = 10f64.to_radians();
    for k in 0..=12 {
        let t = period * k as f64 / 12.0;
        let positions = elements
            .iter()
            .map(|e| propagate_satellite(e, t))
            .collect::<leohap::Result<Vec<_>>>()?;
        let mask = visible_set(&positions, hap, min_el)?;
        let best = mask.best_visible();
        let el = best.map(|i| elevation_angle(hap, positions[i]).map(f64::to_degrees)).transpose()?;
        println!(
            "t = {t:7.1} s  visible = {:?}  best = {best:?} at {:.1} deg",
            mask.visible_indices(),
            el.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
