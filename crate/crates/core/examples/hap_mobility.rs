//! Gauss-Markov drift of a HAP inside its station-keeping box.

use leohap::env::ScenarioConfig;
use leohap::mobility::{step_hap, HapState};
use leohap::rng::{substream, Stream};

fn main() -> leohap::Result<()> {
    let cfg = ScenarioConfig::default();
    let params = cfg.mobility();
    let mut rng = substream(7, Stream::Mobility);
    let mut s = HapState {
        p: [0.0, 0.0, cfg.hap.altitude_m],
        v: [0.0; 3],
    };
    println!("step,east_m,north_m,up_m,speed_mps");
    for k in 0..=360 {
        if k % 30 == 0 {
            let speed = s.v.iter().map(|x| x * x).sum::<f64>().sqrt();
            println!("{k},{:.1},{:.1},{:.1},{speed:.2}", s.p[0], s.p[1], s.p[2]);
        }
        s = step_hap(&s, &params, &mut rng)?;
        assert!(params.bounds.contains(s.p));
    }
    Ok(())
}
