//! One episode of the desk scenario under random raw actions, showing
//! decoding, masking and the step-level record.

use leohap::env::{Env, SatelliteDecode, ScenarioConfig};
use leohap::rng::{substream, Stream};
use rand::Rng;

fn main() -> leohap::Result<()> {
    let cfg = ScenarioConfig {
        steps_per_episode: 20,
        ..ScenarioConfig::default()
    };
    let mut env = Env::new(cfg, 11)?;
    let mut rng = substream(11, Stream::Policy);
    println!("observation dim {}, action dim {}", env.observation_dim(), env.action_dim());
    let mut total = 0.0;
    while !env.done() {
        let raw: Vec<f64> = (0..env.action_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let action = env.decode_action(&raw, SatelliteDecode::Sample(&mut rng))?;
        let prev = env.state().clone();
        let out = env.step(&action)?;
        let rec = env.record(&prev, &action, &out);
        total += out.reward;
        println!(
            "t={:2} visible={:?} sat={:2} handover={:5} n={:?} u={:?} rate={:.3e} reward={:+.3}",
            rec.t, rec.visible, rec.s_t, rec.handover, rec.n, rec.u, rec.r_total, rec.reward
        );
    }
    println!("episode reward {total:.3}, handovers {}", env.state().handovers);
    Ok(())
}
