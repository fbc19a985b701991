//! Distributional critic on a one-state, one-step MDP with reward 1: the
//! quantiles of both critics converge to 1. The transition is terminal, so
//! the bootstrap term vanishes.

use leohap::agent::{Hyperparams, ReplayBuffer, TqcAgent, Transition};
use leohap::rng::{substream, Stream};

fn main() -> leohap::Result<()> {
    let hp = Hyperparams {
        num_quantiles: 10,
        drop_per_critic: 1,
        batch_size: 1,
        buffer_capacity: 1,
        warmup_steps: 1,
        learning_rate: 3e-3,
        temperature: 0.0,
        ..Hyperparams::default()
    };
    let mut agent = TqcAgent::new(1, 1, &[16, 16], hp, &mut substream(5, Stream::Init))?;
    let mut buffer = ReplayBuffer::new(1);
    buffer.push(Transition {
        obs: vec![1.0],
        action: vec![0.0],
        reward: 1.0,
        next_obs: vec![1.0],
        next_mask: vec![true],
        done: true,
    });
    let mut brng = substream(5, Stream::Buffer);
    let mut nrng = substream(5, Stream::Policy);
    for k in 0..=2000 {
        if k % 400 == 0 {
            let q = agent.quantiles(&[1.0], &[0.0])?;
            let mean = q.values.iter().sum::<f64>() / q.values.len() as f64;
            println!("update {k:4}: mean quantile {mean:.4}");
        }
        agent.train_step(&buffer, &mut brng, &mut nrng)?;
    }
    Ok(())
}
