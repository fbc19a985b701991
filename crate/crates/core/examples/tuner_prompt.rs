//! Builds a tuning prompt, interprets a chatty reply, and runs the scripted
//! rules. Set LLM_API_URL (and LLM_API_KEY, LLM_MODEL) to also query a live
//! endpoint.

use leohap::agent::Hyperparams;
use leohap::tuner::{build_prompt, fetch_llm, parse_and_clamp, scripted_tune, Bounds, LlmEndpoint, TuningRequest};

fn main() {
    let theta = Hyperparams::default();
    let bounds = Bounds::defaults(theta.num_quantiles);
    let rewards = [4.1, 4.4, 3.9, 4.6, 4.2, 4.3];
    let req = TuningRequest::new(theta.clone(), &rewards, 20, 0.25);
    let prompt = build_prompt(&req, &bounds);
    println!("{prompt}");

    let reply = r#"Rewards look flat. I suggest {"lr": 0.5, "tau": 0.01, "num_quantiles": 64}."#;
    let update = parse_and_clamp(reply, &theta, &bounds);
    println!(
        "reply applied: lr={} soft_update={} quantiles={} clamped={:?}",
        update.theta.learning_rate, update.theta.soft_update, update.theta.num_quantiles, update.clamped_keys
    );

    let scripted = scripted_tune(&req, &bounds);
    println!("scripted: lr={} e_decay={:.3}", scripted.learning_rate, scripted.e_decay);

    if let Some(ep) = LlmEndpoint::from_env() {
        let text = fetch_llm(&prompt, &ep);
        let live = parse_and_clamp(&text, &theta, &bounds);
        println!("live reply fallback={} theta={:?}", live.fallback, live.theta);
    }
}
