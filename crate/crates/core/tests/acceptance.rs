//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use leohap::agent::masking::{epsilon, masked_distribution, select_action, select_satellite, softmax};
use leohap::agent::tqc::{critic_input, critic_loss_and_grad, policy_loss, truncated_mean};
use leohap::agent::{quantile_huber, Hyperparams, MlpParams, ReplayBuffer, TqcAgent, Transition, TUNABLE};
use leohap::channel::{
    db_to_linear, effective_rates, fso_link_gain_db, fso_rate, fso_snr, rf_gain_db, rf_rate, sample_gamma_gamma,
    sample_nakagami, FsoLinkParams, RfLinkParams,
};
use leohap::env::{Env, SatelliteDecode, ScenarioConfig};
use leohap::geometry::{propagate_satellite, OrbitalElements, VisibilityMask};
use leohap::harness::{audit, run_baseline, run_eval, run_training, ExperimentConfig};
use leohap::mobility::{step_hap, Bounds3, GaussMarkovParams, HapState};
use leohap::tuner::{fetch_llm, parse_and_clamp, Bounds, LlmEndpoint};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const GM: f64 = 3.986004418e14;
const RE: f64 = 6.371e6;

fn orbit_suite() -> Outcome {
    let mut r = rng(101);
    let mut worst_radius = 0.0f64;
    let mut worst_closure = 0.0f64;
    for _ in 0..1000 {
        let e = OrbitalElements {
            inclination: r.random_range(-1.5..1.5),
            raan: r.random_range(0.0..std::f64::consts::TAU),
            arg_perigee_init: r.random_range(0.0..std::f64::consts::TAU),
            true_anomaly: r.random_range(0.0..std::f64::consts::TAU),
            altitude: r.random_range(3e5..2e6),
        };
        let a = RE + e.altitude;
        let period = std::f64::consts::TAU * (a.powi(3) / GM).sqrt();
        let t = r.random_range(0.0..1e5);
        let p0 = propagate_satellite(&e, t).map_err(|x| x.to_string())?;
        let p1 = propagate_satellite(&e, t + period).map_err(|x| x.to_string())?;
        worst_radius = worst_radius.max((p0.norm() - a).abs() / a);
        worst_closure = worst_closure.max(p0.distance(p1));
    }
    let h = 5e5;
    let kepler = std::f64::consts::TAU * ((RE + h).powi(3) / GM).sqrt();
    let tau = OrbitalElements {
        inclination: 0.0,
        raan: 0.0,
        arg_perigee_init: 0.0,
        true_anomaly: 0.0,
        altitude: h,
    }
    .period();
    check(worst_radius <= 1e-9, format!("radius drift {worst_radius:e}"))?;
    check(worst_closure <= 1e-6, format!("period closure {worst_closure:e} m"))?;
    check((tau - kepler).abs() / kepler <= 1e-3, format!("period {tau} vs {kepler}"))?;
    check((kepler - 5668.0).abs() < 5.0, format!("oracle period {kepler}"))?;
    Ok(format!(
        "radius drift {worst_radius:.1e}, closure {worst_closure:.1e} m, period(500 km) {tau:.1} s"
    ))
}

fn mobility_suite() -> Outcome {
    let alpha = 0.85;
    let mu = [3.0, -2.0, 0.5];
    let sigma = [5.0, 4.0, 0.5];
    let free = GaussMarkovParams {
        alpha,
        mean_velocity: mu,
        std: sigma,
        dt: 10.0,
        bounds: Bounds3::around([0.0; 3], [1e15; 3]),
    };
    let mut r = rng(202);
    let mut s = HapState { p: [0.0; 3], v: mu };
    // Burn in, then collect.
    for _ in 0..1000 {
        s = step_hap(&s, &free, &mut r).map_err(|e| e.to_string())?;
    }
    let n = 100_000;
    let mut sum = [0.0; 3];
    let mut sq = [0.0; 3];
    for _ in 0..n {
        s = step_hap(&s, &free, &mut r).map_err(|e| e.to_string())?;
        for k in 0..3 {
            sum[k] += s.v[k];
            sq[k] += s.v[k] * s.v[k];
        }
    }
    let mut notes = Vec::new();
    for k in 0..3 {
        let m = sum[k] / n as f64;
        let var = sq[k] / n as f64 - m * m;
        // AR(1) standard error of the mean.
        let se = sigma[k] / (n as f64).sqrt() * ((1.0 + alpha) / (1.0 - alpha)).sqrt();
        check((m - mu[k]).abs() <= 3.0 * se, format!("axis {k}: mean {m} vs {} (se {se})", mu[k]))?;
        let rel = (var - sigma[k].powi(2)).abs() / sigma[k].powi(2);
        check(rel <= 0.05, format!("axis {k}: variance {var} vs {}", sigma[k].powi(2)))?;
        notes.push(format!("{rel:.3}"));
    }

    let boxed = ScenarioConfig::default().mobility();
    let mut s = HapState {
        p: [0.0, 0.0, 20_000.0],
        v: [0.0; 3],
    };
    let fast = GaussMarkovParams { std: [40.0, 40.0, 5.0], ..boxed };
    let mut outside = 0usize;
    for _ in 0..1_000_000 {
        s = step_hap(&s, &fast, &mut r).map_err(|e| e.to_string())?;
        if !fast.bounds.contains(s.p) {
            outside += 1;
        }
    }
    check(outside == 0, format!("{outside} out-of-box positions"))?;
    Ok(format!("variance rel. errors {notes:?}, 0 of 1e6 reflected steps outside"))
}

fn fading_suite() -> Outcome {
    let n = 1_000_000;
    let mut r = rng(303);
    let (a, b) = (4.2, 1.4);
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for _ in 0..n {
        let x = sample_gamma_gamma(a, b, &mut r).map_err(|e| e.to_string())?;
        s1 += x;
        s2 += x * x;
    }
    let mean = s1 / n as f64;
    let var = s2 / n as f64 - mean * mean;
    let var_oracle = 1.0 / a + 1.0 / b + 1.0 / (a * b);
    check((mean - 1.0).abs() <= 0.01, format!("gamma-gamma mean {mean}"))?;
    check((var - var_oracle).abs() / var_oracle <= 0.05, format!("gamma-gamma var {var} vs {var_oracle}"))?;

    let mut e2 = 0.0;
    for _ in 0..n {
        e2 += sample_nakagami(3.0, 1.0, &mut r).map_err(|e| e.to_string())?.powi(2);
    }
    let e2 = e2 / n as f64;
    check((e2 - 1.0).abs() <= 0.01, format!("nakagami E[g^2] {e2}"))?;

    let mut e1 = 0.0;
    for _ in 0..n {
        e1 += sample_nakagami(1.0, 1.0, &mut r).map_err(|e| e.to_string())?;
    }
    let e1 = e1 / n as f64;
    let rayleigh = std::f64::consts::PI.sqrt() / 2.0;
    check((e1 - rayleigh).abs() / rayleigh <= 0.01, format!("rayleigh mean {e1}"))?;
    Ok(format!("GG mean {mean:.4} var {var:.4} (oracle {var_oracle:.4}); E[g^2] {e2:.4}; Rayleigh mean {e1:.4}"))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1e-300)
}

fn rate_suite() -> Outcome {
    let mut r = rng(404);
    for i in 0..100_000 {
        let k = r.random_range(1..6);
        let raw: Vec<f64> = (0..k)
            .map(|_| if r.random_bool(0.1) { 0.0 } else { r.random_range(0.0..1e9) })
            .collect();
        let r_fso = r.random_range(0.0..3e9);
        let split = effective_rates(r_fso, &raw);
        let sum_raw: f64 = raw.iter().sum();
        let sum_out: f64 = split.per_cluster.iter().sum();
        check(sum_out <= r_fso * (1.0 + 1e-12) + 1e-300, format!("case {i}: {sum_out} > {r_fso}"))?;
        check(split.r_total == r_fso.min(sum_raw), format!("case {i}: r_total {}", split.r_total))?;
        if split.fso_bottleneck {
            check((sum_out - r_fso).abs() <= 1e-12 * r_fso, format!("case {i}: bottleneck sum {sum_out}"))?;
            for (p, q) in split.per_cluster.iter().zip(&raw) {
                check((p / r_fso - q / sum_raw).abs() <= 1e-12, format!("case {i}: share changed"))?;
            }
        } else {
            check(split.per_cluster == raw, format!("case {i}: unconstrained rates altered"))?;
        }
    }

    // Hand examples, computed independently of the library.
    let fso = FsoLinkParams {
        tx_gain_db: 120.0,
        rx_gain_db: 120.0,
        free_space_loss_db: 210.0,
        atmospheric_loss_db: 5.0,
        lens_loss_db: 5.0,
        system_margin_db: 3.0,
        ..FsoLinkParams::default()
    };
    check(close(fso_link_gain_db(&fso), 8.5), "link gain".into())?;
    check(close(db_to_linear(8.5), 7.079457843841379), "dB conversion".into())?;
    let one = FsoLinkParams {
        apertures: 1,
        power_w: 1.0,
        eta_oe: 0.5,
        noise_w: 1e-3,
        tx_gain_db: 0.0,
        rx_gain_db: 0.0,
        free_space_loss_db: 0.0,
        atmospheric_loss_db: 0.0,
        lens_loss_db: 0.0,
        system_margin_db: 0.0,
        ..FsoLinkParams::default()
    };
    check(close(fso_snr(&one, &[2.0]), 1000.0), "snr single aperture".into())?;
    let four = FsoLinkParams { apertures: 4, ..one };
    check(close(fso_snr(&four, &[1.0; 4]), 1000.0), "snr four apertures".into())?;
    check(close(fso_rate(1e9, 3.0), 2e9), "fso rate".into())?;
    let rf = RfLinkParams {
        hap_gain_db: 10.0,
        rx_gain_db: 5.0,
        lambda_m: 0.1,
        path_loss_exp: 2.0,
        ..RfLinkParams::default()
    };
    let c_hc = 15.0 + 0.5 * (20.0 * 0.1f64.log10() - 20.0 * 1000f64.log10() - 20.0 * (4.0 * std::f64::consts::PI).log10());
    check(close(rf_gain_db(&rf, 1000.0).map_err(|e| e.to_string())?, c_hc), "rf gain".into())?;
    check(close(c_hc, -35.99209864022096), format!("rf gain oracle {c_hc}"))?;
    let rf64 = RfLinkParams {
        subcarriers: 64,
        bandwidth_hz: 2e7,
        ..RfLinkParams::default()
    };
    let h = (15.0 * (2e7 / 64.0) * rf64.noise_psd / rf64.power_w).sqrt();
    check(close(rf_rate(64, &rf64, h).map_err(|e| e.to_string())?, 8e7), "rf rate".into())?;
    let s = effective_rates(100.0, &[60.0, 30.0, 30.0]);
    check(s.r_total == 100.0 && s.per_cluster == vec![50.0, 25.0, 25.0], "proportional split".into())?;
    let s = effective_rates(100.0, &[40.0, 20.0, 20.0]);
    check(s.r_total == 80.0 && s.per_cluster == vec![40.0, 20.0, 20.0], "min branch".into())?;
    Ok("1e5 random splits conserve flow and proportions; hand examples match".into())
}

fn constraint_audit() -> Outcome {
    let cfg = ScenarioConfig {
        steps_per_episode: 20,
        ..ScenarioConfig::default()
    };
    let mut env = Env::new(cfg, 505).map_err(|e| e.to_string())?;
    let mut r = rng(505);
    let mut records = Vec::new();
    let mut recount_ok = true;
    let mut episode = 0;
    while records.len() < 10_000 {
        env.reset(episode).map_err(|e| e.to_string())?;
        let mut flags = 0;
        while !env.done() {
            let mut raw: Vec<f64> = (0..env.action_dim()).map(|_| r.random_range(-1.0..1.0)).collect();
            select_action(&mut raw, &env.state().mask, 10.0, 0.3, &mut r).map_err(|e| e.to_string())?;
            let action = env.decode_action(&raw, SatelliteDecode::Argmax).map_err(|e| e.to_string())?;
            let prev = env.state().clone();
            let out = env.step(&action).map_err(|e| e.to_string())?;
            flags += usize::from(out.info.handover);
            records.push(env.record(&prev, &action, &out));
        }
        recount_ok &= flags == env.state().handovers;
        episode += 1;
    }
    let report = audit(&records);
    check(report.is_clean(), format!("violations: {:?}", &report.violations[..report.violations.len().min(3)]))?;
    check(recount_ok, "handover recount differs from counter".into())?;
    Ok(format!("{} steps over {} episodes, 0 violations", report.steps, report.episodes))
}

fn grad_check(params: &MlpParams, analytic: &MlpParams, loss: impl Fn(&MlpParams) -> f64) -> f64 {
    let flat = analytic.flatten();
    let mut worst = 0.0f64;
    let h = 1e-6;
    for i in 0..params.param_count() {
        let mut p = params.clone();
        *p.param_mut(i) += h;
        let up = loss(&p);
        *p.param_mut(i) -= 2.0 * h;
        let down = loss(&p);
        let numeric = (up - down) / (2.0 * h);
        let scale = flat[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((flat[i] - numeric).abs() / scale);
    }
    worst
}

fn agent_math() -> Outcome {
    let mut r = rng(606);
    for _ in 0..10_000 {
        let n = r.random_range(2..60);
        let v: Vec<f64> = (0..n).map(|_| r.random_range(-100.0..100.0)).collect();
        let drop = r.random_range(0..n);
        let mut sorted = v.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let keep = &sorted[..n - drop];
        let oracle = keep.iter().sum::<f64>() / keep.len() as f64;
        let got = truncated_mean(&v, drop).map_err(|e| e.to_string())?;
        check(got == oracle, format!("truncation {got} vs {oracle}"))?;
    }
    check(quantile_huber(0.5, 0.5, 1.0) == 0.0625, "huber 0.0625".into())?;
    check(quantile_huber(0.25, -2.0, 1.0) == 1.125, "huber 1.125".into())?;
    check(quantile_huber(0.7, 0.0, 1.0) == 0.0, "huber zero".into())?;

    let hp = Hyperparams {
        num_quantiles: 5,
        drop_per_critic: 1,
        temperature: 0.2,
        ..Hyperparams::default()
    };
    let (obs_dim, act_dim, b) = (3, 2, 6);
    let policy = MlpParams::new(&[obs_dim, 8, 8, 2 * act_dim], 0.5, &mut r);
    let critics: Vec<MlpParams> = (0..2).map(|_| MlpParams::new(&[obs_dim + act_dim, 8, 8, 5], 1.0, &mut r)).collect();
    let obs = Array2::from_shape_simple_fn((b, obs_dim), || r.random_range(-1.0..1.0));
    let noise = Array2::from_shape_simple_fn((b, act_dim), || r.sample(StandardNormal));
    let pl = policy_loss(&policy, &critics, obs.view(), noise.view(), &hp).map_err(|e| e.to_string())?;
    let policy_err = grad_check(&policy, &pl.grads, |p| {
        policy_loss(p, &critics, obs.view(), noise.view(), &hp).unwrap().loss
    });
    let act = Array2::from_shape_simple_fn((b, act_dim), || r.random_range(-1.0..1.0));
    let inputs = critic_input(obs.view(), act.view());
    let targets = ndarray::Array1::from_shape_simple_fn(b, || r.random_range(-2.0..2.0));
    let (_, cg) = critic_loss_and_grad(&critics[0], inputs.view(), targets.view(), 1.0).map_err(|e| e.to_string())?;
    let critic_err = grad_check(&critics[0], &cg, |c| {
        critic_loss_and_grad(c, inputs.view(), targets.view(), 1.0).unwrap().0
    });
    check(policy_err <= 1e-3, format!("policy gradient rel. error {policy_err:e}"))?;
    check(critic_err <= 1e-3, format!("critic gradient rel. error {critic_err:e}"))?;

    // One-state, one-step MDP with reward 1: quantiles converge to 1.
    let toy = Hyperparams {
        num_quantiles: 10,
        drop_per_critic: 1,
        batch_size: 1,
        buffer_capacity: 1,
        warmup_steps: 1,
        learning_rate: 3e-3,
        temperature: 0.0,
        ..Hyperparams::default()
    };
    let mut agent = TqcAgent::new(1, 1, &[16, 16], toy, &mut rng(607)).map_err(|e| e.to_string())?;
    let mut buffer = ReplayBuffer::new(1);
    buffer.push(Transition {
        obs: vec![1.0],
        action: vec![0.0],
        reward: 1.0,
        next_obs: vec![1.0],
        next_mask: vec![true],
        done: true,
    });
    let (mut br, mut nr) = (rng(608), rng(609));
    for _ in 0..2000 {
        agent.train_step(&buffer, &mut br, &mut nr).map_err(|e| e.to_string())?;
    }
    let q = agent.quantiles(&[1.0], &[0.0]).map_err(|e| e.to_string())?;
    let mean = q.values.iter().sum::<f64>() / q.values.len() as f64;
    check((mean - 1.0).abs() <= 0.05, format!("toy critic mean {mean}"))?;
    Ok(format!(
        "1e4 truncations exact; grad rel. err policy {policy_err:.1e}, critic {critic_err:.1e}; toy critic mean {mean:.4}"
    ))
}

fn masking() -> Outcome {
    let mut r = rng(707);
    let mut leaked = 0usize;
    for _ in 0..100_000 {
        let n = r.random_range(1..12);
        let mut flags: Vec<bool> = (0..n).map(|_| r.random_bool(0.4)).collect();
        let forced = r.random_range(0..n);
        flags[forced] = true;
        let mask = VisibilityMask {
            elevations: vec![0.3; n],
            flags: flags.clone(),
        };
        let scores: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let probs = masked_distribution(&softmax(&scores), &flags).map_err(|e| e.to_string())?;
        leaked += probs.iter().zip(&flags).filter(|(p, f)| !**f && **p != 0.0).count();
        let eps = r.random_range(0.0..1.0);
        let pick = select_satellite(&scores, &mask, 10.0, eps, &mut r).map_err(|e| e.to_string())?;
        leaked += usize::from(!flags[pick]);
    }
    check(leaked == 0, format!("{leaked} draws or masses on invisible satellites"))?;
    let hp = Hyperparams {
        eps0: 0.2,
        e_decay: 0.3,
        ..Hyperparams::default()
    };
    check(epsilon(0, 1000, &hp) == 0.2, "epsilon start".into())?;
    check(epsilon(150, 1000, &hp) == 0.1, "epsilon midpoint".into())?;
    check(epsilon(300, 1000, &hp) == 0.0, "epsilon end".into())?;
    check(epsilon(900, 1000, &hp) == 0.0, "epsilon after end".into())?;
    Ok("1e5 masked draws all visible; epsilon 0.2 -> 0.1 -> 0 exact".into())
}

fn fuzz_reply(r: &mut ChaCha8Rng) -> String {
    const KEYS: [&str; 16] = [
        "discount",
        "learning_rate",
        "temperature",
        "soft_update",
        "drop_per_critic",
        "e_decay",
        "batch_size",
        "num_quantiles",
        "lr",
        "gamma",
        "tau",
        "alpha",
        "d",
        "batch",
        "epsilon_decay",
        "unknown_knob",
    ];
    let value = |r: &mut ChaCha8Rng| -> String {
        match r.random_range(0..9) {
            0 => format!("{}", r.random_range(-1e6..1e6)),
            1 => format!("{:e}", r.random_range(-1.0..1.0) * 10f64.powi(r.random_range(-300..300))),
            2 => format!("{}", r.random_range(-5i64..5000)),
            3 => "\"0.01\"".into(),
            4 => "null".into(),
            5 => "true".into(),
            6 => "[0.1, 0.2]".into(),
            7 => "{\"nested\": 1}".into(),
            _ => format!("{}", r.random_range(0.0..1.0)),
        }
    };
    let n = r.random_range(0..6);
    let body: Vec<String> = (0..n)
        .map(|_| format!("\"{}\": {}", KEYS.choose(r).unwrap(), value(r)))
        .collect();
    let object = format!("{{{}}}", body.join(", "));
    match r.random_range(0..6) {
        0 => object,
        1 => format!("Sure! Here is my suggestion: {object} Good luck."),
        2 => format!("```json\n{object}\n```"),
        3 => object[..object.len() / 2].to_string(),
        4 => "I cannot help with that.".into(),
        _ => format!("{{broken {object}"),
    }
}

fn serve_once(response_body: String) -> (String, mpsc::Receiver<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut head = String::new();
        let mut len = 0usize;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap();
            }
            head.push_str(&line);
            if line == "\r\n" || line.is_empty() {
                break;
            }
        }
        let mut body = vec![0; len];
        reader.read_exact(&mut body).unwrap();
        head.push_str(&String::from_utf8_lossy(&body));
        let mut stream = stream;
        write!(
            stream,
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
            response_body.len(),
            response_body
        )
        .unwrap();
        tx.send(head).unwrap();
    });
    (url, rx)
}

fn within_bounds(theta: &Hyperparams, cur: &Hyperparams, bounds: &Bounds) -> Result<(), String> {
    theta.validate().map_err(|e| e.to_string())?;
    for key in TUNABLE {
        let v = theta.get(key).unwrap();
        let [lo, hi] = bounds.get(key).unwrap();
        let ok = if key == "num_quantiles" { v == cur.num_quantiles as f64 } else { v >= lo && v <= hi };
        check(ok, format!("{key} = {v} outside [{lo}, {hi}]"))?;
    }
    check(
        theta.num_critics == cur.num_critics
            && theta.buffer_capacity == cur.buffer_capacity
            && theta.eps0 == cur.eps0
            && theta.warmup_steps == cur.warmup_steps,
        "non-tunable field changed".into(),
    )
}

fn tuner_safety() -> Outcome {
    let mut r = rng(808);
    let cur = Hyperparams::default();
    let bounds = Bounds::defaults(cur.num_quantiles);
    let cur_bits = serde_json::to_string(&cur).unwrap();
    let mut fallbacks = 0;
    for _ in 0..10_000 {
        let reply = fuzz_reply(&mut r);
        let out = parse_and_clamp(&reply, &cur, &bounds);
        within_bounds(&out.theta, &cur, &bounds).map_err(|e| format!("{e} for reply {reply:?}"))?;
        if out.fallback {
            fallbacks += 1;
            check(serde_json::to_string(&out.theta).unwrap() == cur_bits, format!("fallback changed theta: {reply:?}"))?;
        }
    }

    let content = "Adjusting: {\"learning_rate\": 1.0, \"tau\": 0.02, \"num_quantiles\": 50}";
    let body = serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string();
    let (url, rx) = serve_once(body);
    let ep = LlmEndpoint {
        url,
        api_key: "secret-token".into(),
        model: "mock-model".into(),
        timeout: Duration::from_secs(5),
    };
    let text = fetch_llm("prompt text", &ep);
    let request = rx.recv_timeout(Duration::from_secs(5)).map_err(|e| e.to_string())?;
    check(text == content, format!("mock reply {text:?}"))?;
    check(request.contains("Bearer secret-token"), "missing bearer auth".into())?;
    check(request.contains("\"mock-model\"") && request.contains("\"temperature\":0"), "request body".into())?;
    let applied = parse_and_clamp(&text, &cur, &bounds).theta;
    let expected = Hyperparams {
        learning_rate: 1e-2,
        soft_update: 0.02,
        ..cur.clone()
    };
    check(applied == expected, format!("applied {applied:?}"))?;
    Ok(format!("1e4 fuzzed replies in bounds ({fallbacks} fallbacks bit-identical); mock round trip exact"))
}

fn desk_config(dir: &Path, seed: u64) -> Result<ExperimentConfig, String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/desk.toml");
    let mut cfg = ExperimentConfig::load(&path).map_err(|e| e.to_string())?;
    cfg.run.seed = seed;
    cfg.run.out_dir = dir.to_path_buf();
    Ok(cfg)
}

fn desk_learning(root: &Path) -> Outcome {
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for seed in [1u64, 2, 3] {
        let dir = root.join(format!("seed{seed}"));
        let cfg = desk_config(&dir, seed)?;
        check(
            cfg.scenario.constellation.iter().map(|c| match c {
                leohap::geometry::ConstellationEntry::Shell { count, .. } => *count,
                leohap::geometry::ConstellationEntry::Single { .. } => 1,
            }).sum::<usize>() == 12
                && cfg.scenario.clusters.len() == 2
                && cfg.scenario.steps_per_episode == 20
                && cfg.run.episodes == 200
                && cfg.tuner.mode == leohap::tuner::TunerMode::Scripted,
            "desk config does not match the required scale".into(),
        )?;
        let out = run_training(&cfg).map_err(|e| e.to_string())?;
        let n = out.episodes.len();
        let k = n / 5;
        let head = out.episodes[..k].iter().map(|e| e.total_reward).sum::<f64>() / k as f64;
        let tail = out.episodes[n - k..].iter().map(|e| e.total_reward).sum::<f64>() / k as f64;
        let eval = run_eval(&cfg, &out.checkpoint, cfg.run.eval_episodes, &dir.join("eval")).map_err(|e| e.to_string())?;
        let random = run_baseline(&cfg, "random", cfg.run.eval_episodes, &dir.join("random")).map_err(|e| e.to_string())?;
        notes.push(format!(
            "seed {seed}: reward {head:.2}->{tail:.2}, f2 {:.2} vs {:.2}, f1 {:.3e} vs {:.3e}",
            eval.f2_mean, random.f2_mean, eval.f1_mean, random.f1_mean
        ));
        if !(tail > head) {
            failures.push(format!("seed {seed}: no reward improvement"));
        }
        if !(eval.f2_mean <= random.f2_mean && eval.f1_mean >= random.f1_mean) {
            failures.push(format!("seed {seed}: learned policy not at least as good as random"));
        }
    }
    let joined = notes.join("; ");
    if failures.is_empty() {
        Ok(joined)
    } else {
        Err(format!("{} ({joined})", failures.join(", ")))
    }
}

fn determinism(root: &Path) -> Outcome {
    let mut csvs = Vec::new();
    for run in ["a", "b"] {
        let cfg = desk_config(&root.join(run), 7)?;
        run_training(&cfg).map_err(|e| e.to_string())?;
        csvs.push(std::fs::read(root.join(run).join("episodes.csv")).map_err(|e| e.to_string())?);
    }
    check(csvs[0] == csvs[1], "episode CSVs differ".into())?;
    Ok(format!("two scripted-tuner runs wrote identical {}-byte episode CSVs", csvs[0].len()))
}

fn main() {
    // Ignore libtest flags such as --nocapture or a name filter.
    let tmp = tempfile::tempdir().expect("temp dir");
    let root = tmp.path().to_path_buf();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("orbit suite", Box::new(orbit_suite)),
        ("mobility suite", Box::new(mobility_suite)),
        ("fading suite", Box::new(fading_suite)),
        ("rate suite", Box::new(rate_suite)),
        ("constraint audit", Box::new(constraint_audit)),
        ("agent math", Box::new(agent_math)),
        ("masking and exploration", Box::new(masking)),
        ("tuner safety", Box::new(tuner_safety)),
        ("desk-scale learning", Box::new({
            let r = root.join("learning");
            move || desk_learning(&r)
        })),
        ("determinism", Box::new({
            let r = root.join("determinism");
            move || determinism(&r)
        })),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("PASS criterion {:2} {name} ({secs:.1} s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:2} {name} ({secs:.1} s): {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
