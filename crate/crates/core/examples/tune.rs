// Scratch harness for preset tuning runs.

use std::time::Instant;

use vinesim::presets;
use vinesim::qlearn::{evaluate, linear_regression_slope, train, Hyperparameters};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("fixed");
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(7);
    let episodes: Option<usize> = args.get(3).and_then(|s| s.parse().ok());
    let alpha: Option<f64> = args.get(4).and_then(|s| s.parse().ok());
    let floor: Option<f64> = args.get(5).and_then(|s| s.parse().ok());
    let target: Option<usize> = args.get(6).and_then(|s| s.parse().ok());
    let explore_frac: f64 = args.get(7).and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let gamma: Option<f64> = args.get(8).and_then(|s| s.parse().ok());
    let goal_prob: Option<f64> = args.get(9).and_then(|s| s.parse().ok());

    let (mut env, mut hyper) = match which {
        "fixed" => presets::fixed_goal_desk(),
        "varying" => presets::varying_goal_desk(),
        "obstacle" => presets::obstacle_aware_desk(),
        other => panic!("unknown scenario {other}"),
    };
    hyper.seed = seed;
    if let Some(e) = episodes {
        hyper.episodes = e;
    }
    hyper.epsilon_decrement = 1.0 / (explore_frac * hyper.episodes as f64);
    if let Some(g) = gamma {
        hyper.gamma = g;
    }
    if let Some(p) = goal_prob {
        env.goal_change_prob = p;
    }
    if let Some(a) = alpha {
        hyper.alpha = a;
    }
    if let Some(f) = floor {
        hyper.epsilon_floor = f;
    }
    if let Some(t) = target {
        hyper.target_sync_interval = if t > 0 { Some(t) } else { None };
    }
    println!(
        "scenario={which} seed={seed} episodes={} alpha={} gamma={} optimizer={:?} floor={} target={:?}",
        hyper.episodes, hyper.alpha, hyper.gamma, hyper.optimizer, hyper.epsilon_floor, hyper.target_sync_interval
    );

    let t0 = Instant::now();
    let (agent, metrics) = train(&env, &hyper).unwrap();
    let train_time = t0.elapsed();

    let smoothed = metrics.smoothed_steps(101);
    let slope = linear_regression_slope(&smoothed);
    let mean_last: f64 = metrics
        .episodes
        .iter()
        .rev()
        .take(100)
        .map(|r| r.steps as f64)
        .sum::<f64>()
        / 100.0;
    println!("train: {train_time:?}, steps slope {slope:.5}, mean steps last 100 = {mean_last:.1}");

    let t1 = Instant::now();
    let (eval_cfg, trials, limit) = match which {
        "fixed" => (env.clone(), 50, 100),
        _ => (presets::eval_env(&env), 100, 200),
    };
    let report = evaluate(&agent, &eval_cfg, trials, limit, seed.wrapping_add(1)).unwrap();
    let mut steps: Vec<usize> = report
        .outcomes
        .iter()
        .filter(|o| o.success)
        .map(|o| o.steps)
        .collect();
    steps.sort_unstable();
    let median = steps.get(steps.len() / 2).copied().unwrap_or(0);
    let below = steps.iter().filter(|s| **s < 50).count();
    let above = steps.iter().filter(|s| **s > 50).count();
    println!(
        "eval: {:?}, success {}/{} = {:.2}, median steps {median}, hist below50={below} above50={above}",
        t1.elapsed(),
        report.successes,
        report.trials,
        report.success_rate().unwrap_or(0.0),
    );

    // Trace one greedy rollout.
    let mut env = vinesim::environment::VineEnv::new(vinesim::environment::EnvConfig {
        max_steps: limit,
        ..eval_cfg.clone()
    })
    .unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    use rand::SeedableRng;
    use vinesim::qlearn::Policy;
    let mut obs = env.reset(&mut rng);
    let actions = env.action_set();
    let mut counts = [0usize; 6];
    for step in 0..limit {
        let a = agent.act(&obs);
        counts[a] += 1;
        let r = env.step(&actions[a]).unwrap();
        obs = r.observation;
        if step % 10 == 0 || r.done {
            println!(
                "  step {:3} a={} s={:.3} kappa={:+.3} d={:.4} q={:?}",
                step + 1,
                a,
                obs.s,
                obs.kappa,
                obs.dist,
                agent
                    .q_values(&obs)
                    .unwrap()
                    .iter()
                    .map(|q| (*q * 10.0).round() / 10.0)
                    .collect::<Vec<_>>()
            );
        }
        if r.done {
            break;
        }
    }
    println!("  action counts {counts:?}");
    let mean_losses: Vec<f64> = metrics
        .episodes
        .chunks(hyper.episodes / 10)
        .map(|c| c.iter().map(|r| r.mean_loss).sum::<f64>() / c.len() as f64)
        .collect();
    println!("  mean loss by decile: {mean_losses:?}");
    let _ = Hyperparameters::default();
}
