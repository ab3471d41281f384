//! Sweep entropy weights over the standard CartPole protocol.

use lt_models::{build_model, ModelConfig};
use lt_rl::{train_agent, EnvKind, EvalProtocol, TrainerConfig};

fn main() {
    let weights: Vec<f64> = std::env::args()
        .nth(1)
        .map(|s| s.split(',').map(|v| v.parse().unwrap()).collect())
        .unwrap_or_else(|| vec![0.005]);
    for w in weights {
        for seed in [1u64, 2, 3] {
            let config = ModelConfig::MlpActorCritic {
                obs_dim: 4,
                actions: 2,
                hidden: vec![128, 128, 128],
            };
            let (mut reg, model) = build_model(&config, seed).unwrap();
            let mut cfg = TrainerConfig::classic_control();
            cfg.entropy_weight = w;
            let protocol = EvalProtocol::cartpole();
            let t = std::time::Instant::now();
            let out = train_agent(&model, &mut reg, EnvKind::CartPole, &cfg, &protocol, None, None, seed)
                .unwrap();
            println!(
                "entropy {w}: seed {seed} -> ticket reward {:.2} ({:.0}s)",
                out.ticket_reward,
                t.elapsed().as_secs_f64()
            );
        }
    }
}
