//! Quick convergence probe for the classic-control trainer. Prints the
//! per-epoch mean episode return for a few seeds of the standard protocol.

use lt_models::{build_model, ModelConfig};
use lt_rl::{train_agent, EnvKind, EvalProtocol, TrainerConfig};

fn main() {
    let seeds: Vec<u64> = std::env::args()
        .nth(1)
        .map(|s| s.split(',').map(|v| v.parse().unwrap()).collect())
        .unwrap_or_else(|| vec![1, 2, 3]);
    let epochs: usize = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20);

    for seed in seeds {
        let config = ModelConfig::MlpActorCritic {
            obs_dim: 4,
            actions: 2,
            hidden: vec![128, 128, 128],
        };
        let (mut reg, model) = build_model(&config, seed).unwrap();
        let cfg = TrainerConfig::classic_control();
        let protocol = EvalProtocol {
            epochs,
            ..EvalProtocol::cartpole()
        };
        let start = std::time::Instant::now();
        let out = train_agent(&model, &mut reg, EnvKind::CartPole, &cfg, &protocol, None, None, seed)
            .unwrap();
        print!("seed {seed}: ");
        for epoch in 0..epochs {
            let rows: Vec<f64> = out
                .episodes
                .iter()
                .filter(|e| e.epoch == epoch)
                .map(|e| e.raw_return)
                .collect();
            if rows.is_empty() {
                break;
            }
            print!("{:.0} ", rows.iter().sum::<f64>() / rows.len() as f64);
        }
        println!(
            "\n  ticket reward {:.2} ({} episodes, {} updates, {:.1}s)",
            out.ticket_reward,
            out.episodes.len(),
            out.updates,
            start.elapsed().as_secs_f64()
        );
    }
}
