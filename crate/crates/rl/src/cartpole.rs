//! Cart-pole balancing with the canonical constants: Euler integration at
//! 0.02 s, +1 reward per step, termination at |theta| > 12 degrees or
//! |x| > 2.4, 200-step cap.

use lt_tensor::Rng;

use crate::env::{Environment, StepOutcome};
use crate::error::{RlError, RlResult};

const GRAVITY: f64 = 9.8;
const MASS_CART: f64 = 1.0;
const MASS_POLE: f64 = 0.1;
const TOTAL_MASS: f64 = MASS_CART + MASS_POLE;
const HALF_LENGTH: f64 = 0.5;
const POLEMASS_LENGTH: f64 = MASS_POLE * HALF_LENGTH;
const FORCE_MAG: f64 = 10.0;
const TAU: f64 = 0.02;
const THETA_LIMIT: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;
const X_LIMIT: f64 = 2.4;
const MAX_STEPS: usize = 200;

pub struct CartPole {
    state: [f64; 4], // x, x_dot, theta, theta_dot
    steps: usize,
    rng: Rng,
    needs_reset: bool,
}

impl CartPole {
    pub fn new(seed: u64) -> Self {
        CartPole {
            state: [0.0; 4],
            steps: 0,
            rng: Rng::from_seed(seed),
            needs_reset: true,
        }
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    /// Test hook: place the cart in a specific state.
    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
        self.steps = 0;
        self.needs_reset = false;
    }
}

impl Environment for CartPole {
    fn obs_shape(&self) -> Vec<usize> {
        vec![4]
    }

    fn action_count(&self) -> usize {
        2
    }

    fn max_episode_steps(&self) -> usize {
        MAX_STEPS
    }

    fn reset(&mut self) -> Vec<f64> {
        for v in &mut self.state {
            *v = self.rng.uniform(-0.05, 0.05);
        }
        self.steps = 0;
        self.needs_reset = false;
        self.state.to_vec()
    }

    fn step(&mut self, action: usize) -> RlResult<StepOutcome> {
        if self.needs_reset {
            return Err(RlError::Contract(
                "cartpole stepped after terminal without reset".into(),
            ));
        }
        if action > 1 {
            return Err(RlError::Contract(format!(
                "cartpole action {action} out of range 0..2"
            )));
        }
        let [mut x, mut x_dot, mut theta, mut theta_dot] = self.state;
        let force = if action == 1 { FORCE_MAG } else { -FORCE_MAG };
        let cos = theta.cos();
        let sin = theta.sin();

        let temp = (force + POLEMASS_LENGTH * theta_dot * theta_dot * sin) / TOTAL_MASS;
        let theta_acc = (GRAVITY * sin - cos * temp)
            / (HALF_LENGTH * (4.0 / 3.0 - MASS_POLE * cos * cos / TOTAL_MASS));
        let x_acc = temp - POLEMASS_LENGTH * theta_acc * cos / TOTAL_MASS;

        x += TAU * x_dot;
        x_dot += TAU * x_acc;
        theta += TAU * theta_dot;
        theta_dot += TAU * theta_acc;

        self.state = [x, x_dot, theta, theta_dot];
        self.steps += 1;

        let fell = x.abs() > X_LIMIT || theta.abs() > THETA_LIMIT;
        let terminal = fell || self.steps >= MAX_STEPS;
        self.needs_reset = terminal;
        Ok(StepOutcome {
            obs: self.state.to_vec(),
            reward: 1.0,
            terminal,
        })
    }

    fn reseed(&mut self, seed: u64) {
        self.rng = Rng::from_seed(seed);
    }
}
