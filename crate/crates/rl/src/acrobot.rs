//! Two-link underactuated pendulum with the canonical "book" dynamics,
//! RK4-integrated at 0.2 s, three torque actions {-1, 0, +1}, reward -1 per
//! step until the tip passes the goal line, 500-step cap.

use std::f64::consts::PI;

use lt_tensor::Rng;

use crate::env::{Environment, StepOutcome};
use crate::error::{RlError, RlResult};

const LINK_MASS: f64 = 1.0;
const LINK_LENGTH_1: f64 = 1.0;
const LINK_COM: f64 = 0.5;
const LINK_MOI: f64 = 1.0;
const GRAVITY: f64 = 9.8;
const DT: f64 = 0.2;
const MAX_VEL_1: f64 = 4.0 * PI;
const MAX_VEL_2: f64 = 9.0 * PI;
const MAX_STEPS: usize = 500;

pub struct Acrobot {
    state: [f64; 4], // theta1, theta2, dtheta1, dtheta2
    steps: usize,
    rng: Rng,
    needs_reset: bool,
}

fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut v = (x + PI) % two_pi;
    if v < 0.0 {
        v += two_pi;
    }
    v - PI
}

fn dsdt(s: [f64; 4], torque: f64) -> [f64; 4] {
    let (m1, m2) = (LINK_MASS, LINK_MASS);
    let l1 = LINK_LENGTH_1;
    let (lc1, lc2) = (LINK_COM, LINK_COM);
    let (i1, i2) = (LINK_MOI, LINK_MOI);
    let g = GRAVITY;
    let [theta1, theta2, dtheta1, dtheta2] = s;

    let d1 =
        m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * theta2.cos()) + i1 + i2;
    let d2 = m2 * (lc2 * lc2 + l1 * lc2 * theta2.cos()) + i2;
    let phi2 = m2 * lc2 * g * (theta1 + theta2 - PI / 2.0).cos();
    let phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * theta2.sin()
        - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * theta2.sin()
        + (m1 * lc1 + m2 * l1) * g * (theta1 - PI / 2.0).cos()
        + phi2;
    let ddtheta2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * theta2.sin()
        - phi2)
        / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    let ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    [dtheta1, dtheta2, ddtheta1, ddtheta2]
}

fn rk4_step(s: [f64; 4], torque: f64) -> [f64; 4] {
    let add = |a: [f64; 4], b: [f64; 4], scale: f64| {
        [
            a[0] + b[0] * scale,
            a[1] + b[1] * scale,
            a[2] + b[2] * scale,
            a[3] + b[3] * scale,
        ]
    };
    let k1 = dsdt(s, torque);
    let k2 = dsdt(add(s, k1, DT / 2.0), torque);
    let k3 = dsdt(add(s, k2, DT / 2.0), torque);
    let k4 = dsdt(add(s, k3, DT), torque);
    let mut out = s;
    for i in 0..4 {
        out[i] = s[i] + DT / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

impl Acrobot {
    pub fn new(seed: u64) -> Self {
        Acrobot {
            state: [0.0; 4],
            steps: 0,
            rng: Rng::from_seed(seed),
            needs_reset: true,
        }
    }

    fn observe(&self) -> Vec<f64> {
        let [t1, t2, d1, d2] = self.state;
        vec![t1.cos(), t1.sin(), t2.cos(), t2.sin(), d1, d2]
    }

    fn at_goal(&self) -> bool {
        let [t1, t2, ..] = self.state;
        -t1.cos() - (t1 + t2).cos() > 1.0
    }

    /// Test hook.
    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
        self.steps = 0;
        self.needs_reset = false;
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }
}

impl Environment for Acrobot {
    fn obs_shape(&self) -> Vec<usize> {
        vec![6]
    }

    fn action_count(&self) -> usize {
        3
    }

    fn max_episode_steps(&self) -> usize {
        MAX_STEPS
    }

    fn reset(&mut self) -> Vec<f64> {
        for v in &mut self.state {
            *v = self.rng.uniform(-0.1, 0.1);
        }
        self.steps = 0;
        self.needs_reset = false;
        self.observe()
    }

    fn step(&mut self, action: usize) -> RlResult<StepOutcome> {
        if self.needs_reset {
            return Err(RlError::Contract(
                "acrobot stepped after terminal without reset".into(),
            ));
        }
        if action > 2 {
            return Err(RlError::Contract(format!(
                "acrobot action {action} out of range 0..3"
            )));
        }
        let torque = action as f64 - 1.0;
        let mut next = rk4_step(self.state, torque);
        next[0] = wrap_angle(next[0]);
        next[1] = wrap_angle(next[1]);
        next[2] = next[2].clamp(-MAX_VEL_1, MAX_VEL_1);
        next[3] = next[3].clamp(-MAX_VEL_2, MAX_VEL_2);
        self.state = next;
        self.steps += 1;

        let reached = self.at_goal();
        let terminal = reached || self.steps >= MAX_STEPS;
        self.needs_reset = terminal;
        Ok(StepOutcome {
            obs: self.observe(),
            reward: if reached { 0.0 } else { -1.0 },
            terminal,
        })
    }

    fn reseed(&mut self, seed: u64) {
        self.rng = Rng::from_seed(seed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reset_keeps_joint_cosines_near_one() {
        let mut env = Acrobot::new(3);
        for _ in 0..100 {
            let obs = env.reset();
            // Both joint angles in [-0.1, 0.1] -> cosines in [cos 0.1, 1].
            assert!(obs[0] >= 0.1f64.cos() && obs[0] <= 1.0);
            assert!(obs[2] >= 0.1f64.cos() && obs[2] <= 1.0);
            assert!(obs[4].abs() <= 0.1 && obs[5].abs() <= 0.1);
        }
    }

    #[test]
    fn velocities_stay_clipped_and_angles_wrapped() {
        let mut env = Acrobot::new(7);
        env.reset();
        for i in 0..400 {
            let out = env.step(i % 3).unwrap();
            let [t1, t2, d1, d2] = env.state();
            assert!((-PI..=PI).contains(&t1));
            assert!((-PI..=PI).contains(&t2));
            assert!(d1.abs() <= MAX_VEL_1 + 1e-12);
            assert!(d2.abs() <= MAX_VEL_2 + 1e-12);
            if out.terminal {
                env.reset();
            }
        }
    }

    #[test]
    fn hanging_still_with_no_torque_stays_still() {
        let mut env = Acrobot::new(0);
        env.set_state([0.0; 4]);
        let out = env.step(1).unwrap(); // zero torque
        // Straight-down is an equilibrium of the dynamics.
        for v in env.state() {
            assert!(v.abs() < 1e-12, "{:?}", env.state());
        }
        assert_eq!(out.reward, -1.0);
        assert!(!out.terminal);
    }

    #[test]
    fn goal_configuration_terminates_with_zero_reward() {
        let mut env = Acrobot::new(0);
        // Both links straight up: -cos(pi) - cos(2pi)... use theta1 = pi,
        // theta2 = 0 -> -(-1) - cos(pi) = 2 > 1 after one quiet step.
        env.set_state([PI - 0.05, 0.0, 0.0, 0.0]);
        let out = env.step(1).unwrap();
        assert!(out.terminal);
        assert_eq!(out.reward, 0.0);
    }

    #[test]
    fn energy_is_roughly_conserved_without_torque() {
        // RK4 at dt=0.2 drifts slowly; over a few steps the mechanical
        // energy of the free system should stay within a few percent.
        let energy = |s: [f64; 4]| {
            let [t1, t2, d1, d2] = s;
            // Positions of the two centers of mass (y up, pivot at origin,
            // theta measured from the downward vertical).
            let y1 = -LINK_COM * t1.cos();
            let y2 = -LINK_LENGTH_1 * t1.cos() - LINK_COM * (t1 + t2).cos();
            let pot = LINK_MASS * GRAVITY * (y1 + y2);
            // Kinetic energy with the same inertia model as dsdt.
            let d1c = LINK_MASS * LINK_COM * LINK_COM
                + LINK_MASS
                    * (LINK_LENGTH_1 * LINK_LENGTH_1
                        + LINK_COM * LINK_COM
                        + 2.0 * LINK_LENGTH_1 * LINK_COM * t2.cos())
                + 2.0 * LINK_MOI;
            let d2c = LINK_MASS * (LINK_COM * LINK_COM + LINK_LENGTH_1 * LINK_COM * t2.cos())
                + LINK_MOI;
            let kin = 0.5 * d1c * d1 * d1
                + (LINK_MASS * LINK_COM * LINK_COM + LINK_MOI) * 0.5 * d2 * d2
                + d2c * d1 * d2;
            pot + kin
        };
        let mut env = Acrobot::new(0);
        env.set_state([0.7, -0.3, 0.2, -0.1]);
        let e0 = energy(env.state());
        for _ in 0..5 {
            env.step(1).unwrap();
        }
        let e1 = energy(env.state());
        assert!(
            (e1 - e0).abs() < 0.05 * e0.abs().max(1.0),
            "energy drifted {e0} -> {e1}"
        );
    }
}
