//! Toy pixel-control game on a 24x24 binary grid: one ball falls a row per
//! step from a random column, a 3-wide paddle slides along the bottom row.
//! Catching scores +1, missing -1; an episode is 10 drops. Exists to
//! exercise the conv family and the pixel-control algorithm options at desk
//! scale.

use lt_tensor::Rng;

use crate::env::{Environment, StepOutcome};
use crate::error::{RlError, RlResult};

pub const GRID: usize = 24;
const PADDLE_HALF: usize = 1; // width 3
const DROPS_PER_EPISODE: usize = 10;

pub struct Catcher {
    ball_row: usize,
    ball_col: usize,
    paddle_center: usize,
    drops_done: usize,
    rng: Rng,
    needs_reset: bool,
}

impl Catcher {
    pub fn new(seed: u64) -> Self {
        Catcher {
            ball_row: 0,
            ball_col: 0,
            paddle_center: GRID / 2,
            drops_done: 0,
            rng: Rng::from_seed(seed),
            needs_reset: true,
        }
    }

    fn observe(&self) -> Vec<f64> {
        let mut grid = vec![0.0; GRID * GRID];
        grid[self.ball_row * GRID + self.ball_col] = 1.0;
        let row = GRID - 1;
        for c in self.paddle_center - PADDLE_HALF..=self.paddle_center + PADDLE_HALF {
            grid[row * GRID + c] = 1.0;
        }
        grid
    }

    fn new_drop(&mut self) {
        self.ball_row = 0;
        self.ball_col = self.rng.below(GRID);
    }

    /// Test hook.
    pub fn set_positions(&mut self, ball_row: usize, ball_col: usize, paddle_center: usize) {
        self.ball_row = ball_row;
        self.ball_col = ball_col;
        self.paddle_center = paddle_center.clamp(PADDLE_HALF, GRID - 1 - PADDLE_HALF);
        self.needs_reset = false;
    }

    pub fn drops_done(&self) -> usize {
        self.drops_done
    }
}

impl Environment for Catcher {
    fn obs_shape(&self) -> Vec<usize> {
        vec![1, GRID, GRID]
    }

    fn action_count(&self) -> usize {
        3 // left, stay, right
    }

    fn max_episode_steps(&self) -> usize {
        DROPS_PER_EPISODE * (GRID - 1)
    }

    fn reset(&mut self) -> Vec<f64> {
        self.paddle_center = PADDLE_HALF + self.rng.below(GRID - 2 * PADDLE_HALF);
        self.drops_done = 0;
        self.new_drop();
        self.needs_reset = false;
        self.observe()
    }

    fn step(&mut self, action: usize) -> RlResult<StepOutcome> {
        if self.needs_reset {
            return Err(RlError::Contract(
                "catcher stepped after terminal without reset".into(),
            ));
        }
        if action > 2 {
            return Err(RlError::Contract(format!(
                "catcher action {action} out of range 0..3"
            )));
        }
        match action {
            0 if self.paddle_center > PADDLE_HALF => self.paddle_center -= 1,
            2 if self.paddle_center < GRID - 1 - PADDLE_HALF => self.paddle_center += 1,
            _ => {}
        }
        self.ball_row += 1;

        let mut reward = 0.0;
        let mut terminal = false;
        if self.ball_row == GRID - 1 {
            let caught = self.ball_col.abs_diff(self.paddle_center) <= PADDLE_HALF;
            reward = if caught { 1.0 } else { -1.0 };
            self.drops_done += 1;
            if self.drops_done == DROPS_PER_EPISODE {
                terminal = true;
                self.needs_reset = true;
            } else {
                self.new_drop();
            }
        }
        Ok(StepOutcome {
            obs: self.observe(),
            reward,
            terminal,
        })
    }

    fn reseed(&mut self, seed: u64) {
        self.rng = Rng::from_seed(seed);
    }
}
