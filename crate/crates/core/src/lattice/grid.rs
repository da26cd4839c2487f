use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t_i = i·T/N`, `i = 0..=N`.
///
/// Only `T` and `N` are stored; every real time is derived from a step index,
/// so `time(N) == T` holds exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Config(format!("horizon must be finite and > 0, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::Config("grid needs at least one step".into()));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Real time of step `i`.
    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps {
            self.horizon
        } else {
            self.horizon * i as f64 / self.steps as f64
        }
    }

    /// Relative tolerance used when a real time is compared with grid points.
    pub fn time_tol(&self) -> f64 {
        1e-12 * self.horizon.max(1.0)
    }

    /// Largest step whose time does not exceed `s` (clamped to `0..=N`).
    pub fn floor_step(&self, s: f64) -> usize {
        if s <= 0.0 {
            return 0;
        }
        let x = s / self.dt();
        let r = x.round();
        let i = if (x - r).abs() <= 1e-9 { r } else { x.floor() };
        (i.max(0.0) as usize).min(self.steps)
    }

    /// Smallest step whose time is at least `s` (clamped to `0..=N`).
    pub fn ceil_step(&self, s: f64) -> usize {
        if s <= 0.0 {
            return 0;
        }
        let x = s / self.dt();
        let r = x.round();
        let i = if (x - r).abs() <= 1e-9 { r } else { x.ceil() };
        (i.max(0.0) as usize).min(self.steps)
    }

    /// Number of whole steps contained in a window of length `delta`.
    pub fn window_steps(&self, delta: f64) -> usize {
        self.floor_step(delta)
    }
}
