//! Closed-form ground truth for scalar plants `ẋ = ax + bu` with `a < 0`
//! and `b ≠ 0`.
//!
//! For these plants the reachable set, the optimal control and the value
//! function are all explicit:
//!
//! ```text
//! R   = [-x₁, x₁],        x₁ = -|b| a⁻¹ (e^{-aT} - 1)
//! u_ξ = 0 on [0, τ_ξ),    -sgn(b)·sgn(ξ) on [τ_ξ, T]
//! τ_ξ = -a⁻¹ ln(e^{-aT} + a|ξ/b|)
//! V   = T - τ_ξ
//! ```
//!
//! The rest of the crate computes the same quantities through the LP
//! pipeline; this module is the independent reference the verification
//! suites compare against.

use crate::error::{Error, Result};
use crate::model::{ControlSignal, Grid};

/// A scalar plant satisfying the closed-form hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar1dSystem {
    a: f64,
    b: f64,
    horizon: f64,
}

impl Scalar1dSystem {
    pub fn new(a: f64, b: f64, horizon: f64) -> Result<Self> {
        if a >= 0.0 || !a.is_finite() {
            return Err(Error::InvalidInput(format!(
                "closed form requires a < 0, got a = {a}"
            )));
        }
        if b == 0.0 || !b.is_finite() {
            return Err(Error::InvalidInput(format!(
                "closed form requires b ≠ 0, got b = {b}"
            )));
        }
        if horizon <= 0.0 || !horizon.is_finite() {
            return Err(Error::InvalidInput(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        Ok(Self { a, b, horizon })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// The reachable set `[-x₁, x₁]`.
    pub fn reachable_interval(&self) -> (f64, f64) {
        let x1 = -self.b.abs() / self.a * ((-self.a * self.horizon).exp() - 1.0);
        (-x1, x1)
    }

    /// Switching time `τ_ξ`: the instant the optimal control leaves zero.
    pub fn switching_time(&self, xi: f64) -> Result<f64> {
        self.check_reach(xi)?;
        let inner = (-self.a * self.horizon).exp() + self.a * (xi / self.b).abs();
        Ok(-inner.ln() / self.a)
    }

    /// The value function `V(ξ) = T - τ_ξ`.
    pub fn value(&self, xi: f64) -> Result<f64> {
        let tau = self.switching_time(xi)?;
        // ξ = 0 gives τ = T exactly in exact arithmetic; clamp fp crumbs.
        Ok((self.horizon - tau).max(0.0))
    }

    /// Sample the closed-form control onto `grid`. The cell containing
    /// `τ_ξ` takes the regime covering the larger part of the cell, with
    /// exact ties resolved toward the later (active) regime.
    pub fn control(&self, xi: f64, grid: &Grid) -> Result<ControlSignal> {
        if (grid.horizon() - self.horizon).abs() > 1e-12 * self.horizon {
            return Err(Error::InvalidInput(format!(
                "grid horizon {} does not match the plant horizon {}",
                grid.horizon(),
                self.horizon
            )));
        }
        let tau = self.switching_time(xi)?;
        let level = -self.b.signum() * sign_of(xi);
        let values = (0..grid.cells())
            .map(|k| {
                let left = grid.node(k);
                let right = grid.node(k + 1);
                if tau <= left {
                    level
                } else if tau >= right {
                    0.0
                } else {
                    // Larger-overlap rule inside the switching cell.
                    let off_part = tau - left;
                    let on_part = right - tau;
                    if on_part >= off_part {
                        level
                    } else {
                        0.0
                    }
                }
            })
            .collect();
        ControlSignal::new(*grid, values)
    }

    fn check_reach(&self, xi: f64) -> Result<()> {
        if !xi.is_finite() {
            return Err(Error::InvalidInput(format!("state must be finite, got {xi}")));
        }
        let (_, x1) = self.reachable_interval();
        if xi.abs() > x1 {
            return Err(Error::OutOfReach { xi, reach: x1 });
        }
        Ok(())
    }
}

fn sign_of(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
