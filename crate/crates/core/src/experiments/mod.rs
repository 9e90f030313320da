//! The sandwich test for cube-decomposed surrogate solutions, the ε-sweep
//! homogenization test, and the hair-trigger time.

mod sweep;
mod vlin;

pub use sweep::*;
pub use vlin::*;

use serde::{Deserialize, Serialize};

use crate::medium::MediumRealization;
use crate::solver::{Field, Solver, StepperConfig};
use crate::wulff::domain;
use crate::{norm, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HairTriggerConfig {
    pub h: f64,
    pub horizon: u32,
    pub stepper: StepperConfig,
}

impl Default for HairTriggerConfig {
    fn default() -> Self {
        HairTriggerConfig {
            h: 0.25,
            horizon: 100,
            stepper: StepperConfig::default(),
        }
    }
}

/// First integer time `k` at which the solution from `θχ_{B₁(0)}` exceeds
/// `1 - η` on every cell centered in `B₁(0)` at both `k` and `k + 1`.
/// Data already equal to 1 on the ball gives 0.
pub fn hair_trigger_time(m: &MediumRealization, theta: f64, eta: f64, cfg: &HairTriggerConfig) -> Result<u32> {
    if !(theta > 0.0 && theta <= 1.0) || !(eta > 0.0 && eta < 1.0) {
        return Err(Error::param("theta/eta", format!("need θ ∈ (0,1], η ∈ (0,1); got {theta}, {eta}")));
    }
    if theta == 1.0 {
        return Ok(0);
    }
    // domains sized for doubling horizons, so early triggers stay cheap
    let mut horizon = cfg.horizon.min(8);
    loop {
        if let Some(t) = trigger_within(m, theta, eta, horizon, cfg)? {
            return Ok(t);
        }
        if horizon >= cfg.horizon {
            break;
        }
        horizon = (2 * horizon).min(cfg.horizon);
    }
    Err(Error::HorizonExceeded {
        horizon: cfg.horizon as f64,
        what: format!("hair trigger for θ = {theta}, η = {eta}"),
    })
}

fn trigger_within(m: &MediumRealization, theta: f64, eta: f64, horizon: u32, cfg: &HairTriggerConfig) -> Result<Option<u32>> {
    let grid = domain(m, [0.0; 2], 1.0, horizon as f64 + 1.0, cfg.h)?;
    let ball: Vec<usize> = (0..grid.len()).filter(|&k| norm(grid.center_of(k)) < 1.0).collect();
    let u0 = Field::indicator(grid, theta, |x| norm(x) < 1.0)?;
    let mut solver = Solver::new(&u0, m, &cfg.stepper)?;
    let nx = solver.grid().extents[0];
    let above = |s: &Solver| ball.iter().all(|&k| s.value(k % nx, k / nx) > 1.0 - eta);
    let mut start = None;
    for k in 0..=horizon + 1 {
        if k > 0 {
            solver.advance_period()?;
        }
        if above(&solver) {
            let s = *start.get_or_insert(k);
            if k == s + 1 {
                return Ok(Some(s));
            }
        } else {
            start = None;
        }
    }
    Ok(None)
}
