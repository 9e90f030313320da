//! Explicit monotone time stepping for the local and nonlocal equations.
//!
//! Time is tracked as (period index, phase). Every unit period is split into
//! the same step sequence unless an observation time falls inside it, so a
//! run restarted from an integer-time snapshot reproduces the original bits.

mod bounds;
mod grid;
mod ops;

pub use bounds::{
    barrier_check, cfl_dt, sharp_speed_bound, supersolution_check, supersolution_speed, truncation_radius,
    SpeedBound, BARRIER_MARGIN,
};
pub use grid::{Exterior, Field, Grid};
pub use ops::{tail_radius, OperatorBounds};

use serde::{Deserialize, Serialize};

use crate::medium::{Diffusion, KernelSpec, MediumRealization, ReactionSpec};
use crate::{Error, Result};
use ops::{Operator, Padded};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperConfig {
    /// Fixed step; defaults to `cfl_fraction` times the stability limit.
    pub dt: Option<f64>,
    pub cfl_fraction: f64,
    /// Kernel mass dropped beyond the truncation radius.
    pub tail_tolerance: f64,
    /// Fail with `DomainTooSmall` when a boundary cell exceeds the threshold
    /// at an integer or observation time.
    pub monitor_boundary: bool,
    pub boundary_threshold: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dt: None,
            cfl_fraction: 1.0,
            tail_tolerance: 1e-8,
            monitor_boundary: true,
            boundary_threshold: 1e-6,
        }
    }
}

impl StepperConfig {
    pub fn unmonitored() -> Self {
        StepperConfig {
            monitor_boundary: false,
            ..Self::default()
        }
    }
}

/// Relative slack when comparing a step to the stability limit.
const DT_SLACK: f64 = 1e-12;

pub struct Solver {
    op: Operator,
    grid: Grid,
    exterior: Exterior,
    cur: Padded,
    next: Padded,
    period: i64,
    phase: f64,
    dt_max: f64,
    cfg: StepperConfig,
    steps: u64,
}

impl Solver {
    pub fn new(u0: &Field, m: &MediumRealization, cfg: &StepperConfig) -> Result<Self> {
        u0.check_range()?;
        let op = Operator::new(&u0.grid, m, cfg.tail_tolerance)?;
        let limit = op.max_dt(u0.grid.h, u0.grid.dim);
        let dt_max = match cfg.dt {
            Some(dt) => {
                if !(dt > 0.0) || dt > limit * (1.0 + DT_SLACK) {
                    return Err(Error::Cfl { dt, bound: limit });
                }
                dt
            }
            None => {
                if !(cfg.cfl_fraction > 0.0 && cfg.cfl_fraction <= 1.0) {
                    return Err(Error::param("cfl_fraction", "must lie in (0, 1]"));
                }
                limit * cfg.cfl_fraction
            }
        };
        let pad = op.pad(u0.grid.dim);
        let mut cur = Padded::new(&u0.grid, pad, u0.exterior);
        cur.load(&u0.values);
        let next = cur.clone();
        let period = u0.time.floor();
        Ok(Solver {
            op,
            grid: u0.grid.clone(),
            exterior: u0.exterior,
            cur,
            next,
            period: period as i64,
            phase: u0.time - period,
            dt_max,
            cfg: cfg.clone(),
            steps: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.period as f64 + self.phase
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn dt_max(&self) -> f64 {
        self.dt_max
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bounds(&self) -> &OperatorBounds {
        self.op.bounds()
    }

    /// The barrier with the smallest speed for this medium and spacing.
    pub fn speed_bound(&self, m: &MediumRealization) -> SpeedBound {
        bounds::best_bound(&self.op, self.grid.h, m)
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.cur.get(i, j)
    }

    pub fn snapshot(&self) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.cur.interior(),
            time: self.time(),
            exterior: self.exterior,
        }
    }

    fn boundary_max(&self) -> f64 {
        self.grid
            .boundary_cells()
            .into_iter()
            .map(|k| self.cur.get(k % self.grid.extents[0], k / self.grid.extents[0]))
            .fold(0.0, f64::max)
    }

    fn monitor(&self) -> Result<()> {
        if self.cfg.monitor_boundary && self.exterior == Exterior::Zero {
            let b = self.boundary_max();
            if b > self.cfg.boundary_threshold {
                return Err(Error::DomainTooSmall(format!(
                    "boundary value {b:.3e} exceeds {:.0e} at t = {}",
                    self.cfg.boundary_threshold,
                    self.time()
                )));
            }
        }
        Ok(())
    }

    /// Steps within the current period up to phase `target ∈ (phase, 1]`.
    fn advance_phase(&mut self, target: f64) {
        let span = target - self.phase;
        if span <= 0.0 {
            return;
        }
        let n = (span / self.dt_max * (1.0 - DT_SLACK)).ceil().max(1.0) as u64;
        let dt = span / n as f64;
        let start = self.phase;
        for k in 0..n {
            let t = start + k as f64 * dt;
            self.op.step(t, dt, &self.cur, &mut self.next);
            std::mem::swap(&mut self.cur, &mut self.next);
        }
        self.steps += n;
        if target >= 1.0 {
            self.period += 1;
            self.phase = 0.0;
        } else {
            self.phase = target;
        }
    }

    /// Advances to time `t`, landing on every integer time on the way.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if t < self.time() - 1e-12 {
            return Err(Error::param("t", format!("{t} precedes current time {}", self.time())));
        }
        while self.time() < t - 1e-12 {
            let in_period = t - self.period as f64;
            let target = if in_period >= 1.0 - 1e-12 { 1.0 } else { in_period };
            self.advance_phase(target);
            self.monitor()?;
        }
        Ok(())
    }

    /// Advances one full period (to the next integer time).
    pub fn advance_period(&mut self) -> Result<()> {
        self.advance_phase(1.0);
        self.monitor()
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub field: Field,
    pub observations: Vec<Field>,
}

/// Solves from `u0` up to `t_final`, recording snapshots at the sorted
/// `observe` times.
pub fn solve(
    u0: &Field,
    m: &MediumRealization,
    t_final: f64,
    observe: &[f64],
    cfg: &StepperConfig,
) -> Result<Solution> {
    if observe.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("observe", "times must be sorted"));
    }
    if let Some(&t) = observe.iter().find(|&&t| t < u0.time || t > t_final) {
        return Err(Error::param("observe", format!("time {t} outside [{}, {t_final}]", u0.time)));
    }
    let mut s = Solver::new(u0, m, cfg)?;
    let mut observations = Vec::with_capacity(observe.len());
    for &t in observe {
        s.advance_to(t)?;
        observations.push(s.snapshot());
    }
    s.advance_to(t_final)?;
    Ok(Solution {
        field: s.snapshot(),
        observations,
    })
}

fn single_step(u: &Field, m: &MediumRealization, dt: f64) -> Result<Field> {
    let op = Operator::new(&u.grid, m, StepperConfig::default().tail_tolerance)?;
    let bound = op.max_dt(u.grid.h, u.grid.dim);
    if !(dt > 0.0) || dt > bound * (1.0 + DT_SLACK) {
        return Err(Error::Cfl { dt, bound });
    }
    let mut cur = Padded::new(&u.grid, op.pad(u.grid.dim), u.exterior);
    cur.load(&u.values);
    let mut next = cur.clone();
    op.step(u.time.rem_euclid(1.0), dt, &cur, &mut next);
    Ok(Field {
        grid: u.grid.clone(),
        values: next.interior(),
        time: u.time + dt,
        exterior: u.exterior,
    })
}

/// One explicit step of the local scheme.
pub fn step_local(u: &Field, m: &MediumRealization, dt: f64) -> Result<Field> {
    if !m.is_local() {
        return Err(Error::param("medium", "step_local needs a local medium"));
    }
    single_step(u, m, dt)
}

/// One explicit step of the nonlocal scheme with kernel `k` and reaction `r`.
pub fn step_nonlocal(u: &Field, k: &KernelSpec, r: &ReactionSpec, dt: f64) -> Result<Field> {
    let m = MediumRealization {
        dim: u.grid.dim,
        diffusion: Diffusion::Nonlocal(k.clone()),
        reaction: r.clone(),
        ellipticity: 0.0,
        seed: 0,
        shift: [0.0; 2],
    };
    single_step(u, &m, dt)
}
