//! Spreading speeds from passage-time ladders and direct front tracking.

use serde::{Deserialize, Serialize};

use super::passage::{passage_row, PassageConfig};
use crate::medium::MediumRealization;
use crate::solver::{sharp_speed_bound, Field, Grid, Solver, StepperConfig};
use crate::{dot, Error, Point, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub direction: Point,
    pub ladder: Vec<u32>,
    pub times: Vec<u32>,
    /// `n / τ̂(0, n·e)` per rung.
    pub rungs: Vec<f64>,
    /// Two-point extrapolation in `1/n` over the last two rungs.
    pub speed: f64,
    /// `|rung_last - rung_prev|`.
    pub uncertainty: f64,
}

/// `(n₂w₂ - n₁w₁)/(n₂ - n₁)`: removes the `1/n` term of `w_n = w + b/n`.
pub fn richardson_inverse_n(n1: f64, w1: f64, n2: f64, w2: f64) -> f64 {
    (n2 * w2 - n1 * w1) / (n2 - n1)
}

/// Least-squares fit `v(h) = v₀ + c·h²` through `(h, v)` pairs; returns `v₀`.
pub fn richardson_h2(pairs: &[(f64, f64)]) -> f64 {
    if pairs.len() == 1 {
        return pairs[0].1;
    }
    let n = pairs.len() as f64;
    let sx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let sy: f64 = pairs.iter().map(|p| p.1).sum();
    let sxx: f64 = pairs.iter().map(|p| p.0.powi(4)).sum();
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (sy - slope * sx) / n
}

fn check_ladder(ladder: &[u32]) -> Result<()> {
    if ladder.len() < 2 || ladder.windows(2).any(|w| w[1] <= w[0]) || ladder[0] == 0 {
        return Err(Error::param("ladder", "need at least two increasing positive rungs"));
    }
    Ok(())
}

fn from_times(e: Point, ladder: &[u32], times: &[Option<u32>]) -> Result<SpeedEstimate> {
    let mut resolved = Vec::with_capacity(times.len());
    for (n, t) in ladder.iter().zip(times) {
        match t {
            Some(t) if *t > 0 => resolved.push(*t),
            Some(_) => return Err(Error::Unresolved(format!("rung n = {n} in direction {e:?} reached at t = 0"))),
            None => return Err(Error::Unresolved(format!("rung n = {n} in direction {e:?}"))),
        }
    }
    let rungs: Vec<f64> = ladder.iter().zip(&resolved).map(|(&n, &t)| n as f64 / t as f64).collect();
    let k = rungs.len();
    let (n1, n2) = (ladder[k - 2] as f64, ladder[k - 1] as f64);
    Ok(SpeedEstimate {
        direction: e,
        ladder: ladder.to_vec(),
        times: resolved,
        speed: richardson_inverse_n(n1, rungs[k - 2], n2, rungs[k - 1]),
        uncertainty: (rungs[k - 1] - rungs[k - 2]).abs(),
        rungs,
    })
}

/// Ladder estimates in every direction from a single solve started at the origin.
pub fn spreading_speeds(
    m: &MediumRealization,
    directions: &[Point],
    ladder: &[u32],
    cfg: &PassageConfig,
) -> Result<Vec<SpeedEstimate>> {
    check_ladder(ladder)?;
    let mut targets = Vec::with_capacity(directions.len() * ladder.len());
    for e in directions {
        for &n in ladder {
            targets.push([n as f64 * e[0], n as f64 * e[1]]);
        }
    }
    let times = passage_row(m, [0.0, 0.0], &targets, cfg)?;
    directions
        .iter()
        .enumerate()
        .map(|(i, &e)| from_times(e, ladder, &times[i * ladder.len()..(i + 1) * ladder.len()]))
        .collect()
}

pub fn spreading_speed(m: &MediumRealization, e: Point, ladder: &[u32], cfg: &PassageConfig) -> Result<SpeedEstimate> {
    Ok(spreading_speeds(m, &[e], ladder, cfg)?.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontConfig {
    pub h: f64,
    pub t_final: f64,
    /// Distance kept behind the initial interface in one dimension.
    pub back: f64,
    pub stepper: StepperConfig,
}

impl Default for FrontConfig {
    fn default() -> Self {
        FrontConfig {
            h: 0.1,
            t_final: 40.0,
            back: 20.0,
            stepper: StepperConfig::unmonitored(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontSpeed {
    pub direction: Point,
    pub times: Vec<f64>,
    /// Furthest ½-crossing along `e` over the central band, per time.
    pub positions: Vec<f64>,
    /// Least-squares slope over the last half of the run.
    pub speed: f64,
}

fn crossing(u: &Field, e: Point, s: f64, reach: f64, step: f64) -> f64 {
    let perp = [-e[1], e[0]];
    let at = |r: f64| u.value_at([r * e[0] + s * perp[0], r * e[1] + s * perp[1]]);
    let mut best = f64::NEG_INFINITY;
    let mut prev = at(-reach);
    let mut r = -reach;
    while r < reach {
        let next = at(r + step);
        if prev >= 0.5 && next < 0.5 {
            best = r + step * (prev - 0.5) / (prev - next);
        }
        prev = next;
        r += step;
    }
    best
}

fn slope(ts: &[f64], xs: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let mx = xs.iter().sum::<f64>() / n;
    let num: f64 = ts.iter().zip(xs).map(|(t, x)| (t - mt) * (x - mx)).sum();
    let den: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    num / den
}

/// Front speed from half-space data `½χ_{x·e<0}` truncated to the domain.
///
/// The domain is a box whose far face along `e` lies beyond the barrier
/// reach at `t_final`; only that face is monitored, since the data touches
/// the other faces by construction.
pub fn front_speed_direct(m: &MediumRealization, e: Point, cfg: &FrontConfig) -> Result<FrontSpeed> {
    let len = e[0].hypot(e[1]);
    let e = [e[0] / len, e[1] / len];
    let bound = sharp_speed_bound(m, cfg.h)?;
    let reach = bound.reach(0.0, cfg.t_final);
    let grid = if m.dim == 1 {
        let (lo, hi) = if e[0] > 0.0 { (-cfg.back, reach) } else { (-reach, cfg.back) };
        Grid::covering(1, cfg.h, [lo, 0.0], [hi, 0.0])?
    } else {
        Grid::around(2, cfg.h, [0.0, 0.0], reach)?
    };
    let far = (0..grid.len()).map(|k| dot(grid.center_of(k), e)).fold(f64::NEG_INFINITY, f64::max);
    let watch: Vec<(usize, usize)> = grid
        .boundary_cells()
        .into_iter()
        .filter(|&k| dot(grid.center_of(k), e) >= 0.9 * far)
        .map(|k| (k % grid.extents[0], k / grid.extents[0]))
        .collect();
    let u0 = Field::indicator(grid, 0.5, |x| dot(x, e) < 0.0)?;
    let mut solver = Solver::new(&u0, m, &cfg.stepper)?;
    let band: Vec<f64> = if m.dim == 1 {
        vec![0.0]
    } else {
        let half = 0.25 * reach;
        let n = (2.0 * half / cfg.h).ceil() as usize;
        (0..=n).map(|i| -half + 2.0 * half * i as f64 / n as f64).collect()
    };
    let mut times = Vec::new();
    let mut positions = Vec::new();
    let steps = cfg.t_final.floor() as u32;
    for k in 1..=steps {
        solver.advance_period()?;
        let worst = watch.iter().map(|&(i, j)| solver.value(i, j)).fold(0.0, f64::max);
        if worst > cfg.stepper.boundary_threshold {
            return Err(Error::DomainTooSmall(format!(
                "front reached the far face ({worst:.3e}) at t = {k}"
            )));
        }
        let u = solver.snapshot();
        let limit = if m.dim == 1 { reach.max(cfg.back) } else { reach };
        let pos = band
            .iter()
            .map(|&s| crossing(&u, e, s, limit, 0.5 * cfg.h))
            .fold(f64::NEG_INFINITY, f64::max);
        times.push(k as f64);
        positions.push(pos);
    }
    let from = times.len() / 2;
    if times.len() - from < 2 {
        return Err(Error::param("t_final", "too short for a slope fit"));
    }
    Ok(FrontSpeed {
        direction: e,
        speed: slope(&times[from..], &positions[from..]),
        times,
        positions,
    })
}

/// Front speeds with Richardson extrapolation `v₀ + c·h²` over spacings.
pub fn front_speed_extrapolated(m: &MediumRealization, e: Point, spacings: &[f64], cfg: &FrontConfig) -> Result<(f64, Vec<FrontSpeed>)> {
    let runs = spacings
        .iter()
        .map(|&h| front_speed_direct(m, e, &FrontConfig { h, ..cfg.clone() }))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = spacings.iter().zip(&runs).map(|(&h, r)| (h, r.speed)).collect();
    Ok((richardson_h2(&pairs), runs))
}
