//! First-passage times, spreading speeds and Wulff-shape reconstruction.

mod passage;
mod speed;

pub use passage::*;
pub use speed::*;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{shape_from_speeds, ConvexShape, ShapeModel};
use crate::medium::MediumRealization;
use crate::solver::Solver;
use crate::{norm, scale, sub, Error, Point, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WulffEstimate {
    /// Shape built from the seed-averaged speeds.
    pub shape: ConvexShape,
    pub seeds: Vec<u64>,
    /// `speeds[k][i]`: estimate for seed `k` in direction `i`.
    pub speeds: Vec<Vec<SpeedEstimate>>,
    /// Largest cross-seed range of `ŵ(e_i)` over directions.
    pub seed_spread: f64,
    pub convexity_defect: f64,
}

impl WulffEstimate {
    /// Largest ladder uncertainty over seeds and directions.
    pub fn uncertainty(&self) -> f64 {
        self.speeds.iter().flatten().map(|s| s.uncertainty).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("seed,e0,e1,rungs,speed,uncertainty\n");
        for (seed, row) in self.seeds.iter().zip(&self.speeds) {
            for est in row {
                let rungs: Vec<String> = est.rungs.iter().map(|r| format!("{r:?}")).collect();
                s.push_str(&format!(
                    "{seed},{:?},{:?},{},{:?},{:?}\n",
                    est.direction[0],
                    est.direction[1],
                    rungs.join(";"),
                    est.speed,
                    est.uncertainty
                ));
            }
        }
        s
    }
}

/// Measures speeds on each realization and averages them per direction.
pub fn estimate_wulff(
    media: &[MediumRealization],
    directions: &[Point],
    ladder: &[u32],
    cfg: &PassageConfig,
) -> Result<WulffEstimate> {
    let first = media.first().ok_or_else(|| Error::param("media", "need at least one realization"))?;
    let speeds = media
        .par_iter()
        .map(|m| spreading_speeds(m, directions, ladder, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::with_capacity(directions.len());
    let mut spread: f64 = 0.0;
    for (i, &e) in directions.iter().enumerate() {
        let col: Vec<f64> = speeds.iter().map(|row| row[i].speed).collect();
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
        pairs.push((e, col.iter().sum::<f64>() / col.len() as f64));
    }
    let shape = shape_from_speeds(first.dim, &pairs)?;
    Ok(WulffEstimate {
        convexity_defect: shape.convexity_defect(),
        shape,
        seeds: media.iter().map(|m| m.seed).collect(),
        speeds,
        seed_spread: spread,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftResult {
    pub shift: Point,
    /// Cells of `y + (1-δ)t𝒮` (inner model) where `u < θ`.
    pub inner_misses: usize,
    /// Cells with `u ≥ θ` outside `y + (1+δ)t𝒮` (outer model).
    pub outer_misses: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongWulffReport {
    pub t: u32,
    pub delta: f64,
    pub theta: f64,
    pub shifts: Vec<ShiftResult>,
}

impl StrongWulffReport {
    pub fn pass_fraction(&self) -> f64 {
        if self.shifts.is_empty() {
            return 1.0;
        }
        self.shifts.iter().filter(|s| s.passed).count() as f64 / self.shifts.len() as f64
    }
}

/// Checks `(1-δ)t𝒮 ⊆ {x : u(t, x+y) ≥ θ} ⊆ (1+δ)t𝒮` for each shift `y`,
/// with `u` started from `½χ_{B₁(y)}`.
pub fn strong_wulff_probe(
    m: &MediumRealization,
    shape: &ConvexShape,
    shifts: &[Point],
    t: u32,
    delta: f64,
    theta: f64,
    cfg: &PassageConfig,
) -> Result<StrongWulffReport> {
    if !(0.0..1.0).contains(&delta) || !(0.0..=1.0).contains(&theta) {
        return Err(Error::param("delta/theta", "need δ ∈ [0,1) and θ ∈ [0,1]"));
    }
    if shape.dim() != m.dim {
        return Err(Error::param("shape", "dimension differs from the medium"));
    }
    let (lo, hi) = (t as f64 * (1.0 - delta), t as f64 * (1.0 + delta));
    let results = shifts
        .par_iter()
        .map(|&y| {
            let grid = domain(m, y, 1.0, t as f64, cfg.h)?;
            let u0 = ball_datum(grid, y)?;
            let mut solver = Solver::new(&u0, m, &cfg.stepper)?;
            solver.advance_to(t as f64)?;
            let u = solver.snapshot();
            let (mut inner_misses, mut outer_misses) = (0, 0);
            for k in 0..u.grid.len() {
                let x = sub(u.grid.center_of(k), y);
                let above = u.values[k] >= theta;
                let scaled = |s: f64| if s > 0.0 { scale(x, 1.0 / s) } else { x };
                if !above && lo > 0.0 && shape.contains(ShapeModel::Inner, scaled(lo)) {
                    inner_misses += 1;
                }
                if above && (hi == 0.0 && norm(x) > 0.0 || !shape.contains(ShapeModel::Outer, scaled(hi))) {
                    outer_misses += 1;
                }
            }
            Ok(ShiftResult {
                shift: y,
                inner_misses,
                outer_misses,
                passed: inner_misses == 0 && outer_misses == 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StrongWulffReport {
        t,
        delta,
        theta,
        shifts: results,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowRecheck {
    pub window: u32,
    pub rows: usize,
    pub compared: usize,
    /// Entries whose value differs under window `2W`.
    pub changed: usize,
}

/// Recomputes every `stride`-th row of `table` with window `2W`.
pub fn window_recheck(m: &MediumRealization, table: &PassageTimeTable, stride: usize, cfg: &PassageConfig) -> Result<WindowRecheck> {
    let doubled = PassageConfig {
        window: 2 * table.window,
        horizon: table.horizon + table.window,
        ..cfg.clone()
    };
    let picked: Vec<usize> = (0..table.sources.len()).step_by(stride.max(1)).collect();
    let rows = picked
        .par_iter()
        .map(|&k| passage_row(m, table.sources[k], &table.targets, &doubled).map(|r| (k, r)))
        .collect::<Result<Vec<_>>>()?;
    let mut compared = 0;
    let mut changed = 0;
    for (k, row) in rows {
        for (a, b) in table.entries[k].iter().zip(&row) {
            if a.is_some() {
                compared += 1;
                if a != b {
                    changed += 1;
                }
            }
        }
    }
    Ok(WindowRecheck {
        window: doubled.window,
        rows: picked.len(),
        compared,
        changed,
    })
}
