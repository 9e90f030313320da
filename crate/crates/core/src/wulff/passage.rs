//! Integer first-passage times `τ̂(y, z)` and the diagnostics built on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::medium::MediumRealization;
use crate::solver::{sharp_speed_bound, Field, Grid, Solver, StepperConfig};
use crate::{norm, sub, Point, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PassageConfig {
    pub h: f64,
    /// Largest integer time simulated.
    pub horizon: u32,
    /// Persistence window `W`: coverage must hold at `t, t+1, …, t+W`.
    pub window: u32,
    pub stepper: StepperConfig,
}

impl Default for PassageConfig {
    fn default() -> Self {
        PassageConfig {
            h: 0.25,
            horizon: 60,
            window: 3,
            stepper: StepperConfig::default(),
        }
    }
}

/// Grid around `center` reaching past the barrier bound for data supported
/// in `B_r0(center)` up to time `t`.
pub(crate) fn domain(m: &MediumRealization, center: Point, r0: f64, t: f64, h: f64) -> Result<Grid> {
    let bound = sharp_speed_bound(m, h)?;
    Grid::around(m.dim, h, center, bound.reach(r0, t))
}

/// `½χ_{B₁(y)}` on the cell centers of `grid`.
pub fn ball_datum(grid: Grid, y: Point) -> Result<Field> {
    Field::indicator(grid, 0.5, |x| norm(sub(x, y)) < 1.0)
}

fn ball_cells(grid: &Grid, z: Point) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for j in 0..grid.extents[1] {
        for i in 0..grid.extents[0] {
            if norm(sub(grid.center(i, j), z)) < 1.0 {
                cells.push((i, j));
            }
        }
    }
    cells
}

/// Tracks runs of coverage at integer times for one target.
#[derive(Clone, Debug)]
struct Tracker {
    cells: Vec<(usize, usize)>,
    run_start: Option<u32>,
    resolved: Option<u32>,
}

/// `τ̂(y, z)` for every target `z`, from one solve started at `½χ_{B₁(y)}`.
/// Targets whose ball is not covered by the grid are unresolved.
pub fn passage_row(m: &MediumRealization, y: Point, targets: &[Point], cfg: &PassageConfig) -> Result<Vec<Option<u32>>> {
    let grid = domain(m, y, 1.0, cfg.horizon as f64, cfg.h)?;
    let (lo, hi) = grid.bounds();
    let mut trackers: Vec<Tracker> = targets
        .iter()
        .map(|&z| {
            let inside = z[0] - 1.0 >= lo[0]
                && z[0] + 1.0 <= hi[0]
                && (m.dim == 1 || (z[1] - 1.0 >= lo[1] && z[1] + 1.0 <= hi[1]));
            Tracker {
                cells: if inside { ball_cells(&grid, z) } else { Vec::new() },
                run_start: None,
                resolved: None,
            }
        })
        .collect();
    let u0 = ball_datum(grid, y)?;
    let mut solver = Solver::new(&u0, m, &cfg.stepper)?;
    let mut k = 0u32;
    loop {
        for tr in trackers.iter_mut().filter(|t| t.resolved.is_none() && !t.cells.is_empty()) {
            let covered = tr.cells.iter().all(|&(i, j)| solver.value(i, j) >= 0.5);
            if covered {
                let start = *tr.run_start.get_or_insert(k);
                if k - start == cfg.window {
                    tr.resolved = Some(start);
                }
            } else {
                tr.run_start = None;
            }
        }
        let pending = trackers.iter().any(|t| t.resolved.is_none() && !t.cells.is_empty());
        if !pending || k >= cfg.horizon {
            break;
        }
        solver.advance_period()?;
        k += 1;
    }
    Ok(trackers.into_iter().map(|t| t.resolved).collect())
}

/// `τ̂(y, z)`, or `None` when unresolved within the horizon.
pub fn first_passage(m: &MediumRealization, y: Point, z: Point, cfg: &PassageConfig) -> Result<Option<u32>> {
    Ok(passage_row(m, y, &[z], cfg)?[0])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassageTimeTable {
    pub seed: u64,
    pub sources: Vec<Point>,
    pub targets: Vec<Point>,
    /// `entries[k][l] = τ̂(sources[k], targets[l])`.
    pub entries: Vec<Vec<Option<u32>>>,
    pub horizon: u32,
    pub window: u32,
}

impl PassageTimeTable {
    /// One solve per source, run in parallel.
    pub fn build(m: &MediumRealization, sources: &[Point], targets: &[Point], cfg: &PassageConfig) -> Result<Self> {
        let entries = sources
            .par_iter()
            .map(|&y| passage_row(m, y, targets, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(PassageTimeTable {
            seed: m.seed,
            sources: sources.to_vec(),
            targets: targets.to_vec(),
            entries,
            horizon: cfg.horizon,
            window: cfg.window,
        })
    }

    pub fn lookup(&self, y: Point, z: Point) -> Option<u32> {
        let k = self.sources.iter().position(|&p| p == y)?;
        let l = self.targets.iter().position(|&p| p == z)?;
        self.entries[k][l]
    }

    /// Resolved `(y, z, τ̂)` entries.
    pub fn resolved(&self) -> Vec<(Point, Point, u32)> {
        let mut out = Vec::new();
        for (k, row) in self.entries.iter().enumerate() {
            for (l, e) in row.iter().enumerate() {
                if let Some(t) = e {
                    out.push((self.sources[k], self.targets[l], *t));
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("y0,y1,z0,z1,tau\n");
        for (k, row) in self.entries.iter().enumerate() {
            for (l, e) in row.iter().enumerate() {
                let (y, z) = (self.sources[k], self.targets[l]);
                let tau = e.map_or("unresolved".to_string(), |t| t.to_string());
                s.push_str(&format!("{:?},{:?},{:?},{:?},{tau}\n", y[0], y[1], z[0], z[1]));
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityReport {
    pub checked: usize,
    /// Triples with an unresolved leg.
    pub skipped: usize,
    pub violations: usize,
    /// `max τ̂(y,z) - τ̂(y,x) - τ̂(x,z)` over checked triples.
    pub worst_excess: i64,
    pub slack: i64,
}

impl SubadditivityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `τ̂(y,z) ≤ τ̂(y,x) + τ̂(x,z) + W + 1` for triples `(y, x, z)`.
pub fn subadditivity_check(table: &PassageTimeTable, triples: &[(Point, Point, Point)]) -> SubadditivityReport {
    let slack = table.window as i64 + 1;
    let mut report = SubadditivityReport {
        checked: 0,
        skipped: 0,
        violations: 0,
        worst_excess: i64::MIN,
        slack,
    };
    for &(y, x, z) in triples {
        match (table.lookup(y, z), table.lookup(y, x), table.lookup(x, z)) {
            (Some(yz), Some(yx), Some(xz)) => {
                let excess = yz as i64 - yx as i64 - xz as i64;
                report.checked += 1;
                report.worst_excess = report.worst_excess.max(excess);
                if excess > slack {
                    report.violations += 1;
                }
            }
            _ => report.skipped += 1,
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub pairs: usize,
    /// Smallest `C` with `τ̂(y,z) ≤ C(|y-z| + 1)` over the table.
    pub c_fit: f64,
    pub comparisons: usize,
    /// Pairs of entries with `|τ̂(y,z) - τ̂(y',z')| > 3C(|y-y'| + |z-z'| + 2) + W + 1`.
    pub violations: usize,
    /// Largest `|Δτ̂| / (3C(|y-y'| + |z-z'| + 2) + W + 1)`.
    pub worst_ratio: f64,
}

impl RegularityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

pub fn fit_c(entries: &[(Point, Point, u32)]) -> f64 {
    entries
        .iter()
        .map(|&(y, z, t)| t as f64 / (norm(sub(y, z)) + 1.0))
        .fold(0.0, f64::max)
}

pub fn regularity_check(table: &PassageTimeTable) -> RegularityReport {
    let entries = table.resolved();
    let c = fit_c(&entries);
    let slack = table.window as f64 + 1.0;
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    let mut comparisons = 0;
    for (a, &(y, z, t)) in entries.iter().enumerate() {
        for &(y2, z2, t2) in &entries[a + 1..] {
            let bound = 3.0 * c * (norm(sub(y, y2)) + norm(sub(z, z2)) + 2.0) + slack;
            let diff = (t as f64 - t2 as f64).abs();
            comparisons += 1;
            worst = worst.max(diff / bound);
            if diff > bound {
                violations += 1;
            }
        }
    }
    RegularityReport {
        pairs: entries.len(),
        c_fit: c,
        comparisons,
        violations,
        worst_ratio: worst,
    }
}
