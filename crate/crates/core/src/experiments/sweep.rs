//! ε-sweeps of the unscaled problem against the limit `χ_{G + t𝒮}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{erode, mixed_zone_within, ConvexShape, RegionSpec};
use crate::medium::MediumRealization;
use crate::solver::{sharp_speed_bound, solve, supersolution_speed, Field, Grid, StepperConfig};
use crate::{dot, norm, Error, Point, Result};

/// How the shifts `y_ε` are chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShiftRule {
    Zero,
    /// One shift per ε.
    Fixed { shifts: Vec<Point> },
    /// Uniform in `B_radius(0)`, drawn from `seed`.
    Random { radius: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub theta: f64,
    /// Strictly decreasing.
    pub eps: Vec<f64>,
    /// `ρ(ε) = ε^rho_exponent`.
    pub rho_exponent: f64,
    pub shifts: ShiftRule,
    /// Scaled observation times.
    pub obs_times: Vec<f64>,
    pub delta_band: f64,
    pub thresholds: (f64, f64),
    /// Radius `M` of the observation ball for unbounded regions.
    pub window: f64,
    /// Unscaled grid spacing.
    pub h: f64,
    pub stepper: StepperConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            theta: 0.5,
            eps: vec![1.0, 0.5, 0.25, 0.125],
            rho_exponent: 0.5,
            shifts: ShiftRule::Zero,
            obs_times: vec![0.0, 1.0],
            delta_band: 0.1,
            thresholds: (0.1, 0.9),
            window: 2.0,
            h: 0.25,
            stepper: StepperConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub t: f64,
    pub outside_cells: usize,
    pub inside_cells: usize,
    pub measure: f64,
    /// Scaled ½-crossing along the normal of a half-space region.
    pub front_position: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub eps: Vec<f64>,
    pub rho: Vec<f64>,
    pub shifts: Vec<Point>,
    pub theta: f64,
    pub region: RegionSpec,
    pub shape: ConvexShape,
    pub obs_times: Vec<f64>,
    /// Radius of the ball `G` was intersected with, for unbounded `G`.
    pub localization: Option<f64>,
    pub rows: Vec<SweepRow>,
}

impl SweepRecord {
    /// Mixed-zone measures at scaled time `t`, in the order of `eps`.
    pub fn measures_at(&self, t: f64) -> Vec<f64> {
        self.eps
            .iter()
            .filter_map(|&e| self.rows.iter().find(|r| r.eps == e && r.t == t).map(|r| r.measure))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,t,outside_cells,inside_cells,measure,front_position\n");
        for r in &self.rows {
            let front = r.front_position.map_or(String::new(), |p| format!("{p:?}"));
            s.push_str(&format!(
                "{:?},{:?},{},{},{:?},{front}\n",
                r.eps, r.t, r.outside_cells, r.inside_cells, r.measure
            ));
        }
        s
    }
}

fn shifts_for(rule: &ShiftRule, n: usize) -> Result<Vec<Point>> {
    match rule {
        ShiftRule::Zero => Ok(vec![[0.0; 2]; n]),
        ShiftRule::Fixed { shifts } if shifts.len() == n => Ok(shifts.clone()),
        ShiftRule::Fixed { shifts } => Err(Error::param("shifts", format!("{} shifts for {n} values of ε", shifts.len()))),
        ShiftRule::Random { radius, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok((0..n)
                .map(|_| loop {
                    let p = [rng.gen_range(-radius..=*radius), rng.gen_range(-radius..=*radius)];
                    if norm(p) <= *radius {
                        break p;
                    }
                })
                .collect())
        }
    }
}

/// Scaled ½-crossing of `u` along `s·n`, `s ∈ [-r, r]`.
fn front_along(u: &Field, n: Point, r: f64) -> Option<f64> {
    let steps = ((2.0 * r) / (0.25 * u.grid.h)).ceil() as usize;
    let at = |k: usize| -r + 2.0 * r * k as f64 / steps as f64;
    let mut best = None;
    let mut prev = u.value_at([at(0) * n[0], at(0) * n[1]]);
    for k in 1..=steps {
        let s = at(k);
        let v = u.value_at([s * n[0], s * n[1]]);
        if prev >= 0.5 && v < 0.5 {
            best = Some(at(k - 1) + (s - at(k - 1)) * (prev - 0.5) / (prev - v));
        }
        prev = v;
    }
    best
}

/// Runs the unscaled problem from `θχ` over `{x : εx - y_ε ∈ G⁰_ρ(ε)}` for
/// each ε, observes at `ε⁻¹·t` and measures the mixed zone of the rescaled
/// field against `G + t𝒮`.
///
/// An unbounded `G` is replaced by `G ∩ B_R(0)` with
/// `R = max(2 + 1/a, 1 + s)·M`, `a` the supersolution speed and `s` the
/// sharp speed bound; only cells in `B_M(0)` are measured.
pub fn homogenization_sweep(
    g: &RegionSpec,
    m: &MediumRealization,
    shape: &ConvexShape,
    cfg: &SweepConfig,
) -> Result<SweepRecord> {
    let dim = m.dim;
    g.check(dim)?;
    if shape.dim() != dim {
        return Err(Error::MissingShape(format!("shape has dimension {}, medium {dim}", shape.dim())));
    }
    if cfg.eps.is_empty() || cfg.eps.windows(2).any(|w| w[1] >= w[0]) || cfg.eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::param("eps", "need a strictly decreasing list of positive values"));
    }
    if !(cfg.theta > 0.0 && cfg.theta <= 1.0) {
        return Err(Error::param("theta", format!("{} not in (0, 1]", cfg.theta)));
    }
    if cfg.obs_times.is_empty() || cfg.obs_times.windows(2).any(|w| w[1] < w[0]) || cfg.obs_times[0] < 0.0 {
        return Err(Error::param("obs_times", "need sorted nonnegative times"));
    }
    let shifts = shifts_for(&cfg.shifts, cfg.eps.len())?;
    let t_max = *cfg.obs_times.last().unwrap();
    let bound = sharp_speed_bound(m, cfg.h)?;
    let localization = (!g.is_bounded()).then(|| {
        let a = supersolution_speed(m);
        (2.0 + 1.0 / a).max(1.0 + bound.speed()) * cfg.window
    });
    let (lo, hi) = match localization {
        Some(r) => ([-r, -r], [r, r]),
        None => g.bounding_box().expect("bounded region"),
    };
    let rows = cfg
        .eps
        .par_iter()
        .zip(&shifts)
        .map(|(&eps, &y)| {
            let rho = eps.powf(cfg.rho_exponent);
            let eroded = erode(g, rho, dim)?;
            let reach = bound.reach(0.0, t_max / eps);
            let ulo = [(lo[0] + y[0]) / eps - reach, (lo[1] + y[1]) / eps - reach];
            let uhi = [(hi[0] + y[0]) / eps + reach, (hi[1] + y[1]) / eps + reach];
            let grid = Grid::covering(dim, cfg.h, ulo, uhi)?;
            let u0 = Field::indicator(grid, cfg.theta, |x| {
                let z = [eps * x[0] - y[0], eps * x[1] - y[1]];
                eroded.contains(z) && localization.map_or(true, |r| norm(z) < r)
            })?;
            let observe: Vec<f64> = cfg.obs_times.iter().map(|t| t / eps).collect();
            let sol = solve(&u0, m, t_max / eps, &observe, &cfg.stepper)?;
            let mut out = Vec::with_capacity(observe.len());
            for (field, &t) in sol.observations.iter().zip(&cfg.obs_times) {
                let scaled = field.rescaled(eps, y);
                let zone = mixed_zone_within(&scaled, g, shape, t, cfg.delta_band, cfg.thresholds, |x| {
                    localization.is_none() || norm(x) <= cfg.window
                })?;
                let front_position = match g {
                    RegionSpec::HalfSpace { normal } => {
                        let n = [normal[0] / norm(*normal), normal[1] / norm(*normal)];
                        front_along(&scaled, n, cfg.window)
                    }
                    _ => None,
                };
                out.push(SweepRow {
                    eps,
                    t,
                    outside_cells: zone.outside_cells,
                    inside_cells: zone.inside_cells,
                    measure: zone.measure,
                    front_position,
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepRecord {
        rho: cfg.eps.iter().map(|e| e.powf(cfg.rho_exponent)).collect(),
        eps: cfg.eps.clone(),
        shifts,
        theta: cfg.theta,
        region: g.clone(),
        shape: shape.clone(),
        obs_times: cfg.obs_times.clone(),
        localization,
        rows: rows.into_iter().flatten().collect(),
    })
}

/// `t·h_𝒮(n)`: the limit interface position of the half-space `{x·n < 0}`.
pub fn limit_front_position(shape: &ConvexShape, normal: Point, t: f64) -> f64 {
    let n = [normal[0] / norm(normal), normal[1] / norm(normal)];
    debug_assert!((dot(n, n) - 1.0).abs() < 1e-12);
    t * shape.support_function(n)
}
