//! Cube decomposition and the virtual-linearity sandwich.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::medium::{validate_drift_bound, MediumRealization};
use crate::solver::{solve, Field, StepperConfig};
use crate::{Error, Result};

/// Largest number of cube pieces a sandwich run accepts.
pub const CUBE_CAP: usize = 4096;

/// Restrictions of `u0` to the open unit cubes `∏(n_i, n_i + 1)`. Each cell
/// belongs to the cube containing its center; cubes where `u0` vanishes are
/// dropped.
pub fn cube_decomposition(u0: &Field) -> Vec<([i64; 2], Field)> {
    let mut cells: BTreeMap<[i64; 2], Vec<usize>> = BTreeMap::new();
    for (k, &v) in u0.values.iter().enumerate() {
        if v > 0.0 {
            let x = u0.grid.center_of(k);
            let n = [x[0].floor() as i64, if u0.grid.dim == 2 { x[1].floor() as i64 } else { 0 }];
            cells.entry(n).or_default().push(k);
        }
    }
    cells
        .into_iter()
        .map(|(n, ks)| {
            let mut piece = Field::zeros(u0.grid.clone()).with_time(u0.time);
            for k in ks {
                piece.values[k] = u0.values[k];
            }
            (n, piece)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub times: Vec<f64>,
    pub delta: f64,
    pub pieces: usize,
    /// `min_x [u(t,x) - sup_n u'_n(t - δt, x)]` per time.
    pub left_margins: Vec<f64>,
    /// `min_x [sup_n u'_n(t + δt, x) - u(t,x)]` per time.
    pub right_margins: Vec<f64>,
    pub left_margin: f64,
    pub right_margin: f64,
    /// `max(0, -min margin)` over all times.
    pub phi_hat: f64,
}

impl SandwichReport {
    /// `max(0, -min(left, right))` at each time.
    pub fn phi_by_time(&self) -> Vec<f64> {
        self.left_margins
            .iter()
            .zip(&self.right_margins)
            .map(|(l, r)| (-l.min(*r)).max(0.0))
            .collect()
    }

    /// Whether `φ̂` is nonincreasing along the times up to `noise`.
    pub fn phi_nonincreasing(&self, noise: f64) -> bool {
        self.phi_by_time().windows(2).all(|w| w[1] <= w[0] + noise)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,left_margin,right_margin,phi_hat\n");
        for (k, phi) in self.phi_by_time().into_iter().enumerate() {
            s.push_str(&format!(
                "{:?},{:?},{:?},{:?}\n",
                self.times[k], self.left_margins[k], self.right_margins[k], phi
            ));
        }
        s
    }
}

fn pointwise_max(mut a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for (x, y) in a.iter_mut().zip(b) {
        for (p, q) in x.iter_mut().zip(y) {
            *p = p.max(q);
        }
    }
    a
}

/// Compares `u` (reaction `f`) against `sup_n u'_n` (surrogate `f'`, one
/// solve per cube piece of `u0`) at the shifted times `t(1 ∓ δ)`.
pub fn virtual_linearity_check(
    u0: &Field,
    m: &MediumRealization,
    times: &[f64],
    delta: f64,
    cfg: &StepperConfig,
) -> Result<SandwichReport> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::param("delta", format!("{delta} not in (0, 1/2]")));
    }
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) || times[0] <= u0.time {
        return Err(Error::param("times", "need increasing times after the initial time"));
    }
    if !validate_drift_bound(m) {
        return Err(Error::Hypothesis("sup|b|² < 4λ inf fu0 fails".into()));
    }
    let pieces = cube_decomposition(u0);
    if pieces.len() > CUBE_CAP {
        return Err(Error::CubeCap {
            count: pieces.len(),
            cap: CUBE_CAP,
        });
    }
    let t0 = u0.time;
    // piece observation times: t - δ(t - t0) then t + δ(t - t0), per requested time
    let mut shifted: Vec<(f64, usize)> = Vec::with_capacity(2 * times.len());
    for (k, &t) in times.iter().enumerate() {
        shifted.push((t - delta * (t - t0), 2 * k));
        shifted.push((t + delta * (t - t0), 2 * k + 1));
    }
    shifted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let obs: Vec<f64> = shifted.iter().map(|p| p.0).collect();
    let t_end = *obs.last().unwrap();
    let n = u0.grid.len();
    let surrogate = m.with_surrogate();

    let full = solve(u0, m, *times.last().unwrap(), times, cfg)?;
    let sup = pieces
        .par_iter()
        .map(|(_, piece)| {
            let sol = solve(piece, &surrogate, t_end, &obs, cfg)?;
            let mut out = vec![Vec::new(); obs.len()];
            for (field, &(_, slot)) in sol.observations.into_iter().zip(&shifted) {
                out[slot] = field.values;
            }
            Ok::<_, Error>(out)
        })
        .try_reduce(|| vec![vec![0.0; n]; 2 * times.len()], |a, b| Ok(pointwise_max(a, b)))?;

    let mut left_margins = Vec::with_capacity(times.len());
    let mut right_margins = Vec::with_capacity(times.len());
    for (k, u) in full.observations.iter().enumerate() {
        let (before, after) = (&sup[2 * k], &sup[2 * k + 1]);
        let left = u.values.iter().zip(before).map(|(u, s)| u - s).fold(f64::INFINITY, f64::min);
        let right = u.values.iter().zip(after).map(|(u, s)| s - u).fold(f64::INFINITY, f64::min);
        left_margins.push(left);
        right_margins.push(right);
    }
    let left_margin = left_margins.iter().cloned().fold(f64::INFINITY, f64::min);
    let right_margin = right_margins.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SandwichReport {
        times: times.to_vec(),
        delta,
        pieces: pieces.len(),
        left_margins,
        right_margins,
        left_margin,
        right_margin,
        phi_hat: (-left_margin.min(right_margin)).max(0.0),
    })
}
