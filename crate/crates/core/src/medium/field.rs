//! Scalar coefficient fields: constant, mollified random checkerboards and
//! random-phase cosine sums, optionally modulated periodically in time.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::hash::cell_uniform;
use crate::Point;

/// Distribution of the i.i.d. value carried by each unit cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CellLaw {
    Constant { value: f64 },
    Uniform { lo: f64, hi: f64 },
    /// `lo` with probability `1 - p`, `hi` with probability `p`.
    TwoPoint { lo: f64, hi: f64, p: f64 },
}

impl CellLaw {
    pub fn constant(value: f64) -> Self {
        CellLaw::Constant { value }
    }

    /// Maps a uniform variate in [0,1) to a sample of the law.
    pub fn sample(&self, unif: f64) -> f64 {
        match *self {
            CellLaw::Constant { value } => value,
            CellLaw::Uniform { lo, hi } => lo + (hi - lo) * unif,
            CellLaw::TwoPoint { lo, hi, p } => {
                if unif < p {
                    hi
                } else {
                    lo
                }
            }
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            CellLaw::Constant { value } => (value, value),
            CellLaw::Uniform { lo, hi } | CellLaw::TwoPoint { lo, hi, .. } => (lo.min(hi), lo.max(hi)),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            CellLaw::Constant { value } => value,
            CellLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
            CellLaw::TwoPoint { lo, hi, p } => (1.0 - p) * lo + p * hi,
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        match *self {
            CellLaw::Constant { value } => CellLaw::Constant { value: value * k },
            CellLaw::Uniform { lo, hi } => CellLaw::Uniform { lo: lo * k, hi: hi * k },
            CellLaw::TwoPoint { lo, hi, p } => CellLaw::TwoPoint { lo: lo * k, hi: hi * k, p },
        }
    }

    pub fn is_constant(&self) -> bool {
        let (lo, hi) = self.bounds();
        lo == hi
    }

    pub(crate) fn check(&self, name: &'static str) -> crate::Result<()> {
        let finite = match *self {
            CellLaw::Constant { value } => value.is_finite(),
            CellLaw::Uniform { lo, hi } => lo.is_finite() && hi.is_finite(),
            CellLaw::TwoPoint { lo, hi, p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(crate::Error::param(name, format!("probability {p} outside [0,1]")));
                }
                lo.is_finite() && hi.is_finite()
            }
        };
        if finite {
            Ok(())
        } else {
            Err(crate::Error::param(name, "non-finite law parameter"))
        }
    }
}

/// Smooth 1-periodic factor `m(t) = floor + (1 - floor)(1 + cos 2πt)/2 ∈ [floor, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    pub floor: f64,
}

impl Modulation {
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        let phase = t.rem_euclid(1.0);
        self.floor + (1.0 - self.floor) * 0.5 * (1.0 + (2.0 * PI * phase).cos())
    }
}

/// Smooth Heaviside: 0 for s ≤ -1, 1 for s ≥ 1, C∞ in between. Its derivative
/// is a compactly supported C∞ bump, so `step(x/r)` differences are exact
/// mollifications of interval indicators.
#[inline]
fn smooth_step(s: f64) -> f64 {
    if s <= -1.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let sigma = 0.5 * (s + 1.0);
    let a = (-1.0 / sigma).exp();
    let b = (-1.0 / (1.0 - sigma)).exp();
    a / (a + b)
}

/// Nonzero weights of the mollified unit cells along one axis at coordinate `z`.
#[inline]
fn axis_weights(z: f64, radius: f64) -> ([(i64, f64); 3], usize) {
    let k = z.floor() as i64;
    let mut out = [(0i64, 0.0f64); 3];
    if radius <= 0.0 {
        out[0] = (k, 1.0);
        return (out, 1);
    }
    let mut n = 0;
    for cell in (k - 1)..=(k + 1) {
        let c = cell as f64;
        let w = smooth_step((z - c) / radius) - smooth_step((z - c - 1.0) / radius);
        if w > 0.0 {
            out[n] = (cell, w);
            n += 1;
        }
    }
    (out, n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosineMode {
    pub wave: Point,
    pub amplitude: f64,
    pub phase: f64,
}

/// Time-independent part of a coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpatialField {
    Constant(f64),
    /// i.i.d. values per unit cell of the shifted lattice, mollified at `mollify`.
    Checkerboard {
        law: CellLaw,
        key: u64,
        offset: Point,
        mollify: f64,
        dim: usize,
    },
    /// `mean + Σ amplitude·cos(2π wave·x + phase)`.
    Fourier { mean: f64, modes: Vec<CosineMode> },
}

impl SpatialField {
    pub fn eval(&self, x: Point) -> f64 {
        match self {
            SpatialField::Constant(v) => *v,
            SpatialField::Checkerboard {
                law,
                key,
                offset,
                mollify,
                dim,
            } => {
                let (wx, nx) = axis_weights(x[0] + offset[0], *mollify);
                if *dim == 1 {
                    let mut acc = 0.0;
                    for &(i, w) in &wx[..nx] {
                        acc += w * law.sample(cell_uniform(*key, i, 0));
                    }
                    return acc;
                }
                let (wy, ny) = axis_weights(x[1] + offset[1], *mollify);
                let mut acc = 0.0;
                for &(j, vy) in &wy[..ny] {
                    for &(i, vx) in &wx[..nx] {
                        acc += vx * vy * law.sample(cell_uniform(*key, i, j));
                    }
                }
                acc
            }
            SpatialField::Fourier { mean, modes } => {
                let mut acc = *mean;
                for m in modes {
                    acc += m.amplitude * (2.0 * PI * (m.wave[0] * x[0] + m.wave[1] * x[1]) + m.phase).cos();
                }
                acc
            }
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        match self {
            SpatialField::Constant(v) => SpatialField::Constant(v * k),
            SpatialField::Checkerboard {
                law,
                key,
                offset,
                mollify,
                dim,
            } => SpatialField::Checkerboard {
                law: law.scaled(k),
                key: *key,
                offset: *offset,
                mollify: *mollify,
                dim: *dim,
            },
            SpatialField::Fourier { mean, modes } => SpatialField::Fourier {
                mean: mean * k,
                modes: modes
                    .iter()
                    .map(|m| CosineMode {
                        amplitude: m.amplitude * k,
                        ..m.clone()
                    })
                    .collect(),
            },
        }
    }

    /// Closed interval guaranteed to contain every value of the field.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            SpatialField::Constant(v) => (*v, *v),
            SpatialField::Checkerboard { law, .. } => law.bounds(),
            SpatialField::Fourier { mean, modes } => {
                let amp: f64 = modes.iter().map(|m| m.amplitude.abs()).sum();
                (mean - amp, mean + amp)
            }
        }
    }
}

/// A coefficient `c(t,x) = spatial(x)·m(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    pub spatial: SpatialField,
    pub modulation: Option<Modulation>,
}

impl CoefficientField {
    pub fn constant(v: f64) -> Self {
        CoefficientField {
            spatial: SpatialField::Constant(v),
            modulation: None,
        }
    }

    #[inline]
    pub fn time_factor(&self, t: f64) -> f64 {
        self.modulation.map_or(1.0, |m| m.at(t))
    }

    #[inline]
    pub fn eval(&self, t: f64, x: Point) -> f64 {
        self.spatial.eval(x) * self.time_factor(t)
    }

    pub fn scaled(&self, k: f64) -> Self {
        CoefficientField {
            spatial: self.spatial.scaled(k),
            modulation: self.modulation,
        }
    }

    /// Bounds over all (t, x).
    pub fn bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.spatial.bounds();
        match self.modulation {
            None => (lo, hi),
            Some(m) => {
                let f = m.floor;
                (lo.min(lo * f), hi.max(hi * f))
            }
        }
    }

    pub fn sup_abs(&self) -> f64 {
        let (lo, hi) = self.bounds();
        lo.abs().max(hi.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.bounds() == (0.0, 0.0)
    }
}
