//! Explicit monotone update operators on padded buffers.

use rayon::prelude::*;

use super::grid::{Exterior, Grid};
use crate::medium::{
    kernel_sample_points, validate_kernel, CoefficientField, Diffusion, MediumRealization, Modulation, Profile,
};
use crate::{Error, Result};

/// Grids with at least this many cells are updated row-parallel.
const PAR_CELLS: usize = 1 << 14;

/// Interior values surrounded by `pad` layers of the exterior state.
#[derive(Clone, Debug)]
pub(crate) struct Padded {
    pub nx: usize,
    pub ny: usize,
    pub pad: [usize; 2],
    pub stride: usize,
    pub data: Vec<f64>,
}

impl Padded {
    pub fn new(grid: &Grid, pad: [usize; 2], exterior: Exterior) -> Self {
        let [nx, ny] = grid.extents;
        let stride = nx + 2 * pad[0];
        let rows = ny + 2 * pad[1];
        Padded {
            nx,
            ny,
            pad,
            stride,
            data: vec![exterior.value(); stride * rows],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> usize {
        (j + self.pad[1]) * self.stride + i + self.pad[0]
    }

    pub fn load(&mut self, values: &[f64]) {
        for j in 0..self.ny {
            let s = self.at(0, j);
            self.data[s..s + self.nx].copy_from_slice(&values[j * self.nx..(j + 1) * self.nx]);
        }
    }

    pub fn interior(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            let s = self.at(0, j);
            out.extend_from_slice(&self.data[s..s + self.nx]);
        }
        out
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.at(i, j)]
    }
}

/// Runs `row(j, src, dst_row)` for every interior row, writing `dst_row[i]`
/// for interior column `i`.
fn for_rows<F>(src: &Padded, dst: &mut Padded, row: F)
where
    F: Fn(usize, &[f64], &mut [f64]) + Sync,
{
    let (stride, px, py, nx, ny) = (src.stride, src.pad[0], src.pad[1], src.nx, src.ny);
    let src_data = &src.data;
    let rows = &mut dst.data[py * stride..(py + ny) * stride];
    if nx * ny >= PAR_CELLS {
        rows.par_chunks_mut(stride)
            .enumerate()
            .for_each(|(j, chunk)| row(j, src_data, &mut chunk[px..px + nx]));
    } else {
        rows.chunks_mut(stride)
            .enumerate()
            .for_each(|(j, chunk)| row(j, src_data, &mut chunk[px..px + nx]));
    }
}

/// Spatial values of a coefficient at the cell centers of `grid`.
fn sample(field: &CoefficientField, grid: &Grid, m: &MediumRealization) -> Vec<f64> {
    (0..grid.len())
        .map(|k| field.spatial.eval(m.frame(grid.center_of(k))))
        .collect()
}

#[inline]
fn factor(m: &Option<Modulation>, t: f64) -> f64 {
    m.map_or(1.0, |m| m.at(t))
}

/// Runs `body` with `g` statically dispatched on the profile.
macro_rules! with_profile {
    ($profile:expr, $g:ident => $body:expr) => {
        match $profile {
            Profile::Fisher => {
                let $g = |u: f64| u * (1.0 - u);
                $body
            }
            Profile::MinSurrogate => {
                let $g = |u: f64| u.min(1.0 - u);
                $body
            }
            Profile::Degenerate => {
                let $g = |u: f64| u * u * (1.0 - u);
                $body
            }
            Profile::Polynomial { coeffs } => {
                let $g = |u: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c);
                $body
            }
        }
    };
}

/// Bounds of the medium that enter step-size and speed estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorBounds {
    /// `max(sup A11, sup A22)`; zero for nonlocal media.
    pub a_max: f64,
    pub a12_sup: f64,
    pub b_sup: [f64; 2],
    pub fu0_sup: f64,
    /// Lipschitz constant of the reaction in `u`.
    pub lip: f64,
    /// `sup c · Σ_ν w_ν` over the full (two-sided) stencil.
    pub jump_rate: f64,
}

pub(crate) struct LocalOperator {
    dim: usize,
    h: f64,
    coef: [Vec<f64>; 6],
    mods: [Option<Modulation>; 6],
    profile: Profile,
    pub bounds: OperatorBounds,
}

pub(crate) struct NonlocalOperator {
    /// Half stencil: (stride offset, displacement length, weight).
    offsets: Vec<(isize, f64, f64)>,
    intensity: Vec<f64>,
    intensity_mod: Option<Modulation>,
    fu0: Vec<f64>,
    fu0_mod: Option<Modulation>,
    profile: Profile,
    pub halo: usize,
    pub bounds: OperatorBounds,
}

pub(crate) enum Operator {
    Local(LocalOperator),
    Nonlocal(NonlocalOperator),
}

/// Radius beyond which the kernel is dropped: `e^{-rate·R} ≤ tol`.
pub fn tail_radius(radial: &crate::medium::RadialProfile, tol: f64) -> f64 {
    match radial.tail_rate {
        Some(rate) if rate > 0.0 => radial.core_cutoff.max((1.0 / tol).ln() / rate),
        _ => radial.core_cutoff,
    }
}

impl Operator {
    pub fn new(grid: &Grid, m: &MediumRealization, tail_tol: f64) -> Result<Self> {
        if grid.dim != m.dim {
            return Err(Error::param(
                "grid",
                format!("grid dimension {} differs from medium dimension {}", grid.dim, m.dim),
            ));
        }
        let fu0_sup = m.reaction.fu0.sup_abs();
        let lip = m.reaction.lipschitz_const();
        match &m.diffusion {
            Diffusion::Local(c) => {
                let fields = [&c.a11, &c.a22, &c.a12, &c.b[0], &c.b[1], &m.reaction.fu0];
                let mut coef: [Vec<f64>; 6] = Default::default();
                for (idx, (slot, f)) in coef.iter_mut().zip(fields).enumerate() {
                    // second-axis coefficients are unused in one dimension
                    *slot = if m.dim == 1 && matches!(idx, 1 | 2 | 4) {
                        vec![0.0; grid.len()]
                    } else {
                        sample(f, grid, m)
                    };
                }
                let mods = fields.map(|f| f.modulation);
                check_mixed(&coef, &mods)?;
                let a11 = c.a11.bounds().1.max(0.0);
                let a22 = if m.dim == 2 { c.a22.bounds().1.max(0.0) } else { 0.0 };
                let bounds = OperatorBounds {
                    a_max: a11.max(a22),
                    a12_sup: if m.dim == 2 { c.a12.sup_abs() } else { 0.0 },
                    b_sup: [c.b[0].sup_abs(), if m.dim == 2 { c.b[1].sup_abs() } else { 0.0 }],
                    fu0_sup,
                    lip,
                    jump_rate: 0.0,
                };
                Ok(Operator::Local(LocalOperator {
                    dim: m.dim,
                    h: grid.h,
                    coef,
                    mods,
                    profile: m.reaction.profile.clone(),
                    bounds,
                }))
            }
            Diffusion::Nonlocal(k) => {
                let report = validate_kernel(k, m.dim, &kernel_sample_points(m.dim, k.alpha, m.seed));
                if !report.all_passed() {
                    let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
                    return Err(Error::InvalidKernel(names.join(", ")));
                }
                let radius = tail_radius(&k.radial, tail_tol);
                let halo = ((radius / grid.h).floor() as usize).max(1);
                let stride = grid.extents[0] as isize + 2 * halo as isize;
                let vol = grid.cell_volume();
                let mut offsets = Vec::new();
                let jmax = if m.dim == 2 { halo as isize } else { 0 };
                for j in 0..=jmax {
                    let imin = if j == 0 { 1 } else { -(halo as isize) };
                    for i in imin..=halo as isize {
                        let r = grid.h * ((i * i + j * j) as f64).sqrt();
                        if r <= radius {
                            let w = k.radial.eval(r) * vol;
                            if w > 0.0 {
                                offsets.push((j * stride + i, r, w));
                            }
                        }
                    }
                }
                let c_sup = k.intensity.sup_abs();
                let wsum: f64 = offsets.iter().map(|o| o.2).sum();
                let bounds = OperatorBounds {
                    a_max: 0.0,
                    a12_sup: 0.0,
                    b_sup: [0.0; 2],
                    fu0_sup,
                    lip,
                    jump_rate: 2.0 * c_sup * wsum,
                };
                Ok(Operator::Nonlocal(NonlocalOperator {
                    offsets,
                    intensity: sample(&k.intensity, grid, m),
                    intensity_mod: k.intensity.modulation,
                    fu0: sample(&m.reaction.fu0, grid, m),
                    fu0_mod: m.reaction.fu0.modulation,
                    profile: m.reaction.profile.clone(),
                    halo,
                    bounds,
                }))
            }
        }
    }

    pub fn bounds(&self) -> &OperatorBounds {
        match self {
            Operator::Local(o) => &o.bounds,
            Operator::Nonlocal(o) => &o.bounds,
        }
    }

    /// Padding layers required on each axis.
    pub fn pad(&self, dim: usize) -> [usize; 2] {
        let p = match self {
            Operator::Local(_) => 1,
            Operator::Nonlocal(o) => o.halo,
        };
        [p, if dim == 2 { p } else { 0 }]
    }

    /// Largest step keeping the update monotone.
    pub fn max_dt(&self, h: f64, dim: usize) -> f64 {
        let b = self.bounds();
        let rate = match self {
            Operator::Local(_) => {
                2.0 * dim as f64 * b.a_max / (h * h) + (b.b_sup[0] + b.b_sup[1]) / h + b.lip
            }
            Operator::Nonlocal(_) => b.jump_rate + b.lip,
        };
        if rate > 0.0 {
            1.0 / rate
        } else {
            f64::INFINITY
        }
    }

    /// One explicit step at phase `t` from `src` into `dst`.
    pub fn step(&self, t: f64, dt: f64, src: &Padded, dst: &mut Padded) {
        match self {
            Operator::Local(o) => o.step(t, dt, src, dst),
            Operator::Nonlocal(o) => o.step(t, dt, src, dst),
        }
    }

    /// Exponential growth rate of `e^{-κ x·e}` under the discrete operator,
    /// maximized over directions `e`.
    pub fn growth_rate(&self, kappa: f64, h: f64) -> f64 {
        let b = self.bounds();
        let reaction = b.fu0_sup * self.profile().lipschitz().max(1.0);
        match self {
            Operator::Local(_) => {
                // 2cosh(κh√q) - 2 is convex in q with value 0 at q = 0, so
                // the axis terms sum to at most a_max times the value at q = 1
                let c1 = 2.0 * (kappa * h).cosh() - 2.0;
                let c2 = 2.0 * (std::f64::consts::SQRT_2 * kappa * h).cosh() - 2.0;
                b.a_max * c1 / (h * h)
                    + b.a12_sup * c2 / (h * h)
                    + b.b_sup[0].hypot(b.b_sup[1]) * (kappa * h).exp_m1() / h
                    + reaction
            }
            Operator::Nonlocal(o) => {
                let c_sup = b.jump_rate / (2.0 * o.offsets.iter().map(|x| x.2).sum::<f64>().max(f64::MIN_POSITIVE));
                let s: f64 = o.offsets.iter().map(|&(_, r, w)| w * (2.0 * (kappa * r).cosh() - 2.0)).sum();
                c_sup * s + reaction
            }
        }
    }

    fn profile(&self) -> &Profile {
        match self {
            Operator::Local(o) => &o.profile,
            Operator::Nonlocal(o) => &o.profile,
        }
    }
}

fn check_mixed(coef: &[Vec<f64>; 6], mods: &[Option<Modulation>; 6]) -> Result<()> {
    let same = mods[0] == mods[1] && mods[1] == mods[2];
    let floor = |m: &Option<Modulation>| m.map_or(1.0, |m| m.floor);
    let diag_scale = if same { 1.0 } else { floor(&mods[0]).min(floor(&mods[1])) };
    for k in 0..coef[0].len() {
        let (a11, a22, a12) = (coef[0][k], coef[1][k], coef[2][k]);
        if a11 < 0.0 || a22 < 0.0 {
            return Err(Error::param("diffusion", format!("negative diagonal coefficient ({a11}, {a22})")));
        }
        let diag = if coef[1].iter().all(|&v| v == 0.0) && a12 == 0.0 {
            a11
        } else {
            a11.min(a22)
        };
        if a12 != 0.0 && a12.abs() > diag * diag_scale {
            return Err(Error::MixedStencil {
                cross: a12.abs(),
                diag: diag * diag_scale,
            });
        }
    }
    Ok(())
}

impl LocalOperator {
    fn step(&self, t: f64, dt: f64, src: &Padded, dst: &mut Padded) {
        let f: Vec<f64> = self.mods.iter().map(|m| factor(m, t)).collect();
        let ih2 = 1.0 / (self.h * self.h);
        let ih = 1.0 / self.h;
        let (stride, px, py, nx) = (src.stride, src.pad[0], src.pad[1], src.nx);
        let [a11, a22, a12, bx, by, fu0] = &self.coef;
        let dim = self.dim;
        with_profile!(&self.profile, g => for_rows(src, dst, |j, p, out| {
            let row0 = (j + py) * stride + px;
            for i in 0..nx {
                let k = j * nx + i;
                let c = row0 + i;
                let u = p[c];
                let e = p[c + 1];
                let w = p[c - 1];
                let ax = f[0] * a11[k] * ih2;
                let vx = f[3] * bx[k] * ih;
                let mut acc = if vx > 0.0 { vx * (e - u) } else { -vx * (w - u) };
                if dim == 1 {
                    acc += ax * (e + w - 2.0 * u);
                } else {
                    let n = p[c + stride];
                    let s = p[c - stride];
                    let ay = f[1] * a22[k] * ih2;
                    let axy = f[2] * a12[k] * ih2;
                    let vy = f[4] * by[k] * ih;
                    acc += if vy > 0.0 { vy * (n - u) } else { -vy * (s - u) };
                    if axy >= 0.0 {
                        acc += (ax - axy) * (e + w - 2.0 * u)
                            + (ay - axy) * (n + s - 2.0 * u)
                            + axy * (p[c + stride + 1] + p[c - stride - 1] - 2.0 * u);
                    } else {
                        acc += (ax + axy) * (e + w - 2.0 * u)
                            + (ay + axy) * (n + s - 2.0 * u)
                            - axy * (p[c + stride - 1] + p[c - stride + 1] - 2.0 * u);
                    }
                }
                out[i] = u + dt * (acc + f[5] * fu0[k] * g(u));
            }
        }))
    }
}

impl NonlocalOperator {
    fn step(&self, t: f64, dt: f64, src: &Padded, dst: &mut Padded) {
        let fc = factor(&self.intensity_mod, t);
        let fr = factor(&self.fu0_mod, t);
        let (stride, px, py, nx) = (src.stride, src.pad[0], src.pad[1], src.nx);
        with_profile!(&self.profile, g => for_rows(src, dst, |j, p, out| {
            let row0 = (j + py) * stride + px;
            for i in 0..nx {
                let k = j * nx + i;
                let c = row0 + i;
                let u = p[c];
                let mut acc = 0.0;
                for &(o, _, w) in &self.offsets {
                    acc += w * (p[(c as isize + o) as usize] + p[(c as isize - o) as usize] - 2.0 * u);
                }
                out[i] = u + dt * (fc * self.intensity[k] * acc + fr * self.fu0[k] * g(u));
            }
        }))
    }
}
