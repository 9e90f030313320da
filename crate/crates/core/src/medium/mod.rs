//! Random time-periodic stationary environments.
//!
//! A [`MediumRealization`] is one sample ω of the coefficients. Every
//! coefficient is a [`CoefficientField`] `spatial(x)·m(t)` with a 1-periodic
//! modulation `m`, so evaluation is exactly periodic in time up to the
//! rounding of `t mod 1`. Realizations are immutable; shifting returns a new
//! value whose evaluation at `x` reads the parent at `x + y`.

mod field;
mod kernel;
mod reaction;
mod report;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use field::{CellLaw, CoefficientField, CosineMode, Modulation, SpatialField};
pub use kernel::{kernel_sample_points, validate_kernel, Envelope, KernelSpec, RadialProfile};
pub use reaction::{default_u_samples, validate_kpp, KppSurrogate, Profile, ReactionSpec};
pub use report::{Check, ValidationReport};

use crate::{add, Error, Point, Result};

/// Coefficients of the local operator `Σ A_ij ∂_ij + Σ b_i ∂_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalCoefficients {
    pub a11: CoefficientField,
    pub a22: CoefficientField,
    pub a12: CoefficientField,
    pub b: [CoefficientField; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Diffusion {
    Local(LocalCoefficients),
    Nonlocal(KernelSpec),
}

/// Point values `(A, b, fu0)` of a medium.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coeffs {
    pub a: [[f64; 2]; 2],
    pub b: Point,
    pub fu0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumRealization {
    pub dim: usize,
    pub diffusion: Diffusion,
    pub reaction: ReactionSpec,
    /// λ with `A ≥ λI`; zero for nonlocal media.
    pub ellipticity: f64,
    pub seed: u64,
    pub shift: Point,
}

impl MediumRealization {
    pub const TEMPORAL_PERIOD: f64 = 1.0;

    /// Constant medium `A = a·I`, drift `b`, `fu0` and Fisher reaction.
    pub fn homogeneous(dim: usize, a: f64, b: Point, fu0: f64) -> Self {
        let zero = CoefficientField::constant(0.0);
        MediumRealization {
            dim,
            diffusion: Diffusion::Local(LocalCoefficients {
                a11: CoefficientField::constant(a),
                a22: CoefficientField::constant(if dim == 2 { a } else { 0.0 }),
                a12: zero.clone(),
                b: [
                    CoefficientField::constant(b[0]),
                    CoefficientField::constant(if dim == 2 { b[1] } else { 0.0 }),
                ],
            }),
            reaction: ReactionSpec::new(CoefficientField::constant(fu0), Profile::Fisher),
            ellipticity: a,
            seed: 0,
            shift: [0.0; 2],
        }
    }

    pub fn is_local(&self) -> bool {
        matches!(self.diffusion, Diffusion::Local(_))
    }

    pub fn kernel(&self) -> Option<&KernelSpec> {
        match &self.diffusion {
            Diffusion::Nonlocal(k) => Some(k),
            Diffusion::Local(_) => None,
        }
    }

    pub fn local(&self) -> Option<&LocalCoefficients> {
        match &self.diffusion {
            Diffusion::Local(c) => Some(c),
            Diffusion::Nonlocal(_) => None,
        }
    }

    /// Position at which the unshifted coefficient fields are read.
    #[inline]
    pub fn frame(&self, x: Point) -> Point {
        add(x, self.shift)
    }

    /// `(A, b, fu0)` at `(t, x)`. Nonlocal media report `A = 0`, `b = 0`.
    pub fn eval_coeffs(&self, t: f64, x: Point) -> Coeffs {
        let y = self.frame(x);
        let fu0 = self.reaction.fu0.eval(t, y);
        match &self.diffusion {
            Diffusion::Local(c) => {
                let a12 = c.a12.eval(t, y);
                Coeffs {
                    a: [[c.a11.eval(t, y), a12], [a12, c.a22.eval(t, y)]],
                    b: [c.b[0].eval(t, y), c.b[1].eval(t, y)],
                    fu0,
                }
            }
            Diffusion::Nonlocal(_) => Coeffs {
                a: [[0.0; 2]; 2],
                b: [0.0; 2],
                fu0,
            },
        }
    }

    /// `K(t, x, ν)` for nonlocal media.
    pub fn eval_kernel(&self, t: f64, x: Point, nu: Point) -> Option<f64> {
        self.kernel().map(|k| k.eval(t, self.frame(x), nu))
    }

    /// Υ_y: the medium seen from `x + y`.
    pub fn shift_medium(&self, y: Point) -> Self {
        MediumRealization {
            shift: add(self.shift, y),
            ..self.clone()
        }
    }

    /// Same linearization, surrogate reaction shape `min{u, 1-u}`.
    pub fn with_surrogate(&self) -> Self {
        MediumRealization {
            reaction: self.reaction.surrogate().into_reaction(),
            ..self.clone()
        }
    }

    /// Multiplies the reaction rate by `factor` (diagnostic self-tests only).
    pub fn with_reaction_gain(&self, factor: f64) -> Self {
        MediumRealization {
            reaction: ReactionSpec::new(self.reaction.fu0.scaled(factor), self.reaction.profile.clone()),
            ..self.clone()
        }
    }

    pub fn with_profile(&self, profile: Profile) -> Self {
        MediumRealization {
            reaction: ReactionSpec::new(self.reaction.fu0.clone(), profile),
            ..self.clone()
        }
    }

    pub fn fu0_bounds(&self) -> (f64, f64) {
        self.reaction.fu0.bounds()
    }

    /// `max{ sup|A_ij|, sup|b_i|, sup fu0 }`.
    pub fn gamma(&self) -> f64 {
        let fu0 = self.reaction.fu0.sup_abs();
        match &self.diffusion {
            Diffusion::Local(c) => [&c.a11, &c.a22, &c.a12, &c.b[0], &c.b[1]]
                .iter()
                .map(|f| f.sup_abs())
                .fold(fu0, f64::max),
            Diffusion::Nonlocal(k) => fu0.max(k.intensity.sup_abs()),
        }
    }

    /// Squared sup-norm bound of the drift.
    pub fn drift_sup_sq(&self) -> f64 {
        match &self.diffusion {
            Diffusion::Local(c) => c.b.iter().map(|f| f.sup_abs().powi(2)).sum(),
            Diffusion::Nonlocal(_) => 0.0,
        }
    }
}

/// `sup|b|² < 4 λ inf fu0` (strict). Always true for nonlocal media.
pub fn validate_drift_bound(m: &MediumRealization) -> bool {
    if !m.is_local() {
        return true;
    }
    let inf_fu0 = m.fu0_bounds().0;
    m.drift_sup_sq() < 4.0 * m.ellipticity * inf_fu0
}

/// Smallest eigenvalue of a symmetric 2×2 matrix.
pub fn min_eigenvalue(a: [[f64; 2]; 2]) -> f64 {
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let half = 0.5 * (a[0][0] - a[1][1]);
    mean - (half * half + a[0][1] * a[0][1]).sqrt()
}

/// Random `(t, x)` points with `t ∈ [0, 3)` and `x` in a box of half-width 50.
pub fn sample_points(dim: usize, n: usize, seed: u64) -> Vec<(f64, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_0F_F00D);
    (0..n)
        .map(|_| {
            let t = rng.gen_range(0.0..3.0);
            let x = rng.gen_range(-50.0..50.0);
            let y = if dim == 2 { rng.gen_range(-50.0..50.0) } else { 0.0 };
            (t, [x, y])
        })
        .collect()
}

/// Full hypothesis check of a medium at `n` random points.
pub fn validate_medium(m: &MediumRealization, n: usize, seed: u64) -> Result<ValidationReport> {
    let pts = sample_points(m.dim, n, seed);
    let mut report = ValidationReport::new("medium");
    report.merge(validate_kpp(&m.reaction, &default_u_samples(), &pts)?);

    let bsq = m.drift_sup_sq();
    let rhs = 4.0 * m.ellipticity * m.fu0_bounds().0;
    report.push(
        "drift_bound",
        validate_drift_bound(m),
        bsq - rhs,
        format!("sup|b|^2 = {bsq}, 4 lambda inf fu0 = {rhs}"),
    );

    let mut period_dev: f64 = 0.0;
    for &(t, x) in &pts {
        let c0 = m.eval_coeffs(t, x);
        let c1 = m.eval_coeffs(t + 1.0, x);
        let dev = (c0.fu0 - c1.fu0)
            .abs()
            .max((c0.b[0] - c1.b[0]).abs())
            .max((c0.b[1] - c1.b[1]).abs())
            .max((c0.a[0][0] - c1.a[0][0]).abs())
            .max((c0.a[1][1] - c1.a[1][1]).abs())
            .max((c0.a[0][1] - c1.a[0][1]).abs());
        period_dev = period_dev.max(dev);
    }
    report.push("time_periodic", period_dev <= 1e-12, period_dev, String::new());

    match &m.diffusion {
        Diffusion::Local(c) => {
            report.push("ellipticity_positive", m.ellipticity > 0.0, m.ellipticity, String::new());
            let mut worst = f64::INFINITY;
            let mut worst_at = String::new();
            let mut stencil: f64 = f64::NEG_INFINITY;
            for &(t, x) in &pts {
                let co = m.eval_coeffs(t, x);
                let ev = if m.dim == 1 { co.a[0][0] } else { min_eigenvalue(co.a) };
                if ev < worst {
                    worst = ev;
                    worst_at = format!("(t,x) = ({t}, {x:?})");
                }
                if m.dim == 2 {
                    stencil = stencil.max(co.a[0][1].abs() - co.a[0][0].min(co.a[1][1]));
                }
            }
            report.push("ellipticity", worst >= m.ellipticity * (1.0 - 1e-12), worst, worst_at);
            if m.dim == 2 {
                let bound = c.a12.sup_abs() - c.a11.bounds().0.min(c.a22.bounds().0);
                report.push("positive_stencil", stencil <= 0.0 && bound <= 0.0, stencil.max(bound), String::new());
            }
        }
        Diffusion::Nonlocal(k) => {
            report.merge(validate_kernel(k, m.dim, &kernel_sample_points(m.dim, k.alpha, seed)));
        }
    }
    Ok(report)
}

fn one() -> CellLaw {
    CellLaw::constant(1.0)
}
fn zero() -> CellLaw {
    CellLaw::constant(0.0)
}
fn default_dim() -> usize {
    2
}
fn default_mollify() -> f64 {
    0.1
}
fn default_modes() -> usize {
    6
}
fn default_wavenumber() -> f64 {
    0.5
}
fn fisher() -> Profile {
    Profile::Fisher
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelGenerator {
    pub alpha: f64,
    #[serde(default = "one")]
    pub intensity: CellLaw,
    #[serde(default = "default_envelope")]
    pub envelope: Envelope,
    /// Overrides the standard profile `r^{-d-2+α}χ_(0,α] ∨ e^{-αr}`.
    #[serde(default)]
    pub radial: Option<RadialProfile>,
}

fn default_envelope() -> Envelope {
    Envelope::Power
}

/// Description of a random environment law. Generators:
/// `homogeneous`, `checkerboard`, `fourier`, `homogeneous-kernel`,
/// `checkerboard-kernel`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub generator: String,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Law of the diagonal diffusion entries.
    #[serde(default = "one")]
    pub diffusion: CellLaw,
    /// Off-diagonal entries are uniform in [-cross_diffusion, cross_diffusion].
    #[serde(default)]
    pub cross_diffusion: f64,
    #[serde(default = "zero")]
    pub drift_x: CellLaw,
    #[serde(default = "zero")]
    pub drift_y: CellLaw,
    #[serde(default = "one")]
    pub fu0: CellLaw,
    #[serde(default = "fisher")]
    pub profile: Profile,
    /// Floor of the time modulation; `None` means time-independent.
    #[serde(default)]
    pub modulation_floor: Option<f64>,
    #[serde(default = "default_mollify")]
    pub mollify: f64,
    #[serde(default = "default_modes")]
    pub fourier_modes: usize,
    #[serde(default = "default_wavenumber")]
    pub max_wavenumber: f64,
    #[serde(default)]
    pub kernel: Option<KernelGenerator>,
}

impl GeneratorSpec {
    pub fn new(generator: &str, dim: usize) -> Self {
        GeneratorSpec {
            generator: generator.to_string(),
            dim,
            diffusion: one(),
            cross_diffusion: 0.0,
            drift_x: zero(),
            drift_y: zero(),
            fu0: one(),
            profile: Profile::Fisher,
            modulation_floor: None,
            mollify: default_mollify(),
            fourier_modes: default_modes(),
            max_wavenumber: default_wavenumber(),
            kernel: None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Layout {
    Homogeneous,
    Checkerboard,
    Fourier,
}

struct FieldFactory<'a> {
    layout: Layout,
    spec: &'a GeneratorSpec,
    offset: Point,
    modulation: Option<Modulation>,
}

impl FieldFactory<'_> {
    fn make(&self, law: &CellLaw, rng: &mut ChaCha8Rng) -> CoefficientField {
        // keys are drawn unconditionally so that field seeds do not depend on which laws are constant
        let key: u64 = rng.gen();
        let mut mode_rng = ChaCha8Rng::seed_from_u64(key);
        let spatial = if law.is_constant() {
            SpatialField::Constant(law.bounds().0)
        } else {
            match self.layout {
                Layout::Homogeneous => SpatialField::Constant(law.mean()),
                Layout::Checkerboard => SpatialField::Checkerboard {
                    law: law.clone(),
                    key,
                    offset: self.offset,
                    mollify: self.spec.mollify,
                    dim: self.spec.dim,
                },
                Layout::Fourier => {
                    let (lo, hi) = law.bounds();
                    let n = self.spec.fourier_modes.max(1);
                    let amp = 0.5 * (hi - lo) / n as f64;
                    let modes = (0..n)
                        .map(|_| {
                            let k = mode_rng.gen_range(0.1..=self.spec.max_wavenumber.max(0.1));
                            let wave = if self.spec.dim == 1 {
                                [if mode_rng.gen::<bool>() { k } else { -k }, 0.0]
                            } else {
                                let a: f64 = mode_rng.gen_range(0.0..std::f64::consts::TAU);
                                [k * a.cos(), k * a.sin()]
                            };
                            CosineMode {
                                wave,
                                amplitude: amp,
                                phase: mode_rng.gen_range(0.0..std::f64::consts::TAU),
                            }
                        })
                        .collect();
                    SpatialField::Fourier {
                        mean: 0.5 * (lo + hi),
                        modes,
                    }
                }
            }
        };
        CoefficientField {
            spatial,
            modulation: self.modulation,
        }
    }
}

/// Draws the realization with the given seed. Deterministic in `seed`.
pub fn sample_medium(spec: &GeneratorSpec, seed: u64) -> Result<MediumRealization> {
    let (layout, nonlocal) = match spec.generator.as_str() {
        "homogeneous" => (Layout::Homogeneous, false),
        "checkerboard" => (Layout::Checkerboard, false),
        "fourier" => (Layout::Fourier, false),
        "homogeneous-kernel" => (Layout::Homogeneous, true),
        "checkerboard-kernel" => (Layout::Checkerboard, true),
        other => return Err(Error::UnknownGenerator(other.to_string())),
    };
    if spec.dim != 1 && spec.dim != 2 {
        return Err(Error::param("dim", format!("{} not in {{1, 2}}", spec.dim)));
    }
    if !(0.0..=0.5).contains(&spec.mollify) {
        return Err(Error::param("mollify", "radius must lie in [0, 0.5]"));
    }
    if let Some(f) = spec.modulation_floor {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::param("modulation_floor", "must lie in (0, 1]"));
        }
    }
    for (name, law) in [
        ("diffusion", &spec.diffusion),
        ("drift_x", &spec.drift_x),
        ("drift_y", &spec.drift_y),
        ("fu0", &spec.fu0),
    ] {
        law.check(name)?;
    }
    if spec.fu0.bounds().0 <= 0.0 {
        return Err(Error::param("fu0", "law must be bounded below by a positive constant"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = [rng.gen::<f64>(), if spec.dim == 2 { rng.gen::<f64>() } else { 0.0 }];
    let modulation = spec.modulation_floor.map(|floor| Modulation { floor });
    let factory = FieldFactory {
        layout,
        spec,
        offset,
        modulation,
    };
    let floor = spec.modulation_floor.unwrap_or(1.0);

    let fu0 = factory.make(&spec.fu0, &mut rng);
    let reaction = ReactionSpec::new(fu0, spec.profile.clone());

    if nonlocal {
        let kg = spec
            .kernel
            .as_ref()
            .ok_or_else(|| Error::param("kernel", "kernel generator requires a [medium.kernel] table"))?;
        kg.intensity.check("kernel.intensity")?;
        let intensity = factory.make(&kg.intensity, &mut rng);
        let radial = kg.radial.clone().unwrap_or_else(|| RadialProfile::standard(spec.dim, kg.alpha));
        let kernel = KernelSpec {
            alpha: kg.alpha,
            envelope: kg.envelope,
            radial,
            intensity,
        };
        return Ok(MediumRealization {
            dim: spec.dim,
            diffusion: Diffusion::Nonlocal(kernel),
            reaction,
            ellipticity: 0.0,
            seed,
            shift: [0.0; 2],
        });
    }

    let (a_lo, _) = spec.diffusion.bounds();
    if a_lo <= 0.0 {
        return Err(Error::param("diffusion", "diagonal law must be bounded below by a positive constant"));
    }
    let cross = spec.cross_diffusion.abs();
    if cross > 0.0 && spec.dim == 1 {
        return Err(Error::param("cross_diffusion", "only meaningful in two dimensions"));
    }
    let a11 = factory.make(&spec.diffusion, &mut rng);
    let a22_field = factory.make(&spec.diffusion, &mut rng);
    let a12_field = factory.make(&CellLaw::Uniform { lo: -cross, hi: cross }, &mut rng);
    let bx = factory.make(&spec.drift_x, &mut rng);
    let by_field = factory.make(&spec.drift_y, &mut rng);
    let zero = CoefficientField::constant(0.0);
    let (a22, a12, by) = if spec.dim == 2 {
        (a22_field, a12_field, by_field)
    } else {
        (zero.clone(), zero.clone(), zero)
    };
    let ellipticity = if spec.dim == 2 { (a_lo - cross) * floor } else { a_lo * floor };
    if ellipticity <= 0.0 {
        return Err(Error::param("cross_diffusion", "off-diagonal amplitude destroys ellipticity"));
    }
    Ok(MediumRealization {
        dim: spec.dim,
        diffusion: Diffusion::Local(LocalCoefficients {
            a11,
            a22,
            a12,
            b: [bx, by],
        }),
        reaction,
        ellipticity,
        seed,
        shift: [0.0; 2],
    })
}
