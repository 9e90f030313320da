//! Even, radially profiled jump kernels `K(t,x,ν) = c(t,x)·K₀(|ν|)` and the
//! envelope check `α𝒦(|ν|) ≤ K ≤ α⁻¹ max{𝒦(|ν|), e^{-α|ν|}}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::field::CoefficientField;
use super::report::ValidationReport;
use crate::{norm, Point};

/// Reference envelope `𝒦`, between `χ_(0,α]` and `χ_(0,α]·r^{-d-2+α}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Envelope {
    Indicator,
    Power,
}

impl Envelope {
    pub fn eval(self, r: f64, dim: usize, alpha: f64) -> f64 {
        if !(r > 0.0 && r <= alpha) {
            return 0.0;
        }
        match self {
            Envelope::Indicator => 1.0,
            Envelope::Power => r.powf(-(dim as f64) - 2.0 + alpha),
        }
    }
}

/// `K₀(r) = max{ r^core_exponent·χ_(0,core_cutoff](r), e^{-tail_rate·r} }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialProfile {
    pub core_exponent: f64,
    pub core_cutoff: f64,
    #[serde(default)]
    pub tail_rate: Option<f64>,
}

impl RadialProfile {
    /// Singular core `r^{-d-2+α}` on (0, α] with tail `e^{-αr}`.
    pub fn standard(dim: usize, alpha: f64) -> Self {
        RadialProfile {
            core_exponent: -(dim as f64) - 2.0 + alpha,
            core_cutoff: alpha,
            tail_rate: Some(alpha),
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let core = if r > 0.0 && r <= self.core_cutoff {
            r.powf(self.core_exponent)
        } else {
            0.0
        };
        match self.tail_rate {
            Some(rate) if r > 0.0 => core.max((-rate * r).exp()),
            _ => core,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub alpha: f64,
    pub envelope: Envelope,
    pub radial: RadialProfile,
    /// Spatio-temporal intensity `c(t,x)`, valued in [α, α⁻¹] for the standard profile.
    pub intensity: CoefficientField,
}

impl KernelSpec {
    pub fn standard(dim: usize, alpha: f64, intensity: CoefficientField) -> Self {
        KernelSpec {
            alpha,
            envelope: Envelope::Power,
            radial: RadialProfile::standard(dim, alpha),
            intensity,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64, x: Point, nu: Point) -> f64 {
        self.intensity.eval(t, x) * self.radial.eval(norm(nu))
    }
}

/// Sample points `(t, x, ν)` with radii near 0, around α and in the tail.
pub fn kernel_sample_points(dim: usize, alpha: f64, seed: u64) -> Vec<(f64, Point, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut radii = Vec::new();
    let mut r = 1e-4;
    while r < alpha {
        radii.push(r);
        r *= 1.5;
    }
    radii.extend([alpha * 0.999, alpha, alpha * 1.001]);
    let mut r = alpha * 1.2;
    while r < 40.0 {
        radii.push(r);
        r *= 1.3;
    }
    radii
        .into_iter()
        .map(|r| {
            let dir = if dim == 1 {
                [if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0]
            } else {
                let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                [a.cos(), a.sin()]
            };
            let x = [rng.gen_range(-20.0..20.0), if dim == 1 { 0.0 } else { rng.gen_range(-20.0..20.0) }];
            (rng.gen_range(0.0..2.0), x, [r * dir[0], r * dir[1]])
        })
        .collect()
}

/// Checks the envelope inequalities and evenness of `k` at `samples`.
pub fn validate_kernel(k: &KernelSpec, dim: usize, samples: &[(f64, Point, Point)]) -> ValidationReport {
    let alpha = k.alpha;
    let mut report = ValidationReport::new("kernel");
    report.push("alpha_range", alpha > 0.0 && alpha <= 1.0, alpha, String::new());

    let rel = 1e-12;
    let mut env_worst: f64 = 0.0;
    let mut env_at = String::new();
    let mut lower_worst: f64 = 0.0;
    let mut lower_at = String::new();
    let mut upper_worst: f64 = 0.0;
    let mut upper_at = String::new();
    let mut even_ok = true;
    let mut even_at = String::new();
    for &(t, x, nu) in samples {
        let r = norm(nu);
        let env = k.envelope.eval(r, dim, alpha);
        let ind = if r > 0.0 && r <= alpha { 1.0 } else { 0.0 };
        let env_hi = ind * r.powf(-(dim as f64) - 2.0 + alpha);
        let env_excess = (ind - env).max(env - env_hi * (1.0 + rel));
        if env_excess > env_worst {
            env_worst = env_excess;
            env_at = format!("|nu| = {r}");
        }
        let kv = k.eval(t, x, nu);
        let lower = alpha * env - kv;
        if lower > rel * kv.abs().max(1.0) && lower > lower_worst {
            lower_worst = lower;
            lower_at = format!("|nu| = {r}, K = {kv}");
        }
        let bound = env.max((-alpha * r).exp()) / alpha;
        let upper = kv - bound;
        if upper > rel * bound.max(1.0) && upper > upper_worst {
            upper_worst = upper;
            upper_at = format!("|nu| = {r}, K = {kv}");
        }
        if kv != k.eval(t, x, [-nu[0], -nu[1]]) {
            even_ok = false;
            even_at = format!("nu = {nu:?}");
        }
    }
    report.push("envelope", env_worst <= 0.0, env_worst, env_at);
    report.push("lower_bound", lower_worst <= 0.0, lower_worst, lower_at);
    report.push("upper_bound", upper_worst <= 0.0, upper_worst, upper_at);
    report.push("even", even_ok, 0.0, even_at);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> CoefficientField {
        CoefficientField::constant(1.0)
    }

    #[test]
    fn saturating_power_kernel_passes() {
        for dim in [1, 2] {
            let k = KernelSpec {
                alpha: 1.0,
                envelope: Envelope::Power,
                radial: RadialProfile {
                    core_exponent: -(dim as f64) - 1.0,
                    core_cutoff: 1.0,
                    tail_rate: None,
                },
                intensity: unit(),
            };
            let r = validate_kernel(&k, dim, &kernel_sample_points(dim, 1.0, 1));
            assert!(r.all_passed(), "{r:?}");
        }
    }

    #[test]
    fn indicator_core_with_exponential_tail_passes_through_max_branch() {
        let k = KernelSpec {
            alpha: 1.0,
            envelope: Envelope::Indicator,
            radial: RadialProfile {
                core_exponent: 0.0,
                core_cutoff: 1.0,
                tail_rate: Some(1.0),
            },
            intensity: unit(),
        };
        let r = validate_kernel(&k, 2, &kernel_sample_points(2, 1.0, 2));
        assert!(r.all_passed(), "{r:?}");
    }

    #[test]
    fn pure_exponential_kernel_violates_lower_bound() {
        let k = KernelSpec {
            alpha: 1.0,
            envelope: Envelope::Indicator,
            radial: RadialProfile {
                core_exponent: 0.0,
                core_cutoff: 0.0,
                tail_rate: Some(1.0),
            },
            intensity: unit(),
        };
        let r = validate_kernel(&k, 1, &kernel_sample_points(1, 1.0, 3));
        assert!(r.get("upper_bound").unwrap().passed);
        assert!(!r.get("lower_bound").unwrap().passed);
    }

    #[test]
    fn too_singular_kernel_fails_upper_bound() {
        for dim in [1, 2] {
            let k = KernelSpec {
                alpha: 1.0,
                envelope: Envelope::Power,
                radial: RadialProfile {
                    core_exponent: -(dim as f64) - 3.0,
                    core_cutoff: 1.0,
                    tail_rate: None,
                },
                intensity: unit(),
            };
            let r = validate_kernel(&k, dim, &kernel_sample_points(dim, 1.0, 4));
            assert!(!r.get("upper_bound").unwrap().passed);
        }
    }

    #[test]
    fn standard_kernel_with_intensity_range() {
        let alpha = 0.5;
        let ok = KernelSpec::standard(2, alpha, CoefficientField::constant(1.0 / alpha));
        assert!(validate_kernel(&ok, 2, &kernel_sample_points(2, alpha, 5)).all_passed());
        let too_big = KernelSpec::standard(2, alpha, CoefficientField::constant(2.5));
        assert!(!validate_kernel(&too_big, 2, &kernel_sample_points(2, alpha, 5)).all_passed());
        let too_small = KernelSpec::standard(2, alpha, CoefficientField::constant(0.4));
        assert!(!validate_kernel(&too_small, 2, &kernel_sample_points(2, alpha, 5)).all_passed());
    }
}
