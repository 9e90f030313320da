//! Separable KPP reactions `f(t,x,u) = fu0(t,x)·g(u)` and their validation.

use serde::{Deserialize, Serialize};

use super::field::CoefficientField;
use super::report::ValidationReport;
use crate::{Error, Point, Result};

/// Shape `g` of a separable reaction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `u(1-u)`
    Fisher,
    /// `min{u, 1-u}`, the surrogate reaction shape.
    MinSurrogate,
    /// `u²(1-u)`; degenerate at 0, not KPP.
    Degenerate,
    /// `Σ coeffs[k]·u^k`
    Polynomial { coeffs: Vec<f64> },
}

impl Profile {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Profile::Fisher => u * (1.0 - u),
            Profile::MinSurrogate => u.min(1.0 - u),
            Profile::Degenerate => u * u * (1.0 - u),
            Profile::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c),
        }
    }

    /// `g'(0)`.
    pub fn slope_at_zero(&self) -> f64 {
        match self {
            Profile::Fisher | Profile::MinSurrogate => 1.0,
            Profile::Degenerate => 0.0,
            Profile::Polynomial { coeffs } => coeffs.get(1).copied().unwrap_or(0.0),
        }
    }

    /// Lipschitz constant of `g` on [0, 1].
    pub fn lipschitz(&self) -> f64 {
        match self {
            Profile::Fisher | Profile::MinSurrogate | Profile::Degenerate => 1.0,
            Profile::Polynomial { coeffs } => {
                // max |g'| on a fine grid, padded by the second-derivative bound
                let deriv: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
                let second: f64 = deriv.iter().enumerate().skip(1).map(|(k, c)| (k as f64 * c).abs()).sum();
                let n = 2000;
                let mut m: f64 = 0.0;
                for i in 0..=n {
                    let u = i as f64 / n as f64;
                    let d = deriv.iter().rev().fold(0.0, |acc, c| acc * u + c);
                    m = m.max(d.abs());
                }
                m + second / (2.0 * n as f64)
            }
        }
    }
}

/// The reaction `f(t,x,u) = fu0(t,x)·g(u)`; `fu0` is the linearization at 0
/// when `g'(0) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReactionSpec {
    pub fu0: CoefficientField,
    pub profile: Profile,
}

impl ReactionSpec {
    pub fn new(fu0: CoefficientField, profile: Profile) -> Self {
        ReactionSpec { fu0, profile }
    }

    #[inline]
    pub fn eval(&self, t: f64, x: Point, u: f64) -> f64 {
        self.fu0.eval(t, x) * self.profile.eval(u)
    }

    /// Lipschitz constant of `f` in `u`.
    pub fn lipschitz_const(&self) -> f64 {
        self.fu0.sup_abs() * self.profile.lipschitz()
    }

    /// The same linearization with the surrogate shape `min{u, 1-u}`.
    pub fn surrogate(&self) -> KppSurrogate {
        KppSurrogate { fu0: self.fu0.clone() }
    }
}

/// `f'(t,x,u) = fu0(t,x)·min{u, 1-u}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KppSurrogate {
    pub fu0: CoefficientField,
}

impl KppSurrogate {
    #[inline]
    pub fn eval(&self, t: f64, x: Point, u: f64) -> f64 {
        self.fu0.eval(t, x) * u.min(1.0 - u)
    }

    pub fn into_reaction(self) -> ReactionSpec {
        ReactionSpec::new(self.fu0, Profile::MinSurrogate)
    }
}

/// Default `u` samples: a uniform grid of (0,1) plus a geometric sequence
/// decreasing to 1e-8.
pub fn default_u_samples() -> Vec<f64> {
    let mut v: Vec<f64> = (1..200).map(|i| i as f64 / 200.0).collect();
    let mut u = 0.004;
    while u > 1e-8 {
        v.push(u);
        u *= 0.5;
    }
    v
}

/// Checks the KPP conditions on the sampled `u` values and `(t,x)` points.
///
/// Failures are recorded in the report; only a malformed profile (a sample
/// outside [0,1] or a non-finite value of `g`) is an error.
pub fn validate_kpp(r: &ReactionSpec, u_samples: &[f64], tx_samples: &[(f64, Point)]) -> Result<ValidationReport> {
    for &u in u_samples {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::MalformedProfile(format!("u sample {u} outside [0,1]")));
        }
        if !r.profile.eval(u).is_finite() {
            return Err(Error::MalformedProfile(format!("g({u}) is not finite")));
        }
    }
    let g = &r.profile;
    let slope = g.slope_at_zero();
    let mut report = ValidationReport::new("kpp");

    let g0 = g.eval(0.0);
    let g1 = g.eval(1.0);
    report.push("endpoints", g0 == 0.0 && g1 == 0.0, g0.abs().max(g1.abs()), "g(0), g(1)".to_string());

    let interior: Vec<f64> = u_samples.iter().copied().filter(|&u| u > 0.0 && u < 1.0).collect();
    let (min_g, at) = interior
        .iter()
        .map(|&u| (g.eval(u), u))
        .fold((f64::INFINITY, f64::NAN), |a, b| if b.0 < a.0 { b } else { a });
    report.push("positive_interior", min_g > 0.0, min_g, format!("u = {at}"));

    let (inf_fu0, inf_at) = tx_samples
        .iter()
        .map(|&(t, x)| (r.fu0.eval(t, x), (t, x)))
        .fold((f64::INFINITY, (0.0, [0.0; 2])), |a, b| if b.0 < a.0 { b } else { a });
    report.push("fu0_positive", inf_fu0 > 0.0, inf_fu0, format!("(t,x) = {inf_at:?}"));

    let lin = inf_fu0 * slope;
    report.push("linearization_positive", lin > 0.0, lin, format!("g'(0) = {slope}"));
    report.push(
        "normalized_slope",
        (slope - 1.0).abs() <= 1e-12,
        slope - 1.0,
        "g'(0) must be 1 so that fu0 is the linearization".to_string(),
    );

    let (worst_excess, wu) = interior
        .iter()
        .map(|&u| (g.eval(u) - slope * u, u))
        .fold((f64::NEG_INFINITY, f64::NAN), |a, b| if b.0 > a.0 { b } else { a });
    report.push("below_linearization", worst_excess <= 1e-15, worst_excess, format!("u = {wu}"));

    // sup_u (g'(0) - g(u)/u) must tend to 0 along samples decreasing to 0
    let mut small: Vec<f64> = interior.iter().copied().filter(|&u| u < 0.1).collect();
    small.sort_by(|a, b| b.partial_cmp(a).unwrap());
    small.dedup();
    let defects: Vec<f64> = small.iter().map(|&u| slope - g.eval(u) / u).collect();
    let monotone = defects.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let last = defects.last().copied().unwrap_or(f64::INFINITY);
    let u_min = small.last().copied().unwrap_or(1.0);
    report.push(
        "linearization_limit",
        monotone && u_min <= 1e-4 && last.abs() <= 1e-2,
        last,
        format!("u = {u_min}"),
    );

    let lip = r.lipschitz_const();
    report.push("lipschitz", lip.is_finite(), lip, String::new());
    Ok(report)
}
