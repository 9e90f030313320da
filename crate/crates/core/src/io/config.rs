//! Run configuration: TOML in, validated [`RunConfig`] out.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::experiments::SweepConfig;
use crate::geometry::RegionSpec;
use crate::medium::{sample_medium, validate_medium, GeneratorSpec};
use crate::solver::StepperConfig;
use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Simulate,
    Wulff,
    Speed,
    Vlin,
    Homogenize,
    Validate,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Wulff => "wulff",
            Kind::Speed => "speed",
            Kind::Vlin => "vlin",
            Kind::Homogenize => "homogenize",
            Kind::Validate => "validate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub h: f64,
    pub t_final: f64,
    pub level: f64,
    pub initial: RegionSpec,
    /// Times at which snapshots are written.
    pub snapshots: Vec<f64>,
}

impl Default for SimulateParams {
    fn default() -> Self {
        SimulateParams {
            h: 0.25,
            t_final: 10.0,
            level: 0.5,
            initial: RegionSpec::Ball {
                center: [0.0; 2],
                radius: 1.0,
            },
            snapshots: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeedParams {
    /// Number of uniformly spaced directions (ignored in one dimension).
    pub directions: usize,
    pub ladder: Vec<u32>,
    pub h: f64,
    pub horizon: u32,
    pub window: u32,
    /// Also run the half-space front tracker, with this final time.
    pub front_t_final: Option<f64>,
}

impl Default for SpeedParams {
    fn default() -> Self {
        SpeedParams {
            directions: 8,
            ladder: vec![8, 16, 32],
            h: 0.25,
            horizon: 40,
            window: 3,
            front_t_final: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WulffParams {
    pub directions: usize,
    pub ladder: Vec<u32>,
    pub h: f64,
    pub horizon: u32,
    pub window: u32,
    /// Realizations `seed, seed + 1, …`.
    pub seeds: u64,
    /// Largest accepted convexity defect relative to the shape radius.
    pub max_defect: f64,
}

impl Default for WulffParams {
    fn default() -> Self {
        WulffParams {
            directions: 16,
            ladder: vec![8, 16, 32],
            h: 0.25,
            horizon: 40,
            window: 3,
            seeds: 1,
            max_defect: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VlinParams {
    pub h: f64,
    pub theta: f64,
    pub region: RegionSpec,
    pub times: Vec<f64>,
    pub delta: f64,
    /// Slack for the nonincreasing-φ̂ check.
    pub noise: f64,
}

impl Default for VlinParams {
    fn default() -> Self {
        VlinParams {
            h: 0.25,
            theta: 0.5,
            region: RegionSpec::Box {
                lo: [0.0; 2],
                hi: [1.0, 1.0],
            },
            times: vec![5.0, 10.0, 20.0],
            delta: 0.2,
            noise: 1e-2,
        }
    }
}

/// Reference shape for a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShapeSource {
    Ball { radius: f64, directions: usize },
    /// Radii `speeds[i]` in the directions `directions[i]`.
    Speeds { directions: Vec<Point>, speeds: Vec<f64> },
    /// Measured with the `[wulff]` parameters.
    Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomogenizeParams {
    pub region: RegionSpec,
    pub shape: ShapeSource,
    pub sweep: SweepConfig,
    /// Allowed relative increase of the mixed zone from one ε to the next.
    pub noise: f64,
}

impl Default for HomogenizeParams {
    fn default() -> Self {
        HomogenizeParams {
            region: RegionSpec::Ball {
                center: [0.0; 2],
                radius: 1.0,
            },
            shape: ShapeSource::Estimate,
            sweep: SweepConfig::default(),
            noise: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateParams {
    pub samples: usize,
}

impl Default for ValidateParams {
    fn default() -> Self {
        ValidateParams { samples: 256 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub medium: GeneratorSpec,
    #[serde(default)]
    pub stepper: StepperConfig,
    #[serde(default)]
    pub simulate: SimulateParams,
    #[serde(default)]
    pub speed: SpeedParams,
    #[serde(default)]
    pub wulff: WulffParams,
    #[serde(default)]
    pub vlin: VlinParams,
    #[serde(default)]
    pub homogenize: HomogenizeParams,
    #[serde(default)]
    pub validate: ValidateParams,
}

/// Parses and validates a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::new(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.message().trim().to_string();
        Error::Config(vec![if path == "." { msg } else { format!("{path}: {msg}") }])
    })?;
    cfg.check()?;
    Ok(cfg)
}

fn positive(errs: &mut Vec<String>, path: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        errs.push(format!("{path}: {v} must be positive"));
    }
}

fn ladder(errs: &mut Vec<String>, path: &str, l: &[u32]) {
    if l.len() < 2 || l[0] == 0 || l.windows(2).any(|w| w[1] <= w[0]) {
        errs.push(format!("{path}: need at least two increasing positive rungs"));
    }
}

fn increasing(errs: &mut Vec<String>, path: &str, v: &[f64], strict: bool) {
    if v.windows(2).any(|w| if strict { w[1] <= w[0] } else { w[1] < w[0] }) {
        errs.push(format!("{path}: times must be increasing"));
    }
}

impl RunConfig {
    /// Constraint checks, and the hypothesis gate for every kind that solves:
    /// the medium drawn with `seed` must satisfy the KPP conditions and
    /// `sup|b|² < 4λ inf fu0`.
    pub fn check(&self) -> Result<()> {
        let mut errs = Vec::new();
        let dim = self.medium.dim;
        match self.kind {
            Kind::Simulate => {
                let p = &self.simulate;
                positive(&mut errs, "simulate.h", p.h);
                positive(&mut errs, "simulate.t_final", p.t_final);
                if !(p.level > 0.0 && p.level <= 1.0) {
                    errs.push(format!("simulate.level: {} not in (0, 1]", p.level));
                }
                if !p.initial.is_bounded() {
                    errs.push("simulate.initial: region must be bounded".into());
                }
                increasing(&mut errs, "simulate.snapshots", &p.snapshots, false);
                if p.snapshots.iter().any(|&t| t < 0.0 || t > p.t_final) {
                    errs.push("simulate.snapshots: times must lie in [0, t_final]".into());
                }
            }
            Kind::Speed => {
                let p = &self.speed;
                positive(&mut errs, "speed.h", p.h);
                ladder(&mut errs, "speed.ladder", &p.ladder);
                if dim == 2 && p.directions < 3 {
                    errs.push("speed.directions: need at least 3 in two dimensions".into());
                }
                if let Some(t) = p.front_t_final {
                    if t < 4.0 {
                        errs.push(format!("speed.front_t_final: {t} is too short for a slope fit"));
                    }
                }
            }
            Kind::Wulff => {
                let p = &self.wulff;
                positive(&mut errs, "wulff.h", p.h);
                ladder(&mut errs, "wulff.ladder", &p.ladder);
                if dim == 2 && p.directions < 4 {
                    errs.push("wulff.directions: need at least 4 in two dimensions".into());
                }
                if p.seeds == 0 {
                    errs.push("wulff.seeds: need at least one realization".into());
                }
            }
            Kind::Vlin => {
                let p = &self.vlin;
                positive(&mut errs, "vlin.h", p.h);
                if !(p.delta > 0.0 && p.delta <= 0.5) {
                    errs.push(format!("vlin.delta: {} not in (0, 1/2]", p.delta));
                }
                if !(p.theta > 0.0 && p.theta <= 1.0) {
                    errs.push(format!("vlin.theta: {} not in (0, 1]", p.theta));
                }
                if !p.region.is_bounded() {
                    errs.push("vlin.region: region must be bounded".into());
                }
                if p.times.is_empty() || p.times[0] <= 0.0 {
                    errs.push("vlin.times: need positive times".into());
                }
                increasing(&mut errs, "vlin.times", &p.times, true);
            }
            Kind::Homogenize => {
                let p = &self.homogenize;
                let s = &p.sweep;
                positive(&mut errs, "homogenize.sweep.h", s.h);
                if s.eps.is_empty() || s.eps.windows(2).any(|w| w[1] >= w[0]) || s.eps.iter().any(|&e| !(e > 0.0)) {
                    errs.push("homogenize.sweep.eps: need a strictly decreasing list of positive values".into());
                }
                if !(s.theta > 0.0 && s.theta <= 1.0) {
                    errs.push(format!("homogenize.sweep.theta: {} not in (0, 1]", s.theta));
                }
                increasing(&mut errs, "homogenize.sweep.obs_times", &s.obs_times, false);
                if let ShapeSource::Estimate = p.shape {
                    ladder(&mut errs, "wulff.ladder", &self.wulff.ladder);
                }
                if let Err(e) = p.region.check(dim) {
                    errs.push(format!("homogenize.region: {e}"));
                }
            }
            Kind::Validate => {
                if self.validate.samples == 0 {
                    errs.push("validate.samples: need at least one sample".into());
                }
            }
        }
        match sample_medium(&self.medium, self.seed) {
            Err(e) => errs.push(format!("medium: {e}")),
            Ok(m) if self.kind != Kind::Validate && errs.is_empty() => {
                let report = validate_medium(&m, 256, self.seed)?;
                for c in report.failures() {
                    let what = if c.name == "drift_bound" {
                        "hypothesis sup|b|^2 < 4 lambda inf fu0 violated"
                    } else {
                        "hypothesis check failed"
                    };
                    errs.push(format!("medium: {what} ({}: worst {}, {})", c.name, c.worst, c.witness));
                }
            }
            Ok(_) => {}
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical JSON form, ignoring `seed` and `out`.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.seed = 0;
        c.out = None;
        let json = serde_json::to_string(&c).expect("configuration serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
