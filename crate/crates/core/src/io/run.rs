//! Dispatch of a [`RunConfig`] to the experiments, and artifact emission.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::{Kind, RunConfig, ShapeSource};
use crate::experiments::{homogenization_sweep, virtual_linearity_check};
use crate::geometry::{uniform_directions, ConvexShape, RegionSpec};
use crate::medium::{sample_medium, validate_medium, MediumRealization};
use crate::solver::{sharp_speed_bound, solve, supersolution_speed, Field, Grid};
use crate::wulff::{estimate_wulff, front_speed_direct, spreading_speeds, FrontConfig, PassageConfig};
use crate::{Error, Point, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Finished,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub kind: Kind,
    pub config_hash: String,
    pub seed: u64,
    pub status: RunStatus,
    pub started_unix: f64,
    pub finished_unix: Option<f64>,
    /// Paths relative to the run directory.
    pub artifacts: Vec<String>,
    pub summary: BTreeMap<String, f64>,
    pub checks: BTreeMap<String, bool>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.status == RunStatus::Finished && self.checks.values().all(|&c| c)
    }
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Writes artifacts into a run directory, each stamped with the
/// schema version, config hash and seed.
struct Emitter {
    dir: PathBuf,
    hash: String,
    seed: u64,
    written: Vec<String>,
}

impl Emitter {
    fn header(&self) -> String {
        format!(
            "# schema_version={SCHEMA_VERSION}\n# config_hash={}\n# seed={}\n",
            self.hash, self.seed
        )
    }

    fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        fs::write(self.dir.join(name), format!("{}{body}", self.header()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, data: &T) -> Result<()> {
        let doc = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "config_hash": self.hash,
            "seed": self.seed,
            "data": data,
        });
        fs::write(self.dir.join(name), serde_json::to_string_pretty(&doc)? + "\n")?;
        self.written.push(name.to_string());
        Ok(())
    }
}

/// Directory name `<kind>-<hash8>-s<seed>`.
pub fn run_dir_name(cfg: &RunConfig) -> String {
    format!("{}-{}-s{}", cfg.kind.name(), &cfg.hash()[..8], cfg.seed)
}

fn write_record(dir: &Path, rec: &RunRecord) -> Result<()> {
    fs::write(dir.join("record.json"), serde_json::to_string_pretty(rec)? + "\n")?;
    Ok(())
}

/// Runs the configured experiment under `out_root`, reporting one line per
/// phase through `log`. The record is written before the run starts and
/// again when it ends.
pub fn run(cfg: &RunConfig, out_root: &Path, log: &mut dyn FnMut(&str)) -> Result<RunRecord> {
    cfg.check()?;
    let dir = out_root.join(run_dir_name(cfg));
    fs::create_dir_all(&dir)?;
    let hash = cfg.hash();
    let mut rec = RunRecord {
        schema_version: SCHEMA_VERSION,
        kind: cfg.kind,
        config_hash: hash.clone(),
        seed: cfg.seed,
        status: RunStatus::Running,
        started_unix: now(),
        finished_unix: None,
        artifacts: Vec::new(),
        summary: BTreeMap::new(),
        checks: BTreeMap::new(),
        error: None,
    };
    write_record(&dir, &rec)?;
    let mut out = Emitter {
        dir: dir.clone(),
        hash,
        seed: cfg.seed,
        written: Vec::new(),
    };
    let config_text = format!("{}{}", out.header(), cfg.to_toml());
    fs::write(dir.join("config.toml"), config_text)?;
    out.written.push("config.toml".into());
    log(&format!("{}: writing to {}", cfg.kind.name(), dir.display()));

    let result = dispatch(cfg, &mut out, &mut rec, log);
    rec.artifacts = out.written;
    rec.finished_unix = Some(now());
    match result {
        Ok(()) => {
            rec.status = RunStatus::Finished;
            write_record(&dir, &rec)?;
            let failed: Vec<&str> = rec.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
            log(&format!(
                "{}: {}",
                cfg.kind.name(),
                if failed.is_empty() { "all checks passed".to_string() } else { format!("failed checks: {}", failed.join(", ")) }
            ));
            Ok(rec)
        }
        Err(e) => {
            rec.status = RunStatus::Failed;
            rec.error = Some(e.to_string());
            write_record(&dir, &rec)?;
            Err(e)
        }
    }
}

fn directions(dim: usize, n: usize) -> Vec<Point> {
    if dim == 1 {
        vec![[1.0, 0.0], [-1.0, 0.0]]
    } else {
        uniform_directions(2, n)
    }
}

/// Grid around a bounded region, padded by the barrier reach at time `t`.
fn grid_for(m: &MediumRealization, region: &RegionSpec, t: f64, h: f64) -> Result<Grid> {
    let (lo, hi) = region.bounding_box().ok_or_else(|| Error::param("region", "must be bounded"))?;
    let reach = sharp_speed_bound(m, h)?.reach(0.0, t);
    Grid::covering(m.dim, h, [lo[0] - reach, lo[1] - reach], [hi[0] + reach, hi[1] + reach])
}

fn field_csv(u: &Field) -> String {
    let mut s = String::from("x0,x1,u\n");
    for (k, v) in u.values.iter().enumerate() {
        let x = u.grid.center_of(k);
        s.push_str(&format!("{:?},{:?},{v:?}\n", x[0], x[1]));
    }
    s
}

fn dispatch(cfg: &RunConfig, out: &mut Emitter, rec: &mut RunRecord, log: &mut dyn FnMut(&str)) -> Result<()> {
    let m = sample_medium(&cfg.medium, cfg.seed)?;
    let a = supersolution_speed(&m);
    match cfg.kind {
        Kind::Validate => {
            let report = validate_medium(&m, cfg.validate.samples, cfg.seed)?;
            out.json("validation.json", &report)?;
            for c in &report.checks {
                rec.checks.insert(c.name.clone(), c.passed);
            }
            rec.summary.insert("checks".into(), report.checks.len() as f64);
            rec.summary.insert("failures".into(), report.failures().count() as f64);
            log(&format!("validate: {} checks, {} failed", report.checks.len(), report.failures().count()));
        }
        Kind::Simulate => {
            let p = &cfg.simulate;
            let grid = grid_for(&m, &p.initial, p.t_final, p.h)?;
            let dim = m.dim;
            let u0 = Field::indicator(grid, p.level, |x| p.initial.contains(x, dim))?;
            let sol = solve(&u0, &m, p.t_final, &p.snapshots, &cfg.stepper)?;
            for (u, t) in sol.observations.iter().zip(&p.snapshots) {
                out.csv(&format!("snapshot-t{t:?}.csv"), &field_csv(u))?;
            }
            out.csv("final.csv", &field_csv(&sol.field))?;
            let (lo, hi) = (sol.field.min(), sol.field.max());
            rec.summary.insert("mass".into(), sol.field.mass());
            rec.summary.insert("max".into(), hi);
            rec.checks.insert("range".into(), lo >= 0.0 && hi <= 1.0);
            log(&format!("simulate: t = {}, mass = {:?}, max = {hi:?}", p.t_final, sol.field.mass()));
        }
        Kind::Speed => {
            let p = &cfg.speed;
            let pc = PassageConfig {
                h: p.h,
                horizon: p.horizon,
                window: p.window,
                stepper: cfg.stepper.clone(),
            };
            let dirs = directions(m.dim, p.directions);
            let est = spreading_speeds(&m, &dirs, &p.ladder, &pc)?;
            let mut csv = String::from("e0,e1,speed,uncertainty,front_speed\n");
            let mut speeds = Vec::new();
            for e in &est {
                let front = match p.front_t_final {
                    Some(t_final) => {
                        let fc = FrontConfig {
                            h: p.h,
                            t_final,
                            ..FrontConfig::default()
                        };
                        Some(front_speed_direct(&m, e.direction, &fc)?.speed)
                    }
                    None => None,
                };
                csv.push_str(&format!(
                    "{:?},{:?},{:?},{:?},{}\n",
                    e.direction[0],
                    e.direction[1],
                    e.speed,
                    e.uncertainty,
                    front.map_or(String::new(), |f| format!("{f:?}"))
                ));
                log(&format!(
                    "speed: e = ({:.3}, {:.3}) w = {:.4} ± {:.4}{}",
                    e.direction[0],
                    e.direction[1],
                    e.speed,
                    e.uncertainty,
                    front.map_or(String::new(), |f| format!(", front {f:.4}"))
                ));
                speeds.push(e.speed);
            }
            out.csv("speeds.csv", &csv)?;
            out.json("speeds.json", &est)?;
            rec.summary.insert("speed_min".into(), speeds.iter().cloned().fold(f64::INFINITY, f64::min));
            rec.summary.insert("speed_max".into(), speeds.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            rec.summary.insert("supersolution_speed".into(), a);
            rec.checks.insert("speed_below_a".into(), speeds.iter().all(|&w| w <= a));
        }
        Kind::Wulff => {
            let (shape, spread) = wulff_shape(cfg, out, rec, log)?;
            rec.summary.insert("seed_spread".into(), spread);
            rec.checks.insert("speed_below_a".into(), shape.speeds().iter().all(|&w| w <= a));
        }
        Kind::Vlin => {
            let p = &cfg.vlin;
            let t_end = p.times.last().copied().unwrap_or(0.0) * (1.0 + p.delta);
            let grid = grid_for(&m, &p.region, t_end, p.h)?;
            let dim = m.dim;
            let u0 = Field::indicator(grid, p.theta, |x| p.region.contains(x, dim))?;
            let report = virtual_linearity_check(&u0, &m, &p.times, p.delta, &cfg.stepper)?;
            out.csv("sandwich.csv", &report.to_csv())?;
            out.json("sandwich.json", &report)?;
            rec.summary.insert("phi_hat".into(), report.phi_hat);
            rec.summary.insert("left_margin".into(), report.left_margin);
            rec.summary.insert("right_margin".into(), report.right_margin);
            rec.summary.insert("pieces".into(), report.pieces as f64);
            rec.checks.insert("phi_nonincreasing".into(), report.phi_nonincreasing(p.noise));
            log(&format!(
                "vlin: {} pieces, margins ({:.3e}, {:.3e}), phi = {:.3e}",
                report.pieces, report.left_margin, report.right_margin, report.phi_hat
            ));
        }
        Kind::Homogenize => {
            let p = &cfg.homogenize;
            let shape = match &p.shape {
                ShapeSource::Ball { radius, directions } => ConvexShape::ball(m.dim, *radius, *directions)?,
                ShapeSource::Speeds { directions, speeds } => {
                    ConvexShape::new(m.dim, directions.clone(), speeds.clone())?
                }
                ShapeSource::Estimate => wulff_shape(cfg, out, rec, log)?.0,
            };
            let record = homogenization_sweep(&p.region, &m, &shape, &p.sweep)?;
            out.csv("sweep.csv", &record.to_csv())?;
            out.json("sweep.json", &record)?;
            let mut trend = true;
            for &t in &record.obs_times {
                let ms = record.measures_at(t);
                trend &= ms.windows(2).all(|w| w[1] <= w[0] * (1.0 + p.noise) + 1e-12);
                log(&format!("homogenize: t = {t}: mixed zone {ms:?}"));
                if let (Some(first), Some(last)) = (ms.first(), ms.last()) {
                    rec.summary.insert(format!("mixed_zone_first_t{t}"), *first);
                    rec.summary.insert(format!("mixed_zone_last_t{t}"), *last);
                }
            }
            rec.checks.insert("mixed_zone_trend".into(), trend);
        }
    }
    Ok(())
}

fn wulff_shape(
    cfg: &RunConfig,
    out: &mut Emitter,
    rec: &mut RunRecord,
    log: &mut dyn FnMut(&str),
) -> Result<(ConvexShape, f64)> {
    let p = &cfg.wulff;
    let media = (0..p.seeds)
        .map(|k| sample_medium(&cfg.medium, cfg.seed + k))
        .collect::<Result<Vec<_>>>()?;
    let pc = PassageConfig {
        h: p.h,
        horizon: p.horizon,
        window: p.window,
        stepper: cfg.stepper.clone(),
    };
    let est = estimate_wulff(&media, &directions(cfg.medium.dim, p.directions), &p.ladder, &pc)?;
    out.csv("wulff-speeds.csv", &est.to_csv())?;
    out.csv("shape.csv", &est.shape.to_csv())?;
    out.json("shape.json", &est.shape)?;
    let radius = est.shape.radius();
    rec.summary.insert("shape_radius".into(), radius);
    rec.summary.insert("convexity_defect".into(), est.convexity_defect);
    rec.summary.insert("ladder_uncertainty".into(), est.uncertainty());
    rec.checks.insert("convexity_defect".into(), est.convexity_defect <= p.max_defect * radius);
    log(&format!(
        "wulff: {} seeds, radius {:.4}, defect {:.3e}, seed spread {:.3e}",
        media.len(),
        radius,
        est.convexity_defect,
        est.seed_spread
    ));
    Ok((est.shape, est.seed_spread))
}

#[derive(Clone, Debug, PartialEq)]
pub enum EntryStatus {
    Finished,
    /// Still marked running, or the record is truncated.
    Partial,
    Failed,
    Unreadable(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegistryEntry {
    pub dir: PathBuf,
    pub status: EntryStatus,
    pub record: Option<RunRecord>,
}

/// Scans `dir` for run directories. Problems with single records are
/// reported in their entries.
pub fn registry_list(dir: &Path) -> Result<Vec<RegistryEntry>> {
    let mut entries = Vec::new();
    if !dir.exists() {
        return Ok(entries);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("record.json").exists())
        .collect();
    dirs.sort();
    for d in dirs {
        let (status, record) = match fs::read_to_string(d.join("record.json")) {
            Err(e) => (EntryStatus::Unreadable(e.to_string()), None),
            Ok(text) => match serde_json::from_str::<RunRecord>(&text) {
                Ok(r) => (
                    match r.status {
                        RunStatus::Finished => EntryStatus::Finished,
                        RunStatus::Running => EntryStatus::Partial,
                        RunStatus::Failed => EntryStatus::Failed,
                    },
                    Some(r),
                ),
                Err(e) if e.is_eof() => (EntryStatus::Partial, None),
                Err(e) => (EntryStatus::Unreadable(e.to_string()), None),
            },
        };
        entries.push(RegistryEntry { dir: d, status, record });
    }
    Ok(entries)
}
