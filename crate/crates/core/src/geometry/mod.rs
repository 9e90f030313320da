//! Wulff-set calculus on sampled support data: shapes, regions, Minkowski
//! sums, erosions and dilations, and the mixed-zone measure.

mod polygon;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::solver::Field;
use crate::{dot, norm, Error, Point, Result};
use polygon::Polygon;

/// Largest angular gap allowed between consecutive directions in two dimensions.
pub const MAX_ANGULAR_GAP: f64 = PI / 2.0;

/// Directions for support sampling: `±e₁` in one dimension, `n` uniform
/// angles `2πi/n` in two.
pub fn uniform_directions(dim: usize, n: usize) -> Vec<Point> {
    if dim == 1 {
        return vec![[1.0, 0.0], [-1.0, 0.0]];
    }
    (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeModel {
    /// `conv{s_i e_i}`
    Inner,
    /// The sampled boundary points plus, over each hull edge, the apex of
    /// the wedge cut out by the extensions of the two neighbouring edges.
    Outer,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ShapeData {
    dim: usize,
    directions: Vec<Point>,
    support: Vec<f64>,
}

/// Convex shape `{s·e : s < w(e)}` known through samples `w_i = w(e_i)` of its
/// radial function, read through an inner and an outer polygonal model.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ShapeData", into = "ShapeData")]
pub struct ConvexShape {
    dim: usize,
    directions: Vec<Point>,
    support: Vec<f64>,
    inner: Polygon,
    outer: Polygon,
}

impl From<ConvexShape> for ShapeData {
    fn from(s: ConvexShape) -> Self {
        ShapeData {
            dim: s.dim,
            directions: s.directions,
            support: s.support,
        }
    }
}

impl TryFrom<ShapeData> for ConvexShape {
    type Error = Error;

    fn try_from(d: ShapeData) -> Result<Self> {
        ConvexShape::new(d.dim, d.directions, d.support)
    }
}

impl PartialEq for ConvexShape {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.directions == other.directions && self.support == other.support
    }
}

impl ConvexShape {
    pub fn new(dim: usize, directions: Vec<Point>, support: Vec<f64>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::param("dim", format!("{dim} not in {{1, 2}}")));
        }
        if directions.len() != support.len() || directions.is_empty() {
            return Err(Error::param("support", "one value per direction required"));
        }
        if let Some(w) = support.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::param("speed", format!("nonpositive or non-finite speed {w}")));
        }
        let mut pairs: Vec<(Point, f64)> = directions
            .into_iter()
            .map(|e| {
                let n = norm(e);
                [e[0] / n, if dim == 2 { e[1] / n } else { 0.0 }]
            })
            .zip(support)
            .collect();
        if dim == 1 {
            let plus = pairs.iter().filter(|p| p.0[0] > 0.0).map(|p| p.1).fold(f64::NAN, f64::min);
            let minus = pairs.iter().filter(|p| p.0[0] < 0.0).map(|p| p.1).fold(f64::NAN, f64::min);
            if plus.is_nan() || minus.is_nan() {
                return Err(Error::param("directions", "both +e and -e are needed in one dimension"));
            }
            let seg = Polygon::from_points(1, &[[-minus, 0.0], [plus, 0.0]]);
            return Ok(ConvexShape {
                dim,
                directions: vec![[1.0, 0.0], [-1.0, 0.0]],
                support: vec![plus, minus],
                inner: seg.clone(),
                outer: seg,
            });
        }
        pairs.sort_by(|a, b| angle(a.0).partial_cmp(&angle(b.0)).unwrap());
        let gap = (0..pairs.len())
            .map(|i| {
                let a = angle(pairs[i].0);
                let b = angle(pairs[(i + 1) % pairs.len()].0);
                (b - a).rem_euclid(2.0 * PI)
            })
            .fold(0.0, f64::max);
        if pairs.len() < 3 || gap > MAX_ANGULAR_GAP + 1e-12 {
            return Err(Error::param(
                "directions",
                format!("angular gap {gap:.3} exceeds {MAX_ANGULAR_GAP:.3}"),
            ));
        }
        let (directions, support): (Vec<Point>, Vec<f64>) = pairs.into_iter().unzip();
        let pts: Vec<Point> = directions.iter().zip(&support).map(|(e, s)| [e[0] * s, e[1] * s]).collect();
        let inner = Polygon::from_points(2, &pts);
        let outer = tangent_wedges(&inner);
        Ok(ConvexShape {
            dim,
            directions,
            support,
            inner,
            outer,
        })
    }

    /// Ball of radius `r` sampled on `n` directions.
    pub fn ball(dim: usize, r: f64, n: usize) -> Result<Self> {
        ConvexShape::from_radial_fn(dim, n, |_| r)
    }

    /// Samples the radial function `f` on `n` uniform directions.
    pub fn from_radial_fn(dim: usize, n: usize, f: impl Fn(Point) -> f64) -> Result<Self> {
        let dirs = uniform_directions(dim, n);
        let support = dirs.iter().map(|&e| f(e)).collect();
        ConvexShape::new(dim, dirs, support)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn directions(&self) -> &[Point] {
        &self.directions
    }

    /// The sampled radii `w_i`.
    pub fn speeds(&self) -> &[f64] {
        &self.support
    }

    /// `sup_{y ∈ inner model} y·e`.
    pub fn support_function(&self, e: Point) -> f64 {
        self.inner.support(e)
    }

    pub fn model_support(&self, model: ShapeModel, e: Point) -> f64 {
        self.polygon(model).support(e)
    }

    fn polygon(&self, model: ShapeModel) -> &Polygon {
        match model {
            ShapeModel::Inner => &self.inner,
            ShapeModel::Outer => &self.outer,
        }
    }

    pub fn contains(&self, model: ShapeModel, x: Point) -> bool {
        self.polygon(model).signed_distance(x) <= 1e-12
    }

    /// `max_i (ρ_inner(e_i) - w_i)⁺` with `ρ_inner` the radial function of
    /// the inner model; positive when a sample falls strictly inside the hull
    /// of the others, so no convex set has these radii.
    pub fn convexity_defect(&self) -> f64 {
        self.directions
            .iter()
            .zip(&self.support)
            .map(|(&e, &w)| (self.inner.radial(e) - w).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Hausdorff distance between the inner and outer models.
    pub fn gap(&self) -> f64 {
        let (inner, outer) = (&self.inner, &self.outer);
        self.hausdorff_by(|e| inner.support(e), |e| outer.support(e))
    }

    /// Hausdorff distance of the inner model to the convex set with support
    /// function `h`, evaluated on a fine direction grid.
    pub fn hausdorff_to(&self, h: impl Fn(Point) -> f64) -> f64 {
        let inner = &self.inner;
        self.hausdorff_by(|e| inner.support(e), h)
    }

    pub fn hausdorff(&self, other: &ConvexShape) -> f64 {
        self.hausdorff_to(|e| other.support_function(e))
    }

    fn hausdorff_by(&self, f: impl Fn(Point) -> f64, g: impl Fn(Point) -> f64) -> f64 {
        uniform_directions(self.dim, 2880)
            .into_iter()
            .map(|e| (f(e) - g(e)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest sampled radius.
    pub fn radius(&self) -> f64 {
        self.support.iter().copied().fold(0.0, f64::max)
    }

    /// Checks `c ≤ w_i ≤ c⁻¹` and `|w_i - w_j| ≤ c⁻¹|e_i - e_j|`.
    pub fn satisfies_constants(&self, c: f64) -> bool {
        let bounded = self.support.iter().all(|&s| s >= c && s <= 1.0 / c);
        let lipschitz = self.directions.iter().zip(&self.support).all(|(&ei, &si)| {
            self.directions.iter().zip(&self.support).all(|(&ej, &sj)| {
                let de = norm([ei[0] - ej[0], ei[1] - ej[1]]);
                (si - sj).abs() <= de / c + 1e-12
            })
        });
        bounded && lipschitz
    }

    /// CSV rows `angle,speed` with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("angle,speed\n");
        for (e, w) in self.directions.iter().zip(&self.support) {
            s.push_str(&format!("{:?},{:?}\n", angle(*e), w));
        }
        s
    }
}

/// Outer model from a convex hull: the boundary arc of a convex set through
/// consecutive hull vertices `B, C` lies in the triangle bounded by the chord
/// and the extensions of the neighbouring edges `AB` and `DC`.
fn tangent_wedges(hull: &Polygon) -> Polygon {
    let v = &hull.verts;
    let n = v.len();
    if n < 3 {
        return hull.clone();
    }
    let mut pts = v.clone();
    for i in 0..n {
        let a = v[(i + n - 1) % n];
        let b = v[i];
        let c = v[(i + 1) % n];
        let d = v[(i + 2) % n];
        let u = [b[0] - a[0], b[1] - a[1]];
        let w = [c[0] - d[0], c[1] - d[1]];
        let bc = [c[0] - b[0], c[1] - b[1]];
        // solve b + s·u = c + r·w
        let det = u[0] * (-w[1]) + w[0] * u[1];
        let apex = if det.abs() > 1e-14 * norm(u) * norm(w) {
            let s = (bc[0] * (-w[1]) + w[0] * bc[1]) / det;
            let r = (u[0] * bc[1] - u[1] * bc[0]) / det;
            if s >= 0.0 && r >= 0.0 {
                Some([b[0] + s * u[0], b[1] + s * u[1]])
            } else {
                None
            }
        } else {
            None
        };
        // without a finite wedge, fall back to a right-angled apex over the chord
        pts.push(apex.unwrap_or([
            b[0] + 0.5 * bc[0] + 0.5 * bc[1],
            b[1] + 0.5 * bc[1] - 0.5 * bc[0],
        ]));
    }
    Polygon::from_points(2, &pts)
}

fn angle(e: Point) -> f64 {
    e[1].atan2(e[0]).rem_euclid(2.0 * PI)
}

/// Shape from measured `(e_i, w_i)` pairs.
pub fn shape_from_speeds(dim: usize, pairs: &[(Point, f64)]) -> Result<ConvexShape> {
    let (dirs, speeds) = pairs.iter().cloned().unzip();
    ConvexShape::new(dim, dirs, speeds)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Point,
    pub hi: Point,
}

/// Open set `G`. One-dimensional regions use the first coordinate only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegionSpec {
    Ball { center: Point, radius: f64 },
    Box { lo: Point, hi: Point },
    Boxes { boxes: Vec<BoxSpec> },
    /// `{x : x·normal < 0}`
    HalfSpace { normal: Point },
    /// Complement of the closed box `[lo, hi]`.
    ComplementOfBox { lo: Point, hi: Point },
}

fn box_polygon(dim: usize, lo: Point, hi: Point) -> Polygon {
    if dim == 1 {
        Polygon::from_points(1, &[lo, hi])
    } else {
        Polygon::from_points(2, &[lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]])
    }
}

impl RegionSpec {
    pub fn check(&self, dim: usize) -> Result<()> {
        let bad_box = |lo: Point, hi: Point| lo[0] > hi[0] || (dim == 2 && lo[1] > hi[1]);
        match self {
            RegionSpec::Ball { radius, .. } if !(*radius >= 0.0) => {
                Err(Error::param("region", format!("negative radius {radius}")))
            }
            RegionSpec::Box { lo, hi } | RegionSpec::ComplementOfBox { lo, hi } if bad_box(*lo, *hi) => {
                Err(Error::param("region", "box with lo > hi"))
            }
            RegionSpec::Boxes { boxes } if boxes.is_empty() || boxes.iter().any(|b| bad_box(b.lo, b.hi)) => {
                Err(Error::param("region", "empty union or box with lo > hi"))
            }
            RegionSpec::HalfSpace { normal } if norm(*normal) == 0.0 => Err(Error::param("region", "zero normal")),
            _ => Ok(()),
        }
    }

    /// Signed distance to `G` (negative inside).
    pub fn signed_distance(&self, x: Point, dim: usize) -> f64 {
        SumSet::build(self, &Polygon::point(dim, [0.0; 2]), dim).signed_distance(x)
    }

    pub fn contains(&self, x: Point, dim: usize) -> bool {
        self.signed_distance(x, dim) < 0.0
    }

    /// Whether `G` is bounded.
    pub fn is_bounded(&self) -> bool {
        !matches!(self, RegionSpec::HalfSpace { .. } | RegionSpec::ComplementOfBox { .. })
    }

    /// A box containing `G`, for bounded regions.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        match self {
            RegionSpec::Ball { center, radius } => Some((
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            )),
            RegionSpec::Box { lo, hi } => Some((*lo, *hi)),
            RegionSpec::Boxes { boxes } => Some(boxes.iter().fold(
                ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
                |(lo, hi), b| {
                    (
                        [lo[0].min(b.lo[0]), lo[1].min(b.lo[1])],
                        [hi[0].max(b.hi[0]), hi[1].max(b.hi[1])],
                    )
                },
            )),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
enum SumKind {
    /// Convex polygon thickened by radius `r`.
    Rounded(Polygon, f64),
    Union(Vec<SumKind>),
    HalfSpace(Point, f64),
    /// Complement of a closed box polygon.
    CoBox(Polygon),
    Everything,
}

impl SumKind {
    fn signed_distance(&self, x: Point) -> f64 {
        match self {
            SumKind::Rounded(p, r) => p.signed_distance(x) - r,
            // exact outside; inside the depth is a lower bound
            SumKind::Union(parts) => parts.iter().map(|p| p.signed_distance(x)).fold(f64::INFINITY, f64::min),
            SumKind::HalfSpace(n, off) => dot(x, *n) - off,
            SumKind::CoBox(p) => -p.signed_distance(x),
            SumKind::Everything => f64::NEG_INFINITY,
        }
    }
}

/// A time slice `G + tK` for a fixed polygonal model `K`.
#[derive(Clone, Debug)]
pub struct SumSet {
    kind: SumKind,
}

impl SumSet {
    fn build(g: &RegionSpec, k: &Polygon, dim: usize) -> SumSet {
        fn rect(dim: usize, lo: Point, hi: Point, k: &Polygon) -> SumKind {
            SumKind::Rounded(box_polygon(dim, lo, hi).minkowski(k), 0.0)
        }
        let kind = match g {
            RegionSpec::Ball { center, radius } => SumKind::Rounded(k.translated(*center), *radius),
            RegionSpec::Box { lo, hi } => rect(dim, *lo, *hi, k),
            RegionSpec::Boxes { boxes } => SumKind::Union(boxes.iter().map(|b| rect(dim, b.lo, b.hi, k)).collect()),
            RegionSpec::HalfSpace { normal } => {
                let l = norm(*normal);
                let n = [normal[0] / l, normal[1] / l];
                SumKind::HalfSpace(n, k.support(n))
            }
            RegionSpec::ComplementOfBox { lo, hi } => {
                // x ∉ G + K iff x - K ⊆ box, i.e. x lies in the box shrunk by
                // the support of K along each axis
                let mut lo2 = [0.0; 2];
                let mut hi2 = [0.0; 2];
                for j in 0..dim {
                    let mut e = [0.0; 2];
                    e[j] = 1.0;
                    lo2[j] = lo[j] + k.support(e);
                    e[j] = -1.0;
                    hi2[j] = hi[j] - k.support(e);
                }
                if (0..dim).any(|j| lo2[j] > hi2[j]) {
                    SumKind::Everything
                } else {
                    SumKind::CoBox(box_polygon(dim, lo2, hi2))
                }
            }
        };
        SumSet { kind }
    }

    pub fn signed_distance(&self, x: Point) -> f64 {
        self.kind.signed_distance(x)
    }

    /// Closed-set membership.
    pub fn contains(&self, x: Point) -> bool {
        self.signed_distance(x) <= 0.0
    }

    /// `x ∈ B_r(set)`.
    pub fn in_dilation(&self, x: Point, r: f64) -> bool {
        self.signed_distance(x) < r
    }

    /// `x ∈ set⁰_r`.
    pub fn in_erosion(&self, x: Point, r: f64) -> bool {
        self.signed_distance(x) < -r
    }
}

/// `G + t𝒮` through the inner and outer shape models.
#[derive(Clone, Debug)]
pub struct MinkowskiBracket {
    pub inner: SumSet,
    pub outer: SumSet,
}

impl MinkowskiBracket {
    /// Memberships `(inner, outer)`; inner implies outer.
    pub fn contains(&self, x: Point) -> (bool, bool) {
        (self.inner.contains(x), self.outer.contains(x))
    }
}

pub fn minkowski_sum(g: &RegionSpec, s: &ConvexShape, t: f64) -> Result<MinkowskiBracket> {
    if !(t >= 0.0) {
        return Err(Error::param("t", format!("{t} must be nonnegative")));
    }
    g.check(s.dim)?;
    Ok(MinkowskiBracket {
        inner: SumSet::build(g, &s.inner.scaled(t), s.dim),
        outer: SumSet::build(g, &s.outer.scaled(t), s.dim),
    })
}

/// Membership predicate for an erosion or dilation of `G`.
#[derive(Clone, Debug)]
pub struct Neighborhood {
    set: SumSet,
    offset: f64,
}

impl Neighborhood {
    pub fn contains(&self, x: Point) -> bool {
        self.set.signed_distance(x) < self.offset
    }
}

fn neighborhood(g: &RegionSpec, r: f64, dim: usize, sign: f64) -> Result<Neighborhood> {
    if !(r >= 0.0) {
        return Err(Error::param("r", format!("{r} must be nonnegative")));
    }
    g.check(dim)?;
    Ok(Neighborhood {
        set: SumSet::build(g, &Polygon::point(dim, [0.0; 2]), dim),
        offset: sign * r,
    })
}

/// `G⁰_r = G \ closure(B_r(∂G))`.
pub fn erode(g: &RegionSpec, r: f64, dim: usize) -> Result<Neighborhood> {
    neighborhood(g, r, dim, -1.0)
}

/// `B_r(G)`.
pub fn dilate(g: &RegionSpec, r: f64, dim: usize) -> Result<Neighborhood> {
    neighborhood(g, r, dim, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedZone {
    /// Cells with `u > η₀` outside the dilated outer slice.
    pub outside_cells: usize,
    /// Cells with `u < η₁` inside the eroded inner slice.
    pub inside_cells: usize,
    /// `(outside + inside)·h^d`.
    pub measure: f64,
}

/// Measure of the cells of `u` that contradict the limit `χ_{G + t𝒮}` away
/// from a band of width `δ` around its boundary. At `t = 0` only the outside
/// test applies.
pub fn mixed_zone(
    u: &Field,
    g: &RegionSpec,
    s: &ConvexShape,
    t: f64,
    delta: f64,
    thresholds: (f64, f64),
) -> Result<MixedZone> {
    mixed_zone_within(u, g, s, t, delta, thresholds, |_| true)
}

/// [`mixed_zone`] restricted to the cells whose centers satisfy `keep`.
pub fn mixed_zone_within(
    u: &Field,
    g: &RegionSpec,
    s: &ConvexShape,
    t: f64,
    delta: f64,
    thresholds: (f64, f64),
    keep: impl Fn(Point) -> bool,
) -> Result<MixedZone> {
    let (eta0, eta1) = thresholds;
    if !(0.0 < eta0 && eta0 < eta1 && eta1 < 1.0) {
        return Err(Error::param("thresholds", format!("need 0 < {eta0} < {eta1} < 1")));
    }
    if !(delta > 0.0) {
        return Err(Error::param("delta", format!("{delta} must be positive")));
    }
    let slice = minkowski_sum(g, s, t)?;
    let mut outside = 0;
    let mut inside = 0;
    for (k, &v) in u.values.iter().enumerate() {
        let x = u.grid.center_of(k);
        if !keep(x) {
            continue;
        }
        if v > eta0 && !slice.outer.in_dilation(x, delta) {
            outside += 1;
        }
        if t > 0.0 && v < eta1 && slice.inner.in_erosion(x, delta) {
            inside += 1;
        }
    }
    Ok(MixedZone {
        outside_cells: outside,
        inside_cells: inside,
        measure: (outside + inside) as f64 * u.grid.cell_volume(),
    })
}
