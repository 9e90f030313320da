//! Convex polygons (intervals in one dimension) with support and signed
//! distance queries.

use crate::{dot, norm, sub, Point};

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Polygon {
    pub dim: usize,
    /// Counter-clockwise hull vertices; `[lo, hi]` on the first axis when `dim == 1`.
    pub verts: Vec<Point>,
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Monotone-chain convex hull, counter-clockwise, collinear points dropped.
pub(crate) fn hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let s = if len2 > 0.0 {
        (dot(sub(x, a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    norm(sub(x, [a[0] + s * ab[0], a[1] + s * ab[1]]))
}

impl Polygon {
    pub fn from_points(dim: usize, points: &[Point]) -> Self {
        if dim == 1 {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            return Polygon {
                dim,
                verts: vec![[lo, 0.0], [hi, 0.0]],
            };
        }
        Polygon {
            dim,
            verts: hull(points),
        }
    }

    pub fn point(dim: usize, p: Point) -> Self {
        Polygon::from_points(dim, &[p])
    }

    /// `{x : x·n_i ≤ s_i}` clipped from a square of half-width `big`.
    #[cfg(test)]
    pub fn from_halfplanes(normals: &[Point], support: &[f64], big: f64) -> Self {
        let mut poly = vec![[-big, -big], [big, -big], [big, big], [-big, big]];
        for (n, &s) in normals.iter().zip(support) {
            let mut out = Vec::with_capacity(poly.len() + 1);
            for k in 0..poly.len() {
                let p = poly[k];
                let q = poly[(k + 1) % poly.len()];
                let fp = dot(p, *n) - s;
                let fq = dot(q, *n) - s;
                if fp <= 0.0 {
                    out.push(p);
                }
                if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
                    let r = fp / (fp - fq);
                    out.push([p[0] + r * (q[0] - p[0]), p[1] + r * (q[1] - p[1])]);
                }
            }
            poly = out;
            if poly.is_empty() {
                break;
            }
        }
        Polygon {
            dim: 2,
            verts: hull(&poly),
        }
    }

    pub fn support(&self, e: Point) -> f64 {
        self.verts.iter().map(|&v| dot(v, e)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sup{s ≥ 0 : s·e ∈ P}` for a polygon containing the origin.
    pub fn radial(&self, e: Point) -> f64 {
        if self.dim == 1 {
            return if e[0] >= 0.0 { self.verts[1][0] } else { -self.verts[0][0] };
        }
        let n = self.verts.len();
        let mut best = f64::INFINITY;
        for k in 0..n {
            let a = self.verts[k];
            let b = self.verts[(k + 1) % n];
            let edge = sub(b, a);
            let out = [edge[1], -edge[0]];
            let reach = dot(a, out);
            let rate = dot(e, out);
            if rate > 0.0 {
                best = best.min(reach / rate);
            }
        }
        best
    }

    pub fn scaled(&self, t: f64) -> Self {
        let mut verts: Vec<Point> = self.verts.iter().map(|v| [v[0] * t, v[1] * t]).collect();
        if t < 0.0 {
            verts.reverse();
        }
        Polygon {
            dim: self.dim,
            verts: if self.dim == 2 { hull(&verts) } else { verts },
        }
    }

    pub fn translated(&self, c: Point) -> Self {
        Polygon {
            dim: self.dim,
            verts: self.verts.iter().map(|v| [v[0] + c[0], v[1] + c[1]]).collect(),
        }
    }

    pub fn minkowski(&self, other: &Polygon) -> Self {
        let mut pts = Vec::with_capacity(self.verts.len() * other.verts.len());
        for a in &self.verts {
            for b in &other.verts {
                pts.push([a[0] + b[0], a[1] + b[1]]);
            }
        }
        Polygon::from_points(self.dim, &pts)
    }

    /// Exact signed distance: negative inside, Euclidean distance outside.
    pub fn signed_distance(&self, x: Point) -> f64 {
        if self.dim == 1 {
            let (lo, hi) = (self.verts[0][0], self.verts[1][0]);
            return (lo - x[0]).max(x[0] - hi);
        }
        let n = self.verts.len();
        match n {
            0 => f64::INFINITY,
            1 => norm(sub(x, self.verts[0])),
            2 => segment_distance(x, self.verts[0], self.verts[1]),
            _ => {
                let mut inside = true;
                let mut depth = f64::INFINITY;
                let mut dist = f64::INFINITY;
                for k in 0..n {
                    let a = self.verts[k];
                    let b = self.verts[(k + 1) % n];
                    let edge = sub(b, a);
                    let len = norm(edge);
                    // outward normal of a counter-clockwise edge
                    let out = [edge[1] / len, -edge[0] / len];
                    let gap = dot(sub(x, a), out);
                    if gap > 0.0 {
                        inside = false;
                    }
                    depth = depth.min(-gap);
                    dist = dist.min(segment_distance(x, a, b));
                }
                if inside {
                    -depth
                } else {
                    dist
                }
            }
        }
    }

    #[cfg(test)]
    pub fn area(&self) -> f64 {
        if self.dim == 1 {
            return self.verts[1][0] - self.verts[0][0];
        }
        let n = self.verts.len();
        (0..n)
            .map(|k| {
                let a = self.verts[k];
                let b = self.verts[(k + 1) % n];
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
            * 0.5
    }
}
