use serde::{Deserialize, Serialize};

use crate::{Error, Point, Result};

/// Uniform cell-centered grid; cell `(i, j)` is centered at `origin + h·(i, j)`.
/// One-dimensional grids have `extents[1] == 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub h: f64,
    pub origin: Point,
    pub extents: [usize; 2],
}

impl Grid {
    pub fn new(dim: usize, h: f64, origin: Point, extents: [usize; 2]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::param("dim", format!("{dim} not in {{1, 2}}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::param("h", format!("spacing {h} must be positive")));
        }
        if extents[0] == 0 || extents[1] == 0 || (dim == 1 && extents[1] != 1) {
            return Err(Error::param("extents", format!("{extents:?} invalid for dimension {dim}")));
        }
        Ok(Grid {
            dim,
            h,
            origin,
            extents,
        })
    }

    /// Smallest grid whose cell centers are integer multiples of `h` and cover
    /// the box `[lo, hi]`.
    pub fn covering(dim: usize, h: f64, lo: Point, hi: Point) -> Result<Self> {
        let i0 = (lo[0] / h).floor();
        let i1 = (hi[0] / h).ceil();
        let (j0, j1) = if dim == 2 {
            ((lo[1] / h).floor(), (hi[1] / h).ceil())
        } else {
            (0.0, 0.0)
        };
        let nx = (i1 - i0) as usize + 1;
        let ny = (j1 - j0) as usize + 1;
        Grid::new(dim, h, [i0 * h, j0 * h], [nx, ny])
    }

    /// Grid covering the ball `B_radius(center)` (a square in two dimensions).
    pub fn around(dim: usize, h: f64, center: Point, radius: f64) -> Result<Self> {
        let lo = [center[0] - radius, if dim == 2 { center[1] - radius } else { 0.0 }];
        let hi = [center[0] + radius, if dim == 2 { center[1] + radius } else { 0.0 }];
        Grid::covering(dim, h, lo, hi)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.extents[0] * self.extents[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.extents[0] + i
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> Point {
        [
            self.origin[0] + self.h * i as f64,
            if self.dim == 2 { self.origin[1] + self.h * j as f64 } else { 0.0 },
        ]
    }

    #[inline]
    pub fn center_of(&self, idx: usize) -> Point {
        self.center(idx % self.extents[0], idx / self.extents[0])
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Indices of the cells on the outer layer of the grid.
    pub fn boundary_cells(&self) -> Vec<usize> {
        let [nx, ny] = self.extents;
        let mut out = Vec::new();
        if self.dim == 1 {
            out.push(0);
            if nx > 1 {
                out.push(nx - 1);
            }
            return out;
        }
        for i in 0..nx {
            out.push(self.index(i, 0));
            if ny > 1 {
                out.push(self.index(i, ny - 1));
            }
        }
        for j in 1..ny.saturating_sub(1) {
            out.push(self.index(0, j));
            if nx > 1 {
                out.push(self.index(nx - 1, j));
            }
        }
        out
    }

    /// Lower and upper corners of the cell-center box.
    pub fn bounds(&self) -> (Point, Point) {
        (self.origin, self.center(self.extents[0] - 1, self.extents[1] - 1))
    }

    /// The same cells under `x ↦ eps·x - shift`.
    pub fn rescaled(&self, eps: f64, shift: Point) -> Grid {
        Grid {
            dim: self.dim,
            h: self.h * eps,
            origin: [
                self.origin[0] * eps - shift[0],
                if self.dim == 2 { self.origin[1] * eps - shift[1] } else { 0.0 },
            ],
            extents: self.extents,
        }
    }
}

/// State assumed outside the grid. Only the stationary states 0 and 1 are
/// allowed, so the convention is consistent with the equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exterior {
    Zero,
    One,
}

impl Exterior {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Exterior::Zero => 0.0,
            Exterior::One => 1.0,
        }
    }
}

/// Snapshot of `u(t, ·)` on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub time: f64,
    pub exterior: Exterior,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Field {
            grid,
            values: vec![0.0; n],
            time: 0.0,
            exterior: Exterior::Zero,
        }
    }

    /// `u ≡ 1` everywhere, including outside the grid.
    pub fn ones(grid: Grid) -> Self {
        let n = grid.len();
        Field {
            grid,
            values: vec![1.0; n],
            time: 0.0,
            exterior: Exterior::One,
        }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(Point) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.len()).map(|k| f(grid.center_of(k))).collect();
        let field = Field {
            grid,
            values,
            time: 0.0,
            exterior: Exterior::Zero,
        };
        field.check_range()?;
        Ok(field)
    }

    /// `level·χ_A` with membership decided at cell centers.
    pub fn indicator(grid: Grid, level: f64, mut member: impl FnMut(Point) -> bool) -> Result<Self> {
        Field::from_fn(grid, |x| if member(x) { level } else { 0.0 })
    }

    pub fn check_range(&self) -> Result<()> {
        match self.values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            None => Ok(()),
            Some(k) => Err(Error::param(
                "field",
                format!("value {} at cell {k} outside [0, 1]", self.values[k]),
            )),
        }
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    #[inline]
    pub fn get(&self, i: isize, j: isize) -> f64 {
        let [nx, ny] = self.grid.extents;
        if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
            self.exterior.value()
        } else {
            self.values[self.grid.index(i as usize, j as usize)]
        }
    }

    /// Multilinear interpolation of the cell-center values; the exterior
    /// state is used beyond the outermost centers.
    pub fn value_at(&self, x: Point) -> f64 {
        let g = &self.grid;
        let fx = (x[0] - g.origin[0]) / g.h;
        let i = fx.floor();
        let tx = fx - i;
        let i = i as isize;
        if g.dim == 1 {
            return (1.0 - tx) * self.get(i, 0) + tx * self.get(i + 1, 0);
        }
        let fy = (x[1] - g.origin[1]) / g.h;
        let j = fy.floor();
        let ty = fy - j;
        let j = j as isize;
        (1.0 - ty) * ((1.0 - tx) * self.get(i, j) + tx * self.get(i + 1, j))
            + ty * ((1.0 - tx) * self.get(i, j + 1) + tx * self.get(i + 1, j + 1))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest boundary-cell value.
    pub fn boundary_max(&self) -> f64 {
        self.grid
            .boundary_cells()
            .into_iter()
            .map(|k| self.values[k])
            .fold(0.0, f64::max)
    }

    /// `Σ u·h^d`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// The same array read in the coordinates `x ↦ eps·x - shift`, time `eps·t`.
    pub fn rescaled(&self, eps: f64, shift: Point) -> Field {
        Field {
            grid: self.grid.rescaled(eps, shift),
            values: self.values.clone(),
            time: self.time * eps,
            exterior: self.exterior,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_grid_has_lattice_centers() {
        let g = Grid::covering(2, 0.25, [-1.1, -0.3], [2.0, 0.6]).unwrap();
        assert_eq!(g.origin, [-1.25, -0.5]);
        let (_, hi) = g.bounds();
        assert!(hi[0] >= 2.0 && hi[1] >= 0.6);
        // integer points are cell centers
        let i = ((1.0 - g.origin[0]) / g.h).round() as usize;
        let j = ((0.0 - g.origin[1]) / g.h).round() as usize;
        assert_eq!(g.center(i, j), [1.0, 0.0]);
    }

    #[test]
    fn invalid_grids_rejected() {
        assert!(Grid::new(3, 0.1, [0.0; 2], [2, 2]).is_err());
        assert!(Grid::new(2, 0.0, [0.0; 2], [2, 2]).is_err());
        assert!(Grid::new(1, 0.1, [0.0; 2], [4, 2]).is_err());
    }

    #[test]
    fn interpolation_reproduces_linear_fields() {
        let g = Grid::covering(2, 0.5, [-2.0, -2.0], [2.0, 2.0]).unwrap();
        let f = Field::from_fn(g, |x| 0.5 + 0.1 * x[0] - 0.05 * x[1]).unwrap();
        for x in [[0.13, -0.77], [1.2, 1.9], [-1.5, 0.0]] {
            assert!((f.value_at(x) - (0.5 + 0.1 * x[0] - 0.05 * x[1])).abs() < 1e-12);
        }
        assert_eq!(f.value_at([10.0, 0.0]), 0.0);
    }

    #[test]
    fn boundary_cells_count() {
        let g = Grid::new(2, 1.0, [0.0; 2], [5, 4]).unwrap();
        assert_eq!(g.boundary_cells().len(), 2 * 5 + 2 * 2);
        let g1 = Grid::new(1, 1.0, [0.0; 2], [5, 1]).unwrap();
        assert_eq!(g1.boundary_cells(), vec![0, 4]);
    }

    #[test]
    fn rescaling_reindexes_the_same_array() {
        let g = Grid::covering(2, 0.5, [-4.0, -4.0], [4.0, 4.0]).unwrap();
        let f = Field::from_fn(g, |x| (0.1 * (x[0] + 2.0 * x[1])).clamp(0.0, 1.0))
            .unwrap()
            .with_time(8.0);
        let eps = 0.125;
        let y = [0.25, -0.5];
        let s = f.rescaled(eps, y);
        assert_eq!(s.values, f.values);
        assert_eq!(s.time, 1.0);
        for k in [0, 17, 200] {
            let xs = s.grid.center_of(k);
            let xu = f.grid.center_of(k);
            assert!((xs[0] - (eps * xu[0] - y[0])).abs() < 1e-12);
            assert!((xs[1] - (eps * xu[1] - y[1])).abs() < 1e-12);
        }
    }
}
