//! Numerical laboratory for KPP reaction-advection-diffusion fronts in random
//! time-periodic stationary media.
//!
//! The crate is organised bottom-up:
//!
//! * [`medium`] samples and validates random environments (local coefficients,
//!   nonlocal kernels, KPP reactions).
//! * [`solver`] holds the monotone explicit steppers and the domain/speed bounds
//!   used to truncate the whole-space problem.
//! * [`geometry`] is the convex-shape calculus (support functions, Minkowski
//!   sums, erosion/dilation, mixed-zone measurement).
//! * [`wulff`] measures first-passage times, spreading speeds, front speeds and
//!   Wulff shapes.
//! * [`experiments`] runs the sandwich test for the cube-decomposed surrogate
//!   solutions and the ε-sweep homogenization test.
//! * [`io`] is the batch runner: configuration, artifacts, run registry.

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod medium;
pub mod solver;
pub mod wulff;

mod hash;

pub use error::{Error, Result};

/// A position in space. One-dimensional problems use the first coordinate and
/// keep the second at zero.
pub type Point = [f64; 2];

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

pub(crate) fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}
