use std::f64::consts::PI;

use kpplab::geometry::{
    dilate, erode, minkowski_sum, mixed_zone, shape_from_speeds, uniform_directions, BoxSpec, ConvexShape,
    RegionSpec, ShapeModel,
};
use kpplab::solver::{Field, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn probe(r: &mut ChaCha8Rng, half: f64) -> [f64; 2] {
    [r.gen_range(-half..half), r.gen_range(-half..half)]
}

fn ellipse_support(a: f64, b: f64) -> impl Fn([f64; 2]) -> f64 {
    move |e| ((a * e[0]).powi(2) + (b * e[1]).powi(2)).sqrt()
}

fn ellipse_radius(a: f64, b: f64) -> impl Fn([f64; 2]) -> f64 {
    move |e| 1.0 / ((e[0] / a).powi(2) + (e[1] / b).powi(2)).sqrt()
}

#[test]
fn support_of_ball_and_square() {
    let ball = ConvexShape::ball(2, 1.0, 64).unwrap();
    for k in 0..10 {
        let a = 0.3 * k as f64;
        let v = ball.support_function([a.cos(), a.sin()]);
        assert!(v <= 1.0 + 1e-12 && v >= (PI / 64.0).cos() - 1e-12);
    }
    assert!((ball.support_function([1.0, 0.0]) - 1.0).abs() < 1e-12);
    let square = ConvexShape::from_radial_fn(2, 64, |e| 1.0 / e[0].abs().max(e[1].abs())).unwrap();
    let d = std::f64::consts::FRAC_1_SQRT_2;
    assert!((square.support_function([d, d]) - 2f64.sqrt()).abs() < 1e-12);
    assert!(square.convexity_defect() < 1e-12);
}

#[test]
fn segment_support_in_one_dimension() {
    let seg = shape_from_speeds(1, &[([1.0, 0.0], 1.5), ([-1.0, 0.0], 1.5)]).unwrap();
    assert_eq!(seg.support_function([1.0, 0.0]), 1.5);
    assert_eq!(seg.support_function([-1.0, 0.0]), 1.5);
}

#[test]
fn constant_speeds_give_a_ball_within_the_polygonal_gap() {
    let s = shape_from_speeds(2, &uniform_directions(2, 64).into_iter().map(|e| (e, 2.0)).collect::<Vec<_>>())
        .unwrap();
    let bound = 2.0 * (1.0 - (PI / 64.0).cos());
    assert!(s.hausdorff_to(|_| 2.0) <= bound + 1e-9);
    assert!(s.convexity_defect() < 1e-12);
    assert!(s.gap() < 4.0 * bound, "{} {bound}", s.gap());
}

#[test]
fn outlier_direction_is_flagged_as_nonconvex() {
    let mut pairs: Vec<_> = uniform_directions(2, 32).into_iter().map(|e| (e, 1.0)).collect();
    pairs[5].1 = 2.0;
    let s = shape_from_speeds(2, &pairs).unwrap();
    assert!(s.convexity_defect() > 0.1);
}

#[test]
fn nonpositive_speed_is_an_error() {
    let mut pairs: Vec<_> = uniform_directions(2, 16).into_iter().map(|e| (e, 1.0)).collect();
    pairs[3].1 = 0.0;
    assert!(shape_from_speeds(2, &pairs).is_err());
    assert!(shape_from_speeds(2, &pairs[..2]).is_err());
}

#[test]
fn ellipse_recovery_improves_as_directions_double() {
    let h = ellipse_support(2.0, 1.0);
    let mut last = f64::INFINITY;
    for n in [16, 32, 64, 128] {
        let s = ConvexShape::from_radial_fn(2, n, ellipse_radius(2.0, 1.0)).unwrap();
        assert!(s.convexity_defect() < 1e-12);
        let d = s.hausdorff_to(&h);
        assert!(d < last, "n={n}: {d} !< {last}");
        assert!(s.gap() >= d - 1e-9);
        last = d;
    }
    assert!(last < 0.01);
}

#[test]
fn models_bracket_the_true_set() {
    let s = ConvexShape::from_radial_fn(2, 24, ellipse_radius(1.5, 0.7)).unwrap();
    let mut r = rng(1);
    for _ in 0..10_000 {
        let x = probe(&mut r, 2.0);
        let truth = (x[0] / 1.5).powi(2) + (x[1] / 0.7).powi(2) <= 1.0;
        if s.contains(ShapeModel::Inner, x) {
            assert!(truth);
        }
        if truth {
            assert!(s.contains(ShapeModel::Outer, x));
        }
    }
}

#[test]
fn minkowski_examples() {
    let s = ConvexShape::ball(2, 1.0, 64).unwrap();
    let g = RegionSpec::Ball { center: [0.0, 0.0], radius: 0.0 };
    let sum = minkowski_sum(&g, &s, 1.0).unwrap();
    assert_eq!(sum.contains([0.5, 0.5]), (true, true));
    assert_eq!(sum.contains([0.0, 1.01]), (false, false));
    // t = 0 gives G itself
    let b = RegionSpec::Box { lo: [0.0, 0.0], hi: [1.0, 2.0] };
    let sum0 = minkowski_sum(&b, &s, 0.0).unwrap();
    let mut r = rng(2);
    for _ in 0..2000 {
        let x = probe(&mut r, 3.0);
        let inside = b.contains(x, 2);
        let on_boundary = b.signed_distance(x, 2).abs() < 1e-9;
        if !on_boundary {
            assert_eq!(sum0.contains(x), (inside, inside));
        }
    }
}

#[test]
fn half_space_sum_is_the_front_speed_half_space() {
    let h = ellipse_support(2.0, 1.0);
    let s = ConvexShape::from_radial_fn(2, 64, ellipse_radius(2.0, 1.0)).unwrap();
    let e = [0.6, 0.8];
    let g = RegionSpec::HalfSpace { normal: e };
    let t = 3.0;
    let sum = minkowski_sum(&g, &s, t).unwrap();
    let c_in = s.model_support(ShapeModel::Inner, e);
    let c_out = s.model_support(ShapeModel::Outer, e);
    assert!(c_in <= h(e) + 1e-12 && h(e) <= c_out + 1e-12);
    let along = |d: f64| [d * e[0] - 5.0 * e[1], d * e[1] + 5.0 * e[0]];
    assert_eq!(sum.contains(along(t * c_in - 1e-6)), (true, true));
    assert_eq!(sum.contains(along(t * c_out + 1e-6)), (false, false));
}

#[test]
fn minkowski_bracket_and_monotonicity() {
    let s = ConvexShape::from_radial_fn(2, 32, ellipse_radius(1.0, 0.6)).unwrap();
    let regions = [
        RegionSpec::Ball { center: [0.5, -0.2], radius: 0.7 },
        RegionSpec::Box { lo: [-1.0, -0.5], hi: [0.5, 1.0] },
        RegionSpec::Boxes {
            boxes: vec![
                BoxSpec { lo: [-2.0, -2.0], hi: [-1.0, -1.0] },
                BoxSpec { lo: [1.0, 0.0], hi: [2.0, 0.5] },
            ],
        },
        RegionSpec::HalfSpace { normal: [1.0, 1.0] },
        RegionSpec::ComplementOfBox { lo: [-2.0, -2.0], hi: [2.0, 2.0] },
    ];
    let mut r = rng(3);
    for g in &regions {
        let a = minkowski_sum(g, &s, 0.8).unwrap();
        let b = minkowski_sum(g, &s, 1.3).unwrap();
        for _ in 0..10_000 {
            let x = probe(&mut r, 4.0);
            let (inner, outer) = a.contains(x);
            assert!(!inner || outer, "{g:?} at {x:?}");
            if outer {
                assert!(b.contains(x).1, "monotonicity {g:?} at {x:?}");
            }
            if inner {
                assert!(b.contains(x).0);
            }
        }
    }
}

#[test]
fn brute_force_minkowski_oracle_for_a_box() {
    // x ∈ G + tK iff some point of tK lands x in G; sample K densely
    let s = ConvexShape::from_radial_fn(2, 16, ellipse_radius(1.0, 0.5)).unwrap();
    let g = RegionSpec::Box { lo: [0.0, 0.0], hi: [1.0, 1.0] };
    let t = 1.0;
    let sum = minkowski_sum(&g, &s, t).unwrap();
    let mut k_pts = Vec::new();
    for i in -60..=60 {
        for j in -60..=60 {
            let p = [i as f64 / 60.0 * 1.2, j as f64 / 60.0 * 1.2];
            if s.contains(ShapeModel::Inner, p) {
                k_pts.push(p);
            }
        }
    }
    let mut r = rng(4);
    for _ in 0..400 {
        let x = probe(&mut r, 2.5);
        let hit = k_pts.iter().any(|k| g.contains([x[0] - k[0], x[1] - k[1]], 2));
        let sd = sum.inner.signed_distance(x);
        if sd < -0.03 {
            assert!(hit, "{x:?}");
        }
        if sd > 0.03 {
            assert!(!hit, "{x:?}");
        }
    }
}

#[test]
fn erosion_and_dilation_examples() {
    let ball = RegionSpec::Ball { center: [0.0, 0.0], radius: 2.0 };
    let er = erode(&ball, 0.5, 2).unwrap();
    let di = dilate(&ball, 0.5, 2).unwrap();
    assert!(er.contains([1.49, 0.0]) && !er.contains([1.51, 0.0]));
    assert!(di.contains([2.49, 0.0]) && !di.contains([2.51, 0.0]));
    let sq = RegionSpec::Box { lo: [0.0, 0.0], hi: [1.0, 1.0] };
    let e = erode(&sq, 0.25, 2).unwrap();
    assert!(e.contains([0.26, 0.74]) && !e.contains([0.24, 0.5]) && !e.contains([0.5, 0.76]));
    let i1 = RegionSpec::Box { lo: [0.0, 0.0], hi: [1.0, 0.0] };
    let e1 = erode(&i1, 0.25, 1).unwrap();
    assert!(e1.contains([0.5, 0.0]) && !e1.contains([0.2, 0.0]));
}

#[test]
fn erosion_is_inside_and_balls_fit() {
    let regions = [
        RegionSpec::Ball { center: [0.3, 0.1], radius: 1.2 },
        RegionSpec::Box { lo: [-1.0, -0.5], hi: [1.5, 1.0] },
        RegionSpec::Boxes {
            boxes: vec![
                BoxSpec { lo: [-1.0, -1.0], hi: [0.0, 1.0] },
                BoxSpec { lo: [0.0, -0.3], hi: [1.0, 0.3] },
            ],
        },
        RegionSpec::ComplementOfBox { lo: [-0.5, -0.5], hi: [0.5, 0.5] },
    ];
    let r = 0.3;
    let mut rg = rng(5);
    for g in &regions {
        let er = erode(g, r, 2).unwrap();
        let di = dilate(g, r, 2).unwrap();
        for _ in 0..2000 {
            let x = probe(&mut rg, 2.0);
            if er.contains(x) {
                assert!(g.contains(x, 2));
                for k in 0..16 {
                    let a = k as f64 * PI / 8.0;
                    let y = [x[0] + 0.999 * r * a.cos(), x[1] + 0.999 * r * a.sin()];
                    assert!(g.signed_distance(y, 2) <= 1e-12, "{g:?} {x:?}");
                }
            }
            if g.contains(x, 2) {
                assert!(di.contains(x));
            }
        }
    }
}

#[test]
fn mixed_zone_examples() {
    let s = ConvexShape::ball(2, 1.0, 64).unwrap();
    let g = RegionSpec::Ball { center: [0.0, 0.0], radius: 1.0 };
    let t = 1.0;
    let grid = Grid::covering(2, 0.05, [-3.0, -3.0], [3.0, 3.0]).unwrap();
    let sum = minkowski_sum(&g, &s, t).unwrap();
    let exact = Field::indicator(grid.clone(), 1.0, |x| sum.inner.contains(x)).unwrap();
    let z = mixed_zone(&exact, &g, &s, t, 0.05, (0.1, 0.9)).unwrap();
    assert_eq!(z.measure, 0.0);
    let zero = Field::zeros(grid.clone());
    let z = mixed_zone(&zero, &g, &s, t, 0.1, (0.1, 0.9)).unwrap();
    let inside = (0..grid.len()).filter(|&k| sum.inner.in_erosion(grid.center_of(k), 0.1)).count();
    assert_eq!(z.inside_cells, inside);
    assert!((z.measure - inside as f64 * 0.0025).abs() < 1e-12);
    // roughly the area of a disc of radius 1.9
    assert!((z.measure - PI * 1.9 * 1.9).abs() < 0.1);
    assert!(mixed_zone(&zero, &g, &s, t, 0.1, (0.9, 0.1)).is_err());
}

#[test]
fn shapes_round_trip_through_json() {
    let s = ConvexShape::from_radial_fn(2, 12, ellipse_radius(1.0, 2.0)).unwrap();
    let text = serde_json::to_string(&s).unwrap();
    let back: ConvexShape = serde_json::from_str(&text).unwrap();
    assert_eq!(s, back);
    assert!(s.to_csv().lines().count() == 13);
}
