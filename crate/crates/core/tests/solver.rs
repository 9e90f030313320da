use kpplab::medium::{
    sample_medium, CoefficientField, Diffusion, GeneratorSpec, KernelSpec, MediumRealization, Modulation, Profile,
    ReactionSpec,
};
use kpplab::solver::{
    solve, step_local, step_nonlocal, supersolution_check, supersolution_speed, Exterior, Field, Grid, Solver,
    StepperConfig,
};
use kpplab::Error;
use proptest::prelude::*;

fn line(h: f64, half: f64) -> Grid {
    Grid::covering(1, h, [-half, 0.0], [half, 0.0]).unwrap()
}

fn plane(h: f64, half: f64) -> Grid {
    Grid::covering(2, h, [-half, -half], [half, half]).unwrap()
}

fn heat(dim: usize, a: f64, b: [f64; 2]) -> MediumRealization {
    MediumRealization::homogeneous(dim, a, b, 0.0)
}

fn set_cross(m: &mut MediumRealization, a12: f64) {
    if let Diffusion::Local(c) = &mut m.diffusion {
        c.a12 = CoefficientField::constant(a12);
    }
}

#[test]
fn constant_states_are_fixed_points() {
    let m = MediumRealization::homogeneous(2, 1.0, [0.3, -0.2], 1.0);
    let one = Field::ones(plane(0.5, 4.0));
    let out = solve(&one, &m, 3.0, &[], &StepperConfig::default()).unwrap();
    assert!(out.field.values.iter().all(|&v| v == 1.0));
    let zero = Field::zeros(plane(0.5, 4.0));
    let out = solve(&zero, &m, 3.0, &[], &StepperConfig::default()).unwrap();
    assert!(out.field.values.iter().all(|&v| v == 0.0));
}

#[test]
fn spatially_flat_data_follows_the_logistic_ode() {
    // in the middle of a wide domain the solution is the ODE solution
    let m = MediumRealization::homogeneous(1, 1.0, [0.0; 2], 1.0);
    let c = 0.1;
    let u0 = Field::from_fn(line(0.1, 60.0), |_| c).unwrap();
    let t = 3.0;
    let out = solve(&u0, &m, t, &[], &StepperConfig::unmonitored()).unwrap();
    let exact = c * t.exp() / (1.0 - c + c * t.exp());
    let mid = out.field.value_at([0.0, 0.0]);
    assert!((mid - exact).abs() < 5e-3, "{mid} vs {exact}");
}

#[test]
fn heat_kernel_is_reproduced() {
    // u_t = u_xx from a Gaussian of variance s0
    let s0 = 1.0;
    let t = 2.0;
    let m = heat(1, 1.0, [0.0; 2]);
    let u0 = Field::from_fn(line(0.05, 25.0), |x| 0.5 * (-x[0] * x[0] / (2.0 * s0)).exp()).unwrap();
    let out = solve(&u0, &m, t, &[], &StepperConfig::default()).unwrap();
    let s = s0 + 2.0 * t;
    let mut worst: f64 = 0.0;
    for (k, &v) in out.field.values.iter().enumerate() {
        let x = out.field.grid.center_of(k)[0];
        let exact = 0.5 * (s0 / s).sqrt() * (-x * x / (2.0 * s)).exp();
        worst = worst.max((v - exact).abs());
    }
    assert!(worst < 2e-4, "{worst}");
}

#[test]
fn drift_transports_mass_against_its_direction() {
    // u_t = u_xx + b u_x moves the profile with velocity -b
    let b = 0.8;
    let t = 3.0;
    let m = heat(1, 1.0, [b, 0.0]);
    let u0 = Field::from_fn(line(0.05, 30.0), |x| 0.5 * (-x[0] * x[0]).exp()).unwrap();
    let out = solve(&u0, &m, t, &[], &StepperConfig::default()).unwrap();
    let f = &out.field;
    let mass: f64 = f.values.iter().sum();
    let center: f64 = f.values.iter().enumerate().map(|(k, v)| v * f.grid.center_of(k)[0]).sum::<f64>() / mass;
    assert!((center + b * t).abs() < 1e-6, "{center}");
    assert!((f.mass() - u0.mass()).abs() < 1e-9);
}

#[test]
fn mixed_derivative_produces_the_right_covariance() {
    // for u_t = Σ A_ij ∂_ij u the second moments grow by 2At
    let t = 1.0;
    let mut m = heat(2, 1.0, [0.0; 2]);
    set_cross(&mut m, 0.4);
    let u0 = Field::from_fn(plane(0.1, 9.0), |x| 0.5 * (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
    let f0 = &u0;
    let moment = |f: &Field, p: usize, q: usize| -> f64 {
        let mass: f64 = f.values.iter().sum();
        f.values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let x = f.grid.center_of(k);
                v * x[0].powi(p as i32) * x[1].powi(q as i32)
            })
            .sum::<f64>()
            / mass
    };
    let out = solve(&u0, &m, t, &[], &StepperConfig::default()).unwrap();
    let f1 = &out.field;
    assert!((moment(f1, 1, 1) - moment(f0, 1, 1) - 2.0 * 0.4 * t).abs() < 1e-3);
    assert!((moment(f1, 2, 0) - moment(f0, 2, 0) - 2.0 * t).abs() < 1e-3);
    // negative cross term uses the other diagonal
    set_cross(&mut m, -0.4);
    let out = solve(&u0, &m, t, &[], &StepperConfig::default()).unwrap();
    assert!((moment(&out.field, 1, 1) + 2.0 * 0.4 * t).abs() < 1e-3);
}

#[test]
fn non_positive_mixed_stencil_is_rejected() {
    let mut m = heat(2, 1.0, [0.0; 2]);
    set_cross(&mut m, 1.2);
    let u0 = Field::zeros(plane(0.5, 2.0));
    assert!(matches!(
        solve(&u0, &m, 1.0, &[], &StepperConfig::default()),
        Err(Error::MixedStencil { .. })
    ));
}

#[test]
fn steps_above_the_stability_limit_are_rejected() {
    let m = MediumRealization::homogeneous(1, 1.0, [0.0; 2], 1.0);
    let u0 = Field::zeros(line(0.1, 1.0));
    assert!(step_local(&u0, &m, 1.0 / 201.0).is_ok());
    assert!(matches!(step_local(&u0, &m, 1.0 / 200.0), Err(Error::Cfl { .. })));
    let cfg = StepperConfig {
        dt: Some(0.01),
        ..StepperConfig::default()
    };
    assert!(matches!(Solver::new(&u0, &m, &cfg), Err(Error::Cfl { .. })));
}

#[test]
fn restart_from_an_integer_snapshot_is_bitwise_identical() {
    let mut spec = GeneratorSpec::new("checkerboard", 2);
    spec.modulation_floor = Some(0.5);
    let m = sample_medium(&spec, 11).unwrap();
    let u0 = Field::indicator(plane(0.25, 8.0), 0.5, |x| x[0] * x[0] + x[1] * x[1] < 1.0).unwrap();
    let cfg = StepperConfig::unmonitored();
    let full = solve(&u0, &m, 4.0, &[2.0], &cfg).unwrap();
    let rest = solve(&full.observations[0], &m, 4.0, &[], &cfg).unwrap();
    assert_eq!(full.field.values, rest.field.values);
    assert_eq!(full.field.time, 4.0);
}

#[test]
fn monitor_reports_a_domain_that_is_too_small() {
    let m = MediumRealization::homogeneous(1, 1.0, [0.0; 2], 1.0);
    let u0 = Field::indicator(line(0.1, 3.0), 0.5, |x| x[0].abs() < 1.0).unwrap();
    let err = solve(&u0, &m, 3.0, &[], &StepperConfig::default()).unwrap_err();
    assert!(matches!(err, Error::DomainTooSmall(_)));
}

#[test]
fn comparison_principle_holds() {
    let spec = GeneratorSpec::new("fourier", 2);
    let m = sample_medium(&spec, 5).unwrap();
    let g = plane(0.25, 6.0);
    let lo = Field::indicator(g.clone(), 0.3, |x| x[0].abs() + x[1].abs() < 1.5).unwrap();
    let hi = Field::from_fn(g, |x| if x[0].abs() + x[1].abs() < 1.5 { 0.6 } else { 0.1 * (-x[0].abs()).exp() })
        .unwrap();
    let cfg = StepperConfig::unmonitored();
    let a = solve(&lo, &m, 2.0, &[], &cfg).unwrap().field;
    let b = solve(&hi, &m, 2.0, &[], &cfg).unwrap().field;
    assert!(a.values.iter().zip(&b.values).all(|(x, y)| x <= y));
}

#[test]
fn solution_is_periodic_in_a_time_periodic_medium() {
    // flat data: the ODE with a 1-periodic rate returns to the same phase map
    let mut m = MediumRealization::homogeneous(1, 1.0, [0.0; 2], 1.0);
    m.reaction.fu0.modulation = Some(Modulation { floor: 0.2 });
    let g = line(0.1, 30.0);
    let u0 = Field::from_fn(g, |_| 0.05).unwrap();
    let cfg = StepperConfig::unmonitored();
    let one = solve(&u0, &m, 1.0, &[], &cfg).unwrap().field;
    // integral of the modulation over a period is floor + (1-floor)/2
    let rate: f64 = 0.2 + 0.8 * 0.5;
    let c: f64 = 0.05;
    let exact = c * rate.exp() / (1.0 - c + c * rate.exp());
    assert!((one.value_at([0.0, 0.0]) - exact).abs() < 2e-3);
}

#[test]
fn supersolution_barrier_holds_and_detects_a_fast_front() {
    let m = MediumRealization::homogeneous(1, 1.0, [0.0; 2], 1.0);
    let a = supersolution_speed(&m);
    assert_eq!(a, 3.0);
    let x0 = [0.0, 0.0];
    let g = line(0.1, 40.0);
    let u0 = Field::from_fn(g, |x| 0.5 * (1.0f64).min((-(x[0] - x0[0])).exp())).unwrap();
    let cfg = StepperConfig::unmonitored();
    let obs: Vec<f64> = (1..=5).map(|k| k as f64).collect();
    let sol = solve(&u0, &m, 5.0, &obs, &cfg).unwrap();
    assert!(supersolution_check(&sol.observations, [1.0, 0.0], x0, a));
    let fast = m.with_reaction_gain(16.0);
    let sol = solve(&u0, &fast, 5.0, &obs, &cfg).unwrap();
    assert!(!supersolution_check(&sol.observations, [1.0, 0.0], x0, a));
}

fn unit_kernel(dim: usize) -> KernelSpec {
    KernelSpec::standard(dim, 1.0, CoefficientField::constant(1.0))
}

#[test]
fn jump_operator_conserves_mass_and_fixes_one() {
    let k = unit_kernel(1);
    let r0 = ReactionSpec::new(CoefficientField::constant(0.0), Profile::Fisher);
    let u0 = Field::from_fn(line(0.1, 40.0), |x| 0.5 * (-x[0] * x[0]).exp()).unwrap();
    let u1 = step_nonlocal(&u0, &k, &r0, 0.01).unwrap();
    assert!((u1.mass() - u0.mass()).abs() < 1e-12);
    let one = Field::ones(line(0.1, 5.0));
    let r = ReactionSpec::new(CoefficientField::constant(1.0), Profile::Fisher);
    let s = step_nonlocal(&one, &k, &r, 0.01).unwrap();
    assert!(s.values.iter().all(|&v| v == 1.0));
    assert!(matches!(step_nonlocal(&u0, &k, &r, 10.0), Err(Error::Cfl { .. })));
}

#[test]
fn nonlocal_second_moment_grows_at_the_kernel_rate() {
    // d/dt E[x²] = Σ_ν w_ν ν² for the pure jump process
    let k = unit_kernel(1);
    let r0 = ReactionSpec::new(CoefficientField::constant(0.0), Profile::Fisher);
    let h = 0.1;
    let u0 = Field::from_fn(line(h, 60.0), |x| 0.5 * (-x[0] * x[0]).exp()).unwrap();
    let m = MediumRealization {
        dim: 1,
        diffusion: Diffusion::Nonlocal(k.clone()),
        reaction: r0,
        ellipticity: 0.0,
        seed: 0,
        shift: [0.0; 2],
    };
    let t = 1.0;
    let out = solve(&u0, &m, t, &[], &StepperConfig::unmonitored()).unwrap().field;
    let second = |f: &Field| {
        f.values.iter().enumerate().map(|(i, v)| v * f.grid.center_of(i)[0].powi(2)).sum::<f64>()
            / f.values.iter().sum::<f64>()
    };
    let tail = kpplab::solver::tail_radius(&k.radial, 1e-8);
    let mut rate = 0.0;
    let mut j = 1;
    while j as f64 * h <= tail {
        let r = j as f64 * h;
        rate += 2.0 * k.radial.eval(r) * h * r * r;
        j += 1;
    }
    let grown = second(&out) - second(&u0);
    assert!((grown - rate * t).abs() < 1e-3 * rate, "{grown} vs {rate}");
}

#[test]
fn exterior_one_is_supported() {
    let m = MediumRealization::homogeneous(1, 1.0, [0.0; 2], 1.0);
    let g = line(0.1, 5.0);
    let mut u0 = Field::ones(g);
    for v in u0.values.iter_mut().take(20) {
        *v = 0.5;
    }
    assert_eq!(u0.exterior, Exterior::One);
    let out = solve(&u0, &m, 1.0, &[], &StepperConfig::default()).unwrap();
    assert!(out.field.min() > 0.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn explicit_step_stays_in_the_unit_interval(seed in 0u64..1000, vals in proptest::collection::vec(0.0f64..=1.0, 81)) {
        let spec = GeneratorSpec::new("checkerboard", 2);
        let m = sample_medium(&spec, seed).unwrap();
        let g = Grid::new(2, 0.5, [0.0, 0.0], [9, 9]).unwrap();
        let u0 = Field { grid: g.clone(), values: vals, time: 0.0, exterior: Exterior::Zero };
        let dt = kpplab::solver::cfl_dt(&g, &m).unwrap();
        let u1 = step_local(&u0, &m, dt).unwrap();
        prop_assert!(u1.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
