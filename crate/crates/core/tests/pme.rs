use std::f64::consts::PI;

use fracsub::coefficient::{make_coefficient, power_tail};
use fracsub::dirichlet::DirichletOperator;
use fracsub::pme::*;
use fracsub::riesz::{admissible_exponents, decay_fit};
use fracsub::scenario::separable_refinement;
use fracsub::sublinear::solve_ball;
use fracsub::{Boundary, Field, Grid, ProblemSpec};
use proptest::prelude::*;

#[test]
fn separable_constant_examples() {
    assert!((separable_constant(2.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((separable_constant(3.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    assert!((separable_constant(1.5).unwrap() - 4.0).abs() < 1e-13);
    assert!(separable_constant(1.0).is_err());
}

#[test]
fn separable_residual_converges() {
    let spec = ProblemSpec { m: 128, ..Default::default() };
    let (coarse, fine) = separable_refinement(&spec, 1e-3).unwrap();
    assert!(coarse / fine >= 3.0, "{coarse:.3e} -> {fine:.3e}");
}

fn weak_residual(m_grid: usize, k: f64, v0_scale: f64, psi_scale: f64) -> f64 {
    let g = Grid::new(1, m_grid, 8.0).unwrap();
    let rho = power_tail(g, 4.0).unwrap();
    let v0 = Field::from_fn(g, Boundary::ZeroExtension, |x| v0_scale * (-x[0] * x[0]).exp());
    let op = FlowOperator::dirichlet(g, 4.0, 0.5).unwrap();
    let dop = DirichletOperator::new(g, 4.0, 0.5).unwrap();
    let coarse = Grid::new(1, 128, 8.0).unwrap();
    let unit = Field::from_fn(coarse, Boundary::ZeroExtension, |x| (-x[0] * x[0]).exp());
    let dt0 = global_step(&unit, rho.min(), 2.0, &FlowOperator::dirichlet(coarse, 4.0, 0.5).unwrap());
    let horizon = 0.25;
    let opts = EvolveOptions {
        rule: StepRule::Fixed(dt0 / k),
        record: true,
        max_steps: 10_000_000,
    };
    let traj = evolve(&v0, &rho, &op, 2.0, &[horizon], opts).unwrap();
    let phi = Field::from_fn(g, Boundary::ZeroExtension, |x| {
        if x[0].abs() < 4.0 {
            let s = (x[0] + 4.0) / 8.0;
            psi_scale * ((PI * s).sin() + 0.3 * (3.0 * PI * s).sin())
        } else {
            0.0
        }
    });
    let dphi = phi.clone();
    weak_form_residual(
        &traj.history,
        &rho,
        &dop,
        2.0,
        move |t| phi.map(|x| x * (PI * t / horizon).sin().powi(2)),
        move |t| dphi.map(|x| x * (2.0 * PI * t / horizon).sin() * PI / horizon),
    )
    .unwrap()
}

#[test]
fn weak_form_residual_converges() {
    let coarse = weak_residual(128, 1.0, 1.0, 1.0);
    let fine = weak_residual(256, 4.0, 1.0, 1.0);
    assert!(coarse / fine >= 3.0, "{coarse:.3e} -> {fine:.3e}");
    assert_eq!(weak_residual(128, 1.0, 0.0, 1.0), 0.0);
    assert_eq!(weak_residual(128, 1.0, 1.0, 0.0), 0.0);
}

#[test]
fn mass_and_sup_do_not_increase() {
    let g = Grid::new(2, 64, 8.0).unwrap();
    let rho = power_tail(g, 4.0).unwrap();
    let v0 = Field::from_fn(g, Boundary::ZeroExtension, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp());
    let traj = evolve_ball(&v0, &rho, 4.0, 2.0, 0.5, &[0.5, 1.0, 2.0, 4.0]).unwrap();
    for w in traj.samples.windows(2) {
        assert!(w[1].mass <= w[0].mass * (1.0 + 1e-12));
        assert!(w[1].v.sup_norm() <= w[0].v.sup_norm());
        assert!(w[1].v.min() >= 0.0);
    }
    for s in &traj.samples[1..] {
        assert!(s.margin <= 0.5 + 1e-12);
    }
}

#[test]
fn torus_flow_conserves_mass() {
    let g = Grid::new(1, 64, 8.0).unwrap();
    let rho = Field::constant(g, Boundary::Periodic, 1.0);
    let v0 = Field::from_fn(g, Boundary::Periodic, |x| 1.0 + 0.5 * (PI * x[0] / 8.0).cos());
    let op = FlowOperator::torus(g, 1.0).unwrap();
    let traj = evolve(&v0, &rho, &op, 2.0, &[0.5, 1.0], EvolveOptions::default()).unwrap();
    let m0 = traj.samples[0].mass;
    for s in &traj.samples {
        assert!((s.mass - m0).abs() <= 1e-10 * m0, "{} vs {m0}", s.mass);
    }
    // oscillation decays towards the mean
    let last = &traj.last().v;
    assert!(last.sup_norm() - last.min() < v0.sup_norm() - v0.min());
}

#[test]
fn evolution_rejects_bad_input() {
    let g = Grid::new(1, 32, 4.0).unwrap();
    let rho = power_tail(g, 4.0).unwrap();
    let v0 = Field::constant(g, Boundary::ZeroExtension, 1.0);
    assert!(evolve_ball(&v0, &rho, 2.0, 1.0, 0.5, &[1.0]).is_err());
    assert!(evolve_ball(&v0, &rho, 2.0, 2.0, 0.5, &[1.0, 0.5]).is_err());
    let neg = v0.map(|x| -x);
    assert!(evolve_ball(&neg, &rho, 2.0, 2.0, 0.5, &[1.0]).is_err());
}

#[test]
fn separable_time_integral_inherits_elliptic_decay() {
    let spec = ProblemSpec::default();
    let rho = make_coefficient(&spec).unwrap();
    let (u, _) = solve_ball(&rho, 16.0, &spec).unwrap();
    let sep = SeparableSolution::new(u.clone(), spec.pme_exponent(), 1.0).unwrap();
    let integral = sep.time_integral_of_power(1.0);
    let target = admissible_exponents(&spec).unwrap();
    let a = decay_fit(&integral, (4.0, 8.0), target, 16).unwrap();
    let b = decay_fit(&u, (4.0, 8.0), target, 16).unwrap();
    assert!((a.slope - b.slope).abs() < 1e-10);
}

#[test]
fn uniqueness_experiment_passes() {
    let spec = ProblemSpec::default();
    let rep = uniqueness_experiment(&spec).unwrap();
    assert!(rep.pass);
    assert!(rep.order_violation <= COMPARISON_TOLERANCE);
    assert!(rep.comparison_violation <= COMPARISON_TOLERANCE);
    for s in &rep.samples {
        assert!(s.ratio_measured <= s.ratio_bound * (1.0 + 1e-2), "{s:?}");
    }
    let decay = rep.decay.unwrap();
    assert!(decay.slope <= -1.3, "{}", decay.slope);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ordered_data_stay_ordered(
        a in 0.1..2.0f64,
        extra in 0.0..1.0f64,
        c in -2.0..2.0f64,
    ) {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let rho = power_tail(g, 4.0).unwrap();
        let low = Field::from_fn(g, Boundary::ZeroExtension, |x| a * (-(x[0] - c).powi(2)).exp());
        let high = Field::from_fn(g, Boundary::ZeroExtension, |x| {
            a * (-(x[0] - c).powi(2)).exp() + extra * (-x[0] * x[0] / 4.0).exp()
        });
        let times = [0.25, 1.0];
        // a common fixed step keeps both flows on the same time levels
        let op = FlowOperator::dirichlet(g, 4.0, 0.5).unwrap();
        let dt = global_step(&high, rho.min(), 2.0, &op);
        let opts = EvolveOptions { rule: StepRule::Fixed(dt), ..Default::default() };
        let tl = evolve(&low, &rho, &op, 2.0, &times, opts).unwrap();
        let th = evolve(&high, &rho, &op, 2.0, &times, opts).unwrap();
        for (l, h) in tl.samples.iter().zip(&th.samples) {
            let gap = l.v.values().iter().zip(h.v.values()).fold(0.0f64, |m, (x, y)| m.max(x - y));
            prop_assert!(gap <= 1e-12, "gap {gap:e} at t = {}", l.t);
        }
    }
}
