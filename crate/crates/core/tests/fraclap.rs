use std::f64::consts::PI;

use fracsub::fraclap::*;
use fracsub::{Boundary, Field, Grid};
use proptest::prelude::*;

fn gaussian(grid: Grid) -> Field {
    Field::from_fn(grid, Boundary::Periodic, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp())
}

fn mismatch(dim: usize, m: usize, sigma: f64, radius: f64) -> f64 {
    let grid = Grid::new(dim, m, 16.0).unwrap();
    let f = gaussian(grid);
    let a = apply_spectral(&f, sigma).unwrap();
    let opts = SingularOptions {
        tail: TailMode::Periodic,
        ..Default::default()
    };
    let b = apply_singular(&f, sigma, opts).unwrap();
    a.sup_diff_within(&b, radius).unwrap() / a.sup_within(radius)
}

#[test]
fn spectral_and_singular_agree_in_one_dimension() {
    for sigma in [0.5, 1.0, 1.5] {
        let e = mismatch(1, 2048, sigma, 8.0);
        assert!(e <= 1e-3, "sigma = {sigma}: {e:.3e}");
    }
}

#[test]
fn spectral_and_singular_agree_in_two_dimensions() {
    let e = mismatch(2, 256, 0.5, 8.0);
    assert!(e <= 5e-3, "{e:.3e}");
}

#[test]
fn singular_constant_for_unit_order_in_one_dimension() {
    // c = 1/π is what makes the singular integral match |ξ| on a Gaussian
    let c = constants(1, 1.0).unwrap();
    assert!((c.c_singular - 1.0 / PI).abs() < 1e-15);
    let grid = Grid::new(1, 4096, 16.0).unwrap();
    let f = gaussian(grid);
    let opts = SingularOptions {
        tail: TailMode::Periodic,
        ..Default::default()
    };
    let a = apply_spectral(&f, 1.0).unwrap();
    let b = apply_singular(&f, 1.0, opts).unwrap();
    assert!(a.sup_diff_within(&b, 8.0).unwrap() / a.sup_norm() < 1e-4);
}

#[test]
fn decaying_tail_mode_on_a_large_box() {
    let grid = Grid::new(1, 2048, 64.0).unwrap();
    let f = gaussian(grid);
    let a = apply_spectral(&f, 0.5).unwrap();
    let b = apply_singular(&f, 0.5, SingularOptions::default()).unwrap();
    let e = a.sup_diff_within(&b, 8.0).unwrap() / a.sup_norm();
    assert!(e < 5e-3, "{e:.3e}");
}

#[test]
fn constants_at_unit_order() {
    assert!((constants(2, 1.0).unwrap().mu_sigma - 1.0).abs() < 1e-14);
    let c = riesz_constant(2, 0.5).unwrap();
    assert!((c - 0.076070).abs() < 1e-5);
}

fn trig_field(grid: Grid, coeffs: &[(f64, i32, i32)]) -> Field {
    let unit = PI / grid.half_width();
    Field::from_fn(grid, Boundary::Periodic, |x| {
        coeffs
            .iter()
            .map(|&(a, k1, k2)| a * (unit * (k1 as f64 * x[0] + k2 as f64 * x[1]) + 0.3 * k1 as f64).cos())
            .sum()
    })
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, i32, i32)>> {
    prop::collection::vec((-1.0..1.0f64, -12..12i32, -12..12i32), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectral_operator_is_self_adjoint(a in coeffs(), b in coeffs(), sigma in 0.1..1.9f64) {
        let grid = Grid::new(2, 32, 4.0).unwrap();
        let f = trig_field(grid, &a);
        let g = trig_field(grid, &b);
        let op = SpectralOperator::new(grid, sigma).unwrap();
        let af = op.apply(&f).unwrap();
        let ag = op.apply(&g).unwrap();
        let scale = (af.l2_norm() * g.l2_norm()).max(f.l2_norm() * ag.l2_norm()).max(1e-300);
        prop_assert!((af.inner(&g).unwrap() - f.inner(&ag).unwrap()).abs() <= 1e-12 * scale);
    }

    #[test]
    fn spectral_powers_compose(a in coeffs(), s1 in 0.1..1.0f64, s2 in 0.1..1.0f64) {
        let grid = Grid::new(2, 32, 4.0).unwrap();
        let f = trig_field(grid, &a);
        let twice = apply_spectral(&apply_spectral(&f, s1).unwrap(), s2).unwrap();
        let once = SpectralOperator::new(grid, s1 + s2).unwrap().apply(&f).unwrap();
        let scale = once.sup_norm().max(1e-300);
        prop_assert!(twice.sup_diff_within(&once, f64::INFINITY).unwrap() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn spectral_operator_is_linear(a in coeffs(), b in coeffs(), t in -2.0..2.0f64) {
        let grid = Grid::new(2, 32, 4.0).unwrap();
        let f = trig_field(grid, &a);
        let g = trig_field(grid, &b);
        let combo = f.zip_map(&g, |x, y| x + t * y).unwrap();
        let lhs = apply_spectral(&combo, 0.7).unwrap();
        let af = apply_spectral(&f, 0.7).unwrap();
        let ag = apply_spectral(&g, 0.7).unwrap();
        let rhs = af.zip_map(&ag, |x, y| x + t * y).unwrap();
        prop_assert!(lhs.sup_diff_within(&rhs, f64::INFINITY).unwrap() <= 1e-11 * (1.0 + rhs.sup_norm()));
    }
}
