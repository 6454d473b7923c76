//! Riesz potential `K^σ * ρ`, finiteness diagnostics and decay analysis.

use libm::tgamma;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{reject, Error, Result};
use crate::fraclap::{check_order, riesz_constant, sphere_area};
use crate::grid::{pairwise_sum, Boundary, Field, Grid};
use crate::spec::ProblemSpec;
use crate::transform::FftNd;

/// Kernel value assigned to the `w = 0` node for `|w|^{-p}`, `0 < p < N`.
///
/// Chosen so that the lattice sum of `|w|^{-p} e^{-|w|^2/δ^2}` plus this
/// weight equals the exact integral; this removes the leading `h^{N-p}`
/// error of the punctured lattice sum and keeps the weight positive.
fn origin_weight(grid: &Grid, p: f64) -> f64 {
    let dim = grid.dim();
    let h = grid.spacing();
    let delta = 6.0 * h;
    let reach = (7.0 * delta / h).ceil() as i64;
    let side = (2 * reach + 1) as usize;
    let vol = grid.cell_volume();
    let terms: Vec<f64> = (0..side.pow(dim as u32))
        .filter_map(|mut flat| {
            let mut r2 = 0.0;
            for _ in 0..dim {
                let k = (flat % side) as i64 - reach;
                flat /= side;
                r2 += (k as f64 * h).powi(2);
            }
            (r2 > 0.0).then(|| r2.powf(-p / 2.0) * (-r2 / (delta * delta)).exp() * vol)
        })
        .collect();
    let exact = sphere_area(dim) * delta.powf(dim as f64 - p) * tgamma((dim as f64 - p) / 2.0) / 2.0;
    (exact - pairwise_sum(&terms)) / vol
}

/// Linear convolution `Σ_z k(x - z) f(z) h^N` of a grid field with a radial
/// kernel, zero-padded so that nothing wraps. `kernel(r)` is evaluated for
/// `r > 0`; the origin cell gets `origin`.
fn radial_convolution(f: &Field, kernel: impl Fn(f64) -> f64 + Sync, origin: f64) -> Field {
    let grid = *f.grid();
    let dim = grid.dim();
    let m = grid.m();
    let h = grid.spacing();
    let vol = grid.cell_volume();
    if dim == 1 {
        let table: Vec<f64> = (0..m)
            .map(|d| if d == 0 { origin } else { kernel(d as f64 * h) })
            .collect();
        let v = f.values();
        let out = (0..m)
            .into_par_iter()
            .map(|i| {
                let terms: Vec<f64> = (0..m).map(|j| table[i.abs_diff(j)] * v[j]).collect();
                pairwise_sum(&terms) * vol
            })
            .collect();
        return Field::from_parts(grid, Boundary::ZeroExtension, out);
    }
    let n = 2 * m;
    let fft = FftNd::new(dim, n);
    let total = n.pow(dim as u32);
    let kern: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut r2 = 0.0;
            for _ in 0..dim {
                let k = crate::transform::signed_index(idx % n, n) * h;
                r2 += k * k;
                idx /= n;
            }
            if r2 == 0.0 {
                origin
            } else {
                kernel(r2.sqrt())
            }
        })
        .collect();
    let mut padded = vec![Complex64::new(0.0, 0.0); total];
    for (idx, &v) in f.values().iter().enumerate() {
        let multi = grid.unravel(idx);
        let flat = multi[..dim].iter().fold(0, |acc, &i| acc * n + i);
        padded[flat] = Complex64::new(v, 0.0);
    }
    fft.forward(&mut padded);
    let kern_hat = fft.forward_real(&kern);
    for (a, b) in padded.iter_mut().zip(&kern_hat) {
        *a *= b.re;
    }
    fft.inverse(&mut padded);
    let out = (0..grid.len())
        .map(|idx| {
            let multi = grid.unravel(idx);
            let flat = multi[..dim].iter().fold(0, |acc, &i| acc * n + i);
            padded[flat].re * vol
        })
        .collect();
    Field::from_parts(grid, Boundary::ZeroExtension, out)
}

/// `K^σ * ρ` with `K^σ(x) = c |x|^{σ-N}`; `ρ` is taken to vanish outside
/// the box.
pub fn riesz_convolve(rho: &Field, sigma: f64) -> Result<Field> {
    let grid = *rho.grid();
    let c = riesz_constant(grid.dim(), sigma)?;
    let p = grid.dim() as f64 - sigma;
    let origin = c * origin_weight(&grid, p);
    Ok(radial_convolution(rho, |r| c * r.powf(-p), origin))
}

/// Diagnostics for the finiteness of `K^σ * ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Finiteness {
    /// `∫ |ρ(y)| / (1 + |y|^{N-σ}) dy`.
    pub tail_integral: f64,
    /// Share of `tail_integral` coming from the outer quarter of the box.
    pub outer_fraction: f64,
    /// `sup_x ∫_{B(x,1)} |ρ(y)| |x-y|^{σ-N} dy`.
    pub local_sup: f64,
    /// `‖ρ‖∞ ∫_{B(0,1)} |z|^{σ-N} dz`.
    pub local_majorant: f64,
    pub pass: bool,
}

/// Largest outer-quarter share of the tail integral accepted as converged.
pub const OUTER_FRACTION_CEILING: f64 = 0.05;

pub fn finiteness_check(rho: &Field, sigma: f64) -> Result<Finiteness> {
    let grid = *rho.grid();
    check_order(sigma)?;
    let dim = grid.dim();
    let p = dim as f64 - sigma;
    if p <= 0.0 {
        return Err(Error::Assumption(format!(
            "finiteness criteria need sigma < N (sigma = {sigma}, N = {dim})"
        )));
    }
    let abs = rho.map(f64::abs);
    let outer = 0.75 * grid.half_width();
    let mut inner_terms = Vec::new();
    let mut outer_terms = Vec::new();
    for (idx, &v) in abs.values().iter().enumerate() {
        let w = v / (1.0 + grid.radius(idx).powf(p));
        if grid.box_radius(idx) >= outer {
            outer_terms.push(w);
        } else {
            inner_terms.push(w);
        }
    }
    let vol = grid.cell_volume();
    let outer_part = pairwise_sum(&outer_terms) * vol;
    let tail_integral = pairwise_sum(&inner_terms) * vol + outer_part;
    let outer_fraction = if tail_integral > 0.0 { outer_part / tail_integral } else { 0.0 };
    let local = radial_convolution(
        &abs,
        |r| if r < 1.0 { r.powf(-p) } else { 0.0 },
        origin_weight(&grid, p),
    );
    let local_sup = local.max().max(0.0);
    let local_majorant = abs.sup_norm() * sphere_area(dim) / sigma;
    Ok(Finiteness {
        tail_integral,
        outer_fraction,
        local_sup,
        local_majorant,
        pass: outer_fraction <= OUTER_FRACTION_CEILING && tail_integral.is_finite(),
    })
}

/// A point of the admissible exponent region and its decay exponent
/// `σ - ν - N/r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissible {
    pub nu: f64,
    pub r: f64,
    pub exponent: f64,
}

/// Open interval of admissible `r` for a given `ν`:
/// `(max{2/σ, N/(β-ν)}, N/(N-ν))`, requiring `N(2-σ)/2 < ν < N`.
pub fn r_range(dim: usize, sigma: f64, beta: f64, nu: f64) -> Result<(f64, f64)> {
    let n = dim as f64;
    if !(nu > n * (2.0 - sigma) / 2.0 && nu < n) {
        return reject(format!(
            "nu = {nu} outside the open interval ({}, {n})",
            n * (2.0 - sigma) / 2.0
        ));
    }
    if beta <= nu {
        return reject(format!("nu = {nu} must stay below beta = {beta}"));
    }
    let lo = (2.0 / sigma).max(n / (beta - nu));
    let hi = n / (n - nu);
    if lo >= hi {
        return reject(format!("empty r range at nu = {nu}"));
    }
    Ok((lo, hi))
}

/// Scans the admissible `(ν, r)` region and returns the point with the
/// largest exponent.
///
/// Since `r < N/(N-ν)`, every admissible exponent lies below `σ - N`, while
/// `K^σ * ρ ≥ c |x|^{σ-N}` far out for any nonnegative `ρ ≢ 0`. The supremum
/// `σ - N` is therefore the only exponent the potential can actually meet;
/// it is approached as `r → N/(N-ν)` and never attained.
pub fn admissible_exponents(spec: &ProblemSpec) -> Result<Admissible> {
    let n = spec.dim as f64;
    if spec.beta <= n {
        return Err(Error::Assumption(format!(
            "decay exponents need beta > N (beta = {}, N = {})",
            spec.beta, spec.dim
        )));
    }
    check_order(spec.sigma)?;
    let lower = n * (2.0 - spec.sigma) / 2.0;
    let steps = 400;
    let mut best: Option<Admissible> = None;
    for i in 1..steps {
        let nu = lower + (n - lower) * i as f64 / steps as f64;
        let Ok((lo, hi)) = r_range(spec.dim, spec.sigma, spec.beta, nu) else {
            continue;
        };
        for j in 1..steps {
            let r = lo + (hi - lo) * j as f64 / steps as f64;
            let exponent = spec.sigma - nu - n / r;
            if best.map_or(true, |b| exponent > b.exponent) {
                best = Some(Admissible { nu, r, exponent });
            }
        }
    }
    best.ok_or_else(|| Error::Assumption("no admissible exponent".into()))
}

/// Log–log fit of a radially decaying field.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub nu: f64,
    pub r: f64,
    pub exponent: f64,
    pub window: (f64, f64),
    pub slope: f64,
    /// Prefactor `C` of the fitted law `C |x|^{slope}`.
    pub constant: f64,
    /// `(mean log|x|, mean log u)` per radial shell.
    pub shells: Vec<(f64, f64)>,
    pub pass: bool,
}

/// Slope allowance above the admissible exponent.
pub const DECAY_SLACK: f64 = 0.2;

/// Least-squares slope of `log u` against `log|x|` over geometric radial
/// shells in `[a, b]`. Each shell contributes the mean of `log|x|` and of
/// `log u` over its nodes.
pub fn decay_fit(u: &Field, window: (f64, f64), target: Admissible, shells: usize) -> Result<DecayFit> {
    let (a, b) = window;
    let grid = u.grid();
    if !(a > 0.0 && b > a) {
        return reject(format!("invalid fit window [{a}, {b}]"));
    }
    if b > grid.half_width() / 2.0 + 1e-12 {
        return reject(format!(
            "fit window end {b} exceeds L/2 = {}",
            grid.half_width() / 2.0
        ));
    }
    let shells = shells.max(2);
    let ratio = (b / a).ln() / shells as f64;
    let mut acc = vec![(0.0, 0.0, 0usize); shells];
    for (idx, &v) in u.values().iter().enumerate() {
        let r = grid.radius(idx);
        if r < a || r > b {
            continue;
        }
        if v <= 0.0 {
            return reject(format!("field is not positive in the fit window (value {v} at |x| = {r})"));
        }
        let s = (((r / a).ln() / ratio) as usize).min(shells - 1);
        acc[s].0 += r.ln();
        acc[s].1 += v.ln();
        acc[s].2 += 1;
    }
    let points: Vec<(f64, f64)> = acc
        .iter()
        .filter(|s| s.2 > 0)
        .map(|&(lx, ly, c)| (lx / c as f64, ly / c as f64))
        .collect();
    if points.len() < 2 {
        return reject("fit window holds fewer than two populated shells");
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let constant = (my - slope * mx).exp();
    Ok(DecayFit {
        nu: target.nu,
        r: target.r,
        exponent: target.exponent,
        window,
        slope,
        constant,
        shells: points,
        pass: slope <= target.exponent + DECAY_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::{bump, power_tail};

    #[test]
    fn zero_density() {
        let g = Grid::new(2, 32, 4.0).unwrap();
        let z = Field::zeros(g, Boundary::Periodic);
        assert_eq!(riesz_convolve(&z, 0.5).unwrap().sup_norm(), 0.0);
        let f = finiteness_check(&z, 0.5).unwrap();
        assert!(f.pass && f.tail_integral == 0.0 && f.local_sup == 0.0);
    }

    #[test]
    fn rejects_sigma_at_least_n() {
        let g = Grid::new(1, 64, 4.0).unwrap();
        let rho = bump(g, 1.0);
        assert!(matches!(riesz_convolve(&rho, 1.0), Err(Error::Assumption(_))));
    }

    #[test]
    fn origin_weight_positive() {
        for (dim, m) in [(1, 256), (2, 64), (3, 32)] {
            let g = Grid::new(dim, m, 4.0).unwrap();
            for p in [0.2, 0.5, 0.99, dim as f64 - 0.3] {
                if p > 0.0 && p < dim as f64 {
                    assert!(origin_weight(&g, p) > 0.0, "dim {dim} p {p}");
                }
            }
        }
    }

    #[test]
    fn one_dimensional_sum_uses_kernel() {
        let g = Grid::new(1, 128, 8.0).unwrap();
        let rho = bump(g, 2.0);
        let u = riesz_convolve(&rho, 0.5).unwrap();
        let h = g.spacing();
        let c = riesz_constant(1, 0.5).unwrap();
        let origin = c * origin_weight(&g, 0.5);
        let i = 70;
        let mut direct = 0.0;
        for j in 0..128 {
            let d = (i as f64 - j as f64).abs() * h;
            let k = if d == 0.0 { origin } else { c * d.powf(-0.5) };
            direct += k * rho.values()[j] * h;
        }
        assert!((direct - u.values()[i]).abs() < 1e-13);
    }

    #[test]
    fn admissible_scan_and_ranges() {
        let spec = ProblemSpec::default();
        let best = admissible_exponents(&spec).unwrap();
        assert!(best.exponent < -1.5 && best.exponent > -1.51);
        let (lo, hi) = r_range(2, 0.5, 4.0, 1.9).unwrap();
        assert!((lo - 4.0).abs() < 1e-12 && (hi - 20.0).abs() < 1e-9);
        assert!(r_range(2, 0.5, 4.0, 2.0).is_err());
        let bad = ProblemSpec {
            beta: 2.0,
            ..Default::default()
        };
        assert!(admissible_exponents(&bad).is_err());
    }

    #[test]
    fn exact_power_law_slope() {
        let g = Grid::new(2, 256, 32.0).unwrap();
        let u = Field::from_fn(g, Boundary::Periodic, |x| {
            (x[0] * x[0] + x[1] * x[1]).max(1e-6).powf(-0.75)
        });
        let target = Admissible { nu: 1.9, r: 10.0, exponent: -1.6 };
        let fit = decay_fit(&u, (8.0, 16.0), target, 24).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-3);
        assert!((fit.constant - 1.0).abs() < 1e-3);
        assert!(fit.pass);
        let flat = Field::constant(g, Boundary::Periodic, 2.0);
        let fit = decay_fit(&flat, (8.0, 16.0), target, 24).unwrap();
        assert!(fit.slope.abs() < 1e-12 && !fit.pass);
        assert!(decay_fit(&flat, (8.0, 20.0), target, 24).is_err());
        let neg = flat.map(|v| -v);
        assert!(decay_fit(&neg, (8.0, 16.0), target, 24).is_err());
    }

    #[test]
    fn local_integral_respects_majorant() {
        let g = Grid::new(2, 128, 16.0).unwrap();
        let rho = power_tail(g, 4.0).unwrap();
        let f = finiteness_check(&rho, 0.5).unwrap();
        assert!(f.pass);
        assert!(f.local_sup <= f.local_majorant);
        assert!((f.local_majorant - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn constant_density_fails_and_grows() {
        let mut prev = 0.0;
        for l in [8.0, 16.0, 32.0] {
            let g = Grid::new(2, 64, l).unwrap();
            let rho = Field::constant(g, Boundary::Periodic, 1.0);
            let f = finiteness_check(&rho, 0.5).unwrap();
            assert!(!f.pass);
            assert!(f.tail_integral > prev);
            prev = f.tail_integral;
        }
    }
}
