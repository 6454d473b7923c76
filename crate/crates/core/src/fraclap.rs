//! Whole-space fractional Laplacian `(-Δ)^{σ/2}` on the periodic box, by a
//! Fourier multiplier and by a principal-value singular integral, plus the
//! normalization constants shared with the Riesz potential and the
//! extension problem.

use std::f64::consts::PI;

use libm::tgamma;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{reject, Error, Result};
use crate::grid::{pairwise_sum, Field, Grid};
use crate::transform::{frequency_magnitudes, FftNd};

/// Normalization constants for a given `(N, σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Constant in front of the principal-value integral.
    pub c_singular: f64,
    /// Constant of the Riesz kernel `c |x|^{σ-N}`; `None` when `σ ≥ N`.
    pub c_riesz: Option<f64>,
    /// Constant of the weighted conormal derivative in the extension problem.
    pub mu_sigma: f64,
}

pub fn check_order(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma < 2.0 {
        Ok(())
    } else {
        reject(format!("fractional order sigma must lie in (0,2), got {sigma}"))
    }
}

/// Surface area of the unit sphere in `R^N`.
pub fn sphere_area(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * PI.powf(n / 2.0) / tgamma(n / 2.0)
}

/// Volume of the unit ball in `R^N`.
pub fn ball_volume(dim: usize) -> f64 {
    sphere_area(dim) / dim as f64
}

pub fn constants(dim: usize, sigma: f64) -> Result<Constants> {
    if !(1..=3).contains(&dim) {
        return reject(format!("dimension must be 1, 2 or 3, got {dim}"));
    }
    check_order(sigma)?;
    let n = dim as f64;
    let c_singular = 2f64.powf(sigma - 1.0) * sigma * tgamma((n + sigma) / 2.0)
        / (PI.powf(n / 2.0) * tgamma(1.0 - sigma / 2.0));
    let c_riesz = (sigma < n).then(|| {
        tgamma((n - sigma) / 2.0) / (2f64.powf(sigma) * PI.powf(n / 2.0) * tgamma(sigma / 2.0))
    });
    let mu_sigma = 2f64.powf(sigma - 1.0) * tgamma(sigma / 2.0) / tgamma(1.0 - sigma / 2.0);
    Ok(Constants {
        c_singular,
        c_riesz,
        mu_sigma,
    })
}

/// Riesz constant, or an error when the kernel is not locally integrable at
/// infinity (`σ ≥ N`).
pub fn riesz_constant(dim: usize, sigma: f64) -> Result<f64> {
    constants(dim, sigma)?.c_riesz.ok_or_else(|| {
        Error::Assumption(format!(
            "Riesz kernel needs sigma < N (sigma = {sigma}, N = {dim}); \
             the linear theory further needs N > 2 sigma"
        ))
    })
}

/// Fourier multiplier `|ξ|^s` on the periodic frequency lattice of a grid.
pub struct SpectralOperator {
    grid: Grid,
    order: f64,
    multiplier: Vec<f64>,
    fft: FftNd,
}

impl SpectralOperator {
    /// Multiplier `|ξ|^order`. Any `order > 0` is accepted here; callers that
    /// model `(-Δ)^{σ/2}` check σ themselves.
    pub fn new(grid: Grid, order: f64) -> Result<Self> {
        if !(order > 0.0 && order.is_finite()) {
            return reject(format!("multiplier order must be positive, got {order}"));
        }
        let freqs = frequency_magnitudes(grid.dim(), grid.m(), 2.0 * grid.half_width());
        let multiplier = freqs.iter().map(|&k| if k == 0.0 { 0.0 } else { k.powf(order) }).collect();
        Ok(SpectralOperator {
            grid,
            order,
            multiplier,
            fft: FftNd::new(grid.dim(), grid.m()),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn multiplier(&self) -> &[f64] {
        &self.multiplier
    }

    pub fn apply(&self, f: &Field) -> Result<Field> {
        if *f.grid() != self.grid {
            return reject("field grid does not match the operator grid");
        }
        let mut spec = self.fft.forward_real(f.values());
        for (c, &m) in spec.iter_mut().zip(&self.multiplier) {
            *c *= m;
        }
        Ok(Field::from_parts(self.grid, f.boundary(), self.fft.inverse_real(spec)))
    }

    /// `Σ_k mult_k |f̂_k|^2` with the Parseval normalization of `∫ |f|^2`.
    pub fn quadratic_form(&self, f: &Field) -> Result<f64> {
        if *f.grid() != self.grid {
            return reject("field grid does not match the operator grid");
        }
        let spec = self.fft.forward_real(f.values());
        let terms: Vec<f64> = spec
            .iter()
            .zip(&self.multiplier)
            .map(|(c, &m)| m * c.norm_sqr())
            .collect();
        Ok(self.grid.cell_volume() / self.grid.len() as f64 * pairwise_sum(&terms))
    }
}

/// `(-Δ)^{σ/2} f` by the Fourier multiplier `|ξ|^σ` on the torus.
pub fn apply_spectral(f: &Field, sigma: f64) -> Result<Field> {
    check_order(sigma)?;
    SpectralOperator::new(*f.grid(), sigma)?.apply(f)
}

/// How the far field of the singular integral is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    /// `f ≈ 0` beyond the tail radius; requires a decaying field.
    Decaying,
    /// The field is periodic: the kernel is summed over periodic images and
    /// images beyond the explicit range see the box mean.
    Periodic,
    /// No far-field term.
    Off,
}

/// Discretization parameters for [`apply_singular`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularOptions {
    /// Width of the inner Taylor-corrected region; defaults to `4h`.
    pub delta: Option<f64>,
    /// Radius where the kernel is switched off; defaults to `L`.
    pub tail_radius: Option<f64>,
    pub tail: TailMode,
}

impl Default for SingularOptions {
    fn default() -> Self {
        SingularOptions {
            delta: None,
            tail_radius: None,
            tail: TailMode::Decaying,
        }
    }
}

/// Smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, C^∞ in between.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Number of periodic images per axis summed explicitly in the periodized
/// kernel; the rest is closed by [`cube_exterior_integral`].
fn image_range(dim: usize) -> i64 {
    match dim {
        1 => 64,
        2 => 6,
        _ => 2,
    }
}

/// `Σ_k |w + period k|^{-p}` over `k ∈ [-K, K]^N`, skipping a zero argument.
fn image_sum(w: &[f64], period: f64, images: i64, p: f64) -> f64 {
    let dim = w.len();
    let side = (2 * images + 1) as usize;
    let mut total = 0.0;
    for flat in 0..side.pow(dim as u32) {
        let mut rest = flat;
        let mut r2 = 0.0;
        for &wi in w {
            let k = (rest % side) as i64 - images;
            rest /= side;
            let z = wi + period * k as f64;
            r2 += z * z;
        }
        if r2 > 0.0 {
            total += r2.powf(-0.5 * p);
        }
    }
    total
}

/// `∫ |z|^{-N-σ} dz` over the complement of the cube `[-a, a]^N`.
fn cube_exterior_integral(dim: usize, sigma: f64, a: f64) -> f64 {
    let n = dim as f64;
    let face = |u2: f64| (1.0 + u2).powf(-0.5 * (n + sigma));
    let solid = match dim {
        1 => 2.0,
        2 => 4.0 * simpson(|u| face(u * u), -1.0, 1.0, 2000),
        _ => 6.0 * simpson(|u| simpson(|v| face(u * u + v * v), -1.0, 1.0, 400), -1.0, 1.0, 400),
    };
    solid * a.powf(-sigma) / sigma
}

/// Composite Simpson rule on `[a, b]` with `panels` (even) subintervals.
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Principal-value singular-integral discretization of `(-Δ)^{σ/2}`.
///
/// The integrand `(f(x) - f(x-w)) |w|^{-N-σ}` is summed over every lattice
/// displacement `w ≠ 0` of the periodic box with a smooth cutoff `ψ(|w|)`
/// that switches the kernel off between `0.75 T` and `T`. Near `w = 0` the
/// quadratic Taylor term, damped by `exp(-|w|^2/δ^2)`, is subtracted from
/// the summand and integrated exactly; only its isotropic part survives the
/// symmetric lattice sum, so the correction is
/// `(Δ_h f / 2N) (Σ_lattice - ∫) |w|^{2-N-σ} e^{-|w|^2/δ^2}`.
/// The part of the kernel beyond the cutoff is added back as
/// `f(x) ∫ (1 - ψ) |w|^{-N-σ} dw` (or with `f - mean f` on the torus).
pub struct SingularOperator {
    grid: Grid,
    sigma: f64,
    opts: SingularOptions,
    c_singular: f64,
    kernel_hat: Vec<f64>,
    kernel_mass: f64,
    taylor_weight: f64,
    far_weight: f64,
    fft: FftNd,
}

impl SingularOperator {
    pub fn new(grid: Grid, sigma: f64, opts: SingularOptions) -> Result<Self> {
        check_order(sigma)?;
        let h = grid.spacing();
        let l = grid.half_width();
        let dim = grid.dim();
        let delta = opts.delta.unwrap_or(4.0 * h);
        if delta < 2.0 * h {
            return reject(format!(
                "inner cutoff delta = {delta} is below 2h = {}; the Taylor correction is invalid",
                2.0 * h
            ));
        }
        let tail_radius = opts.tail_radius.unwrap_or(l);
        if !(tail_radius >= 4.0 * delta && tail_radius <= l) {
            return reject(format!(
                "tail radius {tail_radius} must lie in [4 delta, L] = [{}, {l}]",
                4.0 * delta
            ));
        }
        let consts = constants(dim, sigma)?;
        let n = dim as f64;
        let m = grid.m();
        let vol = grid.cell_volume();
        let ramp_start = 0.75 * tail_radius;

        let omega = sphere_area(dim);
        let period = 2.0 * l;
        let images = image_range(dim);
        let (kernel, lattice_moment): (Vec<f64>, Vec<f64>) = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let mut w = [0.0; 3];
                let mut rest = idx;
                for slot in w[..dim].iter_mut().rev() {
                    *slot = crate::transform::signed_index(rest % m, m) * h;
                    rest /= m;
                }
                let r2: f64 = w[..dim].iter().map(|v| v * v).sum();
                if r2 == 0.0 {
                    return (0.0, 0.0);
                }
                let r = r2.sqrt();
                let moment = r.powf(2.0 - n - sigma) * (-r2 / (delta * delta)).exp() * vol;
                let k = match opts.tail {
                    TailMode::Periodic => image_sum(&w[..dim], period, images, n + sigma),
                    _ => {
                        let cut = 1.0 - smooth_step((r - ramp_start) / (tail_radius - ramp_start));
                        cut * r.powf(-n - sigma)
                    }
                };
                (k * vol, moment)
            })
            .unzip();
        let kernel_mass = pairwise_sum(&kernel);
        let lattice_moment = pairwise_sum(&lattice_moment);
        let exact_moment = omega * delta.powf(2.0 - sigma) * tgamma(1.0 - sigma / 2.0) / 2.0;
        let taylor_weight = (lattice_moment - exact_moment) / (2.0 * n);
        let far_weight = match opts.tail {
            TailMode::Periodic => {
                cube_exterior_integral(dim, sigma, (2 * images + 1) as f64 * l)
            }
            _ => {
                let ramp = simpson(
                    |r| smooth_step((r - ramp_start) / (tail_radius - ramp_start)) * r.powf(-1.0 - sigma),
                    ramp_start,
                    tail_radius,
                    4000,
                );
                omega * (ramp + tail_radius.powf(-sigma) / sigma)
            }
        };

        let fft = FftNd::new(dim, m);
        let kernel_hat = fft.forward_real(&kernel).into_iter().map(|c| c.re).collect();
        Ok(SingularOperator {
            grid,
            sigma,
            opts: SingularOptions {
                delta: Some(delta),
                tail_radius: Some(tail_radius),
                tail: opts.tail,
            },
            c_singular: consts.c_singular,
            kernel_hat,
            kernel_mass,
            taylor_weight,
            far_weight,
            fft,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn options(&self) -> SingularOptions {
        self.opts
    }

    pub fn apply(&self, f: &Field) -> Result<Field> {
        if *f.grid() != self.grid {
            return reject("field grid does not match the operator grid");
        }
        if self.opts.tail == TailMode::Decaying {
            check_decay(f)?;
        }
        let values = f.values();
        let mut spec: Vec<Complex64> = self.fft.forward_real(values);
        for (c, &k) in spec.iter_mut().zip(&self.kernel_hat) {
            *c *= k;
        }
        let conv = self.fft.inverse_real(spec);
        let lap = discrete_laplacian(f);
        let mean = match self.opts.tail {
            TailMode::Periodic => f.integral() / (2.0 * self.grid.half_width()).powi(self.grid.dim() as i32),
            _ => 0.0,
        };
        let far = match self.opts.tail {
            TailMode::Off => 0.0,
            _ => self.far_weight,
        };
        let out = values
            .iter()
            .zip(&conv)
            .zip(&lap)
            .map(|((&fx, &cv), &lx)| {
                self.c_singular
                    * (fx * self.kernel_mass - cv + lx * self.taylor_weight + (fx - mean) * far)
            })
            .collect();
        Ok(Field::from_parts(self.grid, f.boundary(), out))
    }
}

/// `(-Δ)^{σ/2} f` by the corrected principal-value sum; see
/// [`SingularOperator`].
pub fn apply_singular(f: &Field, sigma: f64, opts: SingularOptions) -> Result<Field> {
    SingularOperator::new(*f.grid(), sigma, opts)?.apply(f)
}

/// Rejects fields whose sup over the outer quarter of the box exceeds
/// `1e-3` of the global sup.
pub fn check_decay(f: &Field) -> Result<()> {
    let grid = f.grid();
    let outer = 0.75 * grid.half_width();
    let sup = f.sup_norm();
    let outer_sup = f
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.box_radius(*i) >= outer)
        .fold(0.0f64, |acc, (_, v)| acc.max(v.abs()));
    if outer_sup > 1e-3 * sup {
        return reject(format!(
            "field does not decay: outer-quarter sup {outer_sup:.3e} vs sup {sup:.3e}; \
             use the periodic tail mode"
        ));
    }
    Ok(())
}

/// Centered second-difference Laplacian with periodic wrap.
pub fn discrete_laplacian(f: &Field) -> Vec<f64> {
    let grid = f.grid();
    let m = grid.m();
    let dim = grid.dim();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let v = f.values();
    (0..grid.len())
        .map(|idx| {
            let multi = grid.unravel(idx);
            let mut acc = -2.0 * dim as f64 * v[idx];
            for axis in 0..dim {
                let stride = m.pow((dim - 1 - axis) as u32);
                let i = multi[axis];
                let up = if i + 1 == m { idx + stride - m * stride } else { idx + stride };
                let down = if i == 0 { idx + (m - 1) * stride } else { idx - stride };
                acc += v[up] + v[down];
            }
            acc * inv_h2
        })
        .collect()
}
