//! Spectral fractional Laplacian on the box `(-R, R)^N` with zero boundary
//! data, through the tensor sine basis.

use std::f64::consts::PI;

use crate::error::{reject, Result};
use crate::fraclap::check_order;
use crate::grid::{pairwise_sum, Boundary, Field, Grid};
use crate::transform::DstNd;

/// Sine eigenpairs of the Dirichlet Laplacian on a box embedded in a grid.
///
/// Eigenfunctions are `Π_i sin(k_i π (x_i + R) / 2R)` with eigenvalues
/// `λ_k = Σ_i (k_i π / 2R)^2`. The box half-width must be a multiple of the
/// grid spacing so that its faces fall on grid lines.
pub struct DirichletOperator {
    grid: Grid,
    half: f64,
    sigma: f64,
    /// First grid index strictly inside the box along each axis.
    first: usize,
    points: usize,
    eigenvalues: Vec<f64>,
    /// `(2/(P+1))^N λ_k^{σ/2}`, the forward multiplier between two DST-I passes.
    forward: Vec<f64>,
    dst: DstNd,
}

impl DirichletOperator {
    pub fn new(grid: Grid, half: f64, sigma: f64) -> Result<Self> {
        check_order(sigma)?;
        let h = grid.spacing();
        let steps = half / h;
        if !(half > 0.0 && half <= grid.half_width() + 1e-12) {
            return reject(format!(
                "box half-width {half} must lie in (0, L] with L = {}",
                grid.half_width()
            ));
        }
        if (steps - steps.round()).abs() > 1e-9 || steps.round() < 2.0 {
            return reject(format!("box half-width {half} is not a multiple (>= 2) of h = {h}"));
        }
        let steps = steps.round() as usize;
        let points = 2 * steps - 1;
        let first = grid.m() / 2 - steps + 1;
        let dim = grid.dim();
        let unit = PI / (2.0 * half);
        let eigenvalues = (0..points.pow(dim as u32))
            .map(|mut idx| {
                let mut lam = 0.0;
                for _ in 0..dim {
                    let k = (idx % points + 1) as f64 * unit;
                    lam += k * k;
                    idx /= points;
                }
                lam
            })
            .collect::<Vec<f64>>();
        let scale = (2.0 / (points + 1) as f64).powi(dim as i32);
        let forward = eigenvalues.iter().map(|&lam| scale * lam.powf(sigma / 2.0)).collect();
        Ok(DirichletOperator {
            grid,
            half,
            sigma,
            first,
            points,
            eigenvalues,
            forward,
            dst: DstNd::new(dim, points),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn half_width(&self) -> f64 {
        self.half
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Interior points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `λ_max^{σ/2}`, the largest multiplier of the discrete operator.
    pub fn max_multiplier(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b)).powf(self.sigma / 2.0)
    }

    /// Whether grid node `idx` lies strictly inside the box.
    pub fn contains(&self, idx: usize) -> bool {
        self.grid
            .unravel(idx)
            .iter()
            .take(self.grid.dim())
            .all(|&i| i >= self.first && i < self.first + self.points)
    }

    /// Grid indices of the interior nodes, in the order of the local vectors
    /// used by [`DirichletOperator::apply_local`].
    pub fn interior_indices(&self) -> Vec<usize> {
        let dim = self.grid.dim();
        let p = self.points;
        let mut multi = [0usize; 3];
        (0..p.pow(dim as u32))
            .map(|local| {
                let mut rest = local;
                for axis in (0..dim).rev() {
                    multi[axis] = self.first + rest % p;
                    rest /= p;
                }
                self.grid.ravel(&multi)
            })
            .collect()
    }

    /// `(-Δ_D)^{σ/2}` in place on interior values ordered as in
    /// [`DirichletOperator::interior_indices`].
    pub fn apply_local(&self, local: &mut [f64]) {
        self.dst.apply(local);
        for (c, &w) in local.iter_mut().zip(&self.forward) {
            *c *= w;
        }
        self.dst.apply(local);
    }

    fn restrict(&self, f: &Field) -> Result<Vec<f64>> {
        if *f.grid() != self.grid {
            return reject("field grid does not match the Dirichlet operator grid");
        }
        let dim = self.grid.dim();
        let p = self.points;
        let mut out = vec![0.0; p.pow(dim as u32)];
        let mut multi = [0usize; 3];
        for (local, slot) in out.iter_mut().enumerate() {
            let mut rest = local;
            for axis in (0..dim).rev() {
                multi[axis] = self.first + rest % p;
                rest /= p;
            }
            *slot = f.values()[self.grid.ravel(&multi)];
        }
        Ok(out)
    }

    fn extend(&self, local: &[f64], boundary: Boundary) -> Field {
        let dim = self.grid.dim();
        let p = self.points;
        let mut values = vec![0.0; self.grid.len()];
        let mut multi = [0usize; 3];
        for (idx, &v) in local.iter().enumerate() {
            let mut rest = idx;
            for axis in (0..dim).rev() {
                multi[axis] = self.first + rest % p;
                rest /= p;
            }
            values[self.grid.ravel(&multi)] = v;
        }
        Field::from_parts(self.grid, boundary, values)
    }

    /// Applies the multiplier `λ_k^{power}` in the sine basis; the result is
    /// zero outside the box.
    pub fn apply_power(&self, f: &Field, power: f64) -> Result<Field> {
        let mut local = self.restrict(f)?;
        self.dst.apply(&mut local);
        let scale = (2.0 / (self.points + 1) as f64).powi(self.grid.dim() as i32);
        for (c, &lam) in local.iter_mut().zip(&self.eigenvalues) {
            *c *= scale * lam.powf(power);
        }
        self.dst.apply(&mut local);
        Ok(self.extend(&local, Boundary::ZeroExtension))
    }

    /// `(-Δ_D)^{σ/2} u`.
    pub fn apply(&self, u: &Field) -> Result<Field> {
        self.apply_power(u, self.sigma / 2.0)
    }

    /// `(-Δ_D)^{-σ/2} ρ`.
    pub fn solve(&self, rho: &Field) -> Result<Field> {
        self.apply_power(rho, -self.sigma / 2.0)
    }

    /// Coefficients `⟨f, φ_k⟩` in the `L^2`-normalized sine basis.
    pub fn coefficients(&self, f: &Field) -> Result<Vec<f64>> {
        let mut local = self.restrict(f)?;
        self.dst.apply(&mut local);
        let scale = self.grid.cell_volume() * self.half.powf(-(self.grid.dim() as f64) / 2.0);
        local.iter_mut().for_each(|c| *c *= scale);
        Ok(local)
    }

    /// `‖(-Δ_D)^{s/4} u‖^2 = Σ λ_k^{s/2} c_k^2`.
    pub fn quadratic_form(&self, u: &Field, s: f64) -> Result<f64> {
        let c = self.coefficients(u)?;
        let terms: Vec<f64> = c
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, &lam)| lam.powf(s / 2.0) * c * c)
            .collect();
        Ok(pairwise_sum(&terms))
    }

    /// Eigenfunction with multi-index `k` (entries from 1), sampled on the
    /// grid and normalized in `L^2` of the box.
    pub fn mode(&self, k: &[usize]) -> Field {
        let half = self.half;
        let norm = half.powf(-(self.grid.dim() as f64) / 2.0);
        Field::from_fn(self.grid, Boundary::ZeroExtension, |x| {
            if x.iter().any(|c| c.abs() >= half - 1e-12) {
                return 0.0;
            }
            x.iter()
                .zip(k)
                .map(|(&xi, &ki)| (ki as f64 * PI * (xi + half) / (2.0 * half)).sin())
                .product::<f64>()
                * norm
        })
    }
}

/// `U_R = (-Δ_D)^{-σ/2} ρ` on `(-R, R)^N`, zero outside.
pub fn dirichlet_solve(rho: &Field, half: f64, sigma: f64) -> Result<Field> {
    DirichletOperator::new(*rho.grid(), half, sigma)?.solve(rho)
}

/// `(-Δ_D)^{σ/2} u` on `(-R, R)^N`, zero outside.
pub fn dirichlet_apply(u: &Field, half: f64, sigma: f64) -> Result<Field> {
    DirichletOperator::new(*u.grid(), half, sigma)?.apply(u)
}

/// Smallest `C` with `u ≤ C v` at every node where `v > 0`, i.e. the fitted
/// Green-bound constant of `u` against the reference potential `v`.
pub fn green_bound_constant(u: &Field, v: &Field) -> Result<f64> {
    u.check_same_grid(v)?;
    Ok(u.values()
        .iter()
        .zip(v.values())
        .filter(|(_, &b)| b > 0.0)
        .map(|(&a, &b)| a / b)
        .fold(0.0, f64::max))
}
