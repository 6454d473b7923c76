//! σ-harmonic extension to the upper half-space and its weighted conormal
//! trace.
//!
//! `div(y^{1-σ} ∇W) = 0` is diagonal in the horizontal frequency, so every
//! Fourier mode solves `(y^{1-σ} W')' = y^{1-σ} |ξ|^2 W` on a graded mesh in
//! `y`. The three-point scheme uses face conductances
//! `σ / (y_{j+1}^σ - y_j^σ)`, exact for the `ξ = 0` profiles `A + B y^σ`,
//! and dual-cell masses `∫ y^{1-σ} dy`.

use rayon::prelude::*;

use crate::error::{reject, Result};
use crate::fraclap::{check_order, constants, SpectralOperator};
use crate::grid::{pairwise_sum, Boundary, Field, Grid};
use crate::riesz::riesz_convolve;
use crate::transform::{frequency_magnitudes, FftNd};

/// Vertical nodes `0 = y_0 < y_1 < ... < y_J = Y` with `y_j = y_min q^{j-1}`
/// for `j ≥ 1`; the last node is clamped to `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct YMesh {
    nodes: Vec<f64>,
    ratio: f64,
}

impl YMesh {
    pub fn graded(y_min: f64, ratio: f64, y_max: f64) -> Result<Self> {
        if !(y_min > 0.0) {
            return reject(format!("y_min must be positive, got {y_min}"));
        }
        if !(ratio > 1.0 && ratio <= 1.2) {
            return reject(format!("grading ratio must lie in (1, 1.2], got {ratio}"));
        }
        if !(y_max > 4.0 * y_min) {
            return reject(format!("Y = {y_max} is too small against y_min = {y_min}"));
        }
        let mut nodes = vec![0.0, y_min];
        while *nodes.last().unwrap() * ratio < y_max {
            let next = nodes.last().unwrap() * ratio;
            nodes.push(next);
        }
        nodes.push(y_max);
        Ok(YMesh { nodes, ratio })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn top(&self) -> f64 {
        *self.nodes.last().unwrap()
    }
}

/// Extension of a grid field, stored level by level.
pub struct ExtensionField {
    grid: Grid,
    sigma: f64,
    mesh: YMesh,
    levels: Vec<Field>,
    /// `μ_σ ∫∫ y^{1-σ} |∇W|^2` in its discrete form.
    energy: f64,
}

impl ExtensionField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mesh(&self) -> &YMesh {
        &self.mesh
    }

    /// `W(·, y_j)`.
    pub fn level(&self, j: usize) -> &Field {
        &self.levels[j]
    }

    pub fn levels(&self) -> &[Field] {
        &self.levels
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Samples `W(x_idx, y)` by linear interpolation between mesh levels.
    pub fn value_at(&self, idx: usize, y: f64) -> f64 {
        let nodes = self.mesh.nodes();
        let j = nodes.partition_point(|&t| t <= y).clamp(1, nodes.len() - 1);
        let (y0, y1) = (nodes[j - 1], nodes[j]);
        let t = ((y - y0) / (y1 - y0)).clamp(0.0, 1.0);
        (1.0 - t) * self.levels[j - 1].values()[idx] + t * self.levels[j].values()[idx]
    }
}

/// Profile of one frequency: `φ(y_j)` with `φ(0) = 1`, `φ(Y) = 0`, plus the
/// discrete quadratic form `Σ a (Δφ)^2 + |ξ|^2 Σ m φ^2`.
fn mode_profile(xi: f64, faces: &[f64], masses: &[f64]) -> (Vec<f64>, f64) {
    let nodes = masses.len();
    if xi == 0.0 {
        // constants extend as constants; the mode carries no energy
        return (vec![1.0; nodes], 0.0);
    }
    let k2 = xi * xi;
    let interior = nodes - 2;
    // Thomas algorithm on nodes 1..=J-1
    let mut c_prime = vec![0.0; interior];
    let mut d_prime = vec![0.0; interior];
    for i in 0..interior {
        let j = i + 1;
        let lower = -faces[j - 1];
        let upper = -faces[j];
        let diag = faces[j - 1] + faces[j] + k2 * masses[j];
        let rhs = if j == 1 { faces[0] } else { 0.0 };
        if i == 0 {
            c_prime[i] = upper / diag;
            d_prime[i] = rhs / diag;
        } else {
            let denom = diag - lower * c_prime[i - 1];
            c_prime[i] = upper / denom;
            d_prime[i] = (rhs - lower * d_prime[i - 1]) / denom;
        }
    }
    let mut phi = vec![0.0; nodes];
    phi[0] = 1.0;
    for i in (0..interior).rev() {
        let next = if i + 1 < interior { phi[i + 2] } else { 0.0 };
        phi[i + 1] = d_prime[i] - c_prime[i] * next;
    }
    let mut q = 0.0;
    for (j, &a) in faces.iter().enumerate() {
        q += a * (phi[j + 1] - phi[j]).powi(2);
    }
    for (j, &m) in masses.iter().enumerate() {
        q += k2 * m * phi[j] * phi[j];
    }
    (phi, q)
}

/// Face conductances and dual-cell masses for the weight `y^{1-σ}`.
fn mesh_weights(nodes: &[f64], sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let faces = nodes
        .windows(2)
        .map(|w| sigma / (w[1].powf(sigma) - w[0].powf(sigma)))
        .collect();
    let prim = |y: f64| y.powf(2.0 - sigma) / (2.0 - sigma);
    let last = nodes.len() - 1;
    let masses = (0..nodes.len())
        .map(|j| {
            let lo = if j == 0 { 0.0 } else { 0.5 * (nodes[j - 1] + nodes[j]) };
            let hi = if j == last { nodes[j] } else { 0.5 * (nodes[j] + nodes[j + 1]) };
            prim(hi) - prim(lo)
        })
        .collect();
    (faces, masses)
}

/// Extends `u` with the default mesh `y_min = h/4`, `q = 1.1` up to `Y`.
pub fn extend(u: &Field, sigma: f64, y_max: f64) -> Result<ExtensionField> {
    let mesh = YMesh::graded(u.grid().spacing() / 4.0, 1.1, y_max)?;
    extend_on(u, sigma, mesh)
}

/// Tolerance for the extension at `3Y/4`, relative to `‖u‖∞`, beyond which
/// `Y` is considered too small.
pub const TOP_TOLERANCE: f64 = 1e-3;

pub fn extend_on(u: &Field, sigma: f64, mesh: YMesh) -> Result<ExtensionField> {
    check_order(sigma)?;
    let grid = *u.grid();
    let mu = constants(grid.dim(), sigma)?.mu_sigma;
    let nodes = mesh.nodes().to_vec();
    let (faces, masses) = mesh_weights(&nodes, sigma);
    let fft = FftNd::new(grid.dim(), grid.m());
    let spec = fft.forward_real(u.values());
    let freqs = frequency_magnitudes(grid.dim(), grid.m(), 2.0 * grid.half_width());

    // profiles depend on |ξ| only; solve once per distinct magnitude
    let mut distinct: Vec<f64> = freqs.clone();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    let solved: Vec<(Vec<f64>, f64)> = distinct
        .par_iter()
        .map(|&xi| mode_profile(xi, &faces, &masses))
        .collect();
    let lookup = |xi: f64| {
        let i = distinct.partition_point(|&d| d < xi);
        &solved[i]
    };

    let energy_terms: Vec<f64> = spec
        .iter()
        .zip(&freqs)
        .map(|(c, &xi)| lookup(xi).1 * c.norm_sqr())
        .collect();
    let energy = mu * grid.cell_volume() / grid.len() as f64 * pairwise_sum(&energy_terms);

    let levels: Vec<Field> = (0..nodes.len())
        .map(|j| {
            if j == 0 {
                return u.clone();
            }
            let scaled = spec
                .iter()
                .zip(&freqs)
                .map(|(c, &xi)| c * lookup(xi).0[j])
                .collect();
            Field::from_parts(grid, u.boundary(), fft.inverse_real(scaled))
        })
        .collect();

    let probe = nodes.partition_point(|&y| y <= 0.75 * mesh.top()).saturating_sub(1).max(1);
    let mean = spec[0].re / grid.len() as f64;
    let top_dev = levels[probe].values().iter().fold(0.0f64, |a, v| a.max((v - mean).abs()));
    if top_dev > TOP_TOLERANCE * u.sup_norm() {
        return reject(format!(
            "Y = {} is too small: the extension at y = {} still deviates by {top_dev:.3e} from its mean",
            mesh.top(),
            nodes[probe]
        ));
    }
    Ok(ExtensionField {
        grid,
        sigma,
        mesh,
        levels,
        energy,
    })
}

/// Harmonic extension of `u` at height `y` on the torus, through the
/// Poisson multiplier `e^{-|ξ| y}`.
pub fn poisson_level(u: &Field, y: f64) -> Result<Field> {
    if !(y >= 0.0) {
        return reject(format!("height must be nonnegative, got {y}"));
    }
    let grid = *u.grid();
    let fft = FftNd::new(grid.dim(), grid.m());
    let xi = frequency_magnitudes(grid.dim(), grid.m(), 2.0 * grid.half_width());
    let mut spec = fft.forward_real(u.values());
    for (c, &k) in spec.iter_mut().zip(&xi) {
        *c *= (-k * y).exp();
    }
    Field::new(grid, Boundary::Periodic, fft.inverse_real(spec))
}

/// `-μ_σ lim_{y→0} y^{1-σ} ∂_y W`, i.e. `(-Δ)^{σ/2}` of the boundary data.
///
/// The weighted flux through the first face, `a_{1/2}(W_1 - W_0)`, is
/// carried down to `y = 0` by the balance over the half cell `[0, y_1/2]`,
/// where the equation reads `(y^{1-σ} W_y)_y = -y^{1-σ} Δ_x W`. This is the
/// Neumann map of the discrete scheme, consistent with its energy.
pub fn conormal_trace(w: &ExtensionField) -> Result<Field> {
    let nodes = w.mesh.nodes();
    if nodes.len() < 3 || nodes[0] != 0.0 {
        return reject("conormal trace needs a graded mesh starting at y = 0");
    }
    let sigma = w.sigma;
    let mu = constants(w.grid.dim(), sigma)?.mu_sigma;
    let (faces, masses) = mesh_weights(&nodes[..3], sigma);
    let (a, m0) = (faces[0], masses[0]);
    let base = &w.levels[0];
    let neg_lap = SpectralOperator::new(w.grid, 2.0)?.apply(base)?;
    let out = base
        .values()
        .iter()
        .zip(w.levels[1].values())
        .zip(neg_lap.values())
        .map(|((&w0, &w1), &l0)| mu * (a * (w0 - w1) + m0 * l0))
        .collect();
    Ok(Field::from_parts(w.grid, base.boundary(), out))
}

/// Outcome of [`linear_uniqueness_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessReport {
    /// Whether the candidate decays: its sup over the outer quarter of the
    /// box is at most [`DECAY_TOLERANCE`] of its sup.
    pub hypothesis_met: bool,
    /// `‖U_candidate - K^σ*ρ‖∞`.
    pub sup_difference: f64,
    /// Same, restricted to the inner quarter box.
    pub inner_difference: f64,
    /// Weighted energy of the extension of the difference.
    pub difference_energy: f64,
    pub pass: bool,
}

pub const DECAY_TOLERANCE: f64 = 1e-2;

/// Compares a candidate solution of `(-Δ)^{σ/2} U = ρ` with `K^σ * ρ`: a
/// decaying difference of zero energy must vanish.
pub fn linear_uniqueness_check(candidate: &Field, rho: &Field, sigma: f64, tol: f64) -> Result<UniquenessReport> {
    candidate.check_same_grid(rho)?;
    let grid = *candidate.grid();
    let outer = 0.75 * grid.half_width();
    let outer_sup = candidate
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.box_radius(*i) >= outer)
        .fold(0.0f64, |a, (_, v)| a.max(v.abs()));
    let hypothesis_met = outer_sup <= DECAY_TOLERANCE * candidate.sup_norm();
    let reference = riesz_convolve(rho, sigma)?;
    let diff = candidate.zip_map(&reference, |a, b| a - b)?.with_boundary(Boundary::Periodic);
    let sup_difference = diff.sup_norm();
    let inner_difference = diff
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.box_radius(*i) <= grid.half_width() / 4.0)
        .fold(0.0f64, |a, (_, v)| a.max(v.abs()));
    let difference_energy = if sup_difference == 0.0 {
        0.0
    } else {
        extend_on(&diff, sigma, YMesh::graded(grid.spacing() / 4.0, 1.1, 4.0 * grid.half_width())?)
            .map(|w| w.energy())
            .unwrap_or(f64::INFINITY)
    };
    let scale = reference.sup_norm().max(f64::MIN_POSITIVE);
    let pass = hypothesis_met && sup_difference <= tol * scale && difference_energy <= tol * scale * scale;
    Ok(UniquenessReport {
        hypothesis_met,
        sup_difference,
        inner_difference,
        difference_energy,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraclap::apply_spectral;
    use std::f64::consts::PI;

    #[test]
    fn mesh_validation() {
        assert!(YMesh::graded(0.0, 1.1, 10.0).is_err());
        assert!(YMesh::graded(0.1, 1.3, 10.0).is_err());
        assert!(YMesh::graded(0.1, 1.0, 10.0).is_err());
        let m = YMesh::graded(0.1, 1.1, 10.0).unwrap();
        assert_eq!(m.nodes()[0], 0.0);
        assert_eq!(m.top(), 10.0);
        assert!(m.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_extends_to_zero() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let z = Field::zeros(g, Boundary::Periodic);
        let w = extend(&z, 0.7, 32.0).unwrap();
        assert!(w.levels().iter().all(|l| l.sup_norm() == 0.0));
        assert_eq!(w.energy(), 0.0);
        assert_eq!(conormal_trace(&w).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn constant_profile_is_exact_for_xi_zero_scheme() {
        // for ξ = 0 with W(0) = 1, W(Y) = 0 the scheme reproduces 1 - (y/Y)^σ
        let sigma = 0.6;
        let mesh = YMesh::graded(0.01, 1.1, 5.0).unwrap();
        let (faces, masses) = mesh_weights(mesh.nodes(), sigma);
        let (phi, _) = mode_profile(1e-300, &faces, &masses);
        for (y, p) in mesh.nodes().iter().zip(&phi) {
            assert!((p - (1.0 - (y / 5.0).powf(sigma))).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_trace_and_energy() {
        let g = Grid::new(1, 64, PI).unwrap();
        let k = 3.0;
        let u = Field::from_fn(g, Boundary::Periodic, |x| (k * x[0]).cos());
        for sigma in [0.5, 1.0, 1.5] {
            let w = extend(&u, sigma, 4.0 * PI).unwrap();
            let t = conormal_trace(&w).unwrap();
            let err = t.sup_diff_within(&u.map(|v| k.powf(sigma) * v), f64::INFINITY).unwrap();
            assert!(err < 1e-2 * k.powf(sigma), "sigma {sigma}: {err}");
            let exact = k.powf(sigma) * u.inner(&u).unwrap();
            assert!((w.energy() - exact).abs() < 1e-2 * exact, "sigma {sigma}");
        }
    }

    #[test]
    fn gaussian_half_laplacian() {
        let g = Grid::new(1, 1024, 32.0).unwrap();
        let u = Field::from_fn(g, Boundary::Periodic, |x| (-x[0] * x[0] / 2.0).exp());
        let w = extend(&u, 1.0, 128.0).unwrap();
        let t = conormal_trace(&w).unwrap();
        let s = apply_spectral(&u, 1.0).unwrap();
        let err = t.sup_diff_within(&s, f64::INFINITY).unwrap() / s.sup_norm();
        assert!(err < 1e-2, "{err}");
    }

    #[test]
    fn short_top_rejected() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let u = Field::from_fn(g, Boundary::Periodic, |x| (PI * x[0] / 8.0).cos());
        assert!(extend(&u, 0.5, 2.0).is_err());
    }
}
