//! Uniform tensor grids over the truncated box `[-L, L)^N` and the real
//! fields sampled on them.

use crate::error::{reject, Result};

/// Origin-centered uniform grid with `m` points per axis and spacing
/// `h = 2L/m`. Node `i` on an axis sits at `-L + i h`, so the origin is node
/// `m/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    m: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(dim: usize, m: usize, half_width: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return reject(format!("dimension must be 1, 2 or 3, got {dim}"));
        }
        if m < 16 || !m.is_power_of_two() {
            return reject(format!("points per axis must be a power of two >= 16, got {m}"));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return reject(format!("box half-width must be positive, got {half_width}"));
        }
        Ok(Grid { dim, m, half_width })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.m as f64
    }

    /// Volume of one grid cell, `h^N`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Multi-index of a flat (row-major) index. Unused trailing slots are 0.
    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = idx % self.m;
            idx /= self.m;
        }
        out
    }

    pub fn ravel(&self, multi: &[usize]) -> usize {
        multi[..self.dim].iter().fold(0, |acc, &i| acc * self.m + i)
    }

    /// Physical coordinates of a flat index. Unused trailing slots are 0.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let multi = self.unravel(idx);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = self.coord(multi[axis]);
        }
        x
    }

    pub fn radius(&self, idx: usize) -> f64 {
        let x = self.point(idx);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    /// Sup-norm distance of a node from the origin.
    pub fn box_radius(&self, idx: usize) -> f64 {
        let x = self.point(idx);
        x[..self.dim].iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Radii of every node, in flat order.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.radius(i)).collect()
    }

    /// Number of grid steps in `length`, if it is an integer multiple of `h`.
    pub fn steps_in(&self, length: f64) -> Option<usize> {
        let steps = length / self.spacing();
        let rounded = steps.round();
        ((steps - rounded).abs() < 1e-9 * rounded.max(1.0) && rounded >= 0.0)
            .then_some(rounded as usize)
    }

    /// Same grid, same box, `m/2` points per axis.
    pub fn coarsened(&self) -> Result<Self> {
        Grid::new(self.dim, self.m / 2, self.half_width)
    }

    /// Same box, `2m` points per axis.
    pub fn refined(&self) -> Result<Self> {
        Grid::new(self.dim, self.m * 2, self.half_width)
    }
}

/// How a field is continued outside the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// The box is a torus.
    Periodic,
    /// The field vanishes outside the box.
    ZeroExtension,
}

/// Real samples on a [`Grid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    boundary: Boundary,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, boundary: Boundary, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return reject(format!(
                "field has {} samples, grid expects {}",
                values.len(),
                grid.len()
            ));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return reject(format!("non-finite sample at index {bad}"));
        }
        Ok(Field {
            grid,
            boundary,
            values,
        })
    }

    /// Builds a field without the finiteness scan. Used internally where
    /// values come from arithmetic on finite data.
    pub(crate) fn from_parts(grid: Grid, boundary: Boundary, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field {
            grid,
            boundary,
            values,
        }
    }

    pub fn zeros(grid: Grid, boundary: Boundary) -> Self {
        Field::from_parts(grid, boundary, vec![0.0; grid.len()])
    }

    pub fn constant(grid: Grid, boundary: Boundary, c: f64) -> Self {
        Field::from_parts(grid, boundary, vec![c; grid.len()])
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid, boundary: Boundary, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.point(i);
                f(&x[..grid.dim()])
            })
            .collect();
        Field::from_parts(grid, boundary, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_parts(
            self.grid,
            self.boundary,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_same_grid(other)?;
        Ok(Field::from_parts(
            self.grid,
            self.boundary,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return reject(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid, other.grid
            ));
        }
        Ok(())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Sup of `|self|` over nodes whose Euclidean radius is at most `radius`.
    pub fn sup_within(&self, radius: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.radius(*i) <= radius)
            .fold(0.0f64, |acc, (_, v)| acc.max(v.abs()))
    }

    /// Sup of `|self - other|` over nodes with radius at most `radius`.
    pub fn sup_diff_within(&self, other: &Field, radius: f64) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .filter(|(i, _)| self.grid.radius(*i) <= radius)
            .fold(0.0f64, |acc, (_, (a, b))| acc.max((a - b).abs())))
    }

    /// Plain trapezoid sum `h^N Σ f`, which is the trapezoid rule on the torus.
    pub fn integral(&self) -> f64 {
        self.grid.cell_volume() * pairwise_sum(&self.values)
    }

    /// `h^N Σ f g`.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        let prod: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(self.grid.cell_volume() * pairwise_sum(&prod))
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).unwrap_or(0.0).sqrt()
    }

    pub fn value_at(&self, multi: &[usize]) -> f64 {
        self.values[self.grid.ravel(multi)]
    }

    /// Samples onto `target`, whose nodes must all be nodes of this grid.
    pub fn restrict_to(&self, target: Grid, boundary: Boundary) -> Result<Field> {
        let ratio = target.spacing() / self.grid.spacing();
        let shift = (self.grid.half_width() - target.half_width()) / self.grid.spacing();
        let whole = |x: f64| (x - x.round()).abs() < 1e-9;
        if target.dim() != self.grid.dim()
            || target.half_width() > self.grid.half_width() + 1e-12
            || !whole(ratio)
            || !whole(shift)
        {
            return reject("target grid nodes are not a subset of the source grid");
        }
        let (ratio, shift) = (ratio.round() as usize, shift.round() as usize);
        let values = (0..target.len())
            .map(|i| {
                let mut multi = target.unravel(i);
                multi.iter_mut().take(target.dim()).for_each(|k| *k = shift + ratio * *k);
                self.value_at(&multi)
            })
            .collect();
        Field::new(target, boundary, values)
    }

    /// Value at the node closest to the origin.
    pub fn value_at_origin(&self) -> f64 {
        let mid = [self.grid.m() / 2; 3];
        self.value_at(&mid)
    }
}

/// Fixed-order pairwise summation. The reduction tree depends only on the
/// length, so results do not depend on how the terms were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid::new(2, 100, 1.0).is_err());
        assert!(Grid::new(2, 8, 1.0).is_err());
        assert!(Grid::new(4, 16, 1.0).is_err());
        assert!(Grid::new(1, 16, 0.0).is_err());
    }

    #[test]
    fn origin_is_middle_node() {
        let g = Grid::new(2, 32, 4.0).unwrap();
        let idx = g.ravel(&[16, 16]);
        assert_eq!(g.point(idx), [0.0, 0.0, 0.0]);
        assert_eq!(g.unravel(idx)[..2], [16, 16]);
        assert_eq!(g.spacing(), 0.25);
    }

    #[test]
    fn steps_in_detects_multiples() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        assert_eq!(g.steps_in(2.0), Some(8));
        assert_eq!(g.steps_in(2.1), None);
    }

    #[test]
    fn field_rejects_wrong_length_and_nan() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        assert!(Field::new(g, Boundary::Periodic, vec![0.0; 15]).is_err());
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(Field::new(g, Boundary::Periodic, v).is_err());
    }

    #[test]
    fn constant_integral_is_box_volume() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let f = Field::constant(g, Boundary::Periodic, 1.0);
        assert!((f.integral() - 36.0).abs() < 1e-12);
    }
}
