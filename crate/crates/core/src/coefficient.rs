//! Density families ρ and their structural checks.

use crate::csvio::read_point_table;
use crate::error::{reject, Error, Result};
use crate::grid::{Boundary, Field, Grid};
use crate::spec::{ProblemSpec, RhoFamily};

/// Samples the configured density on the grid of `spec`.
pub fn make_coefficient(spec: &ProblemSpec) -> Result<Field> {
    spec.validate()?;
    let grid = spec.grid()?;
    let rho = match &spec.rho_family {
        RhoFamily::PowerTail => power_tail(grid, spec.beta)?,
        RhoFamily::Gaussian => Field::from_fn(grid, Boundary::Periodic, |x| (-norm_sq(x)).exp()),
        RhoFamily::Bump => bump(grid, 1.0),
        RhoFamily::CustomTable(path) => {
            let rows = read_point_table(path)?;
            from_table(grid, &rows)?
        }
    };
    if rho.values().iter().all(|&v| v == 0.0) {
        return Err(Error::Assumption("density vanishes identically on the grid".into()));
    }
    Ok(rho)
}

/// `(1 + |x|^2)^(-β/2)`. Requires β > N.
pub fn power_tail(grid: Grid, beta: f64) -> Result<Field> {
    if beta <= grid.dim() as f64 {
        return Err(Error::Assumption(format!(
            "beta must exceed N for the power tail (beta = {beta}, N = {})",
            grid.dim()
        )));
    }
    Ok(Field::from_fn(grid, Boundary::Periodic, |x| {
        (1.0 + norm_sq(x)).powf(-0.5 * beta)
    }))
}

/// Smooth bump `exp(1 - 1/(1 - |x/r|^2))` supported in `|x| < r`, peak 1.
pub fn bump(grid: Grid, radius: f64) -> Field {
    Field::from_fn(grid, Boundary::Periodic, |x| {
        let s = norm_sq(x) / (radius * radius);
        if s < 1.0 {
            (1.0 - 1.0 / (1.0 - s)).exp()
        } else {
            0.0
        }
    })
}

/// Gaussian `amplitude * exp(-|x|^2 / (2 width^2))`.
pub fn gaussian(grid: Grid, amplitude: f64, width: f64) -> Field {
    Field::from_fn(grid, Boundary::Periodic, |x| {
        amplitude * (-norm_sq(x) / (2.0 * width * width)).exp()
    })
}

/// Nearest-sample match of `x1..xN,value` rows onto the grid.
pub fn from_table(grid: Grid, rows: &[Vec<f64>]) -> Result<Field> {
    let dim = grid.dim();
    if rows.is_empty() {
        return reject("density table is empty");
    }
    if let Some(row) = rows.iter().find(|r| r.len() != dim + 1) {
        return reject(format!(
            "density table rows need {} columns, found {}",
            dim + 1,
            row.len()
        ));
    }
    if let Some(row) = rows.iter().find(|r| r[dim] < 0.0 || !r[dim].is_finite()) {
        return reject(format!("density table has an invalid value {}", row[dim]));
    }
    let h = grid.spacing();
    let l = grid.half_width();
    // Rows that land on a node claim it directly.
    let mut claimed: Vec<Option<(f64, f64)>> = vec![None; grid.len()];
    for row in rows {
        let mut multi = [0usize; 3];
        let mut dist2 = 0.0;
        let mut inside = true;
        for axis in 0..dim {
            let i = ((row[axis] + l) / h).round();
            if i < 0.0 || i >= grid.m() as f64 {
                inside = false;
                break;
            }
            multi[axis] = i as usize;
            let d = row[axis] - grid.coord(i as usize);
            dist2 += d * d;
        }
        if !inside {
            continue;
        }
        let idx = grid.ravel(&multi);
        match claimed[idx] {
            Some((d, _)) if d <= dist2 => {}
            _ => claimed[idx] = Some((dist2, row[dim])),
        }
    }
    let values = (0..grid.len())
        .map(|idx| match claimed[idx] {
            Some((_, v)) => v,
            None => {
                let x = grid.point(idx);
                let mut best = (f64::INFINITY, 0.0);
                for row in rows {
                    let d: f64 = (0..dim).map(|a| (row[a] - x[a]).powi(2)).sum();
                    if d < best.0 {
                        best = (d, row[dim]);
                    }
                }
                best.1
            }
        })
        .collect();
    Field::new(grid, Boundary::Periodic, values)
}

/// Max of `ρ(x) |x|^β` over nodes with `|x| ≥ 1`.
pub fn tail_constant(rho: &Field, beta: f64) -> f64 {
    let grid = rho.grid();
    rho.values()
        .iter()
        .enumerate()
        .filter_map(|(i, &v)| {
            let r = grid.radius(i);
            (r >= 1.0).then(|| v * r.powf(beta))
        })
        .fold(0.0, f64::max)
}

/// Minimum of ρ over nodes inside the sup-norm box of half-width `half`.
pub fn min_on_box(rho: &Field, half: f64) -> f64 {
    let grid = rho.grid();
    rho.values()
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.box_radius(*i) <= half + 1e-12)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min)
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec2(beta: f64) -> ProblemSpec {
        ProblemSpec {
            beta,
            half_width: 4.0,
            m: 16,
            ..Default::default()
        }
    }

    #[test]
    fn power_tail_values() {
        let rho = make_coefficient(&spec2(4.0)).unwrap();
        assert_eq!(rho.value_at(&[8, 8]), 1.0);
        // node (12, 8) is x = (2, 0)
        assert!((rho.value_at(&[12, 8]) - 1.0 / 25.0).abs() < 1e-15);
    }

    #[test]
    fn power_tail_needs_beta_above_dimension() {
        let err = make_coefficient(&spec2(2.0)).unwrap_err();
        assert!(matches!(err, Error::Assumption(_)));
    }

    #[test]
    fn tail_bound_holds() {
        for beta in [2.5, 4.0, 7.0] {
            let spec = ProblemSpec {
                beta,
                half_width: 16.0,
                m: 64,
                ..Default::default()
            };
            let rho = make_coefficient(&spec).unwrap();
            assert!(tail_constant(&rho, beta) <= 2f64.powf(beta / 2.0));
            assert!(rho.min() >= 0.0 && rho.integral() > 0.0);
        }
    }

    #[test]
    fn bump_has_compact_support() {
        let g = Grid::new(2, 32, 2.0).unwrap();
        let b = bump(g, 1.0);
        for (i, v) in b.values().iter().enumerate() {
            if g.radius(i) >= 1.0 {
                assert_eq!(*v, 0.0);
            }
        }
        assert_eq!(b.value_at(&[16, 16]), 1.0);
    }

    #[test]
    fn table_rejects_negative_values() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        assert!(from_table(g, &[vec![0.0, -1.0]]).is_err());
        assert!(from_table(g, &[vec![0.0, 1.0, 2.0]]).is_err());
    }

    #[test]
    fn table_nearest_sample() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let rows: Vec<Vec<f64>> = (0..16).map(|i| vec![g.coord(i), i as f64]).collect();
        let f = from_table(g, &rows).unwrap();
        assert_eq!(f.values()[5], 5.0);
        let sparse = from_table(g, &[vec![-1.0, 2.0], vec![0.9, 3.0]]).unwrap();
        assert_eq!(sparse.values()[0], 2.0);
        assert_eq!(sparse.values()[15], 3.0);
    }
}
