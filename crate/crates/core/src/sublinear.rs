//! Monotone iteration for `(-Δ)^{σ/2} u = ρ u^α` on boxes and the
//! exhaustion of `R^N` by growing boxes.

use log::{debug, info};

use crate::coefficient::make_coefficient;
use crate::dirichlet::{green_bound_constant, DirichletOperator};
use crate::error::{reject, Error, Result};
use crate::grid::{Boundary, Field};
use crate::riesz::{admissible_exponents, decay_fit, finiteness_check, riesz_convolve, DecayFit};
use crate::spec::ProblemSpec;

/// Diagnostics of one box solve.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub half_width: f64,
    pub iterations: usize,
    /// `‖(-Δ_D)^{σ/2} u - ρ u^α‖∞` over the box.
    pub residual: f64,
    /// `‖ρ u^α‖∞`, the scale of [`Self::residual`].
    pub source_sup: f64,
    /// `|‖(-Δ_D)^{σ/4} u‖^2 - ∫ ρ u^{α+1}|`.
    pub energy_gap: f64,
    /// `∫ ρ u^{α+1}`.
    pub energy: f64,
    pub j_value: f64,
    /// Largest increase `max(u^{k+1} - u^k)` over all steps.
    pub max_increase: f64,
    pub monotone: bool,
    /// Supersolution constant `C` in `ū⁰ = C U_R`.
    pub super_constant: f64,
    pub sup_u: f64,
    /// Sup-norm gap of every step, in order.
    pub gaps: Vec<f64>,
}

/// Tolerance on `u^{k+1} ≤ u^k`.
pub const MONOTONE_TOLERANCE: f64 = 1e-10;

/// `J(u) = ½ ‖(-Δ_D)^{σ/4} u‖^2 - (1/(α+1)) ∫ ρ |u|^{α+1}`.
pub fn functional_j(op: &DirichletOperator, rho: &Field, u: &Field, alpha: f64) -> Result<f64> {
    let quad = op.quadratic_form(u, op.sigma())?;
    let pot = rho.inner(&u.map(|v| v.abs().powf(alpha + 1.0)))?;
    Ok(0.5 * quad - pot / (alpha + 1.0))
}

/// Central difference quotient of `J` at `u` along `phi` with step `t`.
pub fn directional_derivative(
    op: &DirichletOperator,
    rho: &Field,
    u: &Field,
    alpha: f64,
    phi: &Field,
    t: f64,
) -> Result<f64> {
    let plus = u.zip_map(phi, |a, b| a + t * b)?;
    let minus = u.zip_map(phi, |a, b| a - t * b)?;
    Ok((functional_j(op, rho, &plus, alpha)? - functional_j(op, rho, &minus, alpha)?) / (2.0 * t))
}

fn restrict_to_box(op: &DirichletOperator, f: &Field) -> Field {
    let values = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| if op.contains(i) { v } else { 0.0 })
        .collect();
    Field::new(*f.grid(), Boundary::ZeroExtension, values).expect("restriction keeps values finite")
}

/// Solves on `(-R, R)^N` by descending from the supersolution `C U_R`.
///
/// `riesz` is `K^σ * ρ` when available; it fixes `C` through the fitted
/// Green bound `U_R ≤ C̃ K^σ*ρ`. Without it `C` comes from `‖U_R‖∞` alone.
pub fn solve_ball_with(
    rho: &Field,
    half: f64,
    spec: &ProblemSpec,
    riesz: Option<&Field>,
) -> Result<(Field, IterationReport)> {
    let op = DirichletOperator::new(*rho.grid(), half, spec.sigma)?;
    let alpha = spec.alpha;
    if rho.min() < 0.0 {
        return Err(Error::Assumption("density must be nonnegative".into()));
    }
    let rho_box = restrict_to_box(&op, rho);
    let zero = Field::zeros(*rho.grid(), Boundary::ZeroExtension);
    if rho_box.sup_norm() == 0.0 {
        info!("density vanishes on the box of half-width {half}; returning the trivial solution");
        let report = IterationReport {
            half_width: half,
            iterations: 1,
            residual: 0.0,
            source_sup: 0.0,
            energy_gap: 0.0,
            energy: 0.0,
            j_value: 0.0,
            max_increase: 0.0,
            monotone: true,
            super_constant: 1.0,
            sup_u: 0.0,
            gaps: vec![0.0],
        };
        return Ok((zero, report));
    }
    let green = op.solve(&rho_box)?;
    let exponent = alpha / (1.0 - alpha);
    let bound = match riesz {
        Some(k) => 2.0 * green_bound_constant(&green, k)? * k.sup_norm(),
        None => 2.0 * green.sup_norm(),
    };
    let c = bound.powf(exponent).max(1.0);
    let mut u = green.map(|v| c * v);
    let mut gaps = Vec::new();
    let mut max_increase = f64::NEG_INFINITY;
    let mut converged = false;
    for k in 0..spec.max_iter {
        let source = rho_box.zip_map(&u, |r, v| r * v.max(0.0).powf(alpha))?;
        let next = op.solve(&source)?;
        let (gap, inc) = next
            .values()
            .iter()
            .zip(u.values())
            .fold((0.0f64, f64::NEG_INFINITY), |(g, i), (a, b)| (g.max((a - b).abs()), i.max(a - b)));
        gaps.push(gap);
        max_increase = max_increase.max(inc);
        u = next;
        debug!("R = {half}: step {k}, gap {gap:.3e}");
        if inc > MONOTONE_TOLERANCE {
            return Err(Error::NonConvergence(format!(
                "iterates increased by {inc:.3e} at step {k} on the box of half-width {half}"
            )));
        }
        if gap < spec.tol_fixed_point {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "no convergence within {} iterations on the box of half-width {half} (last gap {:.3e})",
            spec.max_iter,
            gaps.last().copied().unwrap_or(f64::NAN)
        )));
    }
    let source = rho_box.zip_map(&u, |r, v| r * v.max(0.0).powf(alpha))?;
    let applied = op.apply(&u)?;
    let residual = applied
        .values()
        .iter()
        .zip(source.values())
        .enumerate()
        .filter(|(i, _)| op.contains(*i))
        .fold(0.0f64, |a, (_, (x, y))| a.max((x - y).abs()));
    let energy = rho_box.inner(&u.map(|v| v.max(0.0).powf(alpha + 1.0)))?;
    let quad = op.quadratic_form(&u, spec.sigma)?;
    let j_value = functional_j(&op, &rho_box, &u, alpha)?;
    let report = IterationReport {
        half_width: half,
        iterations: gaps.len(),
        residual,
        source_sup: source.sup_norm(),
        energy_gap: (quad - energy).abs(),
        energy,
        j_value,
        max_increase,
        monotone: max_increase <= MONOTONE_TOLERANCE,
        super_constant: c,
        sup_u: u.sup_norm(),
        gaps,
    };
    info!(
        "R = {half}: {} iterations, residual {:.3e}, energy gap {:.3e}",
        report.iterations, report.residual, report.energy_gap
    );
    Ok((u, report))
}

/// [`solve_ball_with`], computing `K^σ * ρ` when `σ < N`.
pub fn solve_ball(rho: &Field, half: f64, spec: &ProblemSpec) -> Result<(Field, IterationReport)> {
    let riesz = if spec.sigma < spec.dim as f64 {
        Some(riesz_convolve(rho, spec.sigma)?)
    } else {
        None
    };
    solve_ball_with(rho, half, spec, riesz.as_ref())
}

/// Solutions on the ladder of boxes and their comparison.
#[derive(Debug, Clone)]
pub struct ExhaustionLadder {
    pub radii: Vec<f64>,
    pub solutions: Vec<Field>,
    pub reports: Vec<IterationReport>,
    /// `max(u_R - u_{R'})` for consecutive `R < R'`.
    pub order_violations: Vec<f64>,
    /// `sup |u_{R'} - u_R|` on `|x| ≤ L/8` for consecutive pairs.
    pub gaps: Vec<f64>,
}

/// Tolerance on `u_R ≤ u_{R'}`.
pub const ORDER_TOLERANCE: f64 = 1e-8;
/// Ceiling on `‖u - K^σ*(ρ u^α)‖∞ / ‖u‖∞` over `|x| ≤ L/4`.
pub const IDENTITY_CEILING: f64 = 2e-2;

impl ExhaustionLadder {
    pub fn is_monotone(&self) -> bool {
        self.order_violations.iter().all(|&v| v <= ORDER_TOLERANCE)
    }

    /// Whether each gap is at most half the previous one.
    pub fn gaps_halve(&self) -> bool {
        self.gaps.windows(2).all(|w| w[1] <= 0.5 * w[0])
    }

    pub fn limit(&self) -> &Field {
        self.solutions.last().expect("ladder is never empty")
    }
}

/// Exhaustion limit and its diagnostics.
#[derive(Debug, Clone)]
pub struct GlobalSolution {
    pub rho: Field,
    /// `u_{L/2}`.
    pub u: Field,
    /// `K^σ * (ρ u^α)`, the whole-space representation of `u`.
    pub potential: Field,
    pub ladder: ExhaustionLadder,
    /// `‖u - K^σ*(ρ u^α)‖∞ / ‖u‖∞` over `|x| ≤ L/4`.
    pub identity_residual: f64,
    /// Decay fit of the potential over `[L/4, L/2]`; `None` when `ρ ≡ 0`.
    pub decay: Option<DecayFit>,
}

impl GlobalSolution {
    /// Turns failed ladder or identity checks into errors.
    pub fn verify(&self) -> Result<()> {
        if !self.ladder.is_monotone() {
            return Err(Error::CheckFailed(format!(
                "exhaustion ladder is not monotone (violations {:?})",
                self.ladder.order_violations
            )));
        }
        if self.identity_residual > IDENTITY_CEILING {
            return Err(Error::CheckFailed(format!(
                "integral identity residual {:.3e} exceeds {IDENTITY_CEILING:e}",
                self.identity_residual
            )));
        }
        Ok(())
    }
}

/// Box half-widths `L/8, L/4, L/2`.
pub fn ladder_radii(spec: &ProblemSpec) -> Vec<f64> {
    [8.0, 4.0, 2.0].iter().map(|d| spec.half_width / d).collect()
}

/// Runs the ladder for a given density without judging the outcome.
pub fn exhaust(rho: &Field, spec: &ProblemSpec) -> Result<GlobalSolution> {
    spec.validate()?;
    spec.require_subcritical("the whole-space problem")?;
    let grid = *rho.grid();
    if grid != spec.grid()? {
        return reject("density grid does not match the problem grid");
    }
    let finite = finiteness_check(rho, spec.sigma)?;
    if !finite.pass {
        return Err(Error::Assumption(format!(
            "K^sigma * rho is not finite on this box: outer share {:.3} of the tail integral",
            finite.outer_fraction
        )));
    }
    let riesz = riesz_convolve(rho, spec.sigma)?;
    let radii = ladder_radii(spec);
    let mut solutions = Vec::new();
    let mut reports = Vec::new();
    for &r in &radii {
        let (u, rep) = solve_ball_with(rho, r, spec, Some(&riesz))?;
        solutions.push(u);
        reports.push(rep);
    }
    let inner = spec.half_width / 8.0;
    let mut order_violations = Vec::new();
    let mut gaps = Vec::new();
    for pair in solutions.windows(2) {
        let viol = pair[0]
            .values()
            .iter()
            .zip(pair[1].values())
            .fold(f64::NEG_INFINITY, |a, (x, y)| a.max(x - y));
        order_violations.push(viol);
        gaps.push(pair[1].sup_diff_within(&pair[0], inner)?);
    }
    let u = solutions.last().unwrap().clone();
    let source = rho.zip_map(&u, |r, v| r * v.max(0.0).powf(spec.alpha))?;
    let potential = riesz_convolve(&source, spec.sigma)?;
    let sup_u = u.sup_within(spec.half_width / 4.0);
    let identity_residual = if sup_u == 0.0 {
        potential.sup_within(spec.half_width / 4.0)
    } else {
        u.sup_diff_within(&potential, spec.half_width / 4.0)? / sup_u
    };
    let decay = if potential.sup_norm() > 0.0 {
        let target = admissible_exponents(spec)?;
        let window = (spec.half_width / 4.0, spec.half_width / 2.0);
        Some(decay_fit(&potential, window, target, 32)?)
    } else {
        None
    };
    Ok(GlobalSolution {
        rho: rho.clone(),
        u,
        potential,
        ladder: ExhaustionLadder {
            radii,
            solutions,
            reports,
            order_violations,
            gaps,
        },
        identity_residual,
        decay,
    })
}

/// Builds the configured density, exhausts, and verifies.
pub fn solve_global(spec: &ProblemSpec) -> Result<GlobalSolution> {
    let rho = make_coefficient(spec)?;
    let sol = exhaust(&rho, spec)?;
    sol.verify()?;
    Ok(sol)
}

/// Outcome of [`monotone_in_rho`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneReport {
    /// `max(u_1 - u_2)`.
    pub max_violation: f64,
    pub pass: bool,
}

/// Checks `ρ_1 ≤ ρ_2 ⇒ u_1 ≤ u_2` on the largest box of the ladder.
pub fn monotone_in_rho(rho1: &Field, rho2: &Field, spec: &ProblemSpec) -> Result<MonotoneReport> {
    rho1.check_same_grid(rho2)?;
    if rho1.values().iter().zip(rho2.values()).any(|(a, b)| a > b) {
        return reject("monotonicity in rho needs rho1 <= rho2 pointwise");
    }
    let half = spec.half_width / 2.0;
    let (u1, _) = solve_ball(rho1, half, spec)?;
    let (u2, _) = solve_ball(rho2, half, spec)?;
    let max_violation = u1
        .values()
        .iter()
        .zip(u2.values())
        .fold(f64::NEG_INFINITY, |a, (x, y)| a.max(x - y));
    Ok(MonotoneReport {
        max_violation,
        pass: max_violation <= ORDER_TOLERANCE,
    })
}

/// One row of the perturbation experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationRow {
    pub eps: f64,
    /// `∫ ρ u_ε^α u̲^α (u_ε^{1-α} - u̲^{1-α})`.
    pub gap: f64,
    pub ratio: f64,
    /// `‖u_ε - u̲‖∞`.
    pub sup_difference: f64,
    /// `max(u̲ - u_ε)`; must stay below the order tolerance.
    pub order_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub rows: Vec<PerturbationRow>,
    /// `max G/ε ÷ min G/ε`.
    pub ratio_spread: f64,
    pub pass: bool,
}

/// Solves with `ρ + ε h` for each `ε` and measures the weighted gap to the
/// unperturbed solution on the box of half-width `L/2`.
pub fn perturbation_experiment(
    rho: &Field,
    bump: &Field,
    eps_list: &[f64],
    spec: &ProblemSpec,
) -> Result<PerturbationReport> {
    rho.check_same_grid(bump)?;
    if bump.min() < 0.0 {
        return reject("perturbation profile must be nonnegative");
    }
    if eps_list.iter().any(|&e| e < 0.0) {
        return reject("perturbation sizes must be nonnegative");
    }
    let half = spec.half_width / 2.0;
    let alpha = spec.alpha;
    let (base, _) = solve_ball(rho, half, spec)?;
    let mut rows = Vec::new();
    for &eps in eps_list {
        let rho_eps = rho.zip_map(bump, |r, b| r + eps * b)?;
        let u_eps = if eps == 0.0 { base.clone() } else { solve_ball(&rho_eps, half, spec)?.0 };
        let integrand = rho
            .values()
            .iter()
            .zip(u_eps.values())
            .zip(base.values())
            .map(|((&r, &ue), &ub)| {
                let (ue, ub) = (ue.max(0.0), ub.max(0.0));
                r * ue.powf(alpha) * ub.powf(alpha) * (ue.powf(1.0 - alpha) - ub.powf(1.0 - alpha))
            })
            .collect();
        let gap = Field::new(*rho.grid(), Boundary::ZeroExtension, integrand)?.integral();
        let order_violation = base
            .values()
            .iter()
            .zip(u_eps.values())
            .fold(f64::NEG_INFINITY, |a, (b, e)| a.max(b - e));
        if order_violation > ORDER_TOLERANCE {
            return Err(Error::CheckFailed(format!(
                "perturbed solution drops below the base solution by {order_violation:.3e} at eps = {eps}"
            )));
        }
        rows.push(PerturbationRow {
            eps,
            gap,
            ratio: if eps > 0.0 { gap / eps } else { 0.0 },
            sup_difference: u_eps.sup_diff_within(&base, f64::INFINITY)?,
            order_violation,
        });
    }
    let ratios: Vec<f64> = rows.iter().filter(|r| r.eps > 0.0).map(|r| r.ratio).collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let ratio_spread = if ratios.is_empty() { 1.0 } else { hi / lo };
    Ok(PerturbationReport {
        rows,
        ratio_spread,
        pass: ratio_spread <= 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::power_tail;
    use crate::grid::Grid;

    fn small_spec() -> ProblemSpec {
        ProblemSpec {
            half_width: 16.0,
            m: 64,
            ..Default::default()
        }
    }

    #[test]
    fn zero_density_gives_zero() {
        let spec = small_spec();
        let g = spec.grid().unwrap();
        let z = Field::zeros(g, Boundary::Periodic);
        let (u, rep) = solve_ball(&z, 4.0, &spec).unwrap();
        assert_eq!(u.sup_norm(), 0.0);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn box_solve_satisfies_equation() {
        let spec = small_spec();
        let g = spec.grid().unwrap();
        let rho = power_tail(g, 4.0).unwrap();
        let (u, rep) = solve_ball(&rho, 8.0, &spec).unwrap();
        assert!(rep.monotone);
        assert!(rep.residual <= 1e-6 * rep.source_sup);
        assert!(rep.energy_gap <= 1e-4 * rep.energy);
        assert!(u.min() >= -1e-8 * u.sup_norm());
        assert!(rep.gaps.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    }

    #[test]
    fn non_convergence_is_reported() {
        let spec = ProblemSpec {
            max_iter: 2,
            ..small_spec()
        };
        let g = spec.grid().unwrap();
        let rho = power_tail(g, 4.0).unwrap();
        assert!(matches!(solve_ball(&rho, 8.0, &spec), Err(Error::NonConvergence(_))));
    }

    #[test]
    fn monotone_in_rho_rejects_unordered() {
        let spec = small_spec();
        let g: Grid = spec.grid().unwrap();
        let rho = power_tail(g, 4.0).unwrap();
        let half = rho.map(|v| 0.5 * v);
        assert!(monotone_in_rho(&rho, &half, &spec).is_err());
        let rep = monotone_in_rho(&half, &rho, &spec).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn ladder_radii_default() {
        assert_eq!(ladder_radii(&ProblemSpec::default()), vec![4.0, 8.0, 16.0]);
    }
}
