//! Scenario runner: a configuration, a set of checks, a report and CSV
//! tables for plotting.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;

use crate::coefficient::{bump, gaussian, make_coefficient};
use crate::csvio::{fmt_g17, Table};
use crate::dirichlet::DirichletOperator;
use crate::error::{Error, Result};
use crate::extension::{conormal_trace, extend};
use crate::fraclap::{SingularOperator, SingularOptions, SpectralOperator, TailMode};
use crate::grid::{Boundary, Field, Grid};
use crate::pme::{separable_residual, uniqueness_with, SeparableSolution, UniquenessReport};
use crate::riesz::{riesz_convolve, DecayFit, DECAY_SLACK};
use crate::spec::{parse_key_values, ProblemSpec};
use crate::sublinear::{exhaust, perturbation_experiment, solve_ball, GlobalSolution, ORDER_TOLERANCE};

/// A verification pipeline that can be enabled in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    OperatorXval,
    Inversion,
    Exhaustion,
    EnergyIdentity,
    Decay,
    ExtensionTrace,
    PmeUniqueness,
    Perturbation,
}

impl Check {
    /// Every check, in execution order.
    pub const ALL: [Check; 8] = [
        Check::OperatorXval,
        Check::Inversion,
        Check::Exhaustion,
        Check::EnergyIdentity,
        Check::Decay,
        Check::ExtensionTrace,
        Check::PmeUniqueness,
        Check::Perturbation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::OperatorXval => "operator_xval",
            Check::Inversion => "inversion",
            Check::Exhaustion => "exhaustion",
            Check::EnergyIdentity => "energy_identity",
            Check::Decay => "decay",
            Check::ExtensionTrace => "extension_trace",
            Check::PmeUniqueness => "pme_uniqueness",
            Check::Perturbation => "perturbation",
        }
    }

    pub fn parse(s: &str) -> Result<Check> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown check '{s}'")))
    }

    /// Whether the check solves the whole-space elliptic problem.
    fn needs_solution(self) -> bool {
        matches!(
            self,
            Check::Exhaustion | Check::EnergyIdentity | Check::Decay | Check::PmeUniqueness | Check::Perturbation
        )
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub spec: ProblemSpec,
    /// Enabled checks, sorted and deduplicated.
    pub checks: Vec<Check>,
    pub output: PathBuf,
}

impl Scenario {
    /// Parses a `key = value` configuration. Besides the problem keys it
    /// accepts `name`, `output` and `checks` (a comma-separated list, or
    /// `all`).
    pub fn parse(text: &str) -> Result<Scenario> {
        let kv = parse_key_values(text)?;
        let mut spec = ProblemSpec::default();
        let mut name = "scenario".to_string();
        let mut output = PathBuf::from("out");
        let mut checks = Vec::new();
        let mut m_given = false;
        for (key, value) in &kv {
            match key.as_str() {
                "name" => name = value.clone(),
                "output" => output = PathBuf::from(value),
                "checks" => {
                    checks = if value.trim() == "all" {
                        Check::ALL.to_vec()
                    } else {
                        value
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(Check::parse)
                            .collect::<Result<_>>()?
                    }
                }
                _ => {
                    m_given |= key == "M";
                    spec.set(key, value)?
                }
            }
        }
        if !m_given {
            spec.m = ProblemSpec::default_m(spec.dim);
        }
        checks.sort();
        checks.dedup();
        let scenario = Scenario {
            name,
            spec,
            checks,
            output,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_file(path: &Path) -> Result<Scenario> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Scenario::parse(&text)
    }

    /// Structural checks plus the hypotheses the enabled checks rely on.
    pub fn validate(&self) -> Result<()> {
        if self.checks.is_empty() {
            return Err(Error::Config("no checks enabled".into()));
        }
        self.spec.validate()?;
        if self.checks.contains(&Check::PmeUniqueness) {
            self.spec.require_subcritical("the porous-medium uniqueness experiment")?;
        }
        if self.checks.iter().any(|c| c.needs_solution()) {
            self.spec.require_subcritical("the whole-space problem")?;
        }
        Ok(())
    }
}

/// One report line: a measured value against a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub check: Check,
    pub quantity: String,
    pub measured: f64,
    /// `"<="` or `">="`.
    pub relation: &'static str,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckLine {
    fn at_most(check: Check, quantity: impl Into<String>, measured: f64, threshold: f64) -> Self {
        CheckLine {
            check,
            quantity: quantity.into(),
            measured,
            relation: "<=",
            threshold,
            pass: measured <= threshold,
        }
    }

    fn at_least(check: Check, quantity: impl Into<String>, measured: f64, threshold: f64) -> Self {
        CheckLine {
            check,
            quantity: quantity.into(),
            measured,
            relation: ">=",
            threshold,
            pass: measured >= threshold,
        }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} measured={} threshold{}{} {}",
            self.check,
            self.quantity,
            fmt_g17(self.measured),
            self.relation,
            fmt_g17(self.threshold),
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Report lines plus named CSV tables.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub lines: Vec<CheckLine>,
    /// `(file name, table, plot data?)`.
    pub tables: Vec<(String, Table, bool)>,
}

impl Outcome {
    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    /// Report text: header, one line per measured quantity, verdict.
    pub fn report(&self, scenario: &Scenario) -> String {
        let s = &scenario.spec;
        let mut out = format!(
            "scenario {}\nN={} sigma={} alpha={} beta={} rho={} L={} M={}\n",
            scenario.name,
            s.dim,
            fmt_g17(s.sigma),
            fmt_g17(s.alpha),
            fmt_g17(s.beta),
            s.rho_family.name(),
            fmt_g17(s.half_width),
            s.m
        );
        for line in &self.lines {
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out.push_str(if self.all_pass() { "overall PASS\n" } else { "overall FAIL\n" });
        out
    }

    fn table(&mut self, name: &str, table: Table, plot: bool) {
        self.tables.push((name.to_string(), table, plot));
    }
}

/// Thresholds of the report.
pub mod thresholds {
    pub const XVAL_1D: f64 = 1e-3;
    pub const XVAL_ND: f64 = 5e-3;
    pub const STRUCTURAL: f64 = 1e-12;
    pub const INVERSION: f64 = 2e-2;
    pub const GAP_SHRINK: f64 = 2.0;
    pub const IDENTITY: f64 = 2e-2;
    pub const ENERGY: f64 = 1e-4;
    pub const TRACE: f64 = 5e-2;
    pub const CLASSICAL: f64 = 1e-2;
    pub const REFINEMENT: f64 = 3.0;
    pub const COMPARISON: f64 = 1e-8;
    pub const RATIO_SLACK: f64 = 1e-6;
    pub const SPREAD: f64 = 2.0;
    pub const SHRINK: f64 = 10.0;
}

/// Perturbation sizes of the perturbation check.
pub const PERTURBATION_EPS: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Runs every enabled check in order and collects lines and tables.
pub fn evaluate(scenario: &Scenario) -> Result<Outcome> {
    scenario.validate()?;
    let spec = &scenario.spec;
    let mut out = Outcome::default();
    let mut solution: Option<GlobalSolution> = None;
    for &check in &scenario.checks {
        info!("running {check}");
        if check.needs_solution() && solution.is_none() {
            let rho = make_coefficient(spec)?;
            solution = Some(exhaust(&rho, spec)?);
        }
        match check {
            Check::OperatorXval => operator_xval(spec, &mut out)?,
            Check::Inversion => inversion(spec, &mut out)?,
            Check::Exhaustion => exhaustion(solution.as_ref().unwrap(), &mut out),
            Check::EnergyIdentity => energy_identity(solution.as_ref().unwrap(), &mut out),
            Check::Decay => decay(solution.as_ref().unwrap(), &mut out)?,
            Check::ExtensionTrace => extension_trace(spec, &mut out)?,
            Check::PmeUniqueness => pme_uniqueness(solution.as_ref().unwrap(), spec, &mut out)?,
            Check::Perturbation => perturbation(solution.as_ref().unwrap(), spec, &mut out)?,
        }
    }
    Ok(out)
}

/// Runs the scenario and writes `report.txt` and every table into the
/// output directory.
pub fn run(scenario: &Scenario) -> Result<Outcome> {
    let outcome = evaluate(scenario)?;
    fs::create_dir_all(&scenario.output)?;
    for (name, table, _) in &outcome.tables {
        table.write(&scenario.output.join(name))?;
    }
    fs::write(scenario.output.join("report.txt"), outcome.report(scenario))?;
    Ok(outcome)
}

/// Writes only the plotting tables; returns their paths.
pub fn emit_plotdata(scenario: &Scenario) -> Result<Vec<PathBuf>> {
    let outcome = evaluate(scenario)?;
    let plots: Vec<_> = outcome.tables.iter().filter(|(_, _, plot)| *plot).collect();
    let mut paths = Vec::new();
    if plots.is_empty() {
        return Ok(paths);
    }
    fs::create_dir_all(&scenario.output)?;
    for (name, table, _) in plots {
        let path = scenario.output.join(name);
        table.write(&path)?;
        paths.push(path);
    }
    Ok(paths)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Spectral against singular-integral operator on a Gaussian, plus the
/// structural identities of the spectral and Dirichlet operators.
fn operator_xval(spec: &ProblemSpec, out: &mut Outcome) -> Result<()> {
    let c = Check::OperatorXval;
    let grid = Grid::new(spec.dim, ProblemSpec::default_m(spec.dim), 16.0)?;
    let f = Field::from_fn(grid, Boundary::Periodic, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp());
    let spectral = SpectralOperator::new(grid, spec.sigma)?;
    let a = spectral.apply(&f)?;
    let opts = SingularOptions {
        tail: TailMode::Periodic,
        ..Default::default()
    };
    let b = SingularOperator::new(grid, spec.sigma, opts)?.apply(&f)?;
    let mismatch = a.sup_diff_within(&b, 8.0)? / a.sup_within(8.0);
    let limit = if spec.dim == 1 {
        thresholds::XVAL_1D
    } else {
        thresholds::XVAL_ND
    };
    out.lines.push(CheckLine::at_most(c, "spectral_vs_singular", mismatch, limit));

    // self-adjointness and semigroup on two smooth periodic fields
    let g = Field::from_fn(grid, Boundary::Periodic, |x| {
        let r2: f64 = x.iter().map(|v| (v - 1.0) * (v - 1.0)).sum();
        (-0.5 * r2).exp() * (1.0 + 0.3 * x[0])
    });
    let ag = spectral.apply(&g)?;
    let sym = (a.inner(&g)? - f.inner(&ag)?).abs() / (a.l2_norm() * g.l2_norm());
    out.lines.push(CheckLine::at_most(c, "self_adjointness", sym, thresholds::STRUCTURAL));
    let half = SpectralOperator::new(grid, spec.sigma / 2.0)?;
    let twice = half.apply(&half.apply(&f)?)?;
    let semi = max_abs_diff(twice.values(), a.values()) / a.sup_norm();
    out.lines.push(CheckLine::at_most(c, "semigroup", semi, thresholds::STRUCTURAL));

    let dop = DirichletOperator::new(grid, 8.0, spec.sigma)?;
    let inside = dop.interior_indices();
    let boxed = {
        let mut v = vec![0.0; grid.len()];
        inside.iter().for_each(|&i| v[i] = f.values()[i]);
        Field::new(grid, Boundary::ZeroExtension, v)?
    };
    let back = dop.solve(&dop.apply(&boxed)?)?;
    let round = max_abs_diff(back.values(), boxed.values()) / boxed.sup_norm();
    out.lines.push(CheckLine::at_most(c, "dirichlet_round_trip", round, thresholds::STRUCTURAL));

    let again = spectral.apply(&f)?;
    let identical = a.values().iter().zip(again.values()).all(|(x, y)| x.to_bits() == y.to_bits());
    out.lines.push(CheckLine::at_most(
        c,
        "rerun_bit_differences",
        if identical { 0.0 } else { 1.0 },
        0.0,
    ));
    Ok(())
}

/// `(-Δ)^{σ/2}(K^σ * ρ)` against `ρ` on `|x| ≤ L/2`.
fn inversion(spec: &ProblemSpec, out: &mut Outcome) -> Result<()> {
    let rho = make_coefficient(spec)?;
    let u = riesz_convolve(&rho, spec.sigma)?;
    let back = SpectralOperator::new(*rho.grid(), spec.sigma)?.apply(&u)?;
    let err = back.sup_diff_within(&rho, spec.half_width / 2.0)? / rho.sup_norm();
    out.lines
        .push(CheckLine::at_most(Check::Inversion, "relative_residual", err, thresholds::INVERSION));
    Ok(())
}

fn exhaustion(sol: &GlobalSolution, out: &mut Outcome) {
    let c = Check::Exhaustion;
    let ladder = &sol.ladder;
    let worst = ladder.order_violations.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    out.lines.push(CheckLine::at_most(c, "order_violation", worst, ORDER_TOLERANCE));
    let shrink = ladder
        .gaps
        .windows(2)
        .map(|w| w[0] / w[1])
        .fold(f64::INFINITY, f64::min);
    out.lines.push(CheckLine::at_least(c, "gap_shrink_factor", shrink, thresholds::GAP_SHRINK));
    out.lines
        .push(CheckLine::at_most(c, "integral_identity", sol.identity_residual, thresholds::IDENTITY));

    let mut conv = Table::new(&["R", "iter", "residual", "energy_gap", "sup_u"]);
    for r in &ladder.reports {
        conv.push_numbers(&[r.half_width, r.iterations as f64, r.residual, r.energy_gap, r.sup_u]);
    }
    out.table("convergence.csv", conv, false);
    let mut gaps = Table::new(&["R", "R_next", "gap", "order_violation"]);
    for (k, (&gap, &viol)) in ladder.gaps.iter().zip(&ladder.order_violations).enumerate() {
        gaps.push_numbers(&[ladder.radii[k], ladder.radii[k + 1], gap, viol]);
    }
    out.table("ladder.csv", gaps, true);
}

fn energy_identity(sol: &GlobalSolution, out: &mut Outcome) {
    let worst = sol
        .ladder
        .reports
        .iter()
        .map(|r| if r.energy > 0.0 { r.energy_gap / r.energy } else { r.energy_gap })
        .fold(0.0f64, f64::max);
    out.lines
        .push(CheckLine::at_most(Check::EnergyIdentity, "relative_gap", worst, thresholds::ENERGY));
}

fn decay_tables(fit: &DecayFit, out: &mut Outcome) {
    let mut shells = Table::new(&["log_r", "log_u"]);
    for &(lr, lu) in &fit.shells {
        shells.push_numbers(&[lr, lu]);
    }
    out.table("decay.csv", shells, true);
    let mut summary = Table::new(&["nu", "r", "exponent", "window_lo", "window_hi", "slope", "constant"]);
    summary.push_numbers(&[fit.nu, fit.r, fit.exponent, fit.window.0, fit.window.1, fit.slope, fit.constant]);
    out.table("decay_fit.csv", summary, true);
}

fn decay(sol: &GlobalSolution, out: &mut Outcome) -> Result<()> {
    let Some(fit) = &sol.decay else {
        return Err(Error::CheckFailed("density vanishes; nothing decays".into()));
    };
    out.lines.push(CheckLine::at_most(
        Check::Decay,
        "tail_slope",
        fit.slope,
        fit.exponent + DECAY_SLACK,
    ));
    decay_tables(fit, out);
    Ok(())
}

/// Height of the extension cylinder.
fn extension_height(spec: &ProblemSpec) -> f64 {
    2.0 * spec.half_width
}

fn extension_trace(spec: &ProblemSpec, out: &mut Outcome) -> Result<()> {
    let c = Check::ExtensionTrace;
    let rho = make_coefficient(spec)?;
    let u = riesz_convolve(&rho, spec.sigma)?;
    let w = extend(&u, spec.sigma, extension_height(spec))?;
    let trace = conormal_trace(&w)?;
    let err = trace.sup_diff_within(&rho, spec.half_width / 2.0)? / rho.sup_norm();
    out.lines.push(CheckLine::at_most(c, "trace_vs_rho", err, thresholds::TRACE));

    // σ = 1: harmonic extension and Dirichlet-to-Neumann map
    let grid = *rho.grid();
    let g = gaussian(grid, 1.0, 1.0);
    let w1 = extend(&g, 1.0, extension_height(spec))?;
    let dtn = SpectralOperator::new(grid, 1.0)?.apply(&g)?;
    let t1 = conormal_trace(&w1)?;
    let mut worst = t1.sup_diff_within(&dtn, f64::INFINITY)? / dtn.sup_norm();
    for &y in &[0.5, 1.0] {
        let poisson = crate::extension::poisson_level(&g, y)?;
        let level: Vec<f64> = (0..grid.len()).map(|i| w1.value_at(i, y)).collect();
        worst = worst.max(max_abs_diff(&level, poisson.values()) / g.sup_norm());
    }
    out.lines.push(CheckLine::at_most(c, "classical_sigma_1", worst, thresholds::CLASSICAL));
    Ok(())
}

/// Forward-difference separable residual at the grid of `spec` and at the
/// refined grid with a quarter of the step.
pub fn separable_refinement(spec: &ProblemSpec, dt: f64) -> Result<(f64, f64)> {
    let m = spec.pme_exponent();
    let half = spec.half_width / 4.0;
    let mut residuals = [0.0; 2];
    for (k, (mm, step)) in [(spec.m, dt), (2 * spec.m, dt / 4.0)].into_iter().enumerate() {
        let s = ProblemSpec { m: mm, ..spec.clone() };
        let rho = make_coefficient(&s)?;
        let (u, _) = solve_ball(&rho, half, &s)?;
        let sep = SeparableSolution::new(u, m, 1.0)?;
        let op = DirichletOperator::new(*rho.grid(), half, s.sigma)?;
        residuals[k] = separable_residual(&sep, &rho, &op, step)?;
    }
    Ok((residuals[0], residuals[1]))
}

fn trajectory_table(rep: &UniquenessReport, initial_mass: f64, initial_sup: f64) -> Table {
    let mut t = Table::new(&["t", "mass", "sup_v", "ratio_bound", "ratio_measured"]);
    t.push_raw(vec![
        "0".into(),
        fmt_g17(initial_mass),
        fmt_g17(initial_sup),
        "inf".into(),
        fmt_g17(1.0),
    ]);
    for s in &rep.samples {
        t.push_numbers(&[s.t, s.mass, s.sup_v, s.ratio_bound, s.ratio_measured]);
    }
    t
}

fn pme_uniqueness(sol: &GlobalSolution, spec: &ProblemSpec, out: &mut Outcome) -> Result<()> {
    let c = Check::PmeUniqueness;
    let (coarse, fine) = separable_refinement(spec, 1e-3)?;
    out.lines.push(CheckLine::at_least(
        c,
        "separable_residual_reduction",
        coarse / fine,
        thresholds::REFINEMENT,
    ));
    let rep = uniqueness_with(&sol.rho, &sol.u, &sol.u, spec)?;
    out.lines
        .push(CheckLine::at_most(c, "order_in_R", rep.order_violation, thresholds::COMPARISON));
    out.lines.push(CheckLine::at_most(
        c,
        "comparison_with_separable",
        rep.comparison_violation,
        thresholds::COMPARISON,
    ));
    for s in &rep.samples {
        out.lines.push(CheckLine::at_most(
            c,
            format!("ratio_t={}", fmt_g17(s.t)),
            s.ratio_measured,
            s.ratio_bound + thresholds::RATIO_SLACK,
        ));
    }
    if let Some(fit) = &rep.decay {
        out.lines.push(CheckLine::at_most(
            c,
            "time_integral_slope",
            fit.slope,
            fit.exponent + DECAY_SLACK,
        ));
    }
    let sep = SeparableSolution::new(sol.u.clone(), rep.m, 1.0)?;
    let v0 = sep.at(0.0);
    let largest = *rep.radii.last().unwrap();
    let op = DirichletOperator::new(*v0.grid(), largest, spec.sigma)?;
    let (mut mass, mut sup) = (0.0, 0.0f64);
    for i in op.interior_indices() {
        mass += sol.rho.values()[i] * v0.values()[i];
        sup = sup.max(v0.values()[i]);
    }
    mass *= v0.grid().cell_volume();
    out.table("trajectory.csv", trajectory_table(&rep, mass, sup), true);
    Ok(())
}

fn perturbation(sol: &GlobalSolution, spec: &ProblemSpec, out: &mut Outcome) -> Result<()> {
    let c = Check::Perturbation;
    let h = bump(*sol.rho.grid(), 2.0);
    let rep = perturbation_experiment(&sol.rho, &h, &PERTURBATION_EPS, spec)?;
    out.lines.push(CheckLine::at_most(c, "ratio_spread", rep.ratio_spread, thresholds::SPREAD));
    let d = |eps: f64| rep.rows.iter().find(|r| r.eps == eps).map(|r| r.sup_difference).unwrap_or(f64::NAN);
    let shrink = d(1e-3) / d(1e-2);
    out.lines.push(CheckLine::at_most(c, "sup_difference_ratio", shrink, thresholds::SHRINK));
    let worst = rep.rows.iter().map(|r| r.order_violation).fold(f64::NEG_INFINITY, f64::max);
    out.lines.push(CheckLine::at_most(c, "order_violation", worst, ORDER_TOLERANCE));
    let mut t = Table::new(&["eps", "gap", "ratio", "sup_difference"]);
    for r in &rep.rows {
        t.push_numbers(&[r.eps, r.gap, r.ratio, r.sup_difference]);
    }
    out.table("perturbation.csv", t, true);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_checks_and_keys() {
        let s = Scenario::parse("name = t\nchecks = decay, inversion, decay\nN = 1\nsigma = 0.4\n").unwrap();
        assert_eq!(s.checks, vec![Check::Inversion, Check::Decay]);
        assert_eq!(s.spec.m, 2048);
        assert_eq!(s.name, "t");
        let all = Scenario::parse("checks = all").unwrap();
        assert_eq!(all.checks.len(), 8);
    }

    #[test]
    fn empty_checks_are_config_errors() {
        assert!(matches!(Scenario::parse("checks ="), Err(Error::Config(_))));
        assert!(matches!(Scenario::parse("N = 2"), Err(Error::Config(_))));
        assert!(matches!(Scenario::parse("checks = nope"), Err(Error::Config(_))));
    }

    #[test]
    fn supercritical_pme_is_an_assumption_error() {
        let r = Scenario::parse("sigma = 1.2\nchecks = pme_uniqueness");
        assert!(matches!(r, Err(Error::Assumption(_))));
        assert_eq!(r.unwrap_err().exit_code(), 2);
    }

    #[test]
    fn line_format() {
        let l = CheckLine::at_most(Check::Decay, "tail_slope", -1.5, -1.3);
        assert_eq!(l.to_string(), "decay tail_slope measured=-1.5 threshold<=-1.3 PASS");
        assert!(!CheckLine::at_least(Check::Decay, "x", 1.0, 2.0).pass);
    }
}
