//! Problem parameters and the `key = value` configuration format.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Coefficient families for the density ρ.
#[derive(Debug, Clone, PartialEq)]
pub enum RhoFamily {
    /// `(1 + |x|^2)^(-β/2)`, β > N.
    PowerTail,
    /// `exp(-|x|^2)`.
    Gaussian,
    /// `exp(1 - 1/(1 - |x|^2))` inside the unit ball, 0 outside.
    Bump,
    /// Nearest-sample lookup into a CSV of `x1,...,xN,value` rows.
    CustomTable(PathBuf),
}

impl RhoFamily {
    pub fn name(&self) -> &'static str {
        match self {
            RhoFamily::PowerTail => "power_tail",
            RhoFamily::Gaussian => "gaussian",
            RhoFamily::Bump => "bump",
            RhoFamily::CustomTable(_) => "custom_table",
        }
    }
}

/// Single source of configuration for every pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub dim: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rho_family: RhoFamily,
    /// Box half-width L.
    pub half_width: f64,
    /// Grid points per axis.
    pub m: usize,
    /// Sup-norm stopping tolerance for the monotone iteration.
    pub tol_fixed_point: f64,
    pub max_iter: usize,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        ProblemSpec {
            dim: 2,
            sigma: 0.5,
            alpha: 0.5,
            beta: 4.0,
            rho_family: RhoFamily::PowerTail,
            half_width: 32.0,
            m: 256,
            tol_fixed_point: 1e-10,
            max_iter: 200,
        }
    }
}

impl ProblemSpec {
    /// Default points per axis: 2048 in 1D, 256 in 2D, 64 in 3D.
    pub fn default_m(dim: usize) -> usize {
        match dim {
            1 => 2048,
            2 => 256,
            _ => 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Config(format!("N must be 1, 2 or 3, got {}", self.dim)));
        }
        if !(self.sigma > 0.0 && self.sigma < 2.0) {
            return Err(Error::Config(format!("sigma must lie in (0,2), got {}", self.sigma)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::Config(format!("L must be positive, got {}", self.half_width)));
        }
        if self.m < 16 || !self.m.is_power_of_two() {
            return Err(Error::Config(format!(
                "M must be a power of two >= 16, got {}",
                self.m
            )));
        }
        if !(self.tol_fixed_point > 0.0) || self.max_iter == 0 {
            return Err(Error::Config("iteration tolerance and cap must be positive".into()));
        }
        if self.rho_family == RhoFamily::PowerTail && self.beta <= self.dim as f64 {
            return Err(Error::Assumption(format!(
                "power_tail density needs beta > N for decay at infinity (beta = {}, N = {})",
                self.beta, self.dim
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.m, self.half_width)
    }

    /// Whether `N > 2σ`.
    pub fn is_subcritical(&self) -> bool {
        self.dim as f64 > 2.0 * self.sigma
    }

    /// Guard for operations that need `N > 2σ`.
    pub fn require_subcritical(&self, operation: &str) -> Result<()> {
        if self.is_subcritical() {
            Ok(())
        } else {
            Err(Error::Assumption(format!(
                "{operation} needs N > 2 sigma (N = {}, sigma = {})",
                self.dim, self.sigma
            )))
        }
    }

    /// `m = 1/α`, the porous-medium exponent.
    pub fn pme_exponent(&self) -> f64 {
        1.0 / self.alpha
    }

    /// Applies one `key = value` setting. Unknown keys are config errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "N" | "dim" => self.dim = parse(key, value)?,
            "sigma" => self.sigma = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "L" | "half_width" => self.half_width = parse(key, value)?,
            "M" => self.m = parse(key, value)?,
            "tol_fixed_point" => self.tol_fixed_point = parse(key, value)?,
            "max_iter" => self.max_iter = parse(key, value)?,
            "rho_family" => {
                self.rho_family = match value {
                    "power_tail" => RhoFamily::PowerTail,
                    "gaussian" => RhoFamily::Gaussian,
                    "bump" => RhoFamily::Bump,
                    "custom_table" => match &self.rho_family {
                        RhoFamily::CustomTable(p) => RhoFamily::CustomTable(p.clone()),
                        _ => RhoFamily::CustomTable(PathBuf::new()),
                    },
                    other => {
                        return Err(Error::Config(format!("unknown rho_family '{other}'")));
                    }
                }
            }
            "rho_table" => self.rho_family = RhoFamily::CustomTable(PathBuf::from(value)),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse value '{value}' for key '{key}'")))
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// a repeated key keeps its last value.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}
