//! Numerical machinery for the fractional sublinear equation
//! `(-Δ)^{σ/2} u = ρ u^α` on `R^N`, `0 < α < 1`.

pub mod coefficient;
pub mod csvio;
pub mod dirichlet;
pub mod error;
pub mod extension;
pub mod fraclap;
pub mod grid;
pub mod norms;
pub mod pme;
pub mod riesz;
pub mod scenario;
pub mod spec;
pub mod sublinear;
pub mod transform;

pub use error::{Error, Result};
pub use grid::{Boundary, Field, Grid};
pub use spec::{ProblemSpec, RhoFamily};
