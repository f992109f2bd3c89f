//! Numerics for stability of Gabor phase retrieval in several variables.
//!
//! The crate is organised by the objects it works with:
//!
//! - [`grid`]: uniform sample grids on `R^d` (signals) and `R^{2d}` (phase space),
//!   analytic test signals and the `GGR1` binary grid format.
//! - [`gabor`]: the Gabor transform, spectrograms, modulation-space norms and the
//!   entire lift `G(z) = Gf(z̄)·η(z)`.
//! - [`entire`]: growth classes of entire functions, log-derivative ball norms,
//!   Poisson-Jensen residuals and zero counting in one complex variable.
//! - [`cheeger`]: weighted grid graphs, a Lanczos Fiedler solver, sweep cuts and an
//!   exhaustive oracle for the Cheeger constant of a weight on a phase-space domain.
//! - [`stability`]: phase alignment, Sobolev and weighted difference norms and the
//!   assembly of both sides of the stability inequalities.

pub mod cheeger;
pub mod entire;
pub mod gabor;
pub mod grid;
pub mod numeric;
pub mod stability;

mod error;

pub use error::{Error, Result};
