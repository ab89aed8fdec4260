//! High-frequency acoustic scattering by finite unions of disjoint convex obstacles.
//!
//! Two independent approximations of the scattered field are provided:
//! iterated Kirchhoff (physical optics) surface integrals and geometrical
//! optics ray sums. Stationary-phase reductions tie the two together, and an
//! exact Mie series for a single sphere serves as ground truth.

pub mod error;
pub mod geometry;
pub mod kirchhoff;
pub mod matrix;
pub mod mie;
pub mod quadrature;
pub mod rays;
pub mod stationary;

pub use error::{Error, Result};

/// Crate version, recorded in run outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Boundary condition on every obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// Sound-soft: the total field vanishes on the boundary.
    Dirichlet,
    /// Sound-hard: the normal derivative of the total field vanishes.
    Neumann,
}

impl BoundaryCondition {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        }
    }
}
