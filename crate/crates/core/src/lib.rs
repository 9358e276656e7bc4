//! Exact incidence geometry over Cartesian products.
//!
//! Lattice and geometric point-line configurations, exact incidence counts,
//! additive/multiplicative/line energies, and the parallel/concurrent family
//! analysis built on top of them. All arithmetic is exact; floating point only
//! appears in reference quantities and exponent fits.

pub mod constructions;
pub mod energies;
pub mod error;
pub mod fit;
pub mod incidence;
pub mod rational;
pub mod structure;
pub mod sweep;
pub mod verify;

mod serde_big;
mod small;

pub use constructions::{build_elekes, build_family, build_geometric, Configuration};
pub use energies::{EnergyKind, EnergyReport, LineSet, ScalarSet};
pub use error::{Error, Result};
pub use rational::{rat, Intersection, Line, Point, Rational};
