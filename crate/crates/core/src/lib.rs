//! Twisted-boundary-condition free energies, vortex/flux operator
//! expectations and the resulting rigorous mass-gap / string-tension
//! bounds in exactly solvable lattice models.
//!
//! The crate has three layers:
//!
//! * closed forms — exact 2D lattice gauge theory ([`lgt2d`]), the 1D
//!   principal chiral chain ([`pcm1d`]) and the square / triangular
//!   Ising partition functions with antiperiodic walls ([`ising`]),
//!   all built on the compact-group machinery in [`group`];
//! * ground truth — exhaustive enumeration and strip transfer matrices
//!   ([`oracle`]) that every closed form is validated against;
//! * sampling — an extended-ensemble Monte Carlo ([`mc`]) that treats
//!   the twist sector as a dynamical variable for sizes beyond the
//!   oracles.
//!
//! The numerical core is generic over the scalar type through
//! [`numeric::Real`]; the aliases below fix `f64`, which is what the
//! verification tolerances assume.

pub mod error;
pub mod group;
pub mod ising;
pub mod lgt2d;
pub mod mc;
pub mod numeric;
pub mod oracle;
pub mod pcm1d;

pub use error::{Error, Result};
pub use numeric::Real;

/// Concrete `f64` aliases for the main model types.
pub type ClassAction = group::ClassAction<f64>;
pub type CharacterCoefficients = group::CharacterCoefficients<f64>;
pub type Lgt2dSpec = lgt2d::Lgt2dSpec<f64>;
pub type SectorTable = lgt2d::SectorTable<f64>;
pub type BoundReport = lgt2d::BoundReport<f64>;
pub type ChainSpec = pcm1d::ChainSpec<f64>;
pub type SquareIsing = ising::square::SquareIsing<f64>;
pub type TriangularIsing = ising::triangular::TriangularIsing<f64>;
pub type MassGapBound = ising::triangular::MassGapBound<f64>;
pub type SpinLattice = oracle::SpinLattice<f64>;
pub type PartitionPair = oracle::PartitionPair<f64>;
