//! Closed-form Ising partition functions with twisted boundaries:
//! square lattice (Onsager/Kastening form) and anisotropic triangular
//! lattice (Wu–Hu form), plus dual couplings, decay rates and the
//! triangular mass-gap bound ρ.

pub mod square;
pub mod triangular;

/// Phase classification shared by both lattices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Disordered,
    Critical,
    Ordered,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Disordered => write!(f, "disordered"),
            Phase::Critical => write!(f, "critical"),
            Phase::Ordered => write!(f, "ordered"),
        }
    }
}
