//! Wei–Norman decoupling of driven harmonic oscillators.
//!
//! The [`algebra`] module closes ladder-operator Hamiltonians into finite Lie
//! algebras; [`engine`] turns the structure constants into coefficient ODEs;
//! [`gaussian`] specializes to linear and quadratic drives. [`fock`],
//! [`symplectic`] and [`liouville`] provide independent propagators used to
//! check every decoupled solution.

pub mod algebra;
pub mod linalg;
pub mod ode;
pub mod quad;
pub mod engine;
pub mod fock;
pub mod gaussian;
pub mod symplectic;
pub mod liouville;
