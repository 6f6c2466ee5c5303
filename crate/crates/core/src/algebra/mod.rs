//! Normal-ordered ladder-operator polynomials and the finite Lie algebras they
//! close into.

mod closure;
mod parse;
mod polynomial;

use thiserror::Error;

pub use closure::{adjoint_matrices, close_algebra, rank, structure_constants, LieBasis, StructureConstants};
pub use parse::{parse_polynomial, parse_polynomial_in};
pub use polynomial::{commutator, normal_order, Ladder, LadderMonomial, LadderPolynomial, OperatorWord, Signature};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("mode count mismatch: {left} vs {right}")]
    ModeMismatch { left: usize, right: usize },
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("unknown mode '{name}' at {position}")]
    UnknownMode { name: String, position: usize },
    #[error("no generators given")]
    NoGenerators,
    #[error("generator {index} is zero or linearly dependent on earlier generators")]
    DependentGenerator { index: usize },
    #[error("closure exceeded {max_dim} independent elements; the algebra may be infinite")]
    ClosureOverflow { max_dim: usize },
    #[error("[H_{j}, H_{k}] leaves the span of the basis (residual {residual:e})")]
    NotClosed { j: usize, k: usize, residual: f64 },
    #[error("element is not in the span of the basis (residual {residual:e})")]
    NotInSpan { residual: f64 },
}
