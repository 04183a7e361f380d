//! Conic modeling over real scalar variables with a built-in interior-point backend.
//!
//! Programs are assembled from affine expressions ([`LinExpr`], [`CExpr`]) and four cone
//! families: linear (in)equalities, second-order cones, rotated second-order cones and
//! PSD blocks. Complex Hermitian blocks enter through [`herm_embed`].
//!
//! ```
//! use antijam_conic::{solve, ConicProgram, LinExpr, SymAffine};
//!
//! // maximize t s.t. [[1, t], [t, 1]] >= 0
//! let mut p = ConicProgram::new();
//! let t = p.add_var("t");
//! let mut s = SymAffine::new(2);
//! s.add(0, 0, &LinExpr::constant(1.0));
//! s.add(1, 1, &LinExpr::constant(1.0));
//! s.add(0, 1, &LinExpr::var(t));
//! p.add_psd("lmi", s).unwrap();
//! p.maximize(LinExpr::var(t));
//! let r = solve(&p);
//! assert!(r.is_optimal());
//! assert!((r.value(t) - 1.0).abs() < 1e-6);
//! ```

mod dump;
mod expr;
mod ipm;
mod matrix;
mod program;
mod solve;

pub use dump::DumpParseError;
pub use expr::{CExpr, ComplexVar, LinExpr, VarId};
pub use matrix::{herm_embed, Entries, HermAffine, SymAffine};
pub use program::{ConicProgram, Constraint, LabeledConstraint};
pub use solve::{
    constraint_violation, residual_check, solve, ConicBackend, InteriorPoint, SolveResult, SolveStatus,
    SolverSettings,
};

/// Errors raised while building a program.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConicError {
    #[error("matrix is not Hermitian at entry ({row}, {col})")]
    NotHermitian { row: usize, col: usize },
    #[error("constraint references undeclared variable {0}")]
    UnknownVariable(usize),
    #[error("malformed constraint: {0}")]
    Malformed(String),
}
