//! Decide whether a system of second-order ODEs `F_i(t, x, x', x'') = 0`
//! is derivable from a Lagrangian, and when it is, build one.
//!
//! The library is organized around a small exact symbolic core:
//!
//! - [`expr`] — immutable expression trees over time, coordinates,
//!   derivatives and named parameters, with exact rational arithmetic,
//!   differentiation, a deterministic normal form and a seeded numeric
//!   zero test.
//! - [`parser`] — text grammar for expressions and the JSON system-file
//!   format.
//! - [`helmholtz`] — the three Helmholtz conditions H1–H3, the
//!   acceleration decomposition `F_i = P_i + Σ_j Q_ij x''_j` and the
//!   finer diagnostic identities implied by them.
//! - [`construct`] — reconstruction of a Lagrangian
//!   `L = G0 + Σ H_i x'_i + H0` from a passing system, validated by
//!   recomputing its Euler–Lagrange equations.
//! - [`multiplier`] — Jacobi last multipliers for one-dimensional
//!   dissipative systems.
//! - [`random`] — seeded generators used by the property and acceptance
//!   suites.

// index loops here usually touch several matrices at once
#![allow(clippy::needless_range_loop)]

pub mod construct;
pub mod expr;
pub mod helmholtz;
mod integrate;
pub mod multiplier;
pub mod parser;
pub mod random;

pub use expr::{Expr, ExprError, KernelFn, Point, Variable, Verdict, ZeroCheck, ZeroSettings};
