//! Super-linearization of polynomial ODE systems.
//!
//! Given `x' = f(x)` with `f` polynomial, this crate builds the weighted
//! dependency graph of `f` (edge `i -> j` weighted by `df_j/dx_i`), checks that
//! every weight inside a strong component is constant, and if so constructs a
//! finite linear system `z' = A z + D` with `z = (x, p(x))` whose projection onto
//! the first `n` coordinates reproduces the flow of `f`. All symbolic work is
//! exact over the rationals.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod depgraph;
pub mod lift;
pub mod poly;
pub mod sysparse;
pub mod verify;

pub use depgraph::{ConditionReport, SccDecomposition, SkeletonGraph, Wdg};
pub use lift::{superlinearize, xumama_check, LiftError, Observable, SuperLinearization, XumamaCertificate};
pub use poly::{Degree, Monomial, PolyError, Polynomial, Rational, VariableSpace};
pub use sysparse::{parse_polynomial, parse_system, render_system, ParseError, PolySystem};
pub use verify::{simulate, verify_numeric, verify_symbolic, Trajectory};
