//! Mixed H₂/H∞ state-feedback synthesis by policy optimization: Riccati and
//! H∞ kernels, the mixed cost and its gradients, solvers, the convex lifting
//! certificate and a command-line front end.

// `!(x > 0.0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

// Links the system OpenBLAS that backs the LAPACK Schur routine.
extern crate openblas_src;

pub mod cli;
pub mod ecl;
pub mod error;
pub mod hinf;
pub mod linalg;
pub mod mixedcost;
pub mod optim;
pub mod problem;
pub mod riccati;

pub use error::{Error, Result};
pub use problem::{MixedProblem, Policy};
