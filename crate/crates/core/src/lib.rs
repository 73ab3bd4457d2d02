//! Numerical toolkit for blow-up of the weakly coupled system
//!
//! ```text
//! u_tt - Δu + u_t = |v_t|^p,
//! v_tt - Δv       = |u_t|^q,
//! ```
//!
//! with data of size `ε` supported in `B_R`. It covers the exponent algebra of
//! the (p, q) plane, the eigenfunction test function, the slicing iteration
//! with its closed forms and constants, a finite-difference simulator that
//! tracks the test-function functionals, and an ε-sweep lifespan harness.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod exponents;
pub mod iteration;
pub mod logvalue;
pub mod quadrature;
pub mod solver;
pub mod testfn;

pub use error::{Error, Result};
pub use exponents::ProblemParams;
pub use logvalue::LogValue;
