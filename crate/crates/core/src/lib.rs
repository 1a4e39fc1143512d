//! Numerical laboratory for finite-time blow-up of the semilinear wave
//! equation with scale-invariant damping
//!
//! ```text
//! u_tt - Δu + μ/(1+t)^β u_t = |u|^p,   u(x,0) = εf(x),  u_t(x,0) = εg(x)
//! ```
//!
//! The crate is split along the lines of the blow-up argument:
//!
//! * [`exponents`]: Fujita/Strauss exponents, the quadratic γ(p, n), damping
//!   regimes and predicted lifespan exponents.
//! * [`testfuncs`]: the exponentially growing test function φ₁ and the
//!   data functionals built from it.
//! * [`odeblowup`]: ODE-inequality machinery (Kato's lemma, the F₀ ODE,
//!   separable blow-up) plus the constant ledger C₂…C₈.
//! * [`pdesim`]: a radial finite-difference solver with blow-up detection
//!   and the integral diagnostics used in the argument.
//! * [`lifespan`]: ε-sweeps, log-log fits and report files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exponents;
pub mod lifespan;
pub mod odeblowup;
pub mod pdesim;
pub mod quadrature;
pub mod testfuncs;

pub use error::{Error, Result};
pub use exponents::{DampingRegime, ExponentReport};
pub use lifespan::{SweepResult, Verdict};
pub use odeblowup::{ConstantLedger, KatoParams};
pub use pdesim::{Grid, ProblemSpec, SolutionTrace};
pub use testfuncs::RadialProfile;
