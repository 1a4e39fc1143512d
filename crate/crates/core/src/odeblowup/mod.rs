//! Ordinary differential (in)equalities behind the blow-up argument.
//!
//! * [`integrator`]: adaptive RK4 that runs an ODE up to a sequence of
//!   growth thresholds and extrapolates the blow-up time.
//! * [`kato`]: Kato's lemma arithmetic, its extremal ODE
//!   F'' = B (t+R)^{−q} F^p, and calibration of the lemma's constant C₀.
//! * [`f0`]: the damped ODE F₀'' + μ F₀'/(1+t) = S(t) for the spatial mean.
//! * [`separable`]: closed-form blow-up of F' = c (s+t)^{−k} F^m.
//! * [`constants`]: the ledger of constants C₂…C₈, X, Y and δ, and the
//!   ε-dependent quantities built from them.

pub mod constants;
pub mod f0;
pub mod integrator;
pub mod kato;
pub mod separable;

pub use constants::{ConstantInputs, ConstantLedger};
pub use f0::{integrate_f0_system, F0Trace};
pub use integrator::{extrapolate_blowup_time, BlowupIntegrator, BlowupRun, ThresholdHit};
pub use kato::{
    calibrate_c0, integrate_kato_equality, integrate_kato_with, kato_bound, kato_m, kato_t1, KatoBlowup, KatoParams,
};
pub use separable::{separable_blowup_time, SeparableOde};
