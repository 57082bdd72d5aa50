//! Geometry of the repulsive problem: cutoffs, escape function, eikonal
//! phase, conjugate operator quantities and the weight function.

pub mod conjugate;
pub mod cutoff;
pub mod escape;
pub mod phase;
pub mod weight;

pub use conjugate::{
    eval_ell, eval_q0, factorization_convergence, factorization_residual, phase_a, phase_a0,
    phase_a_jet, q0_jet, q2_closed, q2_definitional, FactorizationRecord, PhaseContext,
};
pub use cutoff::{chi, chi_prime};
pub use escape::{Escape, EscapeValues};
pub use phase::{eikonal_residual, theta, theta_gradient, DecayFit, EikonalReport, Phase};
pub use weight::{eval_weight_theta, weight_sweep, WeightParams, WeightSweep};
