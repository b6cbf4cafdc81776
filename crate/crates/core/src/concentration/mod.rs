//! The analytic toolbox: Orlicz norms, exact ℓ1-ball moments, the
//! uniform-to-cone moment transfer, ψ₂/ψ₁ estimates for the cone measure,
//! and Bernstein tail bounds — as computable, testable objects.

pub mod checks;
pub mod moments;
pub mod orlicz;

pub use checks::{
    bernstein_bound, body_label, comparison_moments, default_t_grid, empirical_sum_tail,
    mc_cone_moment, mc_uniform_moment, transfer_identity, verify_psi1_general,
    verify_psi2_unconditional, verify_psi2_with_constant, BernsteinVariant, CheckError,
    Psi1Report, Psi2Report, SumTailReport, PSI2_CONSTANT,
};
pub use moments::{
    certify_l1_cone_psi2, cone_moment_linear, l1_ball_monomial_moment,
    l1_ball_monomial_moment_normalized, l1_cone_exp_moment_upper, moment_transfer_coefficient,
    moment_transfer_coefficient_exact, ConcError, MomentSpec, Psi2Certificate,
};
pub use orlicz::{
    bootstrap_orlicz_norm, empirical_orlicz_norm, Alpha, OrliczEstimate, OrliczReport,
};
