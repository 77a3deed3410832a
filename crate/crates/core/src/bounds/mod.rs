//! Closed-form bounds on DeepONet output dimension and their empirical verifiers.
//!
//! Every quantity with exponents proportional to the parameter counts is evaluated
//! as a sum of logarithms; nothing here overflows for parameter counts up to
//! `10^6` and weight bounds up to `10^6`.

mod cover;
mod theorem;
mod verify;

pub use cover::{
    cube_cover_centers, log_covering_number_ball, verify_cover_bruteforce, CoverCheck,
};
pub use theorem::{
    alpha_prime, evaluate, log_add_exp, perturbation_bound, q_lower_bound_general,
    q_lower_bound_sigmoid, BoundInputs, BoundReport, FunctionClassSpec, JSource, LogCoverTerms,
    Theorem,
};
pub use verify::{hoeffding_mc_check, verify_perturbation, HoeffdingCheck, PerturbationCheck};
