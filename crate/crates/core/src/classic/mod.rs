//! Gradient-free samplers: Metropolis-Hastings with a random-walk
//! specialization, and systematic-scan Gibbs.

mod gibbs;
mod metropolis;

pub use gibbs::{
    exact_gaussian_conditionals, gaussian_fcd, gibbs_step, FullConditional, FullConditionalSet,
    GaussianConditional, RwmConditional,
};
pub use metropolis::{mh_step, rwm_step, Proposal, RandomWalk, RwmConfig};
