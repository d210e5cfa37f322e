//! Learned helpers wrapped in exactness-preserving kernels: a kernel-ridge
//! surrogate screening proposals for delayed-acceptance MH, and a Gaussian
//! mixture fitted by EM used as a global independence proposal.

mod delayed;
mod gmm;
mod surrogate;

pub use delayed::{delayed_acceptance_step, DaOutcome, DelayedAcceptance};
pub use gmm::{fit_gmm, fit_gmm_with, independence_proposal_step, EmOptions, MixtureProposal};
pub use surrogate::{fit_surrogate, refine_surrogate, surrogate_predict, Prediction, SurrogateModel};

pub(crate) fn fingerprint_f64s<'a>(values: impl IntoIterator<Item = &'a f64>) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for v in values {
        h = crate::rng::splitmix64(h ^ v.to_bits());
    }
    h
}
