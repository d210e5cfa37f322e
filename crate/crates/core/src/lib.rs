//! Markov chain Monte Carlo samplers with efficiency diagnostics and a
//! reproducible benchmark harness.
//!
//! The crate is organised bottom-up: random streams and chain state, the
//! Metropolis-Hastings core, analytic targets, classic and gradient-based
//! kernels, warmup adaptation, surrogate and mixture augmentations,
//! diagnostics, the sampler-selection advisor and the experiment runner.
//!
//! ```
//! use mcmc_core::prelude::*;
//!
//! let target = StandardGaussian::new(2).unwrap();
//! let mut rng = RngStream::new(42, 0);
//! let mut counters = EvalCounters::default();
//! let mut state = ChainState::new(&target, vec![0.0, 0.0], false, &mut counters).unwrap();
//! let config = RwmConfig::new(1.0).unwrap();
//! for _ in 0..100 {
//!     state = rwm_step(state, &config, &target, &mut rng, &mut counters).unwrap().state;
//! }
//! assert_eq!(counters.target, 101);
//! ```

pub mod adaptation;
pub mod advisor;
pub mod augment;
pub mod classic;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod gradient;
pub mod kernel;
pub mod mh;
pub mod parallel;
pub mod rng;
pub mod state;
pub mod targets;

pub use error::{McmcError, Result};

pub mod prelude {
    pub use crate::classic::{gibbs_step, rwm_step, RwmConfig};
    pub use crate::diagnostics::{build_report, ess, gelman_rubin};
    pub use crate::error::{McmcError, Result};
    pub use crate::gradient::{hmc_step, mala_step, nuts_step, HmcConfig, NutsConfig};
    pub use crate::kernel::Kernel;
    pub use crate::rng::RngStream;
    pub use crate::state::{ChainRecord, ChainState, EvalCounters, Transition};
    pub use crate::targets::{StandardGaussian, TargetDensity};
}
