//! Warmup-phase adaptation (dual-averaging step size, diagonal mass
//! estimation, step-size initialization) and offline ESS-driven
//! hyperparameter search.

mod dual_averaging;
mod epsilon;
mod mass;
mod schedule;
mod tuning;

pub use dual_averaging::{dual_averaging_update, DualAveragingState};
pub use epsilon::{find_reasonable_epsilon, MAX_EPSILON_ITERATIONS};
pub use mass::{estimate_mass_diag, MIN_MASS_SAMPLES, VARIANCE_FLOOR};
pub use schedule::{Phase, WarmupSchedule};
pub use tuning::{
    tune_by_ess, write_tuning_csv, ParamBound, TunableSampler, TuningJob, TuningObjective,
    TuningRecord, TuningResult,
};

/// Default acceptance targets used by warmup adaptation.
pub mod target_accept {
    pub const RWM: f64 = 0.234;
    pub const MALA: f64 = 0.574;
    pub const HMC: f64 = 0.65;
    pub const NUTS: f64 = 0.8;
}
