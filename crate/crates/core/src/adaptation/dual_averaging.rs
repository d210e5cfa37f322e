use serde::{Deserialize, Serialize};

/// Nesterov dual-averaging state for log step size.
///
/// ```text
/// h   <- (1 - 1/(m + t0)) h + (delta - alpha) / (m + t0)
/// le  <- mu - sqrt(m) / gamma * h
/// lea <- m^-kappa le + (1 - m^-kappa) lea
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualAveragingState {
    pub log_eps: f64,
    pub log_eps_avg: f64,
    pub h_bar: f64,
    pub mu: f64,
    /// Number of updates applied so far.
    pub iteration: u64,
    pub target_accept: f64,
    pub gamma: f64,
    pub t0: f64,
    pub kappa: f64,
}

impl DualAveragingState {
    /// Standard constants `gamma = 0.05`, `t0 = 10`, `kappa = 0.75`,
    /// `mu = log(10 eps0)`.
    pub fn new(initial_eps: f64, target_accept: f64) -> Self {
        Self::with_constants(initial_eps, target_accept, 0.05, 10.0, 0.75)
    }

    pub fn with_constants(
        initial_eps: f64,
        target_accept: f64,
        gamma: f64,
        t0: f64,
        kappa: f64,
    ) -> Self {
        DualAveragingState {
            log_eps: initial_eps.ln(),
            log_eps_avg: 0.0,
            h_bar: 0.0,
            mu: (10.0 * initial_eps).ln(),
            iteration: 0,
            target_accept,
            gamma,
            t0,
            kappa,
        }
    }

    /// Restarts around a new initial step size, keeping the constants.
    pub fn restart(&mut self, initial_eps: f64) {
        *self = Self::with_constants(initial_eps, self.target_accept, self.gamma, self.t0, self.kappa);
    }

    pub fn update(&mut self, observed_accept: f64) {
        let accept = observed_accept.clamp(0.0, 1.0);
        self.iteration += 1;
        let m = self.iteration as f64;
        let w = 1.0 / (m + self.t0);
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.target_accept - accept);
        self.log_eps = self.mu - m.sqrt() / self.gamma * self.h_bar;
        let eta = m.powf(-self.kappa);
        self.log_eps_avg = eta * self.log_eps + (1.0 - eta) * self.log_eps_avg;
    }

    /// Step size to use during warmup.
    pub fn epsilon(&self) -> f64 {
        self.log_eps.exp()
    }

    /// Step size to freeze after warmup.
    pub fn final_epsilon(&self) -> f64 {
        if self.iteration == 0 {
            self.epsilon()
        } else {
            self.log_eps_avg.exp()
        }
    }
}

pub fn dual_averaging_update(mut da: DualAveragingState, observed_accept: f64) -> DualAveragingState {
    da.update(observed_accept);
    da
}
