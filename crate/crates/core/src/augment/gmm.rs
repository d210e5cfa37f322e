use crate::classic::Proposal;
use crate::error::{McmcError, Result};
use crate::mh::{accept_or_reject, mh_accept_log_prob};
use crate::rng::RngStream;
use crate::state::{ChainState, EvalCounters, Transition};
use crate::targets::TargetDensity;

pub const COVARIANCE_FLOOR: f64 = 1e-6;

/// Diagonal-covariance Gaussian mixture used as an independence proposal.
#[derive(Debug, Clone)]
pub struct MixtureProposal {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    /// Number of EM iterations that produced this fit.
    pub generation: u64,
    pub log_likelihood_trace: Vec<f64>,
    pub reseeded: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct EmOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iter: 200,
            tol: 1e-8,
        }
    }
}

const LN_2PI: f64 = 1.837_877_066_409_345_3;

fn component_log_density(x: &[f64], mean: &[f64], var: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((xi, mi), vi) in x.iter().zip(mean).zip(var) {
        let z = xi - mi;
        acc += z * z / vi + vi.ln() + LN_2PI;
    }
    -0.5 * acc
}

fn logsumexp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl MixtureProposal {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, |m| m.len())
    }

    /// Normalized log-density of the mixture.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let terms: Vec<f64> = (0..self.k())
            .map(|j| self.weights[j].ln() + component_log_density(x, &self.means[j], &self.variances[j]))
            .collect();
        logsumexp(&terms)
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let j = rng.categorical(&self.weights);
        self.means[j]
            .iter()
            .zip(&self.variances[j])
            .map(|(m, v)| m + v.sqrt() * rng.normal())
            .collect()
    }

    pub fn fingerprint(&self) -> u64 {
        super::fingerprint_f64s(
            self.weights
                .iter()
                .chain(self.means.iter().flatten())
                .chain(self.variances.iter().flatten()),
        )
    }

    fn check_invariants(&self) -> bool {
        let s: f64 = self.weights.iter().sum();
        (s - 1.0).abs() < 1e-12
            && self.weights.iter().all(|w| *w >= 0.0)
            && self.variances.iter().flatten().all(|v| *v > 0.0)
    }
}

impl Proposal for MixtureProposal {
    fn sample(&self, _from: &[f64], rng: &mut RngStream) -> Vec<f64> {
        MixtureProposal::sample(self, rng)
    }

    fn log_density(&self, to: &[f64], _from: &[f64]) -> f64 {
        MixtureProposal::log_density(self, to)
    }
}

pub fn fit_gmm(samples: &[Vec<f64>], k: usize, rng: &mut RngStream) -> Result<MixtureProposal> {
    fit_gmm_with(samples, k, EmOptions::default(), rng)
}

/// Expectation-maximization with diagonal covariances and k-means++
/// seeding. Stops after `max_iter` iterations or when the mean
/// log-likelihood improves by less than `tol`.
pub fn fit_gmm_with(
    samples: &[Vec<f64>],
    k: usize,
    options: EmOptions,
    rng: &mut RngStream,
) -> Result<MixtureProposal> {
    let n = samples.len();
    if k == 0 {
        return Err(McmcError::invalid("mixture needs at least one component"));
    }
    if n < 10 * k {
        return Err(McmcError::InsufficientData { needed: 10 * k, got: n });
    }
    let d = samples[0].len();

    let mut global_mean = vec![0.0; d];
    for x in samples {
        for (m, v) in global_mean.iter_mut().zip(x) {
            *m += v / n as f64;
        }
    }
    let mut global_var = vec![0.0; d];
    for x in samples {
        for ((g, v), m) in global_var.iter_mut().zip(x).zip(&global_mean) {
            *g += (v - m) * (v - m) / n as f64;
        }
    }
    global_var.iter_mut().for_each(|v| *v = v.max(COVARIANCE_FLOOR));

    // k-means++ seeding.
    let mut means: Vec<Vec<f64>> = vec![samples[rng.below(n)].clone()];
    while means.len() < k {
        let d2: Vec<f64> = samples
            .iter()
            .map(|x| {
                means
                    .iter()
                    .map(|c| x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let idx = if d2.iter().sum::<f64>() > 0.0 {
            rng.categorical(&d2)
        } else {
            rng.below(n)
        };
        means.push(samples[idx].clone());
    }
    let mut mix = MixtureProposal {
        weights: vec![1.0 / k as f64; k],
        means,
        variances: vec![global_var.clone(); k],
        generation: 0,
        log_likelihood_trace: Vec::new(),
        reseeded: 0,
    };

    let mut resp = vec![vec![0.0; k]; n];
    let mut point_ll = vec![0.0; n];
    let mut prev_ll = f64::NEG_INFINITY;
    for _ in 0..options.max_iter {
        // E-step.
        let mut total = 0.0;
        for (i, x) in samples.iter().enumerate() {
            let terms: Vec<f64> = (0..k)
                .map(|j| mix.weights[j].ln() + component_log_density(x, &mix.means[j], &mix.variances[j]))
                .collect();
            let lse = logsumexp(&terms);
            point_ll[i] = lse;
            total += lse;
            for j in 0..k {
                resp[i][j] = (terms[j] - lse).exp();
            }
        }
        let ll = total / n as f64;
        mix.log_likelihood_trace.push(ll);
        let converged = ll - prev_ll < options.tol;
        prev_ll = ll;

        // M-step.
        let mut mass = vec![0.0; k];
        for r in &resp {
            for j in 0..k {
                mass[j] += r[j];
            }
        }
        for j in 0..k {
            if mass[j] < 1e-10 {
                // Empty component: reseed at the worst-explained point.
                let worst = point_ll
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                mix.means[j] = samples[worst].clone();
                mix.variances[j] = global_var.clone();
                mass[j] = 1.0;
                mix.reseeded += 1;
                continue;
            }
            let mut mean = vec![0.0; d];
            for (x, r) in samples.iter().zip(&resp) {
                for (m, v) in mean.iter_mut().zip(x) {
                    *m += r[j] * v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= mass[j]);
            let mut var = vec![0.0; d];
            for (x, r) in samples.iter().zip(&resp) {
                for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                    *s += r[j] * (v - m) * (v - m);
                }
            }
            var.iter_mut().for_each(|s| *s = (*s / mass[j]).max(COVARIANCE_FLOOR));
            mix.means[j] = mean;
            mix.variances[j] = var;
        }
        let total_mass: f64 = mass.iter().sum();
        mix.weights = mass.iter().map(|m| m / total_mass).collect();
        let wsum: f64 = mix.weights.iter().sum();
        mix.weights.iter_mut().for_each(|w| *w /= wsum);
        mix.generation += 1;
        debug_assert!(mix.check_invariants());
        if converged {
            break;
        }
    }
    Ok(mix)
}

/// Independence Metropolis-Hastings: `x' ~ g`, accepted with
/// `min(1, pi(x') g(x) / (pi(x) g(x')))`.
pub fn independence_proposal_step(
    state: ChainState,
    proposal: &MixtureProposal,
    target: &dyn TargetDensity,
    rng: &mut RngStream,
    counters: &mut EvalCounters,
) -> Result<Transition> {
    let candidate = proposal.sample(rng);
    let logg_fwd = proposal.log_density(&candidate);
    let logg_bwd = proposal.log_density(&state.position);
    let logpi_prop = counters.log_density(target, &candidate);
    let log_alpha = mh_accept_log_prob(state.cached_logpi, logpi_prop, logg_fwd, logg_bwd)?;
    let prop_state = ChainState {
        position: candidate,
        cached_logpi: logpi_prop,
        cached_grad: None,
        step_index: state.step_index,
    };
    if log_alpha == f64::NEG_INFINITY {
        let (next, _) = accept_or_reject(state.clone(), state, log_alpha, rng);
        return Ok(Transition::simple(next, false, 0.0));
    }
    let (next, accepted) = accept_or_reject(state, prop_state, log_alpha, rng);
    Ok(Transition::simple(next, accepted, log_alpha.exp()))
}
