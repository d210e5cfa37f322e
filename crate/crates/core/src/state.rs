use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{McmcError, Result};
use crate::targets::TargetDensity;

/// Evaluation tallies for one chain. True-density, gradient and surrogate
/// evaluations are counted separately; a joint density+gradient call
/// counts once in each of `target` and `grad`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalCounters {
    pub target: u64,
    pub grad: u64,
    pub surrogate: u64,
}

impl EvalCounters {
    pub fn log_density(&mut self, target: &dyn TargetDensity, x: &[f64]) -> f64 {
        self.target += 1;
        target.log_density(x)
    }

    pub fn log_density_and_grad(
        &mut self,
        target: &dyn TargetDensity,
        x: &[f64],
        grad: &mut [f64],
    ) -> f64 {
        self.target += 1;
        self.grad += 1;
        target.log_density_and_grad(x, grad)
    }

    pub fn add(&mut self, other: &EvalCounters) {
        self.target += other.target;
        self.grad += other.grad;
        self.surrogate += other.surrogate;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub position: Vec<f64>,
    pub cached_logpi: f64,
    pub cached_grad: Option<Vec<f64>>,
    pub step_index: u64,
}

impl ChainState {
    /// Evaluates the target at `position` and caches the result. The
    /// gradient is cached when `with_grad` is set.
    pub fn new(
        target: &dyn TargetDensity,
        position: Vec<f64>,
        with_grad: bool,
        counters: &mut EvalCounters,
    ) -> Result<Self> {
        if position.len() != target.dim() {
            return Err(McmcError::invalid(format!(
                "position has length {}, target dimension is {}",
                position.len(),
                target.dim()
            )));
        }
        let (logpi, grad) = if with_grad {
            let mut g = vec![0.0; position.len()];
            let lp = counters.log_density_and_grad(target, &position, &mut g);
            (lp, Some(g))
        } else {
            (counters.log_density(target, &position), None)
        };
        Self::from_parts(position, logpi, grad)
    }

    pub fn from_parts(position: Vec<f64>, logpi: f64, grad: Option<Vec<f64>>) -> Result<Self> {
        if !logpi.is_finite() {
            return Err(McmcError::InvalidState(format!(
                "log-density {logpi} at initial position"
            )));
        }
        if let Some(g) = &grad {
            if g.len() != position.len() {
                return Err(McmcError::InvalidState("gradient length mismatch".into()));
            }
        }
        Ok(ChainState {
            position,
            cached_logpi: logpi,
            cached_grad: grad,
            step_index: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    /// Re-evaluates the target and compares against the cache.
    pub fn cache_is_consistent(&self, target: &dyn TargetDensity, tol: f64) -> bool {
        let lp = target.log_density(&self.position);
        if (lp - self.cached_logpi).abs() > tol {
            return false;
        }
        match &self.cached_grad {
            None => true,
            Some(g) => {
                let mut fresh = vec![0.0; g.len()];
                target.log_density_and_grad(&self.position, &mut fresh);
                fresh.iter().zip(g).all(|(a, b)| (a - b).abs() <= tol)
            }
        }
    }
}

/// Outcome of one kernel application.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: ChainState,
    pub accepted: bool,
    /// Acceptance statistic fed to step-size adaptation, in [0, 1].
    pub accept_prob: f64,
    pub divergent: bool,
    pub n_leapfrog: usize,
    pub tree_depth: usize,
}

impl Transition {
    pub fn simple(state: ChainState, accepted: bool, accept_prob: f64) -> Self {
        Transition {
            state,
            accepted,
            accept_prob,
            divergent: false,
            n_leapfrog: 0,
            tree_depth: 0,
        }
    }
}

/// Post-warmup output of one chain.
#[derive(Debug, Clone, Default)]
pub struct ChainRecord {
    dim: usize,
    samples: Vec<f64>,
    pub log_density: Vec<f64>,
    pub accept_flags: Vec<bool>,
    pub accept_probs: Vec<f64>,
    pub divergent: Vec<bool>,
    pub n_leapfrog: Vec<usize>,
    pub tree_depth: Vec<usize>,
    pub counters: EvalCounters,
    /// Evaluations spent before sampling (warmup, surrogate training).
    pub warmup_counters: EvalCounters,
    pub wall_time: f64,
    /// Sampler-specific statistics (stage acceptance rates, per-slot rates).
    pub extras: BTreeMap<String, f64>,
}

impl ChainRecord {
    pub fn new(dim: usize) -> Self {
        ChainRecord {
            dim,
            ..Default::default()
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, |r| r.len());
        let mut rec = ChainRecord::new(dim);
        for r in rows {
            rec.samples.extend_from_slice(r);
            rec.log_density.push(f64::NAN);
            rec.accept_flags.push(true);
            rec.accept_probs.push(1.0);
            rec.divergent.push(false);
            rec.n_leapfrog.push(0);
            rec.tree_depth.push(0);
        }
        rec
    }

    pub fn push(&mut self, t: &Transition) {
        debug_assert_eq!(t.state.position.len(), self.dim);
        self.samples.extend_from_slice(&t.state.position);
        self.log_density.push(t.state.cached_logpi);
        self.accept_flags.push(t.accepted);
        self.accept_probs.push(t.accept_prob);
        self.divergent.push(t.divergent);
        self.n_leapfrog.push(t.n_leapfrog);
        self.tree_depth.push(t.tree_depth);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.accept_flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accept_flags.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.samples[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.chunks_exact(self.dim.max(1))
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows().map(|r| r[i]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.to_vec()).collect()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.accept_flags.iter().filter(|a| **a).count() as f64 / self.len() as f64
    }

    pub fn mean_accept_prob(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.accept_probs.iter().sum::<f64>() / self.len() as f64
    }

    pub fn n_divergences(&self) -> usize {
        self.divergent.iter().filter(|d| **d).count()
    }

    /// Raw sample matrix in row-major order.
    pub fn sample_bits(&self) -> Vec<u64> {
        self.samples.iter().map(|v| v.to_bits()).collect()
    }
}
