use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::{batch_means_variance, esjd, ess, gelman_rubin, mean};
use crate::error::{McmcError, Result};
use crate::state::{ChainRecord, EvalCounters};
use crate::targets::TargetDensity;

pub const RHAT_GOOD: f64 = 1.01;
pub const RHAT_WARNING: f64 = 1.4;

/// Aggregate diagnostics over the post-warmup part of one or more chains.
///
/// Per-cost ratios use post-warmup counters; `warmup_counters` holds what
/// adaptation and surrogate training spent, so any ratio can be recomputed
/// offline. Dimensions whose samples never moved are listed in
/// `degenerate_dims` and carry an ESS of zero.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub target: String,
    pub dim: usize,
    pub n_chains: usize,
    pub n_samples: usize,
    pub ess: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhat: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhat_status: Option<String>,
    pub min_ess: f64,
    pub ess_per_step: f64,
    pub ess_per_true_eval: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ess_per_grad_eval: Option<f64>,
    /// Fraction of steps that moved.
    pub acceptance_rate: f64,
    /// Mean acceptance statistic (the quantity step-size adaptation targets).
    pub mean_accept_stat: f64,
    pub esjd: f64,
    pub asym_variance: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_error: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance_error: Option<Vec<f64>>,
    pub n_divergences: usize,
    pub counters: EvalCounters,
    pub warmup_counters: EvalCounters,
    pub degenerate_dims: Vec<usize>,
    pub extras: BTreeMap<String, f64>,
}

fn rhat_status(max_rhat: f64) -> String {
    if max_rhat < RHAT_GOOD {
        format!("converged: max R-hat {max_rhat:.4} < {RHAT_GOOD}")
    } else if max_rhat < RHAT_WARNING {
        format!("marginal: max R-hat {max_rhat:.4} in [{RHAT_GOOD}, {RHAT_WARNING})")
    } else {
        format!("not converged: max R-hat {max_rhat:.4} >= {RHAT_WARNING}")
    }
}

/// Builds the report. ESS is pooled as the sum of per-chain ESS; R-hat is
/// filled only for two or more equal-length chains.
pub fn build_report(chains: &[ChainRecord], target: &dyn TargetDensity) -> Result<DiagnosticsReport> {
    let first = chains
        .first()
        .ok_or_else(|| McmcError::invalid("report needs at least one chain"))?;
    let dim = first.dim();
    if chains.iter().any(|c| c.dim() != dim) {
        return Err(McmcError::invalid("chains disagree on dimension"));
    }
    if dim != target.dim() {
        return Err(McmcError::invalid(format!(
            "chains have dimension {dim}, target has {}",
            target.dim()
        )));
    }
    if chains.iter().any(|c| c.len() < 4) {
        return Err(McmcError::InsufficientData {
            needed: 4,
            got: chains.iter().map(|c| c.len()).min().unwrap_or(0),
        });
    }

    let columns: Vec<Vec<Vec<f64>>> = chains
        .iter()
        .map(|c| (0..dim).map(|i| c.column(i)).collect())
        .collect();
    let mut ess_total = vec![0.0; dim];
    let mut degenerate = Vec::new();
    for i in 0..dim {
        let mut any_degenerate = false;
        for cols in &columns {
            match ess(&cols[i]) {
                Ok(e) => ess_total[i] += e,
                Err(McmcError::DegenerateChain(_)) => any_degenerate = true,
                Err(e) => return Err(e),
            }
        }
        if any_degenerate {
            ess_total[i] = 0.0;
            degenerate.push(i);
        }
    }

    let same_len = chains.iter().all(|c| c.len() == first.len());
    let rhat = if chains.len() >= 2 && same_len {
        let rows: Vec<Vec<Vec<f64>>> = chains.iter().map(|c| c.to_rows()).collect();
        match gelman_rubin(&rows) {
            Ok(r) => Some(r),
            Err(McmcError::DegenerateChain(_)) => Some(vec![f64::NAN; dim]),
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let status = rhat.as_ref().map(|r| {
        let max = r.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        if r.iter().any(|v| !v.is_finite()) {
            "not computed: a chain has zero within-chain variance".to_string()
        } else {
            rhat_status(max)
        }
    });

    let mut asym = vec![0.0; dim];
    let mut means = vec![0.0; dim];
    let mut vars = vec![0.0; dim];
    let total_n: usize = chains.iter().map(|c| c.len()).sum();
    for i in 0..dim {
        let mut estimates = Vec::new();
        let pooled: Vec<f64> = columns.iter().flat_map(|c| c[i].iter().copied()).collect();
        for cols in &columns {
            let n = cols[i].len();
            let batches = ((n as f64).sqrt() as usize).clamp(10, 1000);
            estimates.push(batch_means_variance(&cols[i], batches).unwrap_or(f64::NAN));
        }
        asym[i] = mean(&estimates);
        means[i] = mean(&pooled);
        vars[i] = pooled.iter().map(|x| (x - means[i]).powi(2)).sum::<f64>() / (total_n as f64 - 1.0);
    }

    let mut counters = EvalCounters::default();
    let mut warmup_counters = EvalCounters::default();
    for c in chains {
        counters.add(&c.counters);
        warmup_counters.add(&c.warmup_counters);
    }
    let min_ess = ess_total.iter().copied().fold(f64::INFINITY, f64::min);
    let esjd_mean = mean(
        &chains
            .iter()
            .map(|c| esjd(&c.to_rows()))
            .collect::<Result<Vec<_>>>()?,
    );
    let acceptance = chains.iter().map(|c| c.acceptance_rate()).sum::<f64>() / chains.len() as f64;
    let accept_stat = chains.iter().map(|c| c.mean_accept_prob()).sum::<f64>() / chains.len() as f64;

    let mut extras: BTreeMap<String, f64> = BTreeMap::new();
    for c in chains {
        for (k, v) in &c.extras {
            *extras.entry(k.clone()).or_insert(0.0) += v / chains.len() as f64;
        }
    }

    let mean_error = target
        .analytic_mean()
        .map(|m| means.iter().zip(&m).map(|(a, b)| a - b).collect());
    let variance_error = target
        .analytic_cov()
        .map(|c| vars.iter().enumerate().map(|(i, v)| v - c[i][i]).collect());

    Ok(DiagnosticsReport {
        target: target.name().to_string(),
        dim,
        n_chains: chains.len(),
        n_samples: first.len(),
        ess: ess_total,
        rhat,
        rhat_status: status,
        min_ess,
        ess_per_step: min_ess / total_n as f64,
        ess_per_true_eval: min_ess / counters.target.max(1) as f64,
        ess_per_grad_eval: (counters.grad > 0).then(|| min_ess / counters.grad as f64),
        acceptance_rate: acceptance,
        mean_accept_stat: accept_stat,
        esjd: esjd_mean,
        asym_variance: asym,
        mean: means,
        variance: vars,
        mean_error,
        variance_error,
        n_divergences: chains.iter().map(|c| c.n_divergences()).sum(),
        counters,
        warmup_counters,
        degenerate_dims: degenerate,
        extras,
    })
}

#[derive(Serialize)]
struct CsvRow {
    dim_index: usize,
    ess: f64,
    rhat: Option<f64>,
    asym_variance: f64,
    mean: f64,
    variance: f64,
    mean_error: Option<f64>,
    variance_error: Option<f64>,
    acceptance_rate: f64,
    mean_accept_stat: f64,
    esjd: f64,
    n_divergences: usize,
    n_chains: usize,
    n_samples: usize,
    target_evals: u64,
    grad_evals: u64,
    surrogate_evals: u64,
    warmup_target_evals: u64,
    warmup_grad_evals: u64,
    warmup_surrogate_evals: u64,
}

impl DiagnosticsReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| McmcError::Io(e.to_string()))
    }

    /// One row per dimension; run-level fields are repeated on every row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for i in 0..self.dim {
            w.serialize(CsvRow {
                dim_index: i,
                ess: self.ess[i],
                rhat: self.rhat.as_ref().map(|r| r[i]),
                asym_variance: self.asym_variance[i],
                mean: self.mean[i],
                variance: self.variance[i],
                mean_error: self.mean_error.as_ref().map(|m| m[i]),
                variance_error: self.variance_error.as_ref().map(|v| v[i]),
                acceptance_rate: self.acceptance_rate,
                mean_accept_stat: self.mean_accept_stat,
                esjd: self.esjd,
                n_divergences: self.n_divergences,
                n_chains: self.n_chains,
                n_samples: self.n_samples,
                target_evals: self.counters.target,
                grad_evals: self.counters.grad,
                surrogate_evals: self.counters.surrogate,
                warmup_target_evals: self.warmup_counters.target,
                warmup_grad_evals: self.warmup_counters.grad,
                warmup_surrogate_evals: self.warmup_counters.surrogate,
            })
            .map_err(|e| McmcError::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn max_rhat(&self) -> Option<f64> {
        self.rhat
            .as_ref()
            .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }
}
