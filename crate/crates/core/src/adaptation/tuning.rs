use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::classic::{rwm_step, RwmConfig};
use crate::diagnostics::ess;
use crate::error::{McmcError, Result};
use crate::gradient::{hmc_step, mala_step, HmcConfig};
use crate::parallel::{map_indexed, ExecMode};
use crate::rng::{halton, RngStream};
use crate::state::{ChainState, EvalCounters};
use crate::targets::TargetDensity;

/// UCB exploration weight on the predictive standard deviation.
pub const UCB_KAPPA: f64 = 2.0;
const CANDIDATES: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum TunableSampler {
    /// Tunes `[sigma]`.
    Rwm,
    /// Tunes `[epsilon]`.
    Mala,
    /// Tunes `[epsilon, n_leapfrog]`; the second coordinate is rounded.
    Hmc,
}

impl TunableSampler {
    pub fn n_params(&self) -> usize {
        match self {
            TunableSampler::Rwm | TunableSampler::Mala => 1,
            TunableSampler::Hmc => 2,
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            TunableSampler::Rwm => &["sigma"],
            TunableSampler::Mala => &["epsilon"],
            TunableSampler::Hmc => &["epsilon", "n_leapfrog"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBound {
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub log_scale: bool,
}

impl ParamBound {
    pub fn new(lower: f64, upper: f64, log_scale: bool) -> Self {
        ParamBound { lower, upper, log_scale }
    }

    fn map_unit(&self, u: f64) -> f64 {
        if self.log_scale {
            (self.lower.ln() + u * (self.upper.ln() - self.lower.ln())).exp()
        } else {
            self.lower + u * (self.upper - self.lower)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuningObjective {
    MinEss,
    /// Minimum ESS per gradient evaluation (per density evaluation for
    /// gradient-free samplers).
    EssPerGradEval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningJob {
    pub sampler: TunableSampler,
    pub bounds: Vec<ParamBound>,
    pub budget: usize,
    pub pilot_length: usize,
    pub objective: TuningObjective,
    /// Pilot starting point; the origin when absent.
    #[serde(default)]
    pub init: Option<Vec<f64>>,
    /// Upper bound on `budget * pilot_length * evaluations per step`.
    #[serde(default = "default_guard")]
    pub max_pilot_evals: u64,
    #[serde(default)]
    pub exec: ExecMode,
}

fn default_guard() -> u64 {
    50_000_000
}

impl TuningJob {
    pub fn new(sampler: TunableSampler, bounds: Vec<ParamBound>, budget: usize, pilot_length: usize) -> Self {
        TuningJob {
            sampler,
            bounds,
            budget,
            pilot_length,
            objective: TuningObjective::MinEss,
            init: None,
            max_pilot_evals: default_guard(),
            exec: ExecMode::Auto,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let mut errs = Vec::new();
        if self.budget < 2 {
            errs.push(format!("budget must be at least 2, got {}", self.budget));
        }
        if self.pilot_length < 20 {
            errs.push(format!("pilot_length must be at least 20, got {}", self.pilot_length));
        }
        if self.bounds.len() != self.sampler.n_params() {
            errs.push(format!(
                "{} bounds given, sampler tunes {}",
                self.bounds.len(),
                self.sampler.n_params()
            ));
        }
        for (i, b) in self.bounds.iter().enumerate() {
            if !(b.lower.is_finite() && b.upper.is_finite() && b.lower < b.upper) {
                errs.push(format!("bound {i} must be finite with lower < upper"));
            }
            if b.log_scale && b.lower <= 0.0 {
                errs.push(format!("log-scaled bound {i} must be positive"));
            }
        }
        if let Some(x) = &self.init {
            if x.len() != dim {
                errs.push(format!("init has length {}, target dimension is {dim}", x.len()));
            }
        }
        let per_step = match self.sampler {
            TunableSampler::Hmc => self.bounds.get(1).map_or(1.0, |b| b.upper.max(1.0)),
            _ => 1.0,
        };
        let cost = self.budget as f64 * self.pilot_length as f64 * per_step;
        if cost > self.max_pilot_evals as f64 {
            errs.push(format!(
                "pilot cost {cost} evaluations exceeds the guard of {}",
                self.max_pilot_evals
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(McmcError::Validation(errs))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningRecord {
    pub eval_index: usize,
    pub theta: Vec<f64>,
    pub objective: f64,
    pub min_ess: f64,
    pub accept_rate: f64,
    pub divergences: usize,
    /// Density and gradient evaluations spent by the pilot.
    pub target_evals: u64,
    pub grad_evals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    pub best: Vec<f64>,
    pub best_record: TuningRecord,
    pub trace: Vec<TuningRecord>,
}

impl TuningResult {
    pub fn best_objective(&self) -> f64 {
        self.best_record.objective
    }

    pub fn evaluations(&self) -> EvalCounters {
        EvalCounters {
            target: self.trace.iter().map(|r| r.target_evals).sum(),
            grad: self.trace.iter().map(|r| r.grad_evals).sum(),
            surrogate: 0,
        }
    }
}

fn pilot(
    job: &TuningJob,
    theta: &[f64],
    target: &dyn TargetDensity,
    mut rng: RngStream,
    eval_index: usize,
) -> Result<TuningRecord> {
    let dim = target.dim();
    let mut counters = EvalCounters::default();
    let init = job.init.clone().unwrap_or_else(|| vec![0.0; dim]);
    let with_grad = !matches!(job.sampler, TunableSampler::Rwm);
    let mut state = ChainState::new(target, init, with_grad, &mut counters)?;
    let burn = job.pilot_length / 5;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(job.pilot_length - burn);
    let mut accepted = 0usize;
    let mut divergences = 0usize;
    let hmc = match job.sampler {
        TunableSampler::Hmc => Some(HmcConfig::new(
            theta[0],
            theta[1].round().max(1.0) as usize,
            vec![1.0; dim],
        )?),
        _ => None,
    };
    let rwm = RwmConfig::new(theta[0])?;
    let mut kept_counters = EvalCounters::default();
    for t in 0..job.pilot_length {
        let c = if t < burn { &mut counters } else { &mut kept_counters };
        let tr = match job.sampler {
            TunableSampler::Rwm => rwm_step(state, &rwm, target, &mut rng, c)?,
            TunableSampler::Mala => mala_step(state, theta[0], target, &mut rng, c)?,
            TunableSampler::Hmc => hmc_step(state, hmc.as_ref().expect("hmc config"), target, &mut rng, c)?,
        };
        state = tr.state;
        if t >= burn {
            accepted += tr.accepted as usize;
            divergences += tr.divergent as usize;
            rows.push(state.position.clone());
        }
    }
    let min_ess = (0..dim)
        .map(|i| {
            let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            ess(&col).unwrap_or(0.0)
        })
        .fold(f64::INFINITY, f64::min);
    let objective = match job.objective {
        TuningObjective::MinEss => min_ess,
        TuningObjective::EssPerGradEval => {
            let cost = if kept_counters.grad > 0 { kept_counters.grad } else { kept_counters.target };
            min_ess / cost.max(1) as f64
        }
    };
    Ok(TuningRecord {
        eval_index,
        theta: theta.to_vec(),
        objective,
        min_ess,
        accept_rate: accepted as f64 / rows.len() as f64,
        divergences,
        target_evals: counters.target + kept_counters.target,
        grad_evals: counters.grad + kept_counters.grad,
    })
}

/// Gaussian-process regression with a squared-exponential kernel over the
/// unit cube, on standardized objective values.
struct Gp {
    xs: Vec<Vec<f64>>,
    alpha: DVector<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    length: f64,
}

impl Gp {
    const NUGGET: f64 = 1e-4;

    fn kernel(a: &[f64], b: &[f64], length: f64) -> f64 {
        let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        (-0.5 * d2 / (length * length)).exp()
    }

    fn fit(xs: &[Vec<f64>], ys: &[f64], length: f64) -> Result<Gp> {
        let n = xs.len();
        let y_mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / n as f64;
        let y_scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        let k = DMatrix::from_fn(n, n, |i, j| {
            Self::kernel(&xs[i], &xs[j], length) + if i == j { Self::NUGGET } else { 0.0 }
        });
        let chol = k
            .cholesky()
            .ok_or_else(|| McmcError::Decomposition("tuning surrogate kernel matrix".into()))?;
        let y = DVector::from_iterator(n, ys.iter().map(|y| (y - y_mean) / y_scale));
        let alpha = chol.solve(&y);
        Ok(Gp {
            xs: xs.to_vec(),
            alpha,
            chol,
            length,
        })
    }

    /// Predictive mean and variance in standardized units.
    fn predict(&self, u: &[f64]) -> (f64, f64) {
        let kv = DVector::from_iterator(self.xs.len(), self.xs.iter().map(|x| Self::kernel(x, u, self.length)));
        let v = self.chol.solve(&kv);
        (kv.dot(&self.alpha), (1.0 - kv.dot(&v)).max(0.0))
    }

    fn ucb(&self, u: &[f64]) -> f64 {
        let (mean, var) = self.predict(u);
        mean + UCB_KAPPA * var.sqrt()
    }
}

/// Searches the hyperparameter box for the setting with the best measured
/// pilot objective. The first `max(2, budget / 4)` points come from a Halton
/// sequence and run as one concurrent batch; each later point maximizes a
/// GP upper confidence bound over a fixed Halton candidate set. Every
/// evaluation uses its own RNG substream, so the trace depends only on the
/// job, the target and `rng`'s identity.
pub fn tune_by_ess(job: &TuningJob, target: &dyn TargetDensity, rng: &RngStream) -> Result<TuningResult> {
    job.validate(target.dim())?;
    let p = job.sampler.n_params();
    let to_theta = |u: &[f64]| -> Vec<f64> { u.iter().zip(&job.bounds).map(|(u, b)| b.map_unit(*u)).collect() };
    let n_initial = (job.budget / 4).max(2).min(job.budget);

    let initial_units: Vec<Vec<f64>> = (1..=n_initial as u64).map(|i| halton(i, p)).collect();
    let results = map_indexed(initial_units.clone(), job.exec, |i, u| {
        pilot(job, &to_theta(&u), target, rng.substream(i as u64), i)
    });
    let mut units = initial_units;
    let mut trace = results.into_iter().collect::<Result<Vec<_>>>()?;

    let length = 0.5 * (p as f64).sqrt();
    let candidates: Vec<Vec<f64>> = (0..CANDIDATES).map(|i| halton(CANDIDATES + 7 + i, p)).collect();
    while trace.len() < job.budget {
        let ys: Vec<f64> = trace.iter().map(|r| r.objective).collect();
        let gp = Gp::fit(&units, &ys, length)?;
        let next = candidates
            .iter()
            .filter(|c| {
                units
                    .iter()
                    .all(|u| u.iter().zip(c.iter()).any(|(a, b)| (a - b).abs() > 1e-12))
            })
            .map(|c| (gp.ucb(c), c))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, c)| c.clone())
            .ok_or_else(|| McmcError::invalid("candidate set exhausted"))?;
        let i = trace.len();
        trace.push(pilot(job, &to_theta(&next), target, rng.substream(i as u64), i)?);
        units.push(next);
    }

    let usable = |r: &TuningRecord| r.min_ess >= 2.0 && r.objective.is_finite();
    let best_record = trace
        .iter()
        .filter(|r| usable(r))
        .max_by(|a, b| a.objective.total_cmp(&b.objective).then(b.eval_index.cmp(&a.eval_index)))
        .cloned();
    match best_record {
        Some(best_record) => Ok(TuningResult {
            best: best_record.theta.clone(),
            best_record,
            trace,
        }),
        None => Err(McmcError::TuningFailed {
            evaluations: trace.len(),
            trace,
        }),
    }
}

/// Columns: `eval_index`, one per tuned parameter, `objective`, `min_ess`,
/// `accept_rate`, `divergences`.
pub fn write_tuning_csv<W: Write>(sampler: TunableSampler, trace: &[TuningRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["eval_index".to_string()];
    header.extend(sampler.param_names().iter().map(|s| s.to_string()));
    header.extend(["objective", "min_ess", "accept_rate", "divergences"].map(String::from));
    w.write_record(&header).map_err(|e| McmcError::Io(e.to_string()))?;
    for r in trace {
        let mut row = vec![r.eval_index.to_string()];
        row.extend(r.theta.iter().map(|v| v.to_string()));
        row.push(r.objective.to_string());
        row.push(r.min_ess.to_string());
        row.push(r.accept_rate.to_string());
        row.push(r.divergences.to_string());
        w.write_record(&row).map_err(|e| McmcError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
