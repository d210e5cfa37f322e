use nalgebra::{DMatrix, DVector};

use crate::error::{McmcError, Result};
use crate::state::{ChainRecord, EvalCounters};
use crate::targets::TargetDensity;

/// Kernel ridge regression of `log pi` with a squared-exponential kernel
/// `k(x, y) = exp(-|x - y|^2 / (2 h^2))`; the posterior mean of a
/// zero-mean Gaussian process.
#[derive(Debug, Clone)]
pub struct SurrogateModel {
    inputs: Vec<Vec<f64>>,
    values: Vec<f64>,
    bandwidth: f64,
    ridge: f64,
    weights: Vec<f64>,
    max_residual: f64,
    frozen: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub value: f64,
    /// Nearest training point is more than three bandwidths away.
    pub low_confidence: bool,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn fit_surrogate(
    points: &[Vec<f64>],
    logpi_values: &[f64],
    bandwidth: f64,
    ridge: f64,
) -> Result<SurrogateModel> {
    let m = points.len();
    if m < 2 {
        return Err(McmcError::invalid("surrogate needs at least two points"));
    }
    if logpi_values.len() != m {
        return Err(McmcError::invalid("one value per training point required"));
    }
    if !(bandwidth > 0.0) || !(ridge > 0.0) {
        return Err(McmcError::invalid("bandwidth and ridge must be positive"));
    }
    if logpi_values.iter().any(|v| !v.is_finite()) {
        return Err(McmcError::invalid("training values must be finite"));
    }
    for i in 0..m {
        for j in 0..i {
            if sq_dist(&points[i], &points[j]).sqrt() < 1e-12 {
                return Err(McmcError::invalid(format!("duplicate training rows {j} and {i}")));
            }
        }
    }
    let inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
    let gram = DMatrix::from_fn(m, m, |i, j| {
        let k = (-sq_dist(&points[i], &points[j]) * inv2h2).exp();
        if i == j {
            k + ridge
        } else {
            k
        }
    });
    let y = DVector::from_column_slice(logpi_values);
    let chol = gram
        .cholesky()
        .ok_or_else(|| McmcError::SurrogateFit("regularized kernel matrix is singular".into()))?;
    let w = chol.solve(&y);
    if w.iter().any(|v| !v.is_finite()) {
        return Err(McmcError::SurrogateFit("non-finite weights".into()));
    }
    let mut model = SurrogateModel {
        inputs: points.to_vec(),
        values: logpi_values.to_vec(),
        bandwidth,
        ridge,
        weights: w.iter().copied().collect(),
        max_residual: 0.0,
        frozen: false,
    };
    model.max_residual = points
        .iter()
        .zip(logpi_values)
        .map(|(x, v)| (model.predict(x) - v).abs())
        .fold(0.0, f64::max);
    Ok(model)
}

impl SurrogateModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let inv2h2 = 1.0 / (2.0 * self.bandwidth * self.bandwidth);
        self.inputs
            .iter()
            .zip(&self.weights)
            .map(|(xi, w)| w * (-sq_dist(x, xi) * inv2h2).exp())
            .sum()
    }

    pub fn min_distance(&self, x: &[f64]) -> f64 {
        self.inputs
            .iter()
            .map(|xi| sq_dist(x, xi))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    /// `10 * ridge * max |value|`.
    pub fn fit_tolerance(&self) -> f64 {
        10.0 * self.ridge * self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn satisfies_fit_invariant(&self) -> bool {
        self.max_residual <= self.fit_tolerance()
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Hash of every fitted parameter; constant while frozen.
    pub fn fingerprint(&self) -> u64 {
        super::fingerprint_f64s(
            self.weights
                .iter()
                .chain(self.inputs.iter().flatten())
                .chain([&self.bandwidth, &self.ridge]),
        )
    }

    /// Max absolute error against the true log-density over `points`.
    pub fn max_error(&self, target: &dyn TargetDensity, points: &[Vec<f64>]) -> f64 {
        points
            .iter()
            .map(|x| (self.predict(x) - target.log_density(x)).abs())
            .fold(0.0, f64::max)
    }
}

/// Counted prediction; never touches the true target.
pub fn surrogate_predict(model: &SurrogateModel, x: &[f64], counters: &mut EvalCounters) -> Prediction {
    counters.surrogate += 1;
    Prediction {
        value: model.predict(x),
        low_confidence: model.min_distance(x) > 3.0 * model.bandwidth,
    }
}

/// Adds up to `n_new` visited states with the largest `|pi_hat - pi|` and
/// refits. True log-densities are taken from the record's cache; rows
/// without a finite cached value are evaluated (and counted).
pub fn refine_surrogate(
    model: &SurrogateModel,
    chain: &ChainRecord,
    target: &dyn TargetDensity,
    n_new: usize,
    counters: &mut EvalCounters,
) -> Result<SurrogateModel> {
    if model.frozen {
        return Err(McmcError::invalid("surrogate is frozen; refinement is warmup-only"));
    }
    if chain.is_empty() {
        return Err(McmcError::invalid("cannot refine from an empty chain"));
    }
    if n_new == 0 {
        return Ok(model.clone());
    }
    let min_gap = 1e-3 * model.bandwidth;
    let mut candidates: Vec<(f64, Vec<f64>, f64)> = Vec::new();
    let mut last: Option<&[f64]> = None;
    for (t, row) in chain.rows().enumerate() {
        if last == Some(row) {
            continue;
        }
        last = Some(row);
        if model.min_distance(row) < min_gap
            || candidates.iter().any(|(_, x, _)| sq_dist(x, row).sqrt() < min_gap)
        {
            continue;
        }
        let truth = match chain.log_density.get(t) {
            Some(v) if v.is_finite() => *v,
            _ => counters.log_density(target, row),
        };
        if !truth.is_finite() {
            continue;
        }
        let residual = (model.predict(row) - truth).abs();
        candidates.push((residual, row.to_vec(), truth));
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    candidates.truncate(n_new);
    let mut points = model.inputs.clone();
    let mut values = model.values.clone();
    for (_, x, v) in candidates {
        points.push(x);
        values.push(v);
    }
    fit_surrogate(&points, &values, model.bandwidth, model.ridge)
}
