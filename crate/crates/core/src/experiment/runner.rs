use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use super::config::{AutoStep, ExperimentConfig, InitMode, InitSpec, MassSpec, SamplerSpec, StepSize, WarmupSource};
use crate::adaptation::{
    estimate_mass_diag, find_reasonable_epsilon, tune_by_ess, DualAveragingState, ParamBound, Phase,
    TunableSampler, TuningJob, WarmupSchedule, MIN_MASS_SAMPLES,
};
use crate::augment::{fit_gmm_with, fit_surrogate, refine_surrogate, DelayedAcceptance, EmOptions};
use crate::classic::{exact_gaussian_conditionals, rwm_step, FullConditionalSet, RwmConfig};
use crate::error::{McmcError, Result};
use crate::gradient::{HmcConfig, NutsConfig};
use crate::kernel::Kernel;
use crate::parallel::{map_indexed, ExecMode};
use crate::rng::{halton, RngStream};
use crate::state::{ChainRecord, ChainState, EvalCounters};
use crate::targets::{check_points, TargetDensity};

/// Frozen parameters chosen during warmup.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AdaptedParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_size: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_leapfrog: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_diag: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surrogate_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixture_components: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub chain: usize,
    pub record: ChainRecord,
    pub adapted: AdaptedParams,
    /// Fingerprint of the frozen kernel, identical before and after sampling.
    pub kernel_fingerprint: u64,
}

/// Substream ids below the chain stream.
const INIT_STREAM: u64 = 0;
const TUNE_STREAM: u64 = 1;
const PILOT_STREAM: u64 = 2;

fn initial_point(config: &ExperimentConfig, target: &dyn TargetDensity, rng: &RngStream) -> Result<Vec<f64>> {
    let dim = target.dim();
    match &config.init {
        InitSpec::Point(p) => Ok(p.clone()),
        InitSpec::Named(InitMode::Origin) => Ok(vec![0.0; dim]),
        InitSpec::Named(InitMode::Overdispersed) => {
            let mut rng = rng.substream(INIT_STREAM);
            draw_in_box(target, &mut rng)
        }
    }
}

fn draw_in_box(target: &dyn TargetDensity, rng: &mut RngStream) -> Result<Vec<f64>> {
    let bounds = target.check_box();
    for _ in 0..100 {
        let x: Vec<f64> = bounds.iter().map(|(lo, hi)| lo + (hi - lo) * rng.uniform()).collect();
        if target.log_density(&x).is_finite() {
            return Ok(x);
        }
    }
    Err(McmcError::InvalidState("no finite-density starting point found in the check box".into()))
}

fn set_step(kernel: &mut Kernel, s: f64) {
    match kernel {
        Kernel::Rwm(c) => c.sigma = s,
        Kernel::Mala { epsilon } => *epsilon = s,
        Kernel::Hmc(c) => c.epsilon = s,
        Kernel::Nuts(c) => c.epsilon = s,
        Kernel::DelayedAcceptance(da) => da.inner.sigma = s,
        Kernel::Gibbs(_) | Kernel::Independence(_) => {}
    }
}

fn set_mass(kernel: &mut Kernel, mass: Vec<f64>) {
    match kernel {
        Kernel::Hmc(c) => c.mass_diag = mass,
        Kernel::Nuts(c) => c.mass_diag = mass,
        _ => {}
    }
}

fn mass_of(kernel: &Kernel) -> Option<&[f64]> {
    match kernel {
        Kernel::Hmc(c) => Some(&c.mass_diag),
        Kernel::Nuts(c) => Some(&c.mass_diag),
        _ => None,
    }
}

fn rwm_scale(dim: usize) -> f64 {
    2.38 / (dim as f64).sqrt()
}

/// `n` points stratified along every axis of the box. Low Halton indices
/// cluster in one corner once the dimension exceeds a handful of primes.
fn latin_hypercube(n: usize, bounds: &[(f64, f64)], rng: &mut RngStream) -> Vec<Vec<f64>> {
    let mut pts = vec![Vec::with_capacity(bounds.len()); n];
    for (lo, hi) in bounds {
        let mut strata: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            strata.swap(i, rng.below(i + 1));
        }
        for (p, s) in pts.iter_mut().zip(strata) {
            p.push(lo + (hi - lo) * (s as f64 + rng.uniform()) / n as f64);
        }
    }
    pts
}

/// Short RWM run with dual-averaged scale; returns the second half.
fn rwm_pilot(
    target: &dyn TargetDensity,
    start: Vec<f64>,
    n: usize,
    rng: &mut RngStream,
    counters: &mut EvalCounters,
) -> Result<Vec<Vec<f64>>> {
    let mut state = ChainState::new(target, start, false, counters)?;
    let mut da = DualAveragingState::new(rwm_scale(target.dim()), crate::adaptation::target_accept::RWM);
    let mut kept = Vec::with_capacity(n / 2 + 1);
    for t in 0..n {
        let tr = rwm_step(state, &RwmConfig { sigma: da.epsilon() }, target, rng, counters)?;
        da.update(tr.accept_prob);
        state = tr.state;
        if t >= n / 2 {
            kept.push(state.position.clone());
        }
    }
    Ok(kept)
}

struct Prepared {
    kernel: Kernel,
    /// Step-size dual averaging, when requested.
    da: Option<DualAveragingState>,
    adapt_mass: bool,
    refine_at: Vec<usize>,
    refine_points: usize,
    adapted: AdaptedParams,
    extras: BTreeMap<String, f64>,
}

fn prepare(
    config: &ExperimentConfig,
    target: &dyn TargetDensity,
    init: &[f64],
    chain_rng: &RngStream,
    warm: &mut EvalCounters,
) -> Result<Prepared> {
    let dim = target.dim();
    let a = &config.adapt;
    let da_for = |s0: f64| {
        DualAveragingState::with_constants(s0, config.target_accept(), a.gamma, a.t0, a.kappa)
    };
    let mut extras = BTreeMap::new();
    let mut adapted = AdaptedParams::default();
    let mut refine_at = Vec::new();
    let mut refine_points = 0;

    let mut kernel = match &config.sampler {
        SamplerSpec::Rwm { .. } => Kernel::Rwm(RwmConfig::new(rwm_scale(dim))?),
        SamplerSpec::Mala { .. } => Kernel::Mala { epsilon: 1.0 },
        SamplerSpec::Hmc { n_leapfrog, jitter, .. } => {
            Kernel::Hmc(HmcConfig::new(1.0, *n_leapfrog, vec![1.0; dim])?.with_jitter(*jitter)?)
        }
        SamplerSpec::Nuts { max_tree_depth, .. } => {
            Kernel::Nuts(NutsConfig::new(1.0, vec![1.0; dim], *max_tree_depth)?)
        }
        SamplerSpec::Gibbs {} => Kernel::Gibbs(exact_gaussian_conditionals(target)?),
        SamplerSpec::Mwg { sigma } => Kernel::Gibbs(FullConditionalSet::metropolis_within_gibbs(dim, *sigma)),
        SamplerSpec::DaRwm {
            bandwidth,
            ridge,
            n_train,
            refine_rounds,
            refine_points: rp,
            approximate,
            ..
        } => {
            let bounds = target.check_box();
            let mut pts = Vec::with_capacity(*n_train);
            let mut vals = Vec::with_capacity(*n_train);
            for i in 1..=*n_train as u64 {
                let x: Vec<f64> = halton(i, dim)
                    .iter()
                    .zip(&bounds)
                    .map(|(u, (lo, hi))| lo + (hi - lo) * u)
                    .collect();
                let v = warm.log_density(target, &x);
                if v.is_finite() {
                    pts.push(x);
                    vals.push(v);
                }
            }
            let model = fit_surrogate(&pts, &vals, *bandwidth, *ridge)?;
            for r in 1..=*refine_rounds {
                refine_at.push(r * config.n_warmup / (refine_rounds + 1));
            }
            refine_points = *rp;
            Kernel::DelayedAcceptance(Box::new(DelayedAcceptance::new(
                RwmConfig::new(rwm_scale(dim))?,
                model,
                *approximate,
            )))
        }
        SamplerSpec::GmmIndependence {
            k,
            warmup_source,
            n_pilot_chains,
            pilot_steps,
            max_em_iter,
            em_tol,
        } => {
            let pilot_rng = chain_rng.substream(PILOT_STREAM);
            let starts: Vec<Vec<f64>> = match warmup_source {
                WarmupSource::SingleChain => vec![init.to_vec()],
                WarmupSource::Overdispersed => {
                    latin_hypercube(*n_pilot_chains, &target.check_box(), &mut pilot_rng.substream(u64::MAX))
                }
            };
            let per_pilot = match starts.len() {
                1 => pilot_steps * n_pilot_chains,
                _ => *pilot_steps,
            };
            let mut pool = Vec::new();
            for (i, s) in starts.into_iter().enumerate() {
                let mut r = pilot_rng.substream(i as u64);
                pool.extend(rwm_pilot(target, s, per_pilot, &mut r, warm)?);
            }
            let opts = EmOptions {
                max_iter: *max_em_iter,
                tol: *em_tol,
            };
            let mix = fit_gmm_with(&pool, *k, opts, &mut chain_rng.substream(PILOT_STREAM + 1))?;
            extras.insert("mixture_em_iterations".into(), mix.generation as f64);
            adapted.mixture_components = Some(mix.k());
            Kernel::Independence(Box::new(mix))
        }
    };

    let mut da = None;
    match config.sampler.step_size() {
        Some(StepSize::Fixed(s)) => set_step(&mut kernel, s),
        Some(StepSize::Auto(AutoStep::Adapt)) => {
            let s0 = if kernel.uses_gradient() {
                let mass = mass_of(&kernel).map(|m| m.to_vec()).unwrap_or_else(|| vec![1.0; dim]);
                let state = ChainState::new(target, init.to_vec(), true, warm)?;
                find_reasonable_epsilon(&state, &mass, target, &mut chain_rng.substream(TUNE_STREAM), warm)?
            } else {
                rwm_scale(dim)
            };
            set_step(&mut kernel, s0);
            da = Some(da_for(s0));
        }
        Some(StepSize::Auto(AutoStep::Tune)) => {
            let s0 = rwm_scale(dim);
            let (sampler, bounds) = match &config.sampler {
                SamplerSpec::Rwm { .. } => (
                    TunableSampler::Rwm,
                    vec![ParamBound::new(s0 / 20.0, s0 * 5.0, true)],
                ),
                SamplerSpec::Mala { .. } => (
                    TunableSampler::Mala,
                    vec![ParamBound::new(s0 / 20.0, s0 * 5.0, true)],
                ),
                SamplerSpec::Hmc { n_leapfrog, .. } => (
                    TunableSampler::Hmc,
                    vec![
                        ParamBound::new(s0 / 20.0, s0 * 5.0, true),
                        ParamBound::new(1.0, (2 * n_leapfrog) as f64, false),
                    ],
                ),
                other => return Err(McmcError::invalid(format!("tuning is not supported for {}", other.name()))),
            };
            let mut job = TuningJob::new(sampler, bounds, a.tune_budget, a.tune_pilot_length);
            job.init = Some(init.to_vec());
            job.exec = ExecMode::Sequential;
            let res = tune_by_ess(&job, target, &chain_rng.substream(TUNE_STREAM))?;
            warm.add(&res.evaluations());
            set_step(&mut kernel, res.best[0]);
            if let Kernel::Hmc(c) = &mut kernel {
                c.n_leapfrog = res.best[1].round().max(1.0) as usize;
            }
            extras.insert("tuning_best_objective".into(), res.best_objective());
        }
        None => {}
    }

    let adapt_mass = matches!(
        config.sampler,
        SamplerSpec::Hmc { mass: MassSpec::Adapt, .. } | SamplerSpec::Nuts { mass: MassSpec::Adapt, .. }
    );
    Ok(Prepared {
        kernel,
        da,
        adapt_mass,
        refine_at,
        refine_points,
        adapted,
        extras,
    })
}

/// Runs one chain: setup, warmup with adaptation, then sampling with the
/// frozen kernel. Chain `c` draws from stream `(seed, c)` and its
/// substreams only.
pub fn run_chain(config: &ExperimentConfig, target: &dyn TargetDensity, chain: usize) -> Result<ChainOutput> {
    let started = Instant::now();
    let dim = target.dim();
    let chain_rng = RngStream::new(config.seed, chain as u64);
    let mut rng = chain_rng.clone();
    let init = initial_point(config, target, &chain_rng)?;
    let mut warm = EvalCounters::default();
    let Prepared {
        mut kernel,
        mut da,
        adapt_mass,
        refine_at,
        refine_points,
        mut adapted,
        mut extras,
    } = prepare(config, target, &init, &chain_rng, &mut warm)?;

    let mut state = ChainState::new(target, init, kernel.uses_gradient(), &mut warm)?;
    let schedule = WarmupSchedule::with_fractions(
        config.n_warmup,
        config.adapt.initial_fraction,
        config.adapt.final_fraction,
    );
    let mut window: Vec<Vec<f64>> = Vec::new();
    let mut accept_stats = Vec::with_capacity(config.n_warmup);
    let mut since_refine = ChainRecord::new(dim);
    let mut mass_rng = chain_rng.substream(TUNE_STREAM + 10);

    for it in 0..config.n_warmup {
        if let Some(d) = &da {
            set_step(&mut kernel, d.epsilon());
        }
        let tr = kernel.step(state, target, &mut rng, &mut warm)?;
        accept_stats.push(tr.accept_prob);
        if let Some(d) = da.as_mut() {
            d.update(tr.accept_prob);
        }
        if !refine_at.is_empty() {
            since_refine.push(&tr);
        }
        state = tr.state;

        if adapt_mass {
            if let Phase::MassWindow(_) = schedule.phase(it) {
                window.push(state.position.clone());
                if schedule.is_window_end(it) {
                    if window.len() >= MIN_MASS_SAMPLES {
                        let mass = estimate_mass_diag(&window)?;
                        set_mass(&mut kernel, mass.clone());
                        if let Some(d) = da.as_mut() {
                            let eps = find_reasonable_epsilon(&state, &mass, target, &mut mass_rng, &mut warm)?;
                            d.restart(eps);
                        }
                    }
                    window.clear();
                }
            }
        }

        if refine_at.contains(&(it + 1)) {
            if let Kernel::DelayedAcceptance(dak) = &mut kernel {
                dak.surrogate = refine_surrogate(&dak.surrogate, &since_refine, target, refine_points, &mut warm)?;
            }
            since_refine = ChainRecord::new(dim);
        }
    }
    if let Some(d) = &da {
        set_step(&mut kernel, d.final_epsilon());
    }
    if !accept_stats.is_empty() {
        let tail = &accept_stats[accept_stats.len() - (accept_stats.len() / 4).max(1)..];
        extras.insert(
            "warmup_accept_last_quarter".into(),
            tail.iter().sum::<f64>() / tail.len() as f64,
        );
    }
    if let Kernel::DelayedAcceptance(dak) = &mut kernel {
        dak.surrogate.freeze();
        dak.reset_stats();
        let grid = check_points(target, 64);
        extras.insert("surrogate_grid_error".into(), dak.surrogate.max_error(target, &grid));
        adapted.surrogate_points = Some(dak.surrogate.len());
    }
    adapted.step_size = match &kernel {
        Kernel::Rwm(c) => Some(c.sigma),
        Kernel::Mala { epsilon } => Some(*epsilon),
        Kernel::Hmc(c) => Some(c.epsilon),
        Kernel::Nuts(c) => Some(c.epsilon),
        Kernel::DelayedAcceptance(d) => Some(d.inner.sigma),
        _ => None,
    };
    if let Kernel::Hmc(c) = &kernel {
        adapted.n_leapfrog = Some(c.n_leapfrog);
    }
    adapted.mass_diag = mass_of(&kernel).map(|m| m.to_vec());

    // Sampling: no parameter changes from here on.
    let fingerprint = kernel.fingerprint();
    let mut record = ChainRecord::new(dim);
    let mut counters = EvalCounters::default();
    for _ in 0..config.n_samples {
        let tr = kernel.step(state, target, &mut rng, &mut counters)?;
        record.push(&tr);
        state = tr.state;
    }
    if kernel.fingerprint() != fingerprint {
        return Err(McmcError::InvalidState("kernel parameters changed after warmup".into()));
    }
    match &kernel {
        Kernel::DelayedAcceptance(d) => {
            extras.insert("stage1_accept".into(), d.stage1_rate());
            extras.insert("stage2_accept".into(), d.stage2_rate());
        }
        Kernel::Gibbs(f) => {
            let rates: Vec<f64> = f.slot_acceptance_rates().into_iter().flatten().collect();
            if !rates.is_empty() {
                extras.insert("slot_accept_mean".into(), rates.iter().sum::<f64>() / rates.len() as f64);
            }
        }
        _ => {}
    }
    if let Some(s) = adapted.step_size {
        extras.insert("step_size".into(), s);
    }
    record.counters = counters;
    record.warmup_counters = warm;
    record.extras = extras;
    record.wall_time = started.elapsed().as_secs_f64();
    Ok(ChainOutput {
        chain,
        record,
        adapted,
        kernel_fingerprint: fingerprint,
    })
}

/// Runs every chain of the experiment, concurrently up to the configured
/// worker count. Output order is chain order.
pub fn run_chains(config: &ExperimentConfig, target: &dyn TargetDensity) -> Result<Vec<ChainOutput>> {
    let chains: Vec<usize> = (0..config.n_chains).collect();
    map_indexed(chains, ExecMode::from_workers(config.workers), |_, c| run_chain(config, target, c))
        .into_iter()
        .collect()
}
