use mcmc_core::adaptation::{tune_by_ess, ParamBound, TunableSampler, TuningJob};
use mcmc_core::classic::{mh_step, rwm_step, Proposal, RwmConfig};
use mcmc_core::diagnostics::ess;
use mcmc_core::experiment::{
    execute, run_chain, AutoStep, ExperimentConfig, InitMode, InitSpec, MassSpec, SamplerSpec, StepSize,
};
use mcmc_core::gradient::{nuts_step, NutsConfig};
use mcmc_core::rng::RngStream;
use mcmc_core::state::{ChainState, EvalCounters};
use mcmc_core::targets::{Banana, StandardGaussian, TargetDensity, TargetSpec};

const ADAPT: StepSize = StepSize::Auto(AutoStep::Adapt);

/// Three states encoded as the points 0, 1, 2 on the real line.
#[derive(Debug)]
struct ThreeState {
    pi: [f64; 3],
}

impl TargetDensity for ThreeState {
    fn name(&self) -> &str {
        "three_state"
    }
    fn dim(&self) -> usize {
        1
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        match x[0] as usize {
            i if i < 3 && x[0] == i as f64 => self.pi[i].ln(),
            _ => f64::NEG_INFINITY,
        }
    }
    fn has_gradient(&self) -> bool {
        false
    }
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad[0] = 0.0;
        self.log_density(x)
    }
}

/// Asymmetric proposal matrix over the three states.
struct Table([[f64; 3]; 3]);

impl Proposal for Table {
    fn sample(&self, from: &[f64], rng: &mut RngStream) -> Vec<f64> {
        vec![rng.categorical(&self.0[from[0] as usize]) as f64]
    }
    fn log_density(&self, to: &[f64], from: &[f64]) -> f64 {
        self.0[from[0] as usize][to[0] as usize].ln()
    }
}

#[test]
fn finite_space_chain_matches_pi() {
    let t = ThreeState { pi: [0.2, 0.5, 0.3] };
    let g = Table([[0.1, 0.6, 0.3], [0.5, 0.2, 0.3], [0.25, 0.25, 0.5]]);
    let mut rng = RngStream::new(5, 0);
    let mut c = EvalCounters::default();
    let mut s = ChainState::new(&t, vec![0.0], false, &mut c).unwrap();
    let n = 100_000;
    let mut counts = [0usize; 3];
    for _ in 0..n {
        s = mh_step(s, &g, &t, &mut rng, &mut c).unwrap().state;
        counts[s.position[0] as usize] += 1;
    }
    let tv: f64 = counts.iter().zip(t.pi).map(|(k, p)| (*k as f64 / n as f64 - p).abs()).sum::<f64>() / 2.0;
    assert!(tv < 0.01, "tv {tv}");
}

#[test]
fn rwm_always_takes_uphill_moves() {
    let t = StandardGaussian::new(3).unwrap();
    let mut rng = RngStream::new(9, 0);
    let mut c = EvalCounters::default();
    let mut s = ChainState::new(&t, vec![2.0, -2.0, 1.0], false, &mut c).unwrap();
    let cfg = RwmConfig::new(0.8).unwrap();
    for _ in 0..5000 {
        let before = s.cached_logpi;
        let tr = rwm_step(s, &cfg, &t, &mut rng, &mut c).unwrap();
        if tr.accept_prob == 1.0 {
            assert!(tr.accepted);
        }
        if !tr.accepted {
            assert_eq!(tr.state.cached_logpi, before);
        }
        s = tr.state;
    }
}

#[test]
fn nuts_respects_depth_bound() {
    let t = Banana;
    let mut rng = RngStream::new(3, 0);
    let mut c = EvalCounters::default();
    let mut s = ChainState::new(&t, vec![0.5, 1.0], true, &mut c).unwrap();
    for depth in [1, 3, 5] {
        let cfg = NutsConfig::new(0.01, vec![1.0, 1.0], depth).unwrap();
        for _ in 0..300 {
            let tr = nuts_step(s, &cfg, &t, &mut rng, &mut c).unwrap();
            assert!(tr.tree_depth <= depth);
            assert!(tr.n_leapfrog <= 1 << depth, "{} steps at depth {depth}", tr.n_leapfrog);
            s = tr.state;
        }
    }
}

fn gaussian(d: usize, sampler: SamplerSpec, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(TargetSpec::StandardGaussian { d }, sampler, seed)
}

#[test]
fn replay_is_bit_identical() {
    for sampler in [
        SamplerSpec::Rwm { sigma: ADAPT },
        SamplerSpec::Mala { epsilon: ADAPT },
        SamplerSpec::Nuts {
            epsilon: ADAPT,
            max_tree_depth: 8,
            mass: MassSpec::Adapt,
        },
    ] {
        let mut c = gaussian(4, sampler, 17);
        c.n_warmup = 300;
        c.n_samples = 500;
        let t = c.target.build().unwrap();
        let a = run_chain(&c, t.as_ref(), 2).unwrap();
        let b = run_chain(&c, t.as_ref(), 2).unwrap();
        assert_eq!(a.record.sample_bits(), b.record.sample_bits());
        assert_eq!(a.kernel_fingerprint, b.kernel_fingerprint);
        let other = run_chain(&c, t.as_ref(), 3).unwrap();
        assert_ne!(a.record.sample_bits(), other.record.sample_bits());
    }
}

#[test]
fn worker_count_does_not_change_samples() {
    let mut c = gaussian(3, SamplerSpec::Rwm { sigma: ADAPT }, 2);
    c.n_chains = 4;
    c.n_samples = 400;
    c.workers = 1;
    let seq = execute(&c).unwrap();
    c.workers = 0;
    let par = execute(&c).unwrap();
    for (a, b) in seq.chains.iter().zip(&par.chains) {
        assert_eq!(a.record.sample_bits(), b.record.sample_bits());
    }
}

/// Mean of each coordinate and of its square, with ESS-based standard errors.
fn moments(rows: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let d = rows[0].len();
    let mut out = Vec::new();
    for i in 0..d {
        for pow in [1, 2] {
            let v: Vec<f64> = rows.iter().map(|r| r[i].powi(pow)).collect();
            let n = v.len() as f64;
            let m = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
            out.push((m, (var / ess(&v).unwrap()).sqrt()));
        }
    }
    out
}

#[test]
fn delayed_acceptance_is_exact_with_a_poor_surrogate() {
    // A narrow kernel on 20 points is a bad emulator; exact mode must still
    // target the Gaussian.
    let sampler = SamplerSpec::DaRwm {
        sigma: ADAPT,
        bandwidth: 0.3,
        ridge: 1e-6,
        n_train: 20,
        refine_rounds: 0,
        refine_points: 20,
        approximate: false,
    };
    let mut c = gaussian(2, sampler, 8);
    c.n_samples = 40_000;
    let out = execute(&c).unwrap();
    let rows = out.chains[0].record.to_rows();
    for (k, (m, se)) in moments(&rows).into_iter().enumerate() {
        let exact = if k % 2 == 0 { 0.0 } else { 1.0 };
        assert!((m - exact).abs() <= 3.0 * se, "moment {k}: {m} vs {exact} (se {se})");
    }
    let r = &out.report;
    assert!(r.counters.surrogate > 0);
    assert!(r.counters.target < r.counters.surrogate);
}

#[test]
fn hmc_one_step_and_mala_agree_on_moments() {
    let hmc = SamplerSpec::Hmc {
        epsilon: StepSize::Fixed(0.9),
        n_leapfrog: 1,
        mass: MassSpec::Identity,
        jitter: 0.0,
    };
    let mala = SamplerSpec::Mala {
        epsilon: StepSize::Fixed(0.9),
    };
    let mut runs = Vec::new();
    for s in [hmc, mala] {
        let mut c = gaussian(3, s, 12);
        c.n_samples = 30_000;
        runs.push(moments(&execute(&c).unwrap().chains[0].record.to_rows()));
    }
    for ((a, sa), (b, sb)) in runs[0].iter().zip(&runs[1]) {
        assert!((a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt(), "{a} vs {b}");
    }
}

fn stretched(sampler: SamplerSpec) -> mcmc_core::diagnostics::DiagnosticsReport {
    let target = TargetSpec::DiagonalGaussian { variances: vec![1.0, 100.0] };
    let mut c = ExperimentConfig::new(target, sampler, 21);
    c.n_warmup = 1500;
    c.n_samples = 4000;
    c.init = InitSpec::Named(InitMode::Origin);
    execute(&c).unwrap().report
}

#[test]
fn mass_adaptation_doubles_hmc_ess_at_equal_budget() {
    // Short trajectories: with identity mass the wide coordinate random-walks.
    let hmc = |mass| SamplerSpec::Hmc {
        epsilon: ADAPT,
        n_leapfrog: 3,
        mass,
        jitter: 0.1,
    };
    let (ident, adapted) = (stretched(hmc(MassSpec::Identity)), stretched(hmc(MassSpec::Adapt)));
    assert_eq!(ident.counters.grad, adapted.counters.grad);
    assert!(adapted.min_ess >= 2.0 * ident.min_ess, "{} vs {}", adapted.min_ess, ident.min_ess);
}

#[test]
fn mass_adaptation_doubles_nuts_ess_per_gradient() {
    let nuts = |mass| SamplerSpec::Nuts {
        epsilon: ADAPT,
        max_tree_depth: 10,
        mass,
    };
    let (ident, adapted) = (stretched(nuts(MassSpec::Identity)), stretched(nuts(MassSpec::Adapt)));
    let per_grad = |r: &mcmc_core::diagnostics::DiagnosticsReport| r.min_ess / r.counters.grad as f64;
    assert!(per_grad(&adapted) >= 2.0 * per_grad(&ident), "{} vs {}", per_grad(&adapted), per_grad(&ident));
}

#[test]
fn tuning_returns_an_evaluated_point() {
    let t = StandardGaussian::new(3).unwrap();
    let job = TuningJob::new(TunableSampler::Rwm, vec![ParamBound::new(0.05, 5.0, true)], 6, 800);
    let res = tune_by_ess(&job, &t, &RngStream::new(4, 0)).unwrap();
    assert_eq!(res.trace.len(), 6);
    assert!(res.trace.iter().any(|r| r.theta == res.best));
    assert!(res.trace.iter().all(|r| r.objective <= res.best_objective()));
}

#[test]
fn kernel_is_frozen_after_warmup() {
    for sampler in [
        SamplerSpec::GmmIndependence {
            k: 2,
            warmup_source: Default::default(),
            n_pilot_chains: 4,
            pilot_steps: 500,
            max_em_iter: 50,
            em_tol: 1e-6,
        },
        SamplerSpec::DaRwm {
            sigma: ADAPT,
            bandwidth: 1.5,
            ridge: 1e-6,
            n_train: 50,
            refine_rounds: 2,
            refine_points: 10,
            approximate: false,
        },
    ] {
        let mut c = gaussian(2, sampler, 6);
        c.n_warmup = 400;
        c.n_samples = 300;
        let t = c.target.build().unwrap();
        let a = run_chain(&c, t.as_ref(), 0).unwrap();
        c.n_samples = 900;
        let b = run_chain(&c, t.as_ref(), 0).unwrap();
        // A longer sampling phase sees the same frozen kernel and extends the same path.
        assert_eq!(a.kernel_fingerprint, b.kernel_fingerprint);
        assert_eq!(a.record.sample_bits()[..], b.record.sample_bits()[..a.record.sample_bits().len()]);
    }
}
