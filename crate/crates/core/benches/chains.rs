use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mcmc_core::experiment::{execute, AutoStep, ExperimentConfig, MassSpec, SamplerSpec, StepSize};
use mcmc_core::targets::TargetSpec;

fn config(workers: usize) -> ExperimentConfig {
    let sampler = SamplerSpec::Nuts {
        epsilon: StepSize::Auto(AutoStep::Adapt),
        max_tree_depth: 8,
        mass: MassSpec::Adapt,
    };
    let mut c = ExperimentConfig::new(TargetSpec::StandardGaussian { d: 20 }, sampler, 1);
    c.n_chains = 8;
    c.n_warmup = 300;
    c.n_samples = 500;
    c.workers = workers;
    c
}

fn multi_chain(c: &mut Criterion) {
    let mut g = c.benchmark_group("nuts_8_chains");
    g.sample_size(10);
    // workers = 1 runs chains in order; 0 uses every rayon thread.
    for (name, workers) in [("sequential", 1), ("parallel", 0)] {
        let cfg = config(workers);
        g.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| execute(cfg).unwrap().report.min_ess)
        });
    }
    g.finish();
}

criterion_group!(benches, multi_chain);
criterion_main!(benches);
