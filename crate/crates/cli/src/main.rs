use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcmc_core::advisor::{predict_iteration_cost, recommend, ProblemProfile};
use mcmc_core::experiment::{
    bundle, run_comparison, run_experiment, run_scaling_study, selftest, write_comparison, ExperimentConfig,
    BUNDLES,
};
use mcmc_core::McmcError;

/// `println!` that exits quietly when stdout is closed (e.g. piped into `head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if let Err(e) = writeln!(std::io::stdout().lock(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            return Err(McmcError::Io(e.to_string()));
        }
    }};
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "mcmc", version, about = "Run, compare and diagnose MCMC samplers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its report files.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run several configs (or a named bundle) on a shared target.
    Compare {
        configs: Vec<PathBuf>,
        /// One of gap1_multimodal, gap3_expensive, gap4_tuning.
        #[arg(long, conflicts_with = "configs")]
        bundle: Option<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Repeat configs over a list of dimensions.
    Scale {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Recommend a sampler for a problem profile.
    Advise(AdviseArgs),
    /// Run the fast oracle checks.
    Selftest {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    write_samples: bool,
}

impl Overrides {
    fn apply(&self, c: &mut ExperimentConfig) {
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.chains {
            c.n_chains = v;
        }
        if let Some(v) = self.warmup {
            c.n_warmup = v;
        }
        if let Some(v) = self.samples {
            c.n_samples = v;
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        if let Some(v) = &self.output {
            c.output_dir = v.clone();
        }
        if self.write_samples {
            c.write_samples = true;
        }
    }
}

#[derive(Args)]
struct AdviseArgs {
    #[arg(long)]
    differentiable: bool,
    /// Full conditionals can be sampled exactly.
    #[arg(long)]
    fcds: bool,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    correlated: bool,
    /// Prefer an automatically tuned sampler.
    #[arg(long)]
    blackbox: bool,
    #[arg(long)]
    multimodal: bool,
    #[arg(long)]
    expensive: bool,
    /// Print only the JSON document.
    #[arg(long)]
    json: bool,
}

fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, McmcError> {
    let mut c = ExperimentConfig::from_file(path)?;
    overrides.apply(&mut c);
    Ok(c)
}

fn out_dir(configs: &[ExperimentConfig], overrides: &Overrides) -> PathBuf {
    overrides
        .output
        .clone()
        .or_else(|| configs.first().map(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("mcmc-out"))
}

fn run(cmd: Command) -> Result<bool, McmcError> {
    match cmd {
        Command::Run { config, overrides } => {
            let c = load(&config, &overrides)?;
            let out = run_experiment(&c)?;
            let r = &out.result.report;
            out!(
                "{} on {}: min ESS {:.1}, acceptance {:.3}, divergences {}",
                c.label(),
                r.target,
                r.min_ess,
                r.acceptance_rate,
                r.n_divergences
            );
            if let Some(rh) = r.max_rhat() {
                out!("max R-hat {rh:.4}");
            }
            for f in &out.files {
                out!("wrote {}", f.display());
            }
        }
        Command::Compare { configs, bundle: name, overrides } => {
            let mut list = match name {
                Some(name) => bundle(&name, overrides.seed.unwrap_or(1))?,
                None if configs.is_empty() => {
                    return Err(McmcError::invalid(format!(
                        "give config files or --bundle (one of {})",
                        BUNDLES.join(", ")
                    )))
                }
                None => configs.iter().map(|p| load(p, &overrides)).collect::<Result<_, _>>()?,
            };
            for c in &mut list {
                overrides.apply(c);
            }
            let rows = run_comparison(&list)?;
            for r in &rows {
                out!(
                    "{:<28} min ESS {:>9.1}  ESS/step {:.4}  true evals {:>9}  acceptance {:.3}",
                    r.label, r.min_ess, r.ess_per_step, r.true_evals, r.acceptance
                );
            }
            let path = write_comparison(&rows, &out_dir(&list, &overrides))?;
            out!("wrote {}", path.display());
        }
        Command::Scale { configs, dims, overrides } => {
            let list = configs.iter().map(|p| load(p, &overrides)).collect::<Result<Vec<_>, _>>()?;
            let study = run_scaling_study(&list, &dims)?;
            for s in &study.summaries {
                match s.step_size_slope {
                    Some(v) => out!("{}: log-log step-size slope {v:.3}", s.sampler),
                    None => out!("{}: slope needs three or more dimensions", s.sampler),
                }
            }
            let path = study.write(&out_dir(&list, &overrides))?;
            out!("wrote {}", path.display());
        }
        Command::Advise(a) => {
            let profile = ProblemProfile {
                differentiable: a.differentiable,
                fcds_tractable: a.fcds,
                dim: a.dim,
                high_correlation: a.correlated,
                needs_blackbox: a.blackbox,
                suspect_multimodal: a.multimodal,
                expensive_likelihood: a.expensive,
            };
            let rec = recommend(&profile);
            let steps = Some(10);
            let cost = predict_iteration_cost(rec.primary_choice, a.dim, steps)?;
            let doc = serde_json::json!({ "profile": profile, "recommendation": rec, "cost": cost });
            if !a.json {
                out!("{}", rec.headline);
                if let Some(w) = &rec.warning {
                    out!("{w}");
                }
                for j in &rec.justification {
                    out!("  - {j}");
                }
                out!("per-iteration time {}, space {}", cost.time, cost.space);
            }
            out!("{}", serde_json::to_string_pretty(&doc).map_err(|e| McmcError::Io(e.to_string()))?);
        }
        Command::Selftest { json } => {
            let checks = selftest();
            let ok = checks.iter().all(|c| c.passed);
            if json {
                let text = serde_json::to_string_pretty(&checks).map_err(|e| McmcError::Io(e.to_string()))?;
                out!("{text}");
            } else {
                for c in &checks {
                    out!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                }
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_RUNTIME),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                McmcError::Validation(_) | McmcError::InvalidInput(_) => ExitCode::from(EXIT_VALIDATION),
                _ => ExitCode::from(EXIT_RUNTIME),
            }
        }
    }
}
