use serde::Serialize;

use crate::advisor::{recommend, Algorithm, ProblemProfile};
use crate::classic::{exact_gaussian_conditionals, gibbs_step};
use crate::diagnostics::ess;
use crate::gradient::{leapfrog, PhasePoint};
use crate::mh::discrete_stationarity_oracle;
use crate::rng::RngStream;
use crate::state::{ChainState, EvalCounters};
use crate::targets::{
    check_points, fd_gradient_check, Ar1Gaussian, Banana, BimodalMixture, Funnel, StandardGaussian, TargetDensity,
};

#[derive(Debug, Clone, Serialize)]
pub struct SelftestCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> SelftestCheck {
    SelftestCheck { name, passed, detail }
}

/// Fast oracle checks: exact stationarity on small state spaces, leapfrog
/// reversibility, analytic gradients, ESS calibration, Gibbs acceptance and
/// the advisor's headline branches.
pub fn selftest() -> Vec<SelftestCheck> {
    let mut out = Vec::new();

    let pi = [0.2, 0.5, 0.3];
    let g = vec![vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5], vec![0.5, 0.5, 0.0]];
    out.push(match discrete_stationarity_oracle(&pi, &g) {
        Ok(r) => check(
            "stationarity_oracle",
            r.max_deviation < 1e-12 && r.detailed_balance_violation < 1e-12,
            format!("max |pi P - pi| = {:e}", r.max_deviation),
        ),
        Err(e) => check("stationarity_oracle", false, e.to_string()),
    });

    let t = StandardGaussian::new(5).expect("valid dimension");
    let mut rng = RngStream::new(11, 0);
    let mut worst: f64 = 0.0;
    let mut c = EvalCounters::default();
    for _ in 0..100 {
        let start = PhasePoint::new(rng.normal_vec(5), rng.normal_vec(5));
        let mass = vec![1.0; 5];
        let fwd = leapfrog(&start, 0.1, 20, &mass, &t, None, &mut c);
        let mut back = fwd.point.clone();
        back.negate_momentum();
        let mut ret = leapfrog(&back, 0.1, 20, &mass, &t, None, &mut c).point;
        ret.negate_momentum();
        for (a, b) in ret.q.iter().chain(&ret.p).zip(start.q.iter().chain(&start.p)) {
            worst = worst.max((a - b).abs());
        }
    }
    out.push(check("leapfrog_reversibility", worst <= 1e-10, format!("max error {worst:e}")));

    let targets: Vec<Box<dyn TargetDensity>> = vec![
        Box::new(StandardGaussian::new(4).expect("valid")),
        Box::new(Ar1Gaussian::new(6, 0.9).expect("valid")),
        Box::new(Funnel::new(5).expect("valid")),
        Box::new(Banana),
        Box::new(BimodalMixture::new(3, 8.0, 0.5).expect("valid")),
    ];
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for t in &targets {
        for x in check_points(t.as_ref(), 20) {
            match fd_gradient_check(t.as_ref(), &x, 1e-5) {
                Ok(e) => worst = worst.max(e),
                Err(e) => failure = Some(format!("{}: {e}", t.name())),
            }
        }
    }
    out.push(check(
        "gradient_fidelity",
        failure.is_none() && worst < 1e-4,
        failure.unwrap_or_else(|| format!("max relative error {worst:e}")),
    ));

    let rho: f64 = 0.5;
    let mut rng = RngStream::new(12, 0);
    let mut x = rng.normal();
    let series: Vec<f64> = (0..20_000)
        .map(|_| {
            x = rho * x + (1.0 - rho * rho).sqrt() * rng.normal();
            x
        })
        .collect();
    let expected = (1.0 - rho) / (1.0 + rho);
    out.push(match ess(&series) {
        Ok(e) => {
            let ratio = e / series.len() as f64;
            check(
                "ess_calibration",
                (ratio - expected).abs() < 0.15 * expected,
                format!("ESS/N = {ratio:.4}, expected {expected:.4}"),
            )
        }
        Err(e) => check("ess_calibration", false, e.to_string()),
    });

    let t = Ar1Gaussian::new(3, 0.9).expect("valid");
    let gibbs = (|| -> crate::error::Result<f64> {
        let mut fcds = exact_gaussian_conditionals(&t)?;
        let mut rng = RngStream::new(13, 0);
        let mut c = EvalCounters::default();
        let mut s = ChainState::new(&t, vec![0.0; 3], false, &mut c)?;
        let mut accepted = 0;
        for _ in 0..1000 {
            let tr = gibbs_step(s, &mut fcds, &t, &mut rng, &mut c)?;
            accepted += tr.accepted as usize;
            s = tr.state;
        }
        Ok(accepted as f64 / 1000.0)
    })();
    out.push(match gibbs {
        Ok(rate) => check("gibbs_acceptance", rate == 1.0, format!("acceptance {rate}")),
        Err(e) => check("gibbs_acceptance", false, e.to_string()),
    });

    let p = |differentiable, fcds_tractable, dim, needs_blackbox| ProblemProfile {
        differentiable,
        fcds_tractable,
        dim,
        high_correlation: false,
        needs_blackbox,
        suspect_multimodal: false,
        expensive_likelihood: false,
    };
    let cases = [
        (p(false, true, 5, false), Algorithm::Gibbs),
        (p(false, false, 5, false), Algorithm::Rwm),
        (p(true, false, 5, true), Algorithm::Rwm),
        (p(true, false, 50, true), Algorithm::Nuts),
        (p(true, false, 50, false), Algorithm::Hmc),
    ];
    let bad: Vec<String> = cases
        .iter()
        .filter(|(prof, want)| recommend(prof).primary_choice != *want)
        .map(|(prof, want)| format!("{prof:?} should give {want}"))
        .collect();
    out.push(check(
        "advisor_tree",
        bad.is_empty(),
        if bad.is_empty() { "all branches match".into() } else { bad.join("; ") },
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        for c in selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
