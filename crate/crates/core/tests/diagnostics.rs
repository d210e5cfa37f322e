use mcmc_core::diagnostics::{batch_means_variance, build_report, ess, gelman_rubin};
use mcmc_core::rng::RngStream;
use mcmc_core::state::ChainRecord;
use mcmc_core::targets::StandardGaussian;
use proptest::prelude::*;

fn ar1(rho: f64, n: usize, rng: &mut RngStream) -> Vec<f64> {
    let scale = (1.0 - rho * rho).sqrt();
    let mut x = rng.normal();
    (0..n)
        .map(|_| {
            x = rho * x + scale * rng.normal();
            x
        })
        .collect()
}

#[test]
fn batch_means_and_ess_estimate_the_same_variance() {
    let n = 100_000;
    for (k, rho) in [0.0, 0.3, 0.5, 0.8, 0.95].into_iter().enumerate() {
        let x = ar1(rho, n, &mut RngStream::new(31, k as u64));
        let m = x.iter().sum::<f64>() / n as f64;
        let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n as f64 - 1.0);
        let from_ess = var * n as f64 / ess(&x).unwrap();
        let from_batches = batch_means_variance(&x, 100).unwrap();
        let ratio = from_batches / from_ess;
        assert!((1.0 / 1.5..=1.5).contains(&ratio), "rho {rho}: ratio {ratio}");
        // Both near the exact value (1 + rho) / (1 - rho).
        let exact = (1.0 + rho) / (1.0 - rho);
        assert!((from_ess / exact - 1.0).abs() < 0.2, "rho {rho}: {from_ess} vs {exact}");
    }
}

#[test]
fn rhat_grows_with_separation() {
    let mut last = 0.0;
    for sep in [0.0, 1.0, 2.0, 3.0] {
        let mut rng = RngStream::new(8, 0);
        let chains: Vec<Vec<Vec<f64>>> = (0..4)
            .map(|c| {
                let shift = if c % 2 == 0 { 0.0 } else { sep };
                (0..2000).map(|_| vec![shift + rng.normal()]).collect()
            })
            .collect();
        let r = gelman_rubin(&chains).unwrap()[0];
        assert!(r >= last, "separation {sep}: {r} < {last}");
        last = r;
    }
    assert!(last > 1.2);
}

#[test]
fn rhat_needs_two_chains() {
    let one = vec![vec![vec![0.0]; 100]];
    assert!(gelman_rubin(&one).is_err());
}

fn random_chains(seed: u64, n_chains: usize, len: usize, dim: usize) -> Vec<Vec<Vec<f64>>> {
    let mut rng = RngStream::new(seed, 0);
    (0..n_chains)
        .map(|_| {
            let mut x = vec![0.0; dim];
            (0..len)
                .map(|_| {
                    for (j, v) in x.iter_mut().enumerate() {
                        let rho = 0.2 * j as f64;
                        *v = rho * *v + rng.normal() + j as f64;
                    }
                    x.clone()
                })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn diagnostics_follow_column_permutations(seed in 0u64..1000, shift in 1usize..4) {
        let dim = 4;
        let chains = random_chains(seed, 3, 400, dim);
        let perm: Vec<usize> = (0..dim).map(|j| (j + shift) % dim).collect();
        let permuted: Vec<Vec<Vec<f64>>> = chains
            .iter()
            .map(|c| c.iter().map(|row| perm.iter().map(|&p| row[p]).collect()).collect())
            .collect();
        let target = StandardGaussian::new(dim).unwrap();
        let records = |cs: &[Vec<Vec<f64>>]| cs.iter().map(|c| ChainRecord::from_rows(c)).collect::<Vec<_>>();
        let a = build_report(&records(&chains), &target).unwrap();
        let b = build_report(&records(&permuted), &target).unwrap();
        let ra = a.rhat.clone().unwrap();
        let rb = b.rhat.clone().unwrap();
        for (j, &p) in perm.iter().enumerate() {
            prop_assert_eq!(b.ess[j].to_bits(), a.ess[p].to_bits());
            prop_assert_eq!(rb[j].to_bits(), ra[p].to_bits());
            prop_assert_eq!(b.mean[j].to_bits(), a.mean[p].to_bits());
            prop_assert_eq!(b.variance[j].to_bits(), a.variance[p].to_bits());
            prop_assert_eq!(b.asym_variance[j].to_bits(), a.asym_variance[p].to_bits());
        }
        prop_assert_eq!(a.min_ess.to_bits(), b.min_ess.to_bits());
    }

    #[test]
    fn rhat_ignores_chain_order(seed in 0u64..1000) {
        let mut chains = random_chains(seed, 4, 200, 2);
        let a = gelman_rubin(&chains).unwrap();
        chains.reverse();
        let b = gelman_rubin(&chains).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn ess_is_bounded_by_chain_length(seed in 0u64..1000, rho in 0.0f64..0.9) {
        let x = ar1(rho, 2000, &mut RngStream::new(seed, 1));
        let e = ess(&x).unwrap();
        prop_assert!(e > 0.0 && e <= 2000.0 * 1.2);
    }
}
