use super::mean;
use crate::error::{McmcError, Result};

/// Split-chain potential scale reduction per dimension. Each chain is cut
/// into two halves of length `n` (the middle point is dropped for odd
/// lengths) and the classic formula is applied to the `2M` halves.
pub fn gelman_rubin(chains: &[Vec<Vec<f64>>]) -> Result<Vec<f64>> {
    if chains.len() < 2 {
        return Err(McmcError::invalid("R-hat needs at least two chains"));
    }
    let len = chains[0].len();
    if chains.iter().any(|c| c.len() != len) {
        return Err(McmcError::invalid("R-hat needs equal-length chains"));
    }
    if len < 4 {
        return Err(McmcError::InsufficientData { needed: 4, got: len });
    }
    let dim = chains[0][0].len();
    if chains.iter().flatten().any(|r| r.len() != dim) {
        return Err(McmcError::invalid("chains disagree on dimension"));
    }
    let n = len / 2;
    let halves: Vec<&[Vec<f64>]> = chains
        .iter()
        .flat_map(|c| [&c[..n], &c[len - n..]])
        .collect();
    let m = halves.len() as f64;
    let nf = n as f64;

    (0..dim)
        .map(|i| {
            let mut means = Vec::with_capacity(halves.len());
            let mut vars = Vec::with_capacity(halves.len());
            for h in &halves {
                let col: Vec<f64> = h.iter().map(|r| r[i]).collect();
                let mu = mean(&col);
                let v = col.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (nf - 1.0);
                means.push(mu);
                vars.push(v);
            }
            let w = mean(&vars);
            if w <= 0.0 {
                return Err(McmcError::DegenerateChain(format!(
                    "zero within-chain variance in dimension {i}"
                )));
            }
            let grand = mean(&means);
            let b = nf * means.iter().map(|mu| (mu - grand) * (mu - grand)).sum::<f64>() / (m - 1.0);
            Ok((((nf - 1.0) / nf * w + b / nf) / w).sqrt())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn gaussian_chain(seed: u64, n: usize, shift: f64) -> Vec<Vec<f64>> {
        let mut rng = RngStream::new(seed, 0);
        (0..n).map(|_| vec![rng.normal() + shift, rng.normal()]).collect()
    }

    #[test]
    fn same_distribution_near_one() {
        let chains: Vec<_> = (0..4).map(|s| gaussian_chain(s, 10_000, 0.0)).collect();
        for r in gelman_rubin(&chains).unwrap() {
            assert!(r < 1.01, "{r}");
        }
    }

    #[test]
    fn separated_means_flagged() {
        let chains = vec![gaussian_chain(1, 10_000, 0.0), gaussian_chain(2, 10_000, 3.0)];
        assert!(gelman_rubin(&chains).unwrap()[0] > 1.2);
    }

    #[test]
    fn formula_floor_when_between_variance_vanishes() {
        // Both halves of each chain share the same mean, and chains agree.
        let half: Vec<Vec<f64>> = vec![vec![1.0], vec![-1.0], vec![2.0], vec![-2.0]];
        let chain: Vec<Vec<f64>> = half.iter().chain(half.iter()).cloned().collect();
        let r = gelman_rubin(&[chain.clone(), chain]).unwrap()[0];
        let n = 4.0f64;
        assert!((r - ((n - 1.0) / n).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_single_chain_and_degenerate() {
        assert!(gelman_rubin(&[gaussian_chain(0, 10, 0.0)]).is_err());
        let c = vec![vec![1.0]; 10];
        assert!(matches!(
            gelman_rubin(&[c.clone(), c]),
            Err(McmcError::DegenerateChain(_))
        ));
    }
}
