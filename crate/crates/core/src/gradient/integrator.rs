use crate::state::EvalCounters;
use crate::targets::TargetDensity;

/// Position and momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Self {
        debug_assert_eq!(q.len(), p.len());
        PhasePoint { q, p }
    }

    pub fn negate_momentum(&mut self) {
        for v in self.p.iter_mut() {
            *v = -*v;
        }
    }
}

/// `K(p) = 1/2 sum p_i^2 / m_i`.
pub fn kinetic_energy(p: &[f64], mass_diag: &[f64]) -> f64 {
    0.5 * p.iter().zip(mass_diag).map(|(p, m)| p * p / m).sum::<f64>()
}

/// `H(q, p) = -log pi(q) + K(p)`; `+inf` outside the support.
pub fn hamiltonian(point: &PhasePoint, mass_diag: &[f64], target: &dyn TargetDensity) -> f64 {
    let lp = target.log_density(&point.q);
    if lp == f64::NEG_INFINITY || lp.is_nan() {
        return f64::INFINITY;
    }
    -lp + kinetic_energy(&point.p, mass_diag)
}

#[derive(Debug, Clone)]
pub struct LeapfrogOutput {
    pub point: PhasePoint,
    pub logpi: f64,
    pub grad: Vec<f64>,
    /// Step (1-based) at which a non-finite value appeared.
    pub divergence: Option<usize>,
}

/// Half momentum kick, `n_steps` alternating drifts `q += eps M^{-1} p`
/// and full kicks, final half kick. A supplied `entry_grad` is reused;
/// otherwise the gradient at the start is evaluated and counted.
pub fn leapfrog(
    point: &PhasePoint,
    epsilon: f64,
    n_steps: usize,
    mass_diag: &[f64],
    target: &dyn TargetDensity,
    entry_grad: Option<&[f64]>,
    counters: &mut EvalCounters,
) -> LeapfrogOutput {
    let d = point.q.len();
    let mut q = point.q.clone();
    let mut p = point.p.clone();
    let mut grad = match entry_grad {
        Some(g) => g.to_vec(),
        None => {
            let mut g = vec![0.0; d];
            counters.log_density_and_grad(target, &q, &mut g);
            g
        }
    };
    let mut logpi = f64::NAN;

    for (pi, gi) in p.iter_mut().zip(&grad) {
        *pi += 0.5 * epsilon * gi;
    }
    for step in 1..=n_steps {
        for ((qi, pi), mi) in q.iter_mut().zip(&p).zip(mass_diag) {
            *qi += epsilon * pi / mi;
        }
        logpi = counters.log_density_and_grad(target, &q, &mut grad);
        if !logpi.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return LeapfrogOutput {
                point: PhasePoint { q, p },
                logpi,
                grad,
                divergence: Some(step),
            };
        }
        let kick = if step == n_steps { 0.5 * epsilon } else { epsilon };
        for (pi, gi) in p.iter_mut().zip(&grad) {
            *pi += kick * gi;
        }
    }
    if n_steps == 0 {
        logpi = target.log_density(&q);
    }
    LeapfrogOutput {
        point: PhasePoint { q, p },
        logpi,
        grad,
        divergence: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::{Flat, StandardGaussian};

    #[test]
    fn hamiltonian_values() {
        let t = StandardGaussian::new(1).unwrap();
        let h = hamiltonian(&PhasePoint::new(vec![0.0], vec![0.0]), &[1.0], &t);
        assert_eq!(h, 0.0);
        let h = hamiltonian(&PhasePoint::new(vec![1.0], vec![2.0]), &[1.0], &t);
        assert_eq!(h, 2.5);
        let k1 = kinetic_energy(&[1.0, 3.0], &[1.0, 2.0]);
        let k2 = kinetic_energy(&[1.0, 3.0], &[2.0, 4.0]);
        assert_eq!(k2, k1 / 2.0);
    }

    #[test]
    fn free_particle_drifts_linearly() {
        let t = Flat::new(2);
        let mut c = EvalCounters::default();
        let start = PhasePoint::new(vec![1.0, -1.0], vec![0.5, 2.0]);
        let out = leapfrog(&start, 0.1, 7, &[1.0, 4.0], &t, None, &mut c);
        assert!((out.point.q[0] - (1.0 + 0.1 * 7.0 * 0.5)).abs() < 1e-14);
        assert!((out.point.q[1] - (-1.0 + 0.1 * 7.0 * 2.0 / 4.0)).abs() < 1e-14);
        assert_eq!(out.point.p, start.p);
        assert_eq!(c.grad, 8);
    }

    #[test]
    fn single_step_by_hand() {
        let t = StandardGaussian::new(1).unwrap();
        let mut c = EvalCounters::default();
        let out = leapfrog(&PhasePoint::new(vec![1.0], vec![0.0]), 0.1, 1, &[1.0], &t, Some(&[-1.0]), &mut c);
        assert!((out.point.q[0] - 0.995).abs() < 1e-15);
        assert!((out.point.p[0] + 0.09975).abs() < 1e-15);
        assert_eq!(c.grad, 1);
    }

    #[test]
    fn divergence_reports_step() {
        #[derive(Debug)]
        struct Wall;
        impl TargetDensity for Wall {
            fn name(&self) -> &str {
                "wall"
            }
            fn dim(&self) -> usize {
                1
            }
            fn log_density(&self, x: &[f64]) -> f64 {
                if x[0] > 0.25 {
                    f64::NEG_INFINITY
                } else {
                    0.0
                }
            }
            fn log_density_and_grad(&self, x: &[f64], g: &mut [f64]) -> f64 {
                g[0] = 0.0;
                self.log_density(x)
            }
        }
        let mut c = EvalCounters::default();
        let out = leapfrog(&PhasePoint::new(vec![0.0], vec![1.0]), 0.1, 10, &[1.0], &Wall, None, &mut c);
        assert_eq!(out.divergence, Some(3));
    }
}
