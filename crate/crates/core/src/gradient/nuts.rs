//! No-U-Turn sampler, slice-variable tree-doubling form.
//!
//! Each level doubles the trajectory in a random direction. States whose
//! joint density clears the slice are valid; the next state is chosen from
//! them by progressive sampling, which preserves detailed balance. Only the
//! two trajectory ends and the running proposal are kept in memory.

use serde::{Deserialize, Serialize};

use super::integrator::{kinetic_energy, leapfrog, PhasePoint};
use super::{ensure_grad, DIVERGENCE_THRESHOLD};
use crate::error::{McmcError, Result};
use crate::rng::RngStream;
use crate::state::{ChainState, EvalCounters, Transition};
use crate::targets::TargetDensity;

pub const MAX_TREE_DEPTH_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NutsConfig {
    pub epsilon: f64,
    pub mass_diag: Vec<f64>,
    pub max_tree_depth: usize,
}

impl NutsConfig {
    pub fn new(epsilon: f64, mass_diag: Vec<f64>, max_tree_depth: usize) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(McmcError::invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        if max_tree_depth == 0 || max_tree_depth > MAX_TREE_DEPTH_LIMIT {
            return Err(McmcError::invalid(format!(
                "max_tree_depth must lie in 1..={MAX_TREE_DEPTH_LIMIT}"
            )));
        }
        if mass_diag.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(McmcError::invalid("mass entries must be positive"));
        }
        Ok(NutsConfig {
            epsilon,
            mass_diag,
            max_tree_depth,
        })
    }
}

/// True when the trajectory ends have started moving toward each other:
/// `(q+ - q-) . M^{-1} p- < 0` or `(q+ - q-) . M^{-1} p+ < 0`.
pub fn is_u_turn(
    q_minus: &[f64],
    q_plus: &[f64],
    p_minus: &[f64],
    p_plus: &[f64],
    mass_diag: &[f64],
) -> bool {
    let mut dot_minus = 0.0;
    let mut dot_plus = 0.0;
    for i in 0..q_minus.len() {
        let span = q_plus[i] - q_minus[i];
        dot_minus += span * p_minus[i] / mass_diag[i];
        dot_plus += span * p_plus[i] / mass_diag[i];
    }
    dot_minus < 0.0 || dot_plus < 0.0
}

#[derive(Debug, Clone)]
struct Node {
    q: Vec<f64>,
    p: Vec<f64>,
    grad: Vec<f64>,
    logpi: f64,
}

struct Subtree {
    minus: Node,
    plus: Node,
    proposal: Node,
    n_valid: u64,
    keep_going: bool,
    alpha_sum: f64,
    n_alpha: usize,
    divergent: bool,
    n_leapfrog: usize,
}

struct TreeContext<'a> {
    target: &'a dyn TargetDensity,
    mass_diag: &'a [f64],
    epsilon: f64,
    log_slice: f64,
    joint0: f64,
}

fn build_tree(
    from: &Node,
    direction: f64,
    depth: usize,
    ctx: &TreeContext<'_>,
    rng: &mut RngStream,
    counters: &mut EvalCounters,
) -> Subtree {
    if depth == 0 {
        let out = leapfrog(
            &PhasePoint::new(from.q.clone(), from.p.clone()),
            direction * ctx.epsilon,
            1,
            ctx.mass_diag,
            ctx.target,
            Some(&from.grad),
            counters,
        );
        let joint = if out.divergence.is_some() {
            f64::NEG_INFINITY
        } else {
            out.logpi - kinetic_energy(&out.point.p, ctx.mass_diag)
        };
        let joint = if joint.is_nan() { f64::NEG_INFINITY } else { joint };
        let node = Node {
            q: out.point.q,
            p: out.point.p,
            grad: out.grad,
            logpi: out.logpi,
        };
        let keep_going = ctx.log_slice < joint + DIVERGENCE_THRESHOLD;
        return Subtree {
            minus: node.clone(),
            plus: node.clone(),
            proposal: node,
            n_valid: (ctx.log_slice <= joint) as u64,
            keep_going,
            alpha_sum: (joint - ctx.joint0).exp().min(1.0),
            n_alpha: 1,
            divergent: !keep_going,
            n_leapfrog: 1,
        };
    }

    let mut tree = build_tree(from, direction, depth - 1, ctx, rng, counters);
    if !tree.keep_going {
        return tree;
    }
    let edge = if direction > 0.0 { &tree.plus } else { &tree.minus };
    let outer = build_tree(&edge.clone(), direction, depth - 1, ctx, rng, counters);
    if direction > 0.0 {
        tree.plus = outer.plus;
    } else {
        tree.minus = outer.minus;
    }
    let total = tree.n_valid + outer.n_valid;
    if total > 0 && rng.uniform() < outer.n_valid as f64 / total as f64 {
        tree.proposal = outer.proposal;
    }
    tree.n_valid = total;
    tree.alpha_sum += outer.alpha_sum;
    tree.n_alpha += outer.n_alpha;
    tree.divergent |= outer.divergent;
    tree.n_leapfrog += outer.n_leapfrog;
    tree.keep_going = outer.keep_going
        && !is_u_turn(
            &tree.minus.q,
            &tree.plus.q,
            &tree.minus.p,
            &tree.plus.p,
            ctx.mass_diag,
        );
    tree
}

/// One NUTS transition. `accept_prob` carries the mean Metropolis
/// statistic over the final tree, which drives step-size adaptation.
pub fn nuts_step(
    mut state: ChainState,
    config: &NutsConfig,
    target: &dyn TargetDensity,
    rng: &mut RngStream,
    counters: &mut EvalCounters,
) -> Result<Transition> {
    ensure_grad(&mut state, target, counters)?;
    let mass = &config.mass_diag;
    let p0: Vec<f64> = mass.iter().map(|m| m.sqrt() * rng.normal()).collect();
    let joint0 = state.cached_logpi - kinetic_energy(&p0, mass);
    // u ~ Uniform(0, exp(joint0)) in log form.
    let log_slice = joint0 + rng.uniform().ln();

    let root = Node {
        q: state.position.clone(),
        p: p0,
        grad: state.cached_grad.clone().expect("gradient cached"),
        logpi: state.cached_logpi,
    };
    let ctx = TreeContext {
        target,
        mass_diag: mass,
        epsilon: config.epsilon,
        log_slice,
        joint0,
    };
    let mut minus = root.clone();
    let mut plus = root.clone();
    let mut chosen: Option<Node> = None;
    let mut n_valid: u64 = 1;
    let mut depth = 0;
    let mut alpha_sum = 0.0;
    let mut n_alpha = 0;
    let mut divergent = false;
    let mut n_leapfrog = 0;

    while depth < config.max_tree_depth {
        let direction = if rng.coin() { 1.0 } else { -1.0 };
        let sub = if direction > 0.0 {
            let s = build_tree(&plus, direction, depth, &ctx, rng, counters);
            plus = s.plus.clone();
            s
        } else {
            let s = build_tree(&minus, direction, depth, &ctx, rng, counters);
            minus = s.minus.clone();
            s
        };
        alpha_sum += sub.alpha_sum;
        n_alpha += sub.n_alpha;
        divergent |= sub.divergent;
        n_leapfrog += sub.n_leapfrog;
        depth += 1;
        if !sub.keep_going {
            break;
        }
        if rng.uniform() < sub.n_valid as f64 / n_valid as f64 {
            chosen = Some(sub.proposal);
        }
        n_valid += sub.n_valid;
        if is_u_turn(&minus.q, &plus.q, &minus.p, &plus.p, mass) {
            break;
        }
    }

    let accepted = chosen.is_some();
    let step_index = state.step_index + 1;
    let next = match chosen {
        Some(node) => ChainState {
            position: node.q,
            cached_logpi: node.logpi,
            cached_grad: Some(node.grad),
            step_index,
        },
        None => ChainState { step_index, ..state },
    };
    Ok(Transition {
        state: next,
        accepted,
        accept_prob: if n_alpha > 0 { alpha_sum / n_alpha as f64 } else { 0.0 },
        divergent,
        n_leapfrog,
        tree_depth: depth,
    })
}
