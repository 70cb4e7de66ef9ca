//! Self-supervised inner loop: regress N-step returns through the shared
//! latent and take one gradient step on it.

use alloc::vec::Vec;

use super::{MetaError, MetaParams};
use crate::envs::TrajectoryBatch;
use crate::grad::{Graph, Var};
use crate::nets::{GaussianPolicy, LatentZ, SupervisionNet};
use crate::surrogate::column;
use crate::tensor::Tensor;

/// Per-timestep regression targets for one trajectory: the sum of the next
/// `n` rewards, truncated at the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct NStepTargets(pub Vec<f64>);

/// `sum_{k=t}^{min(t+n, H)-1} r_k` for every `t`.
pub fn nstep_targets(rewards: &[f64], n: usize) -> NStepTargets {
    assert!(n >= 1, "n-step window must be at least 1");
    let h = rewards.len();
    NStepTargets((0..h).map(|t| rewards[t..(t + n).min(h)].iter().sum()).collect())
}

/// Targets for every row of a batch.
pub fn batch_targets(batch: &TrajectoryBatch, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(batch.rows());
    for i in 0..batch.n_traj {
        out.extend(nstep_targets(batch.rewards_of(i), n).0);
    }
    out
}

/// DICE weights `magic_box(sum_{t' <= t} log mu(a_t' | s_t'))` per row.
pub fn dice_weights<'g>(g: &'g Graph, policy: &GaussianPolicy, phi: &[Var<'g>], batch: &TrajectoryBatch) -> Var<'g> {
    let states = g.constant(batch.states.clone());
    let input = policy.input_graph(states, None);
    let logp = policy.log_prob_graph(phi, input, g.constant(batch.actions.clone()));
    let running = logp
        .reshape(batch.n_traj, batch.horizon)
        .matmul(g.constant(Tensor::upper_ones(batch.horizon)));
    running.magic_box().reshape(batch.rows(), 1)
}

/// Mean over trajectories of `sum_t w_t (M(s_t, a_t, z) - target_t)^2`,
/// where `w_t` are DICE weights when `dice` is given and 1 otherwise.
#[allow(clippy::too_many_arguments)]
pub fn inner_loss_graph<'g>(
    g: &'g Graph,
    net: &SupervisionNet,
    beta: &[Var<'g>],
    z_rows: Var<'g>,
    pre: &TrajectoryBatch,
    targets: &[f64],
    dice: Option<(&GaussianPolicy, &[Var<'g>])>,
) -> Var<'g> {
    assert_eq!(targets.len(), pre.rows(), "one target per pre-update row");
    let input = net.input_graph(g, &pre.states, &pre.actions, z_rows);
    let err = (net.predict_graph(beta, input) - column(g, targets)).square();
    let weighted = match dice {
        Some((policy, phi)) => err * dice_weights(g, policy, phi, pre),
        None => err,
    };
    weighted.sum().scale(1.0 / pre.n_traj as f64)
}

/// The inner step recorded in a graph, so `z_prime` stays differentiable
/// with respect to the supervision weights (and the exploration weights when
/// DICE weighting is on).
#[derive(Clone, Copy, Debug)]
pub struct AdaptedGraph<'g> {
    pub z: Var<'g>,
    pub loss: Var<'g>,
    pub z_prime: Var<'g>,
    /// Gradient of the loss with respect to each row's copy of `z`.
    pub row_grads: Var<'g>,
}

#[allow(clippy::too_many_arguments)]
pub fn inner_adapt_graph<'g>(
    g: &'g Graph,
    net: &SupervisionNet,
    beta: &[Var<'g>],
    dice: Option<(&GaussianPolicy, &[Var<'g>])>,
    z: &LatentZ,
    pre: &TrajectoryBatch,
    targets: &[f64],
    alpha: f64,
) -> Result<AdaptedGraph<'g>, MetaError> {
    if !(alpha >= 0.0) {
        return Err(MetaError::NegativeStepSize(alpha));
    }
    let z_var = g.leaf(z.tensor().clone());
    let z_rows = z_var.broadcast(pre.rows(), z.dim());
    let loss = inner_loss_graph(g, net, beta, z_rows, pre, targets, dice);
    let grads = g.grad(loss, &[z_var, z_rows])?;
    let z_prime = z_var - grads[0].scale(alpha);
    Ok(AdaptedGraph { z: z_var, loss, z_prime, row_grads: grads[1] })
}

/// Adapted latent `z' = z - alpha * grad_z L` for one task.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedLatent {
    pub z_prime: Tensor,
    pub inner_loss: f64,
    /// `grad_z (M(s_t, a_t, z) - target_t)^2` at the pre-update `z`, one row
    /// per pre-update transition.
    pub row_grads: Tensor,
}

/// Value-level inner step. With `dice` on, the loss is DICE-weighted; the
/// weights have forward value 1, so `z'` is identical either way.
pub fn inner_adapt(
    params: &MetaParams,
    pre: &TrajectoryBatch,
    targets: &[f64],
    alpha: f64,
    dice: bool,
) -> Result<AdaptedLatent, MetaError> {
    let g = Graph::new();
    let beta = params.supervision.params.register(&g);
    let phi = dice.then(|| params.explore.params.register(&g));
    let dice_arg = phi.as_deref().map(|p| (&params.explore, p));
    let adapted = inner_adapt_graph(&g, &params.supervision, &beta, dice_arg, &params.z, pre, targets, alpha)?;
    // the loss averages over trajectories; undo that for per-transition gradients
    let row_grads = adapted.row_grads.value().scale(pre.n_traj as f64);
    Ok(AdaptedLatent { z_prime: (*adapted.z_prime.value()).clone(), inner_loss: adapted.loss.item(), row_grads })
}
