//! Outer objectives for the exploitation policy and the supervision net.

use alloc::vec::Vec;

use super::inner::{dice_weights, inner_adapt_graph};
use super::{MetaError, MetaParams};
use crate::envs::TrajectoryBatch;
use crate::grad::{Graph, Var};
use crate::surrogate::{clipped_surrogate, column};
use crate::tensor::Tensor;

/// Bound on the cumulative log importance weight of a pre-update prefix.
pub const IS_LOG_CLIP: f64 = 5.0;

/// Clipped surrogate of the post-update policy `pi_{theta, z'}` where `z'`
/// is rebuilt from `beta` (and `phi`, when given, through DICE weights) so the
/// backward pass reaches both through the inner step.
#[allow(clippy::too_many_arguments)]
pub fn theta_beta_surrogate<'g>(
    g: &'g Graph,
    params: &MetaParams,
    theta: &[Var<'g>],
    beta: &[Var<'g>],
    phi: Option<&[Var<'g>]>,
    pre: &TrajectoryBatch,
    targets: &[f64],
    post: &TrajectoryBatch,
    advantages: &[f64],
    alpha: f64,
    eps: f64,
) -> Result<Var<'g>, MetaError> {
    let dice = phi.map(|p| (&params.explore, p));
    let adapted = inner_adapt_graph(g, &params.supervision, beta, dice, &params.z, pre, targets, alpha)?;
    let input = params.exploit.input_graph(g.constant(post.states.clone()), Some(adapted.z_prime));
    let logp = params.exploit.log_prob_graph(theta, input, g.constant(post.actions.clone()));
    Ok(clipped_surrogate(logp, &post.log_probs, advantages, eps))
}

/// Importance-sampled policy-gradient objective for adapting `theta` on rows
/// drawn by `mu`, averaged over transitions:
/// `mean_t box(sum_{t' <= t} log mu) w_t A_t`, with
/// `w_t = exp(clip(sum_{t' <= t} log pi - log mu))` and the `mu` term inside
/// `w_t` held fixed.
pub fn importance_inner_objective<'g>(
    g: &'g Graph,
    params: &MetaParams,
    theta: &[Var<'g>],
    phi: &[Var<'g>],
    pre: &TrajectoryBatch,
    advantages: &[f64],
) -> Var<'g> {
    let (n, h) = (pre.n_traj, pre.horizon);
    let zeros = g.constant(Tensor::zeros(1, params.exploit.z_dim));
    let input = params.exploit.input_graph(g.constant(pre.states.clone()), Some(zeros));
    let logp = params.exploit.log_prob_graph(theta, input, g.constant(pre.actions.clone()));
    let diff = logp - column(g, &pre.log_probs);
    let upper = g.constant(Tensor::upper_ones(h));
    let log_w = diff.reshape(n, h).matmul(upper).clip(-IS_LOG_CLIP, IS_LOG_CLIP).reshape(n * h, 1);
    let weighted = dice_weights(g, &params.explore, phi, pre) * log_w.exp() * column(g, advantages);
    weighted.mean()
}

/// `theta + alpha * grad_theta J` as graph nodes.
pub(crate) fn ascend<'g>(g: &'g Graph, theta: &[Var<'g>], objective: Var<'g>, alpha: f64) -> Result<Vec<Var<'g>>, MetaError> {
    let grads = g.grad(objective, theta)?;
    Ok(theta.iter().zip(grads).map(|(&p, d)| p + d.scale(alpha)).collect())
}
