//! Credit assignment for the exploration policy.
//!
//! Differentiating the post-update objective through `z'` with respect to
//! `phi` gives `(alpha / n_pre) sum_t grad log mu(a_t | s_t) R^mu_t`, where
//! `R^mu_t` sums the per-step rewards `r^mu_t = -g_post . g^ss_t` to the end
//! of the trajectory. The sign makes `mu` ascend the post-update objective.

use alloc::vec;
use alloc::vec::Vec;

use super::inner::inner_adapt_graph;
use super::{AdaptedLatent, MetaError, MetaParams};
use crate::envs::TrajectoryBatch;
use crate::grad::{Graph, Var};
use crate::nets::GaussianPolicy;
use crate::returns::{mean, reward_to_go, LinearFeatureBaseline};
use crate::surrogate::{clipped_surrogate, score_surrogate};
use crate::tensor::Tensor;

/// Synthetic rewards for the exploration policy on one pre-update batch,
/// trajectory-major like the batch.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplorationCredit {
    pub horizon: usize,
    pub rewards: Vec<f64>,
    /// Undiscounted reward-to-go of `rewards`.
    pub returns: Vec<f64>,
    pub values: Vec<f64>,
    /// `r_t + V_{t+1} - V_t` with `V_H = 0`.
    pub advantages: Vec<f64>,
}

impl ExplorationCredit {
    /// Credit with a zero baseline.
    pub fn from_rewards(rewards: Vec<f64>, horizon: usize) -> Self {
        let returns = reward_to_go(&rewards, horizon, 1.0);
        let values = vec![0.0; rewards.len()];
        let advantages = rewards.clone();
        Self { horizon, rewards, returns, values, advantages }
    }

    pub fn set_values(&mut self, values: Vec<f64>) {
        assert_eq!(values.len(), self.rewards.len(), "one value per row");
        let h = self.horizon;
        for r in 0..values.len() {
            let next = if (r + 1) % h == 0 { 0.0 } else { values[r + 1] };
            self.advantages[r] = self.rewards[r] + next - values[r];
        }
        self.values = values;
    }
}

/// `g_post = (1 / n_post) sum_i grad_{z'} log pi(tau'_i) R_i` with `R_i` the
/// discounted return, centred by the batch mean when `center` is set.
pub fn post_latent_gradient(
    policy: &GaussianPolicy,
    post: &TrajectoryBatch,
    z_prime: &Tensor,
    gamma: f64,
    center: bool,
) -> Result<Tensor, MetaError> {
    if post.n_traj == 0 || post.horizon == 0 {
        return Err(MetaError::EmptyBatch("post-update"));
    }
    let g = Graph::new();
    let theta: Vec<Var> = policy.params.tensors().iter().map(|t| g.constant(t.clone())).collect();
    let z = g.leaf(z_prime.clone());
    let input = policy.input_graph(g.constant(post.states.clone()), Some(z));
    let logp = policy.log_prob_graph(&theta, input, g.constant(post.actions.clone()));
    let weights = row_returns(post, gamma, center);
    let objective = score_surrogate(logp, &weights, 1.0 / post.n_traj as f64);
    Ok((*g.grad(objective, &[z])?[0].value()).clone())
}

/// Each trajectory's discounted return repeated over its rows.
pub(crate) fn row_returns(batch: &TrajectoryBatch, gamma: f64, center: bool) -> Vec<f64> {
    let mut returns = batch.discounted_returns(gamma);
    if center {
        let m = mean(&returns);
        returns.iter_mut().for_each(|r| *r -= m);
    }
    returns.iter().flat_map(|&r| core::iter::repeat_n(r, batch.horizon)).collect()
}

/// Per-step exploration rewards `r^mu_t = -g_post . g^ss_t` for the
/// pre-update rows that produced `adapted`.
pub fn exploration_rewards(
    pre: &TrajectoryBatch,
    post: &TrajectoryBatch,
    params: &MetaParams,
    adapted: &AdaptedLatent,
    gamma: f64,
    center: bool,
) -> Result<ExplorationCredit, MetaError> {
    let g_post = post_latent_gradient(&params.exploit, post, &adapted.z_prime, gamma, center)?;
    assert_eq!(adapted.row_grads.rows(), pre.rows(), "adapted latent belongs to another batch");
    let rewards = (0..pre.rows())
        .map(|r| -adapted.row_grads.row_slice(r).iter().zip(g_post.data()).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    Ok(ExplorationCredit::from_rewards(rewards, pre.horizon))
}

/// Fits one linear baseline to `R^mu` over all given batches and fills in
/// values and advantages.
pub fn fit_mu_baseline(credits: &mut [ExplorationCredit], batches: &[&TrajectoryBatch]) -> LinearFeatureBaseline {
    assert_eq!(credits.len(), batches.len(), "one credit per batch");
    assert!(!batches.is_empty(), "nothing to fit");
    let horizon = batches[0].horizon;
    let mut states = batches[0].states.clone();
    for b in &batches[1..] {
        assert_eq!(b.horizon, horizon, "batches differ in horizon");
        states = states.concat_rows(&b.states);
    }
    let targets: Vec<f64> = credits.iter().flat_map(|c| c.returns.iter().copied()).collect();
    let baseline = LinearFeatureBaseline::fit(&states, horizon, &targets);
    for (c, b) in credits.iter_mut().zip(batches) {
        c.set_values(baseline.predict(&b.states, horizon));
    }
    baseline
}

/// Clipped surrogate for `mu` on its own pre-update rows; the stored
/// log-probabilities play the role of the sampling-time policy.
pub fn phi_surrogate<'g>(
    g: &'g Graph,
    explore: &GaussianPolicy,
    phi: &[Var<'g>],
    pre: &TrajectoryBatch,
    advantages: &[f64],
    eps: f64,
) -> Var<'g> {
    let input = explore.input_graph(g.constant(pre.states.clone()), None);
    let logp = explore.log_prob_graph(phi, input, g.constant(pre.actions.clone()));
    clipped_surrogate(logp, &pre.log_probs, advantages, eps)
}

/// `grad_phi` of `(1 / n_post) sum_i log pi_{z'}(tau'_i) R_i` with `z'` the
/// DICE-weighted inner step, by differentiating through the inner gradient.
#[allow(clippy::too_many_arguments)]
pub fn vanilla_dice_phi_gradient(
    params: &MetaParams,
    pre: &TrajectoryBatch,
    targets: &[f64],
    post: &TrajectoryBatch,
    alpha: f64,
    gamma: f64,
    center: bool,
) -> Result<Vec<Tensor>, MetaError> {
    if post.n_traj == 0 {
        return Err(MetaError::EmptyBatch("post-update"));
    }
    let g = Graph::new();
    let phi = params.explore.params.register(&g);
    let beta: Vec<Var> = params.supervision.params.tensors().iter().map(|t| g.constant(t.clone())).collect();
    let theta: Vec<Var> = params.exploit.params.tensors().iter().map(|t| g.constant(t.clone())).collect();
    let adapted = inner_adapt_graph(
        &g,
        &params.supervision,
        &beta,
        Some((&params.explore, &phi)),
        &params.z,
        pre,
        targets,
        alpha,
    )?;
    let input = params.exploit.input_graph(g.constant(post.states.clone()), Some(adapted.z_prime));
    let logp = params.exploit.log_prob_graph(&theta, input, g.constant(post.actions.clone()));
    let objective = score_surrogate(logp, &row_returns(post, gamma, center), 1.0 / post.n_traj as f64);
    Ok(g.grad(objective, &phi)?.iter().map(|v| (*v.value()).clone()).collect())
}

/// `(alpha / n_pre) sum_t grad_phi log mu(a_t | s_t) weights_t`.
pub fn score_function_phi_gradient(
    explore: &GaussianPolicy,
    pre: &TrajectoryBatch,
    weights: &[f64],
    alpha: f64,
) -> Result<Vec<Tensor>, MetaError> {
    let g = Graph::new();
    let phi = explore.params.register(&g);
    let input = explore.input_graph(g.constant(pre.states.clone()), None);
    let logp = explore.log_prob_graph(&phi, input, g.constant(pre.actions.clone()));
    let objective = score_surrogate(logp, weights, alpha / pre.n_traj as f64);
    Ok(g.grad(objective, &phi)?.iter().map(|v| (*v.value()).clone()).collect())
}
