//! One meta-iteration: rollouts and inner steps per task, credit for the
//! exploration policy, then several clipped outer epochs.

use alloc::vec;
use alloc::vec::Vec;
use core::slice;

use super::credit::{exploration_rewards, fit_mu_baseline, phi_surrogate};
use super::inner::{batch_targets, inner_adapt};
use super::outer::{ascend, importance_inner_objective, theta_beta_surrogate};
use super::{flat_norm, MetaError, MetaParams};
use crate::config::{Config, InnerUpdate, PhiEstimator};
use crate::envs::{rollout, sample_tasks, PolicyActor, Role, Task, TrajectoryBatch};
use crate::exec::{stream_rng, Executor, Stream};
use crate::grad::{Graph, ParamSet, Var};
use crate::optim::Adam;
use crate::returns::{gae, mean, normalize, reward_to_go, LinearFeatureBaseline};
use crate::surrogate::clipped_surrogate;
use crate::tensor::Tensor;

/// Per-iteration summary written to the run log.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationMetrics {
    pub iteration: u64,
    pub pre_return_mean: f64,
    pub post_return_mean: f64,
    pub inner_loss: f64,
    pub phi_grad_norm: f64,
    pub theta_grad_norm: f64,
    /// Mean squared deviation of the per-task exploration gradients from
    /// their average, over the squared norm of the average. Taken before the
    /// first outer epoch.
    pub phi_grad_rel_var: f64,
    pub wall_time_s: f64,
}

/// GAE advantages with a linear baseline fitted to the batch's own
/// discounted returns.
pub fn batch_advantages(batch: &TrajectoryBatch, gamma: f64, lambda: f64) -> Vec<f64> {
    let targets = reward_to_go(&batch.rewards, batch.horizon, gamma);
    let values = LinearFeatureBaseline::fit(&batch.states, batch.horizon, &targets).predict(&batch.states, batch.horizon);
    gae(&batch.rewards, &values, batch.horizon, gamma, lambda)
}

/// `sum_i |g_i - mean|^2 / n` over `|mean|^2`.
pub fn relative_variance(per_task: &[Vec<f64>]) -> f64 {
    let n = per_task.len();
    if n == 0 {
        return 0.0;
    }
    let dim = per_task[0].len();
    let mut m = vec![0.0; dim];
    for g in per_task {
        for (a, b) in m.iter_mut().zip(g) {
            *a += b / n as f64;
        }
    }
    let spread: f64 = per_task.iter().map(|g| g.iter().zip(&m).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).sum::<f64>() / n as f64;
    let norm: f64 = m.iter().map(|x| x * x).sum();
    if norm == 0.0 {
        if spread == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        spread / norm
    }
}

pub(crate) fn mean_gradients(per_task: &[Vec<Tensor>]) -> Vec<Tensor> {
    let n = per_task.len() as f64;
    let mut acc: Vec<Tensor> = per_task[0].iter().map(|t| Tensor::zeros(t.rows(), t.cols())).collect();
    for grads in per_task {
        for (a, g) in acc.iter_mut().zip(grads) {
            a.add_assign(g);
        }
    }
    acc.iter().map(|t| t.scale(1.0 / n)).collect()
}

pub(crate) fn flatten(grads: &[Tensor]) -> Vec<f64> {
    grads.iter().flat_map(|t| t.data().iter().copied()).collect()
}

pub(crate) fn negated(grads: &[Tensor]) -> Vec<Tensor> {
    grads.iter().map(|t| t.scale(-1.0)).collect()
}

pub(crate) fn values(vars: &[Var]) -> Vec<Tensor> {
    vars.iter().map(|v| (*v.value()).clone()).collect()
}

pub(crate) fn check_finite(grads: &[Tensor], group: &'static str) -> Result<(), MetaError> {
    if grads.iter().all(Tensor::is_finite) {
        Ok(())
    } else {
        Err(MetaError::NonFinite(group))
    }
}

struct TaskData {
    pre: TrajectoryBatch,
    post: TrajectoryBatch,
    targets: Vec<f64>,
    inner_loss: f64,
    /// Advantages of the pre-update rows for the importance-sampled inner step.
    pre_adv: Vec<f64>,
    post_adv: Vec<f64>,
    /// Advantages for the exploration surrogate; empty when the exploration
    /// gradient comes from the outer graph.
    phi_adv: Vec<f64>,
}

struct TaskGrads {
    theta: Vec<Tensor>,
    beta: Option<Vec<Tensor>>,
    phi: Vec<Tensor>,
}

/// Parameters, optimizers and iteration counter of one training run.
#[derive(Clone, Debug)]
pub struct MetaLearner {
    pub config: Config,
    pub params: MetaParams,
    opt_theta: Adam,
    opt_phi: Adam,
    opt_beta: Adam,
    iteration: u64,
}

impl MetaLearner {
    pub fn new(config: Config) -> Result<Self, MetaError> {
        config.validate()?;
        let params = MetaParams::init(&config, &mut stream_rng(config.seed, 0, 0, Stream::Init));
        let opt_theta = Adam::new(config.outer_lr, &params.exploit.params);
        let opt_phi = Adam::new(config.outer_lr, &params.explore.params);
        let opt_beta = Adam::new(config.outer_lr, &params.supervision.params);
        Ok(Self { config, params, opt_theta, opt_phi, opt_beta, iteration: 0 })
    }

    /// Iterations completed so far.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// The task batch of a given iteration; a pure function of the seed.
    pub fn tasks(&self, iteration: u64) -> Result<Vec<Task>, MetaError> {
        let mut rng = stream_rng(self.config.seed, iteration, 0, Stream::Tasks);
        Ok(sample_tasks(self.config.env, self.config.meta_batch, &mut rng)?)
    }

    pub fn step<E: Executor>(&mut self, exec: &E) -> Result<IterationMetrics, MetaError> {
        debug_assert!(self.params.z.tensor().data().iter().all(|&v| v == 0.0));
        let it = self.iteration;
        let tasks = self.tasks(it)?;
        let mut data = exec.map(tasks.len(), |i| self.collect(it, i as u64, tasks[i])).into_iter().collect::<Result<Vec<_>, _>>()?;

        if self.config.normalize_advantages {
            normalize_jointly(data.iter_mut().map(|d| &mut d.post_adv));
            normalize_jointly(data.iter_mut().map(|d| &mut d.phi_adv));
        }

        let n = data.len() as f64;
        let mut metrics = IterationMetrics {
            iteration: it,
            pre_return_mean: data.iter().map(|d| d.pre.mean_return()).sum::<f64>() / n,
            post_return_mean: data.iter().map(|d| d.post.mean_return()).sum::<f64>() / n,
            inner_loss: data.iter().map(|d| d.inner_loss).sum::<f64>() / n,
            phi_grad_norm: 0.0,
            theta_grad_norm: 0.0,
            phi_grad_rel_var: 0.0,
            wall_time_s: 0.0,
        };

        for epoch in 0..self.config.outer_epochs {
            let per_task = exec.map(data.len(), |i| self.task_gradients(&data[i])).into_iter().collect::<Result<Vec<_>, _>>()?;
            let theta: Vec<Vec<Tensor>> = per_task.iter().map(|g| g.theta.clone()).collect();
            let phi: Vec<Vec<Tensor>> = per_task.iter().map(|g| g.phi.clone()).collect();
            let theta = mean_gradients(&theta);
            let phi_mean = mean_gradients(&phi);
            if epoch == 0 {
                metrics.theta_grad_norm = flat_norm(&theta);
                metrics.phi_grad_norm = flat_norm(&phi_mean);
                let flat: Vec<Vec<f64>> = phi.iter().map(|g| flatten(g)).collect();
                metrics.phi_grad_rel_var = relative_variance(&flat);
            }
            self.opt_theta.step(&mut self.params.exploit.params, &negated(&theta));
            self.opt_phi.step(&mut self.params.explore.params, &negated(&phi_mean));
            if per_task[0].beta.is_some() {
                let beta: Vec<Vec<Tensor>> = per_task.iter().map(|g| g.beta.clone().unwrap_or_default()).collect();
                self.opt_beta.step(&mut self.params.supervision.params, &negated(&mean_gradients(&beta)));
            }
        }
        // drop the per-task data before the next iteration
        data.clear();
        self.iteration += 1;
        Ok(metrics)
    }

    fn collect(&self, it: u64, index: u64, task: Task) -> Result<TaskData, MetaError> {
        let c = &self.config;
        let p = &self.params;
        let explorer = PolicyActor { policy: &p.explore, z: None };
        let pre = rollout(&explorer, task, c.horizon, c.n_pre_traj, Role::PreUpdate, &mut stream_rng(c.seed, it, index, Stream::PreRollout))?;
        let targets = batch_targets(&pre, c.effective_nstep());
        let mut post_rng = stream_rng(c.seed, it, index, Stream::PostRollout);
        let mut data = TaskData {
            post: pre.clone(),
            pre,
            targets,
            inner_loss: 0.0,
            pre_adv: Vec::new(),
            post_adv: Vec::new(),
            phi_adv: Vec::new(),
        };
        match c.inner_update {
            InnerUpdate::SelfSupervised => {
                let adapted = inner_adapt(p, &data.pre, &data.targets, c.inner_lr, false)?;
                let actor = PolicyActor { policy: &p.exploit, z: Some(&adapted.z_prime) };
                data.post = rollout(&actor, task, c.horizon, c.n_post_traj, Role::PostUpdate, &mut post_rng)?;
                data.inner_loss = adapted.inner_loss;
                data.phi_adv = match c.phi_estimator {
                    PhiEstimator::Lvc => {
                        let mut credit = exploration_rewards(&data.pre, &data.post, p, &adapted, c.gamma, c.center_post_returns)?;
                        fit_mu_baseline(slice::from_mut(&mut credit), &[&data.pre]);
                        credit.advantages
                    }
                    PhiEstimator::Emaml => vec![mean(&data.post.discounted_returns(c.gamma)); data.pre.rows()],
                    PhiEstimator::EnvReward => batch_advantages(&data.pre, c.gamma, c.gae_lambda),
                    PhiEstimator::VanillaDice => Vec::new(),
                };
            }
            InnerUpdate::VpgImportance => {
                data.pre_adv = batch_advantages(&data.pre, c.gamma, c.gae_lambda);
                if c.normalize_advantages {
                    normalize(&mut data.pre_adv);
                }
                let adapted = p.exploit.with_params(self.importance_adapted_theta(&data.pre, &data.pre_adv)?);
                let zeros = Tensor::zeros(1, p.exploit.z_dim);
                let actor = PolicyActor { policy: &adapted, z: Some(&zeros) };
                data.post = rollout(&actor, task, c.horizon, c.n_post_traj, Role::PostUpdate, &mut post_rng)?;
            }
        }
        data.post_adv = batch_advantages(&data.post, c.gamma, c.gae_lambda);
        Ok(data)
    }

    fn importance_adapted_theta(&self, pre: &TrajectoryBatch, pre_adv: &[f64]) -> Result<ParamSet, MetaError> {
        let g = Graph::new();
        let theta = self.params.exploit.params.register(&g);
        let phi = self.params.explore.params.register(&g);
        let objective = importance_inner_objective(&g, &self.params, &theta, &phi, pre, pre_adv);
        let adapted = values(&ascend(&g, &theta, objective, self.config.inner_lr)?);
        check_finite(&adapted, "inner policy")?;
        let mut set = self.params.exploit.params.clone();
        set.tensors_mut().clone_from_slice(&adapted);
        Ok(set)
    }

    fn task_gradients(&self, d: &TaskData) -> Result<TaskGrads, MetaError> {
        let c = &self.config;
        let p = &self.params;
        let g = Graph::new();
        let theta = p.exploit.params.register(&g);
        let phi = p.explore.params.register(&g);
        let nt = theta.len();
        let grads = match c.inner_update {
            InnerUpdate::SelfSupervised => {
                let beta = p.supervision.params.register(&g);
                let dice = c.phi_estimator == PhiEstimator::VanillaDice;
                let surrogate = theta_beta_surrogate(
                    &g,
                    p,
                    &theta,
                    &beta,
                    dice.then_some(&phi[..]),
                    &d.pre,
                    &d.targets,
                    &d.post,
                    &d.post_adv,
                    c.inner_lr,
                    c.clip_eps,
                )?;
                let mut wrt = theta.clone();
                wrt.extend_from_slice(&beta);
                let outer = values(&g.grad(surrogate, &wrt)?);
                let phi_grads = if dice {
                    values(&g.grad(surrogate, &phi)?)
                } else {
                    let s = phi_surrogate(&g, &p.explore, &phi, &d.pre, &d.phi_adv, c.clip_eps);
                    values(&g.grad(s, &phi)?)
                };
                TaskGrads { theta: outer[..nt].to_vec(), beta: Some(outer[nt..].to_vec()), phi: phi_grads }
            }
            InnerUpdate::VpgImportance => {
                let objective = importance_inner_objective(&g, p, &theta, &phi, &d.pre, &d.pre_adv);
                let adapted = ascend(&g, &theta, objective, c.inner_lr)?;
                let zeros = g.constant(Tensor::zeros(1, p.exploit.z_dim));
                let input = p.exploit.input_graph(g.constant(d.post.states.clone()), Some(zeros));
                let logp = p.exploit.log_prob_graph(&adapted, input, g.constant(d.post.actions.clone()));
                let surrogate = clipped_surrogate(logp, &d.post.log_probs, &d.post_adv, c.clip_eps);
                let mut wrt = theta.clone();
                wrt.extend_from_slice(&phi);
                let all = values(&g.grad(surrogate, &wrt)?);
                TaskGrads { theta: all[..nt].to_vec(), beta: None, phi: all[nt..].to_vec() }
            }
        };
        check_finite(&grads.theta, "policy")?;
        check_finite(&grads.phi, "exploration")?;
        if let Some(b) = &grads.beta {
            check_finite(b, "supervision")?;
        }
        Ok(grads)
    }
}

/// Normalizes the concatenation of several advantage vectors in place.
pub(crate) fn normalize_jointly<'a>(parts: impl Iterator<Item = &'a mut Vec<f64>>) {
    let mut parts: Vec<&mut Vec<f64>> = parts.collect();
    let mut all: Vec<f64> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    if all.is_empty() {
        return;
    }
    normalize(&mut all);
    let mut offset = 0;
    for p in parts.iter_mut() {
        let len = p.len();
        p.copy_from_slice(&all[offset..offset + len]);
        offset += len;
    }
}

/// Runs one iteration of `learner` on `exec`.
pub fn meta_train_step<E: Executor>(learner: &mut MetaLearner, exec: &E) -> Result<IterationMetrics, MetaError> {
    learner.step(exec)
}
