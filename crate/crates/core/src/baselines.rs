//! Single-policy meta-learners with a policy-gradient inner step: MAML-VPG,
//! E-MAML and ProMP, plus a per-task PPO agent used as an upper reference.

use alloc::vec;
use alloc::vec::Vec;

use crate::config::{Algorithm, Config};
use crate::envs::{rollout, sample_tasks, PolicyActor, Role, Task, TrajectoryBatch, ACT_DIM, OBS_DIM};
use crate::exec::{stream_rng, Executor, Stream};
use crate::grad::{Graph, ParamSet, Var};
use crate::meta::{batch_advantages, IterationMetrics, MetaError};
use crate::meta::{check_finite, flat_norm, mean_gradients, negated, normalize_jointly, values};
use crate::nets::GaussianPolicy;
use crate::optim::Adam;
use crate::returns::{mean, normalize};
use crate::surrogate::{clipped_surrogate, column, score_surrogate};
use crate::tensor::Tensor;

/// Weighting of the inner policy-gradient surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerSurrogate {
    /// Causal product of per-step ratios, `box(sum_{t' <= t} log pi)`.
    Dice,
    /// Per-step ratio `pi / pi_old` with no product over the prefix.
    Lvc,
}

/// Inner objective `mean_t w_t A_t` over the rows of `pre`, averaged over
/// transitions. `Lvc` takes its ratio against the log-probabilities stored in
/// the batch, so it stays an importance weight after `theta` moves.
pub fn inner_objective<'g>(
    g: &'g Graph,
    policy: &GaussianPolicy,
    theta: &[Var<'g>],
    pre: &TrajectoryBatch,
    advantages: &[f64],
    kind: InnerSurrogate,
) -> Var<'g> {
    let input = policy.input_graph(g.constant(pre.states.clone()), None);
    let logp = policy.log_prob_graph(theta, input, g.constant(pre.actions.clone()));
    let weights = match kind {
        InnerSurrogate::Dice => logp
            .reshape(pre.n_traj, pre.horizon)
            .matmul(g.constant(Tensor::upper_ones(pre.horizon)))
            .magic_box()
            .reshape(pre.rows(), 1),
        InnerSurrogate::Lvc => (logp - column(g, &pre.log_probs)).exp(),
    };
    (weights * column(g, advantages)).mean()
}

/// `theta' = theta + alpha * grad J_inner`, kept differentiable in `theta`.
pub fn maml_inner_adapt_graph<'g>(
    g: &'g Graph,
    policy: &GaussianPolicy,
    theta: &[Var<'g>],
    pre: &TrajectoryBatch,
    advantages: &[f64],
    alpha: f64,
    kind: InnerSurrogate,
) -> Result<Vec<Var<'g>>, MetaError> {
    if !(alpha >= 0.0) {
        return Err(MetaError::NegativeStepSize(alpha));
    }
    let objective = inner_objective(g, policy, theta, pre, advantages, kind);
    let grads = g.grad(objective, theta)?;
    Ok(theta.iter().zip(grads).map(|(&p, d)| p + d.scale(alpha)).collect())
}

/// Value-level inner step.
pub fn maml_inner_adapt(
    policy: &GaussianPolicy,
    pre: &TrajectoryBatch,
    advantages: &[f64],
    alpha: f64,
    kind: InnerSurrogate,
) -> Result<ParamSet, MetaError> {
    let g = Graph::new();
    let theta = policy.params.register(&g);
    let adapted = values(&maml_inner_adapt_graph(&g, policy, &theta, pre, advantages, alpha, kind)?);
    check_finite(&adapted, "inner policy")?;
    let mut set = policy.params.clone();
    set.tensors_mut().clone_from_slice(&adapted);
    Ok(set)
}

/// Policy and optimizer of a single-policy learner.
#[derive(Clone, Debug)]
pub struct SinglePolicyMetaParams {
    pub policy: GaussianPolicy,
    pub optimizer: Adam,
}

impl SinglePolicyMetaParams {
    pub fn init(config: &Config) -> Self {
        let policy = GaussianPolicy::new(OBS_DIM, 0, ACT_DIM, &config.hidden, &mut stream_rng(config.seed, 0, 0, Stream::Init));
        let optimizer = Adam::new(config.outer_lr, &policy.params);
        Self { policy, optimizer }
    }
}

struct TaskData {
    pre: TrajectoryBatch,
    post: TrajectoryBatch,
    pre_adv: Vec<f64>,
    post_adv: Vec<f64>,
    /// Mean discounted return of the post batch, one entry per pre row.
    post_credit: Vec<f64>,
}

/// MAML-VPG, E-MAML or ProMP, chosen by `config.algorithm`.
#[derive(Clone, Debug)]
pub struct BaselineLearner {
    pub config: Config,
    pub params: SinglePolicyMetaParams,
    iteration: u64,
}

impl BaselineLearner {
    pub fn new(config: Config) -> Result<Self, MetaError> {
        config.validate()?;
        if config.algorithm == Algorithm::Ours {
            return Err(MetaError::Config(crate::config::ConfigError::Invalid {
                field: "algorithm",
                reason: "baseline learner needs maml_vpg, emaml or promp".into(),
            }));
        }
        let params = SinglePolicyMetaParams::init(&config);
        Ok(Self { config, params, iteration: 0 })
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Same task stream as the main learner for a given seed.
    pub fn tasks(&self, iteration: u64) -> Result<Vec<Task>, MetaError> {
        let mut rng = stream_rng(self.config.seed, iteration, 0, Stream::Tasks);
        Ok(sample_tasks(self.config.env, self.config.meta_batch, &mut rng)?)
    }

    fn inner_kind(&self) -> InnerSurrogate {
        match self.config.algorithm {
            Algorithm::Promp => InnerSurrogate::Lvc,
            _ => InnerSurrogate::Dice,
        }
    }

    pub fn step<E: Executor>(&mut self, exec: &E) -> Result<IterationMetrics, MetaError> {
        let it = self.iteration;
        let tasks = self.tasks(it)?;
        let mut data = exec.map(tasks.len(), |i| self.collect(it, i as u64, tasks[i])).into_iter().collect::<Result<Vec<_>, _>>()?;
        if self.config.normalize_advantages {
            normalize_jointly(data.iter_mut().map(|d| &mut d.post_adv));
            normalize_jointly(data.iter_mut().map(|d| &mut d.post_credit));
        }
        let n = data.len() as f64;
        let mut metrics = IterationMetrics {
            iteration: it,
            pre_return_mean: data.iter().map(|d| d.pre.mean_return()).sum::<f64>() / n,
            post_return_mean: data.iter().map(|d| d.post.mean_return()).sum::<f64>() / n,
            inner_loss: 0.0,
            phi_grad_norm: 0.0,
            theta_grad_norm: 0.0,
            phi_grad_rel_var: 0.0,
            wall_time_s: 0.0,
        };
        let epochs = if self.config.algorithm == Algorithm::Promp { self.config.outer_epochs } else { 1 };
        for epoch in 0..epochs {
            let per_task = exec.map(data.len(), |i| self.task_gradient(&data[i])).into_iter().collect::<Result<Vec<_>, _>>()?;
            let grad = mean_gradients(&per_task);
            if epoch == 0 {
                metrics.theta_grad_norm = flat_norm(&grad);
            }
            self.params.optimizer.step(&mut self.params.policy.params, &negated(&grad));
        }
        self.iteration += 1;
        Ok(metrics)
    }

    fn collect(&self, it: u64, index: u64, task: Task) -> Result<TaskData, MetaError> {
        let c = &self.config;
        let policy = &self.params.policy;
        let actor = PolicyActor { policy, z: None };
        let pre = rollout(&actor, task, c.horizon, c.n_pre_traj, Role::PreUpdate, &mut stream_rng(c.seed, it, index, Stream::PreRollout))?;
        let mut pre_adv = batch_advantages(&pre, c.gamma, c.gae_lambda);
        if c.normalize_advantages {
            normalize(&mut pre_adv);
        }
        let adapted = policy.with_params(maml_inner_adapt(policy, &pre, &pre_adv, c.inner_lr, self.inner_kind())?);
        let actor = PolicyActor { policy: &adapted, z: None };
        let post = rollout(&actor, task, c.horizon, c.n_post_traj, Role::PostUpdate, &mut stream_rng(c.seed, it, index, Stream::PostRollout))?;
        let post_adv = batch_advantages(&post, c.gamma, c.gae_lambda);
        let post_credit = match c.algorithm {
            Algorithm::Emaml => vec![mean(&post.discounted_returns(c.gamma)); pre.rows()],
            _ => Vec::new(),
        };
        Ok(TaskData { pre, post, pre_adv, post_adv, post_credit })
    }

    fn task_gradient(&self, d: &TaskData) -> Result<Vec<Tensor>, MetaError> {
        let c = &self.config;
        let policy = &self.params.policy;
        let g = Graph::new();
        let theta = policy.params.register(&g);
        let adapted = maml_inner_adapt_graph(&g, policy, &theta, &d.pre, &d.pre_adv, c.inner_lr, self.inner_kind())?;
        let input = policy.input_graph(g.constant(d.post.states.clone()), None);
        let logp = policy.log_prob_graph(&adapted, input, g.constant(d.post.actions.clone()));
        let objective = match c.algorithm {
            Algorithm::Promp => clipped_surrogate(logp, &d.post.log_probs, &d.post_adv, c.clip_eps),
            Algorithm::MamlVpg => score_surrogate(logp, &d.post_adv, 1.0 / d.post.rows() as f64),
            Algorithm::Emaml => {
                score_surrogate(logp, &d.post_adv, 1.0 / d.post.rows() as f64)
                    + exploration_term(&g, policy, &theta, &d.pre, &d.post_credit)
            }
            Algorithm::Ours => unreachable!("rejected in new"),
        };
        let grads = values(&g.grad(objective, &theta)?);
        check_finite(&grads, "policy")?;
        Ok(grads)
    }
}

/// Non-causal credit for the pre-update policy:
/// `mean_t log pi_theta(a_t | s_t) * credit_t` over the pre rows.
pub fn exploration_term<'g>(
    g: &'g Graph,
    policy: &GaussianPolicy,
    theta: &[Var<'g>],
    pre: &TrajectoryBatch,
    credit: &[f64],
) -> Var<'g> {
    let input = policy.input_graph(g.constant(pre.states.clone()), None);
    let logp = policy.log_prob_graph(theta, input, g.constant(pre.actions.clone()));
    score_surrogate(logp, credit, 1.0 / pre.rows() as f64)
}

/// Undiscounted mean return per iteration of a PPO agent trained on a single
/// task with the meta-learners' architecture and batch settings.
pub fn train_oracle(config: &Config, task: Task, iterations: usize, task_index: u64) -> Result<Vec<f64>, MetaError> {
    config.validate()?;
    let c = config;
    let mut policy = GaussianPolicy::new(OBS_DIM, 0, ACT_DIM, &c.hidden, &mut stream_rng(c.seed, 0, task_index, Stream::Init));
    let mut opt = Adam::new(c.outer_lr, &policy.params);
    let mut curve = Vec::with_capacity(iterations);
    for it in 0..iterations as u64 {
        let actor = PolicyActor { policy: &policy, z: None };
        let mut rng = stream_rng(c.seed, it, task_index, Stream::Eval);
        let batch = rollout(&actor, task, c.horizon, c.n_post_traj, Role::PostUpdate, &mut rng)?;
        curve.push(batch.mean_return());
        let mut adv = batch_advantages(&batch, c.gamma, c.gae_lambda);
        if c.normalize_advantages {
            normalize(&mut adv);
        }
        for _ in 0..c.outer_epochs {
            let g = Graph::new();
            let theta = policy.params.register(&g);
            let input = policy.input_graph(g.constant(batch.states.clone()), None);
            let logp = policy.log_prob_graph(&theta, input, g.constant(batch.actions.clone()));
            let s = clipped_surrogate(logp, &batch.log_probs, &adv, c.clip_eps);
            let grads = values(&g.grad(s, &theta)?);
            check_finite(&grads, "oracle policy")?;
            opt.step(&mut policy.params, &negated(&grads));
        }
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::Family;
    use crate::exec::Sequential;
    use crate::grad::finite_diff_check;
    use crate::meta::testutil::{rel_err, relabel, tiny_batch};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny_config(algorithm: Algorithm) -> Config {
        Config {
            env: Family::Dense,
            algorithm,
            horizon: 6,
            hidden: vec![4],
            meta_batch: 2,
            n_pre_traj: 3,
            n_post_traj: 3,
            outer_epochs: 2,
            ..Config::default()
        }
    }

    fn tiny_policy(seed: u64) -> GaussianPolicy {
        GaussianPolicy::new(OBS_DIM, 0, ACT_DIM, &[3], &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn sampled_batch(seed: u64, policy: &GaussianPolicy, n: usize, h: usize) -> (TrajectoryBatch, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pre = tiny_batch(&mut rng, n, h);
        relabel(&mut pre, policy, None);
        let adv = (0..pre.rows()).map(|i| libm::sin(1.0 + i as f64 * 0.7)).collect();
        (pre, adv)
    }

    #[test]
    fn trivial_inner_steps_keep_parameters() {
        let policy = tiny_policy(1);
        let (pre, adv) = sampled_batch(1, &policy, 2, 4);
        for kind in [InnerSurrogate::Dice, InnerSurrogate::Lvc] {
            assert_eq!(maml_inner_adapt(&policy, &pre, &adv, 0.0, kind).unwrap(), policy.params);
            let zeros = vec![0.0; adv.len()];
            assert_eq!(maml_inner_adapt(&policy, &pre, &zeros, 0.3, kind).unwrap(), policy.params);
        }
        assert!(matches!(
            maml_inner_adapt(&policy, &pre, &adv, -1.0, InnerSurrogate::Dice),
            Err(MetaError::NegativeStepSize(_))
        ));
    }

    /// Importance-weighted inner objective whose value, not only its
    /// derivatives, moves with `theta`; it agrees with `Dice` to second order
    /// at the sampling point.
    fn weighted_objective<'g>(g: &'g Graph, policy: &GaussianPolicy, theta: &[Var<'g>], pre: &TrajectoryBatch, adv: &[f64]) -> Var<'g> {
        let input = policy.input_graph(g.constant(pre.states.clone()), None);
        let logp = policy.log_prob_graph(theta, input, g.constant(pre.actions.clone()));
        let w = (logp - column(g, &pre.log_probs))
            .reshape(pre.n_traj, pre.horizon)
            .matmul(g.constant(Tensor::upper_ones(pre.horizon)))
            .exp()
            .reshape(pre.rows(), 1);
        (w * column(g, adv)).mean()
    }

    #[allow(clippy::too_many_arguments)]
    fn outer_after_step<'g>(
        g: &'g Graph,
        policy: &GaussianPolicy,
        theta: &[Var<'g>],
        pre: &TrajectoryBatch,
        adv: &[f64],
        post: &TrajectoryBatch,
        post_adv: &[f64],
        alpha: f64,
        kind: InnerSurrogate,
        exact: bool,
    ) -> Var<'g> {
        let adapted = if exact && kind == InnerSurrogate::Dice {
            let j = weighted_objective(g, policy, theta, pre, adv);
            let d = g.grad(j, theta).unwrap();
            theta.iter().zip(d).map(|(&p, d)| p + d.scale(alpha)).collect()
        } else {
            maml_inner_adapt_graph(g, policy, theta, pre, adv, alpha, kind).unwrap()
        };
        let input = policy.input_graph(g.constant(post.states.clone()), None);
        let logp = policy.log_prob_graph(&adapted, input, g.constant(post.actions.clone()));
        clipped_surrogate(logp, &post.log_probs, post_adv, 10.0)
    }

    #[test]
    fn gradient_through_adaptation_matches_finite_differences() {
        for (seed, kind) in [(2, InnerSurrogate::Dice), (3, InnerSurrogate::Lvc), (4, InnerSurrogate::Dice)] {
            let policy = tiny_policy(seed);
            let (pre, adv) = sampled_batch(seed, &policy, 2, 3);
            let (post, post_adv) = sampled_batch(seed + 100, &policy, 2, 3);
            let alpha = 0.5;
            // finite differences need an objective whose value tracks theta
            let err = finite_diff_check(|g, theta| outer_after_step(g, &policy, theta, &pre, &adv, &post, &post_adv, alpha, kind, true), &policy.params, 1e-5).unwrap();
            assert!(err < 1e-4, "seed {seed}: {err}");
            let grad_of = |exact| {
                let g = Graph::new();
                let theta = policy.params.register(&g);
                let s = outer_after_step(&g, &policy, &theta, &pre, &adv, &post, &post_adv, alpha, kind, exact);
                values(&g.grad(s, &theta).unwrap()).iter().flat_map(|t| t.data().to_vec()).collect::<Vec<f64>>()
            };
            assert!(rel_err(&grad_of(false), &grad_of(true)) < 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn inner_surrogates_share_the_first_order_step() {
        let policy = tiny_policy(5);
        let (pre, adv) = sampled_batch(5, &policy, 3, 4);
        let dice = maml_inner_adapt(&policy, &pre, &adv, 0.2, InnerSurrogate::Dice).unwrap();
        let lvc = maml_inner_adapt(&policy, &pre, &adv, 0.2, InnerSurrogate::Lvc).unwrap();
        // causal DICE credits every earlier step, so the two agree only with one step per trajectory
        assert_ne!(dice, lvc);
        let (pre1, adv1) = sampled_batch(6, &policy, 5, 1);
        let dice = maml_inner_adapt(&policy, &pre1, &adv1, 0.2, InnerSurrogate::Dice).unwrap();
        let lvc = maml_inner_adapt(&policy, &pre1, &adv1, 0.2, InnerSurrogate::Lvc).unwrap();
        assert!(rel_err(&dice.flatten(), &lvc.flatten()) < 1e-12);
    }

    #[test]
    fn zero_step_baselines_agree_with_plain_policy_gradient() {
        let run = |algorithm| {
            let cfg = Config { inner_lr: 0.0, outer_epochs: 1, ..tiny_config(algorithm) };
            let mut l = BaselineLearner::new(cfg).unwrap();
            for _ in 0..3 {
                l.step(&Sequential).unwrap();
            }
            l.params.policy.params.flatten()
        };
        let maml = run(Algorithm::MamlVpg);
        let promp = run(Algorithm::Promp);
        assert!(rel_err(&maml, &promp) < 1e-10);

        // one hand-rolled vanilla policy-gradient step
        let cfg = Config { inner_lr: 0.0, ..tiny_config(Algorithm::MamlVpg) };
        let mut l = BaselineLearner::new(cfg.clone()).unwrap();
        let tasks = l.tasks(0).unwrap();
        let mut posts = Vec::new();
        let mut advs = Vec::new();
        for (i, &task) in tasks.iter().enumerate() {
            let actor = PolicyActor { policy: &l.params.policy, z: None };
            let mut rng = stream_rng(cfg.seed, 0, i as u64, Stream::PostRollout);
            let post = rollout(&actor, task, cfg.horizon, cfg.n_post_traj, Role::PostUpdate, &mut rng).unwrap();
            advs.push(batch_advantages(&post, cfg.gamma, cfg.gae_lambda));
            posts.push(post);
        }
        normalize_jointly(advs.iter_mut());
        let per_task: Vec<Vec<Tensor>> = posts
            .iter()
            .zip(&advs)
            .map(|(post, adv)| {
                let g = Graph::new();
                let theta = l.params.policy.params.register(&g);
                let input = l.params.policy.input_graph(g.constant(post.states.clone()), None);
                let logp = l.params.policy.log_prob_graph(&theta, input, g.constant(post.actions.clone()));
                values(&g.grad(score_surrogate(logp, adv, 1.0 / post.rows() as f64), &theta).unwrap())
            })
            .collect();
        let mut expected = l.params.clone();
        expected.optimizer.step(&mut expected.policy.params, &negated(&mean_gradients(&per_task)));
        l.step(&Sequential).unwrap();
        assert!(rel_err(&l.params.policy.params.flatten(), &expected.policy.params.flatten()) < 1e-12);
    }

    #[test]
    fn emaml_is_maml_plus_exploration_term() {
        let cfg = tiny_config(Algorithm::Emaml);
        let emaml = BaselineLearner::new(cfg.clone()).unwrap();
        let maml = BaselineLearner::new(Config { algorithm: Algorithm::MamlVpg, ..cfg }).unwrap();
        let task = emaml.tasks(0).unwrap()[0];
        let mut d = emaml.collect(0, 0, task).unwrap();
        let m = maml.collect(0, 0, task).unwrap();
        assert_eq!(d.post.actions, m.post.actions);
        normalize(&mut d.post_adv);
        let full = emaml.task_gradient(&d).unwrap();
        let base = maml.task_gradient(&d).unwrap();
        let g = Graph::new();
        let theta = emaml.params.policy.params.register(&g);
        let extra = values(&g.grad(exploration_term(&g, &emaml.params.policy, &theta, &d.pre, &d.post_credit), &theta).unwrap());
        let sum: Vec<f64> = base.iter().zip(&extra).flat_map(|(a, b)| a.add(b).into_vec()).collect();
        let full: Vec<f64> = full.iter().flat_map(|t| t.data().to_vec()).collect();
        assert!(rel_err(&full, &sum) < 1e-12);

        // zero post returns remove the extra term
        d.post_credit.iter_mut().for_each(|c| *c = 0.0);
        let full = emaml.task_gradient(&d).unwrap();
        assert_eq!(full, base);
    }

    #[test]
    fn exploration_term_estimates_the_return_gradient() {
        // one-step trajectories from a bias-only policy; R = -|a - c|^2 has
        // E[R] = -|b - c|^2 - 2 sigma^2, so dE/db = -2 (b - c)
        let mut policy = GaussianPolicy::new(OBS_DIM, 0, ACT_DIM, &[], &mut ChaCha8Rng::seed_from_u64(7));
        let b = [0.3, -0.5];
        let c = [1.0, 0.25];
        policy.params.tensors_mut()[0] = Tensor::zeros(OBS_DIM, ACT_DIM);
        policy.params.tensors_mut()[1] = Tensor::from_vec(1, 2, b.to_vec());
        let n = 40_000;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let states = Tensor::zeros(n, OBS_DIM);
        let (actions, log_probs) = policy.sample(&policy.input(&states, None), &mut rng);
        let rewards: Vec<f64> =
            (0..n).map(|i| -(0..2).map(|k| (actions.get(i, k) - c[k]) * (actions.get(i, k) - c[k])).sum::<f64>()).collect();
        let batch = TrajectoryBatch {
            task: Task::new(Family::Dense, c),
            role: Role::PreUpdate,
            horizon: 1,
            n_traj: n,
            next_states: states.clone(),
            states,
            actions,
            rewards: rewards.clone(),
            log_probs: log_probs.into_vec(),
        };
        let g = Graph::new();
        let theta = policy.params.register(&g);
        let grads = g.grad(exploration_term(&g, &policy, &theta, &batch, &rewards), &theta).unwrap();
        let db = grads[1].value();
        for k in 0..2 {
            let exact = -2.0 * (b[k] - c[k]);
            assert!((db.get(0, k) - exact).abs() < 0.1 * exact.abs(), "{k}: {} vs {exact}", db.get(0, k));
        }
    }

    #[test]
    fn baselines_are_deterministic_and_train() {
        for algorithm in [Algorithm::MamlVpg, Algorithm::Emaml, Algorithm::Promp] {
            let run = || {
                let mut l = BaselineLearner::new(tiny_config(algorithm)).unwrap();
                let m: Vec<IterationMetrics> = (0..2).map(|_| l.step(&Sequential).unwrap()).collect();
                (m, l.params.policy.params)
            };
            let (m1, p1) = run();
            let (m2, p2) = run();
            assert_eq!(m1, m2);
            assert_eq!(p1, p2);
            assert!(m1[0].theta_grad_norm > 0.0);
            assert_ne!(p1, BaselineLearner::new(tiny_config(algorithm)).unwrap().params.policy.params);
        }
        assert!(BaselineLearner::new(tiny_config(Algorithm::Ours)).is_err());
    }

    #[test]
    fn oracle_is_seeded() {
        let cfg = tiny_config(Algorithm::MamlVpg);
        let task = Task::new(Family::Dense, [1.0, 1.0]);
        let a = train_oracle(&cfg, task, 3, 0).unwrap();
        assert_eq!(a, train_oracle(&cfg, task, 3, 0).unwrap());
        assert_eq!(a.len(), 3);
    }
}
