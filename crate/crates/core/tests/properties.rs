use mexplore_core::audit;
use mexplore_core::envs::{Family, Role, Task, TrajectoryBatch};
use mexplore_core::meta::{
    batch_targets, inner_adapt, inner_loss_graph, nstep_targets, relative_variance, ExplorationCredit,
};
use mexplore_core::returns::{normalize, reward_to_go};
use mexplore_core::{Config, Graph, MetaParams, Tensor};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(seed: u64, z_dim: usize) -> MetaParams {
    let config = Config { z_dim, hidden: vec![6], repr_dim: 4, ..Config::default() };
    MetaParams::init(&config, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Random states, actions and sparse-ish rewards.
fn batch(seed: u64, n_traj: usize, horizon: usize) -> TrajectoryBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = n_traj * horizon;
    let mut rand_t = |scale: f64| {
        Tensor::from_vec(rows, 2, (0..rows * 2).map(|_| scale * rng.random_range(-1.0..1.0)).collect())
    };
    let states = rand_t(2.0);
    let actions = rand_t(1.0);
    let next_states = rand_t(2.0);
    let rewards = (0..rows).map(|_| if rng.random_bool(0.3) { rng.random_range(0.0..1.0) } else { 0.0 }).collect();
    TrajectoryBatch {
        task: Task::new(Family::Corner, [2.0, -2.0]),
        role: Role::PreUpdate,
        horizon,
        n_traj,
        states,
        actions,
        rewards,
        next_states,
        log_probs: vec![0.0; rows],
    }
}

/// Inner loss evaluated at an arbitrary latent.
fn loss_at(p: &MetaParams, pre: &TrajectoryBatch, targets: &[f64], z: &Tensor) -> f64 {
    let g = Graph::new();
    let beta = p.supervision.params.register(&g);
    let z_rows = g.constant(z.clone()).broadcast(pre.rows(), z.cols());
    inner_loss_graph(&g, &p.supervision, &beta, z_rows, pre, targets, None).item()
}

fn permuted(b: &TrajectoryBatch, order: &[usize]) -> TrajectoryBatch {
    let h = b.horizon;
    let rows_of = |t: &Tensor| {
        let mut data = Vec::with_capacity(t.rows() * t.cols());
        for &i in order {
            for r in i * h..(i + 1) * h {
                data.extend_from_slice(t.row_slice(r));
            }
        }
        Tensor::from_vec(t.rows(), t.cols(), data)
    };
    let pick = |v: &[f64]| order.iter().flat_map(|&i| v[i * h..(i + 1) * h].iter().copied()).collect();
    TrajectoryBatch {
        states: rows_of(&b.states),
        actions: rows_of(&b.actions),
        next_states: rows_of(&b.next_states),
        rewards: pick(&b.rewards),
        log_probs: pick(&b.log_probs),
        ..b.clone()
    }
}

#[test]
fn audited_gradients_hold_over_many_instances() {
    let start = std::time::Instant::now();
    let reports = audit::run(11, 100, 1e-5).unwrap();
    assert_eq!(reports.len(), audit::CASES.len());
    for r in &reports {
        assert_eq!(r.trials, 100);
        assert!(r.max_rel_error < 1e-5, "{}: {:e}", r.name, r.max_rel_error);
    }
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn small_step_reduces_inner_loss_almost_always() {
    let mut improved = 0;
    for trial in 0..100u64 {
        let p = params(1000 + trial, 1 + (trial as usize % 4));
        let pre = batch(2000 + trial, 2 + trial as usize % 3, 5 + trial as usize % 6);
        let targets = batch_targets(&pre, 15);
        let adapted = inner_adapt(&p, &pre, &targets, 1e-4, false).unwrap();
        if loss_at(&p, &pre, &targets, &adapted.z_prime) < adapted.inner_loss {
            improved += 1;
        }
    }
    assert!(improved >= 95, "loss fell in only {improved} of 100 trials");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn audit_holds_for_any_seed(seed in any::<u64>()) {
        for r in audit::run(seed, 1, 1e-5).unwrap() {
            prop_assert!(r.max_rel_error < 1e-5, "{}: {:e}", r.name, r.max_rel_error);
        }
    }

    #[test]
    fn magic_box_is_one_forward(values in prop::collection::vec(-50.0f64..50.0, 1..20)) {
        let g = Graph::new();
        let n = values.len();
        let boxed = g.leaf(Tensor::from_vec(n, 1, values)).magic_box();
        prop_assert!(boxed.value().data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn dice_weighting_leaves_values_unchanged(seed in any::<u64>(), n in 1usize..4, h in 2usize..7, z_dim in 1usize..5) {
        let p = params(seed, z_dim);
        let pre = batch(seed ^ 0x5eed, n, h);
        let targets = batch_targets(&pre, 3);
        let plain = inner_adapt(&p, &pre, &targets, 0.1, false).unwrap();
        let dice = inner_adapt(&p, &pre, &targets, 0.1, true).unwrap();
        prop_assert_eq!(plain.inner_loss, dice.inner_loss);
        prop_assert_eq!(plain.z_prime, dice.z_prime);
    }

    #[test]
    fn zero_step_keeps_latent(seed in any::<u64>(), z_dim in 1usize..6) {
        let p = params(seed, z_dim);
        let pre = batch(seed.wrapping_add(1), 2, 4);
        let targets = batch_targets(&pre, 15);
        let adapted = inner_adapt(&p, &pre, &targets, 0.0, true).unwrap();
        prop_assert_eq!(&adapted.z_prime, p.z.tensor());
    }

    #[test]
    fn adaptation_ignores_trajectory_order(seed in any::<u64>(), n in 2usize..5) {
        let p = params(seed, 3);
        let pre = batch(seed ^ 0xabc, n, 4);
        let mut order: Vec<usize> = (0..n).collect();
        order.rotate_left(1);
        let shuffled = permuted(&pre, &order);
        let a = inner_adapt(&p, &pre, &batch_targets(&pre, 2), 0.5, false).unwrap();
        let b = inner_adapt(&p, &shuffled, &batch_targets(&shuffled, 2), 0.5, false).unwrap();
        prop_assert!((a.inner_loss - b.inner_loss).abs() <= 1e-12 * a.inner_loss.abs().max(1.0));
        for (x, y) in a.z_prime.data().iter().zip(b.z_prime.data()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn nstep_targets_count_each_reward_min_n_times(rewards in prop::collection::vec(-1.0f64..1.0, 1..30), n in 1usize..20) {
        let total: f64 = nstep_targets(&rewards, n).0.iter().sum();
        let expected: f64 = rewards.iter().enumerate().map(|(k, r)| r * (k + 1).min(n) as f64).sum();
        prop_assert!((total - expected).abs() < 1e-9);
    }

    #[test]
    fn credit_advantages_telescope(rewards in prop::collection::vec(-1.0f64..1.0, 12), values in prop::collection::vec(-1.0f64..1.0, 12)) {
        // three trajectories of four steps: advantages sum to R_0 - V_0 per trajectory
        let mut c = ExplorationCredit::from_rewards(rewards, 4);
        c.set_values(values.clone());
        for i in 0..3 {
            let sum: f64 = c.advantages[i * 4..(i + 1) * 4].iter().sum();
            prop_assert!((sum - (c.returns[i * 4] - values[i * 4])).abs() < 1e-12);
            prop_assert_eq!(c.returns[i * 4 + 3], c.rewards[i * 4 + 3]);
        }
    }

    #[test]
    fn undiscounted_reward_to_go_is_a_suffix_sum(rewards in prop::collection::vec(-2.0f64..2.0, 1..20)) {
        let h = rewards.len();
        let rtg = reward_to_go(&rewards, h, 1.0);
        for t in 0..h {
            prop_assert!((rtg[t] - rewards[t..].iter().sum::<f64>()).abs() < 1e-12);
        }
    }

    #[test]
    fn normalized_values_are_standardized(mut v in prop::collection::vec(-100.0f64..100.0, 2..50)) {
        prop_assume!(v.iter().any(|x| (x - v[0]).abs() > 1e-3));
        normalize(&mut v);
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
        prop_assert!(m.abs() < 1e-9);
        prop_assert!((var - 1.0).abs() < 1e-6);
    }

    #[test]
    fn relative_variance_is_scale_free(rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 2..6), k in 0.1f64..10.0) {
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x * k).collect()).collect();
        let a = relative_variance(&rows);
        let b = relative_variance(&scaled);
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }
}
