use alloc::vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MetaParams;
use crate::config::Config;
use crate::envs::{Family, Role, Task, TrajectoryBatch};
use crate::tensor::Tensor;

/// Random states and actions with a fixed reward pattern.
pub fn tiny_batch(rng: &mut ChaCha8Rng, n_traj: usize, horizon: usize) -> TrajectoryBatch {
    let rows = n_traj * horizon;
    let mut rand_t = |c| Tensor::from_vec(rows, c, (0..rows * c).map(|_| rng.random_range(-1.0..1.0)).collect());
    let states = rand_t(2);
    let actions = rand_t(2);
    let next_states = rand_t(2);
    let rewards = (0..rows).map(|r| ((r * 7 % 5) as f64) * 0.2).collect();
    TrajectoryBatch {
        task: Task::new(Family::Corner, [2.0, 2.0]),
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

pub fn small_config(z_dim: usize) -> Config {
    Config { z_dim, hidden: vec![5], repr_dim: 3, ..Config::default() }
}

pub fn small_params(seed: u64, z_dim: usize) -> MetaParams {
    MetaParams::init(&small_config(z_dim), &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Replaces the stored log-probabilities with those of `policy` at `z`.
pub fn relabel(batch: &mut TrajectoryBatch, policy: &crate::nets::GaussianPolicy, z: Option<&Tensor>) {
    let lp = policy.log_prob(&policy.input(&batch.states, z), &batch.actions);
    batch.log_probs = lp.into_vec();
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().max(a.iter().map(|x| x * x).sum());
    if scale == 0.0 {
        libm::sqrt(diff)
    } else {
        libm::sqrt(diff / scale)
    }
}
