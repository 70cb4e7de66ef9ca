//! 2D point-navigation task families.
//!
//! The agent starts at the origin and moves by its action, clipped to
//! `±ACTION_CLIP` per axis. Tasks differ only in the goal, so dynamics are
//! shared across a family and only the reward depends on the task.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::nets::GaussianPolicy;
use crate::tensor::Tensor;

pub const ACTION_CLIP: f64 = 0.1;
pub const CORNER_GOAL_RADIUS: f64 = 0.5;
pub const SEMICIRCLE_GOAL_RADIUS: f64 = 0.3;
pub const CORNERS: [[f64; 2]; 4] = [[-2.0, -2.0], [-2.0, 2.0], [2.0, -2.0], [2.0, 2.0]];
pub const OBS_DIM: usize = 2;
pub const ACT_DIM: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("unknown environment family `{0}`")]
    UnknownFamily(String),
    #[error("action has a non-finite component")]
    NonFiniteAction,
    #[error("need at least one {0}")]
    Empty(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Sparse reward, goal at one of four corners.
    Corner,
    /// Sparse reward, goal on the upper unit semicircle.
    Semicircle,
    /// Corner goals with reward `-d^2`.
    Dense,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Corner => "corner",
            Family::Semicircle => "semicircle",
            Family::Dense => "dense",
        }
    }

    /// Goal radius of the sparse families.
    pub fn goal_radius(self) -> Option<f64> {
        match self {
            Family::Corner => Some(CORNER_GOAL_RADIUS),
            Family::Semicircle => Some(SEMICIRCLE_GOAL_RADIUS),
            Family::Dense => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = EnvError;
    fn from_str(s: &str) -> Result<Self, EnvError> {
        match s {
            "corner" => Ok(Family::Corner),
            "semicircle" => Ok(Family::Semicircle),
            "dense" => Ok(Family::Dense),
            other => Err(EnvError::UnknownFamily(other.into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub family: Family,
    pub goal: [f64; 2],
}

impl Task {
    pub fn new(family: Family, goal: [f64; 2]) -> Self {
        Self { family, goal }
    }

    pub fn reward(&self, next: [f64; 2]) -> f64 {
        let (dx, dy) = (next[0] - self.goal[0], next[1] - self.goal[1]);
        let d2 = dx * dx + dy * dy;
        match self.family.goal_radius() {
            Some(radius) => {
                let d = libm::sqrt(d2);
                if d < radius {
                    (radius - d) / radius
                } else {
                    0.0
                }
            }
            None => -d2,
        }
    }
}

/// I.i.d. tasks from a family's distribution.
pub fn sample_tasks<R: Rng + ?Sized>(family: Family, n: usize, rng: &mut R) -> Result<Vec<Task>, EnvError> {
    if n == 0 {
        return Err(EnvError::Empty("task"));
    }
    Ok((0..n)
        .map(|_| match family {
            Family::Corner | Family::Dense => Task::new(family, CORNERS[rng.random_range(0..4)]),
            Family::Semicircle => {
                let angle = rng.random_range(0.0..=core::f64::consts::PI);
                Task::new(family, [libm::cos(angle), libm::sin(angle)])
            }
        })
        .collect())
}

/// One environment transition: `s' = s + clip(a)`, reward from `s'`.
pub fn transition(state: [f64; 2], action: [f64; 2], task: &Task) -> Result<([f64; 2], f64), EnvError> {
    if !action.iter().all(|a| a.is_finite()) {
        return Err(EnvError::NonFiniteAction);
    }
    let next = [
        state[0] + action[0].clamp(-ACTION_CLIP, ACTION_CLIP),
        state[1] + action[1].clamp(-ACTION_CLIP, ACTION_CLIP),
    ];
    Ok((next, task.reward(next)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next_state: [f64; 2],
    pub reward: f64,
    pub done: bool,
}

/// Stateful wrapper with a fixed horizon and no early termination.
#[derive(Debug, Clone)]
pub struct PointEnv {
    pub task: Task,
    pub horizon: usize,
    state: [f64; 2],
    t: usize,
}

impl PointEnv {
    pub fn new(task: Task, horizon: usize) -> Self {
        Self { task, horizon, state: [0.0, 0.0], t: 0 }
    }

    pub fn state(&self) -> [f64; 2] {
        self.state
    }

    pub fn step(&mut self, action: [f64; 2]) -> Result<StepOutcome, EnvError> {
        let (next, reward) = transition(self.state, action, &self.task)?;
        self.state = next;
        self.t += 1;
        Ok(StepOutcome { next_state: next, reward, done: self.t >= self.horizon })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    PreUpdate,
    PostUpdate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: [f64; 2],
    pub action: [f64; 2],
    pub reward: f64,
    pub next_state: [f64; 2],
    pub log_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub transitions: Vec<Transition>,
}

impl Trajectory {
    pub fn discounted_return(&self, gamma: f64) -> f64 {
        discounted_sum(self.transitions.iter().map(|t| t.reward), gamma)
    }
}

fn discounted_sum(rewards: impl Iterator<Item = f64>, gamma: f64) -> f64 {
    let mut acc = 0.0;
    let mut w = 1.0;
    for r in rewards {
        acc += w * r;
        w *= gamma;
    }
    acc
}

/// `n_traj` rectangular trajectories for one task, stored column-wise with
/// row `i * horizon + t` holding step `t` of trajectory `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBatch {
    pub task: Task,
    pub role: Role,
    pub horizon: usize,
    pub n_traj: usize,
    pub states: Tensor,
    /// Raw sampled actions (before the environment clips them).
    pub actions: Tensor,
    pub rewards: Vec<f64>,
    pub next_states: Tensor,
    /// Log-density of each action under the policy that sampled it.
    pub log_probs: Vec<f64>,
}

impl TrajectoryBatch {
    pub fn rows(&self) -> usize {
        self.n_traj * self.horizon
    }

    pub fn rewards_of(&self, i: usize) -> &[f64] {
        &self.rewards[i * self.horizon..(i + 1) * self.horizon]
    }

    pub fn trajectory(&self, i: usize) -> Trajectory {
        let h = self.horizon;
        let row = |m: &Tensor, r: usize| [m.get(r, 0), m.get(r, 1)];
        Trajectory {
            transitions: (i * h..(i + 1) * h)
                .map(|r| Transition {
                    state: row(&self.states, r),
                    action: row(&self.actions, r),
                    reward: self.rewards[r],
                    next_state: row(&self.next_states, r),
                    log_prob: self.log_probs[r],
                })
                .collect(),
        }
    }

    pub fn discounted_return(&self, i: usize, gamma: f64) -> f64 {
        discounted_sum(self.rewards_of(i).iter().copied(), gamma)
    }

    pub fn discounted_returns(&self, gamma: f64) -> Vec<f64> {
        (0..self.n_traj).map(|i| self.discounted_return(i, gamma)).collect()
    }

    /// Mean undiscounted return per trajectory.
    pub fn mean_return(&self) -> f64 {
        self.rewards.iter().sum::<f64>() / self.n_traj as f64
    }

    /// `[s, a]` rows.
    pub fn state_actions(&self) -> Tensor {
        self.states.concat_cols(&self.actions)
    }
}

/// Anything that maps a block of states to actions and their log-densities.
pub trait Actor {
    fn act(&self, states: &Tensor, rng: &mut dyn rand::RngCore) -> (Tensor, Tensor);
}

/// A policy together with the latent it is conditioned on, if any.
pub struct PolicyActor<'a> {
    pub policy: &'a GaussianPolicy,
    pub z: Option<&'a Tensor>,
}

impl Actor for PolicyActor<'_> {
    fn act(&self, states: &Tensor, rng: &mut dyn rand::RngCore) -> (Tensor, Tensor) {
        let input = self.policy.input(states, self.z);
        self.policy.sample(&input, rng)
    }
}

/// Runs `n_traj` trajectories in lockstep from the origin.
pub fn rollout<A: Actor + ?Sized>(
    actor: &A,
    task: Task,
    horizon: usize,
    n_traj: usize,
    role: Role,
    rng: &mut dyn rand::RngCore,
) -> Result<TrajectoryBatch, EnvError> {
    if horizon == 0 {
        return Err(EnvError::Empty("step in the horizon"));
    }
    if n_traj == 0 {
        return Err(EnvError::Empty("trajectory"));
    }
    let rows = n_traj * horizon;
    let mut states = Tensor::zeros(rows, OBS_DIM);
    let mut actions = Tensor::zeros(rows, ACT_DIM);
    let mut next_states = Tensor::zeros(rows, OBS_DIM);
    let mut rewards = alloc::vec![0.0; rows];
    let mut log_probs = alloc::vec![0.0; rows];

    let mut current = Tensor::zeros(n_traj, OBS_DIM);
    for t in 0..horizon {
        let (a, lp) = actor.act(&current, rng);
        for i in 0..n_traj {
            let s = [current.get(i, 0), current.get(i, 1)];
            let act = [a.get(i, 0), a.get(i, 1)];
            let (next, r) = transition(s, act, &task)?;
            let row = i * horizon + t;
            for d in 0..2 {
                states.set(row, d, s[d]);
                actions.set(row, d, act[d]);
                next_states.set(row, d, next[d]);
                current.set(i, d, next[d]);
            }
            rewards[row] = r;
            log_probs[row] = lp.get(i, 0);
        }
    }
    Ok(TrajectoryBatch { task, role, horizon, n_traj, states, actions, rewards, next_states, log_probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn corner_frequencies_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tasks = sample_tasks(Family::Corner, 4000, &mut rng).unwrap();
        for c in CORNERS {
            let f = tasks.iter().filter(|t| t.goal == c).count() as f64 / 4000.0;
            assert!((0.22..=0.28).contains(&f), "corner {c:?} frequency {f}");
        }
    }

    #[test]
    fn semicircle_goals_on_upper_arc() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in sample_tasks(Family::Semicircle, 500, &mut rng).unwrap() {
            let [x, y] = t.goal;
            assert!(y >= 0.0);
            assert!((libm::sqrt(x * x + y * y) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn task_sampling_is_seeded() {
        let a = sample_tasks(Family::Semicircle, 10, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_tasks(Family::Semicircle, 10, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_inputs_error() {
        assert_eq!("maze".parse::<Family>(), Err(EnvError::UnknownFamily("maze".into())));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_tasks(Family::Corner, 0, &mut rng).is_err());
        let task = Task::new(Family::Corner, [2.0, 2.0]);
        assert_eq!(transition([0.0, 0.0], [f64::NAN, 0.0], &task), Err(EnvError::NonFiniteAction));
    }

    #[test]
    fn step_formula_examples() {
        let task = Task::new(Family::Corner, [2.0, 2.0]);
        let (next, r) = transition([0.0, 0.0], [1.0, 1.0], &task).unwrap();
        assert_eq!(next, [0.1, 0.1]);
        assert_eq!(r, 0.0);
        assert_eq!(task.reward([2.0, 2.0]), 1.0);
        assert!((task.reward([1.8, 2.0]) - 0.6).abs() < 1e-12);
        let dense = Task::new(Family::Dense, [2.0, 2.0]);
        assert!((dense.reward([1.0, 2.0]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn env_signals_done_at_horizon_only() {
        let mut env = PointEnv::new(Task::new(Family::Corner, [2.0, 2.0]), 3);
        assert!(!env.step([0.0, 0.0]).unwrap().done);
        assert!(!env.step([0.0, 0.0]).unwrap().done);
        assert!(env.step([0.0, 0.0]).unwrap().done);
    }

    struct Straight {
        goal: [f64; 2],
    }

    impl Actor for Straight {
        fn act(&self, states: &Tensor, _rng: &mut dyn rand::RngCore) -> (Tensor, Tensor) {
            let mut a = Tensor::zeros(states.rows(), 2);
            for i in 0..states.rows() {
                let dx = self.goal[0] - states.get(i, 0);
                let dy = self.goal[1] - states.get(i, 1);
                let d = libm::sqrt(dx * dx + dy * dy);
                a.set(i, 0, 0.1 * dx / d);
                a.set(i, 1, 0.1 * dy / d);
            }
            (a, Tensor::zeros(states.rows(), 1))
        }
    }

    #[test]
    fn scripted_walker_first_reward_on_step_24() {
        let goal = [2.0, 2.0];
        let task = Task::new(Family::Corner, goal);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batch = rollout(&Straight { goal }, task, 100, 1, Role::PreUpdate, &mut rng).unwrap();
        let first = batch.rewards.iter().position(|&r| r > 0.0).unwrap();
        // step k (1-based) ends at distance 2*sqrt(2) - 0.1k, first below 0.5 at k = 24
        assert_eq!(first + 1, 24);
    }

    #[test]
    fn still_policy_stays_home() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = GaussianPolicy::new(2, 0, 2, &[4], &mut rng);
        let mut params = p.params.zeros_like();
        let n = params.len();
        params.tensors_mut()[n - 1] = Tensor::row(alloc::vec![-5.0, -5.0]);
        let p = p.with_params(params);
        let actor = PolicyActor { policy: &p, z: None };
        let batch = rollout(&actor, Task::new(Family::Corner, [2.0, 2.0]), 100, 3, Role::PreUpdate, &mut rng).unwrap();
        assert!(batch.rewards.iter().all(|&r| r == 0.0));
        // per-axis displacement after 100 steps has std exp(-5) * sqrt(100)
        let bound = 5.0 * libm::exp(-5.0) * 10.0;
        for i in 0..3 {
            let last = batch.trajectory(i).transitions[99].next_state;
            assert!(last[0].abs() < bound && last[1].abs() < bound, "{last:?}");
        }
    }

    #[test]
    fn rollout_is_seeded_and_returns_recompute() {
        let p = GaussianPolicy::new(2, 0, 2, &[8], &mut ChaCha8Rng::seed_from_u64(3));
        let actor = PolicyActor { policy: &p, z: None };
        let task = Task::new(Family::Dense, [-2.0, 2.0]);
        let a = rollout(&actor, task, 20, 4, Role::PreUpdate, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = rollout(&actor, task, 20, 4, Role::PreUpdate, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        for i in 0..4 {
            let traj = a.trajectory(i);
            assert_eq!(traj.transitions.len(), 20);
            assert_eq!(traj.discounted_return(0.9), a.discounted_return(i, 0.9));
        }
        // stored log-probs agree with a fresh evaluation
        let lp = p.log_prob(&a.states, &a.actions);
        assert_eq!(lp.data(), &a.log_probs[..]);
    }
}
