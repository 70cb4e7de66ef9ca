//! One interface over every trainer, and a thread-pool executor.

use mexplore_core::envs::Task;
use mexplore_core::exec::Executor;
use mexplore_core::{Algorithm, BaselineLearner, Config, IterationMetrics, MetaError, MetaLearner, ParamSet};
use rayon::prelude::*;

/// Environment variable read for the worker count of parallel runs.
pub const THREADS_VAR: &str = "MEXPLORE_THREADS";

#[derive(Clone, Debug)]
pub enum Learner {
    Ours(MetaLearner),
    Baseline(BaselineLearner),
}

impl Learner {
    pub fn new(config: Config) -> Result<Self, MetaError> {
        Ok(match config.algorithm {
            Algorithm::Ours => Learner::Ours(MetaLearner::new(config)?),
            _ => Learner::Baseline(BaselineLearner::new(config)?),
        })
    }

    pub fn config(&self) -> &Config {
        match self {
            Learner::Ours(l) => &l.config,
            Learner::Baseline(l) => &l.config,
        }
    }

    pub fn iteration(&self) -> u64 {
        match self {
            Learner::Ours(l) => l.iteration(),
            Learner::Baseline(l) => l.iteration(),
        }
    }

    pub fn tasks(&self, iteration: u64) -> Result<Vec<Task>, MetaError> {
        match self {
            Learner::Ours(l) => l.tasks(iteration),
            Learner::Baseline(l) => l.tasks(iteration),
        }
    }

    pub fn step<E: Executor>(&mut self, exec: &E) -> Result<IterationMetrics, MetaError> {
        match self {
            Learner::Ours(l) => l.step(exec),
            Learner::Baseline(l) => l.step(exec),
        }
    }

    /// Every trainable tensor, names prefixed by parameter group.
    pub fn param_set(&self) -> ParamSet {
        match self {
            Learner::Ours(l) => l.params.to_param_set(),
            Learner::Baseline(l) => l.params.policy.params.prefixed("theta"),
        }
    }
}

/// Runs task jobs on a rayon pool. Results come back in index order, so a
/// run's output does not depend on the thread count.
pub struct PoolExecutor {
    pool: rayon::ThreadPool,
}

impl PoolExecutor {
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        Ok(Self { pool: rayon::ThreadPoolBuilder::new().num_threads(threads).build()? })
    }

    /// Thread count from [`THREADS_VAR`], else rayon's default.
    pub fn from_env() -> anyhow::Result<Self> {
        let threads = match std::env::var(THREADS_VAR) {
            Ok(v) => v.trim().parse().map_err(|_| anyhow::anyhow!("{THREADS_VAR} must be a whole number, got `{v}`"))?,
            Err(_) => 0,
        };
        Ok(Self::new(threads)?)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for PoolExecutor {
    fn map<T, F>(&self, n: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(job).collect())
    }
}
