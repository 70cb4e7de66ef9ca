#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod audit;
pub mod baselines;
pub mod config;
pub mod envs;
pub mod exec;
pub mod grad;
pub mod meta;
pub mod nets;
pub mod optim;
pub mod returns;
pub mod surrogate;
pub mod tensor;

pub use baselines::{BaselineLearner, InnerSurrogate, SinglePolicyMetaParams};
pub use config::{Algorithm, Config, ConfigError, InnerUpdate, PhiEstimator, Supervision};
pub use exec::{Executor, Sequential};
pub use grad::{finite_diff_check, GradError, GradientVector, Graph, ParamSet, Var};
pub use meta::{IterationMetrics, MetaError, MetaLearner, MetaParams};
pub use nets::{GaussianPolicy, LatentZ, MlpArch, SupervisionNet};
pub use tensor::Tensor;
