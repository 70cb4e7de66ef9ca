//! Meta-learner with a separate exploration policy and a self-supervised
//! latent adaptation step.

mod credit;
mod inner;
mod outer;
mod train;
#[cfg(test)]
pub(crate) mod testutil;

pub use credit::{
    exploration_rewards, fit_mu_baseline, phi_surrogate, post_latent_gradient, score_function_phi_gradient,
    vanilla_dice_phi_gradient, ExplorationCredit,
};
pub use inner::{
    batch_targets, dice_weights, inner_adapt, inner_adapt_graph, inner_loss_graph, nstep_targets, AdaptedGraph,
    AdaptedLatent, NStepTargets,
};
pub use outer::{importance_inner_objective, theta_beta_surrogate, IS_LOG_CLIP};
pub use train::{batch_advantages, meta_train_step, relative_variance, IterationMetrics, MetaLearner};
pub(crate) use train::{check_finite, mean_gradients, negated, normalize_jointly, values};

use alloc::vec::Vec;
use rand::Rng;

use crate::config::{Config, ConfigError};
use crate::envs::{EnvError, ACT_DIM, OBS_DIM};
use crate::grad::{GradError, ParamSet};
use crate::nets::{GaussianPolicy, LatentZ, SupervisionNet};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetaError {
    #[error("inner step size must be non-negative, got {0}")]
    NegativeStepSize(f64),
    #[error("{0} batch is empty")]
    EmptyBatch(&'static str),
    #[error(transparent)]
    Grad(#[from] GradError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("non-finite {0} gradient")]
    NonFinite(&'static str),
}

/// `theta` drives the exploitation policy `pi(a | s, z)`, `phi` the
/// exploration policy `mu(a | s)`, `beta` the supervision net. `z` is the
/// shared latent and stays zero.
#[derive(Clone, Debug, PartialEq)]
pub struct MetaParams {
    pub exploit: GaussianPolicy,
    pub explore: GaussianPolicy,
    pub supervision: SupervisionNet,
    pub z: LatentZ,
}

impl MetaParams {
    pub fn init<R: Rng + ?Sized>(config: &Config, rng: &mut R) -> Self {
        let exploit = GaussianPolicy::new(OBS_DIM, config.z_dim, ACT_DIM, &config.hidden, rng);
        let explore = GaussianPolicy::new(OBS_DIM, 0, ACT_DIM, &config.hidden, rng);
        let supervision = SupervisionNet::new(OBS_DIM, ACT_DIM, config.z_dim, &config.hidden, config.repr_dim, rng);
        Self { exploit, explore, supervision, z: LatentZ::zeros(config.z_dim) }
    }

    /// All groups in one set, names prefixed `theta.`, `phi.` and `beta.`.
    pub fn to_param_set(&self) -> ParamSet {
        ParamSet::merged(&[
            &self.exploit.params.prefixed("theta"),
            &self.explore.params.prefixed("phi"),
            &self.supervision.params.prefixed("beta"),
        ])
        .expect("group prefixes keep names unique")
    }

    /// Inverse of [`MetaParams::to_param_set`]; shapes must match `self`.
    pub fn load_param_set(&mut self, set: &ParamSet) -> Result<(), GradError> {
        for (prefix, target) in [
            ("theta", &mut self.exploit.params),
            ("phi", &mut self.explore.params),
            ("beta", &mut self.supervision.params),
        ] {
            let mut loaded = Vec::with_capacity(target.len());
            for (name, old) in target.iter() {
                let full = alloc::format!("{prefix}.{name}");
                let t = set.get(&full).ok_or(GradError::MissingName(full.clone()))?;
                if t.shape() != old.shape() {
                    return Err(GradError::FlatLength { expected: old.len(), got: t.len() });
                }
                loaded.push(t.clone());
            }
            for (dst, src) in target.tensors_mut().iter_mut().zip(loaded) {
                *dst = src;
            }
        }
        Ok(())
    }
}

pub(crate) fn flat_norm(grads: &[Tensor]) -> f64 {
    libm::sqrt(grads.iter().map(Tensor::norm_sq).sum())
}
