//! Hyperparameters and variant switches for every learner.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::envs::Family;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(alloc::format!("unknown {} `{}`", stringify!($name), other)),
                }
            }
        }
    };
}

keyword_enum! {
    /// Which meta-learner to train.
    Algorithm {
        Ours => "ours",
        MamlVpg => "maml_vpg",
        Emaml => "emaml",
        Promp => "promp",
    }
}

keyword_enum! {
    /// How the exploration policy receives credit.
    PhiEstimator {
        Lvc => "lvc",
        VanillaDice => "vanilla_dice",
        Emaml => "emaml",
        EnvReward => "env_reward",
    }
}

keyword_enum! {
    /// Regression target of the inner loop.
    Supervision {
        Nstep => "nstep",
        Reward => "reward",
    }
}

keyword_enum! {
    /// Inner-loop update rule.
    InnerUpdate {
        SelfSupervised => "self_supervised",
        VpgImportance => "vpg_importance",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub env: Family,
    pub algorithm: Algorithm,
    pub phi_estimator: PhiEstimator,
    pub supervision: Supervision,
    pub inner_update: InnerUpdate,
    pub horizon: usize,
    /// Steps summed into each regression target.
    pub nstep: usize,
    pub z_dim: usize,
    pub hidden: Vec<usize>,
    /// Width of the supervision network's representation.
    pub repr_dim: usize,
    /// Inner-loop step size.
    pub inner_lr: f64,
    pub outer_lr: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_eps: f64,
    pub meta_batch: usize,
    pub n_pre_traj: usize,
    pub n_post_traj: usize,
    pub outer_epochs: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Subtract the post-batch mean return before forming exploration rewards.
    pub center_post_returns: bool,
    pub normalize_advantages: bool,
    pub parallel: bool,
    /// Record elapsed seconds in the metrics; when off the column is 0 and
    /// logs are byte-reproducible.
    pub log_wall_time: bool,
    pub checkpoint_every: usize,
    /// Scale factor applied to a preset's batch sizes, recorded for provenance.
    pub desk_scale: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            env: Family::Corner,
            algorithm: Algorithm::Ours,
            phi_estimator: PhiEstimator::Lvc,
            supervision: Supervision::Nstep,
            inner_update: InnerUpdate::SelfSupervised,
            horizon: 100,
            nstep: 15,
            z_dim: 32,
            hidden: vec![64, 64],
            repr_dim: 32,
            inner_lr: 0.1,
            outer_lr: 7e-4,
            gamma: 0.99,
            gae_lambda: 1.0,
            clip_eps: 0.2,
            meta_batch: 20,
            n_pre_traj: 20,
            n_post_traj: 20,
            outer_epochs: 5,
            iterations: 300,
            seed: 0,
            center_post_returns: true,
            normalize_advantages: true,
            parallel: false,
            log_wall_time: false,
            checkpoint_every: 50,
            desk_scale: 1.0,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |field: &'static str, v: usize| {
            if v == 0 {
                Err(invalid(field, "must be at least 1"))
            } else {
                Ok(())
            }
        };
        positive("horizon", self.horizon)?;
        positive("nstep", self.nstep)?;
        positive("z_dim", self.z_dim)?;
        positive("repr_dim", self.repr_dim)?;
        positive("meta_batch", self.meta_batch)?;
        positive("n_pre_traj", self.n_pre_traj)?;
        positive("n_post_traj", self.n_post_traj)?;
        positive("outer_epochs", self.outer_epochs)?;
        positive("checkpoint_every", self.checkpoint_every)?;
        if self.hidden.contains(&0) {
            return Err(invalid("hidden", "layer widths must be at least 1"));
        }
        let finite_nonneg = |field: &'static str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(field, "must be finite and non-negative"))
            }
        };
        finite_nonneg("inner_lr", self.inner_lr)?;
        finite_nonneg("outer_lr", self.outer_lr)?;
        finite_nonneg("clip_eps", self.clip_eps)?;
        finite_nonneg("desk_scale", self.desk_scale)?;
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid("gamma", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(invalid("gae_lambda", "must lie in [0, 1]"));
        }
        if self.algorithm != Algorithm::Ours
            && (self.phi_estimator != PhiEstimator::Lvc
                || self.supervision != Supervision::Nstep
                || self.inner_update != InnerUpdate::SelfSupervised)
        {
            return Err(invalid("algorithm", "estimator, supervision and inner-update variants apply to `ours` only"));
        }
        Ok(())
    }

    /// Steps summed into each regression target after applying the
    /// supervision variant.
    pub fn effective_nstep(&self) -> usize {
        match self.supervision {
            Supervision::Nstep => self.nstep,
            Supervision::Reward => 1,
        }
    }
}
