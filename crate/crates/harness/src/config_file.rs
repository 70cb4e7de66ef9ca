//! Flat `key = value` config files. Every field is written; on read, missing
//! keys keep their defaults and unknown keys are rejected.

use std::fmt::Write as _;
use std::str::FromStr;

use mexplore_core::envs::Family;
use mexplore_core::{Config, ConfigError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigFileError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`: {reason}")]
    BadValue { line: usize, key: String, value: String, reason: String },
    #[error(transparent)]
    Invalid(#[from] ConfigError),
}

/// Field names in file order.
pub const KEYS: &[&str] = &[
    "env",
    "algorithm",
    "phi_estimator",
    "supervision",
    "inner_update",
    "horizon",
    "nstep",
    "z_dim",
    "hidden",
    "repr_dim",
    "inner_lr",
    "outer_lr",
    "gamma",
    "gae_lambda",
    "clip_eps",
    "meta_batch",
    "n_pre_traj",
    "n_post_traj",
    "outer_epochs",
    "iterations",
    "seed",
    "center_post_returns",
    "normalize_advantages",
    "parallel",
    "log_wall_time",
    "checkpoint_every",
    "desk_scale",
];

fn value_of(c: &Config, key: &str) -> String {
    match key {
        "env" => c.env.to_string(),
        "algorithm" => c.algorithm.to_string(),
        "phi_estimator" => c.phi_estimator.to_string(),
        "supervision" => c.supervision.to_string(),
        "inner_update" => c.inner_update.to_string(),
        "horizon" => c.horizon.to_string(),
        "nstep" => c.nstep.to_string(),
        "z_dim" => c.z_dim.to_string(),
        "hidden" => c.hidden.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
        "repr_dim" => c.repr_dim.to_string(),
        "inner_lr" => c.inner_lr.to_string(),
        "outer_lr" => c.outer_lr.to_string(),
        "gamma" => c.gamma.to_string(),
        "gae_lambda" => c.gae_lambda.to_string(),
        "clip_eps" => c.clip_eps.to_string(),
        "meta_batch" => c.meta_batch.to_string(),
        "n_pre_traj" => c.n_pre_traj.to_string(),
        "n_post_traj" => c.n_post_traj.to_string(),
        "outer_epochs" => c.outer_epochs.to_string(),
        "iterations" => c.iterations.to_string(),
        "seed" => c.seed.to_string(),
        "center_post_returns" => c.center_post_returns.to_string(),
        "normalize_advantages" => c.normalize_advantages.to_string(),
        "parallel" => c.parallel.to_string(),
        "log_wall_time" => c.log_wall_time.to_string(),
        "checkpoint_every" => c.checkpoint_every.to_string(),
        "desk_scale" => c.desk_scale.to_string(),
        _ => unreachable!("unknown key {key}"),
    }
}

fn parsed<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| e.to_string())
}

/// Sets one field from its text form. Returns `Ok(false)` for an unknown key.
pub fn set_field(c: &mut Config, key: &str, value: &str) -> Result<bool, String> {
    match key {
        "env" => c.env = Family::from_str(value).map_err(|e| e.to_string())?,
        "algorithm" => c.algorithm = parsed(value)?,
        "phi_estimator" => c.phi_estimator = parsed(value)?,
        "supervision" => c.supervision = parsed(value)?,
        "inner_update" => c.inner_update = parsed(value)?,
        "horizon" => c.horizon = parsed(value)?,
        "nstep" => c.nstep = parsed(value)?,
        "z_dim" => c.z_dim = parsed(value)?,
        "hidden" => {
            c.hidden = if value.is_empty() {
                Vec::new()
            } else {
                value.split(',').map(|w| parsed(w.trim())).collect::<Result<_, _>>()?
            }
        }
        "repr_dim" => c.repr_dim = parsed(value)?,
        "inner_lr" => c.inner_lr = parsed(value)?,
        "outer_lr" => c.outer_lr = parsed(value)?,
        "gamma" => c.gamma = parsed(value)?,
        "gae_lambda" => c.gae_lambda = parsed(value)?,
        "clip_eps" => c.clip_eps = parsed(value)?,
        "meta_batch" => c.meta_batch = parsed(value)?,
        "n_pre_traj" => c.n_pre_traj = parsed(value)?,
        "n_post_traj" => c.n_post_traj = parsed(value)?,
        "outer_epochs" => c.outer_epochs = parsed(value)?,
        "iterations" => c.iterations = parsed(value)?,
        "seed" => c.seed = parsed(value)?,
        "center_post_returns" => c.center_post_returns = parsed(value)?,
        "normalize_advantages" => c.normalize_advantages = parsed(value)?,
        "parallel" => c.parallel = parsed(value)?,
        "log_wall_time" => c.log_wall_time = parsed(value)?,
        "checkpoint_every" => c.checkpoint_every = parsed(value)?,
        "desk_scale" => c.desk_scale = parsed(value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

/// Full snapshot, one `key = value` line per field.
pub fn to_text(c: &Config) -> String {
    let mut out = String::new();
    for key in KEYS {
        writeln!(out, "{key} = {}", value_of(c, key)).expect("writing to a String");
    }
    out
}

/// Parses a config file on top of the defaults and validates the result.
/// `#` starts a comment.
pub fn parse(text: &str) -> Result<Config, ConfigFileError> {
    let mut c = Config::default();
    let mut seen: Vec<&str> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigFileError::Syntax { line: line_no })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigFileError::Syntax { line: line_no });
        }
        if seen.contains(&key) {
            return Err(ConfigFileError::Duplicate { line: line_no, key: key.into() });
        }
        match set_field(&mut c, key, value) {
            Ok(true) => seen.push(key),
            Ok(false) => return Err(ConfigFileError::UnknownKey { line: line_no, key: key.into() }),
            Err(reason) => {
                return Err(ConfigFileError::BadValue { line: line_no, key: key.into(), value: value.into(), reason })
            }
        }
    }
    c.validate()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mexplore_core::{Algorithm, PhiEstimator};

    #[test]
    fn snapshot_round_trips() {
        let c = Config {
            algorithm: Algorithm::Ours,
            phi_estimator: PhiEstimator::VanillaDice,
            hidden: vec![7, 3],
            inner_lr: 0.123456789012345,
            outer_lr: 7e-4,
            seed: u64::MAX,
            desk_scale: 0.5,
            ..Config::default()
        };
        assert_eq!(parse(&to_text(&c)).unwrap(), c);
        let linear = Config { hidden: vec![], ..Config::default() };
        assert_eq!(parse(&to_text(&linear)).unwrap(), linear);
    }

    #[test]
    fn every_key_is_written() {
        let text = to_text(&Config::default());
        assert_eq!(text.lines().count(), KEYS.len());
    }

    #[test]
    fn partial_files_keep_defaults() {
        let c = parse("# comment\n\nseed = 4  # trailing\nenv = dense\n").unwrap();
        assert_eq!(c.seed, 4);
        assert_eq!(c.env, Family::Dense);
        assert_eq!(c.hidden, Config::default().hidden);
    }

    #[test]
    fn errors_name_the_problem() {
        assert_eq!(parse("speed = 3").unwrap_err(), ConfigFileError::UnknownKey { line: 1, key: "speed".into() });
        assert_eq!(parse("seed 3").unwrap_err(), ConfigFileError::Syntax { line: 1 });
        assert!(matches!(parse("seed = 1\nseed = 2"), Err(ConfigFileError::Duplicate { line: 2, .. })));
        assert!(matches!(parse("horizon = -1"), Err(ConfigFileError::BadValue { key, .. }) if key == "horizon"));
        assert!(matches!(parse("algorithm = reptile"), Err(ConfigFileError::BadValue { .. })));
        let err = parse("nstep = 0").unwrap_err();
        assert!(err.to_string().contains("nstep"), "{err}");
    }
}
