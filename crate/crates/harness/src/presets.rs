//! Named experiment configurations.

use mexplore_core::envs::Family;
use mexplore_core::{Algorithm, Config, InnerUpdate, PhiEstimator, Supervision};

/// Hidden widths used by every preset; narrower than the library default to
/// fit the full experiment matrix on one CPU core.
pub const PRESET_HIDDEN: [usize; 2] = [32, 32];
pub const PRESET_ITERATIONS: usize = 200;

/// (pre-update trajectories, tasks) pairs of the adaptation sweep, at half
/// the reference meta-batch sizes.
pub const SWEEP_PAIRS: [(usize, usize); 4] = [(2, 200), (5, 80), (10, 40), (20, 20)];
pub const SWEEP_SCALE: f64 = 0.5;
/// Post-update trajectories per iteration summed over tasks in the sweep.
pub const SWEEP_POST_TOTAL: usize = 400;

pub const NAMES: &[&str] =
    &["corner-ours", "corner-baselines", "corner-ablation-grid", "adapt-sweep", "semicircle", "dense"];

/// Defaults with the preset network size and length.
pub fn base(env: Family) -> Config {
    Config { env, hidden: PRESET_HIDDEN.to_vec(), iterations: PRESET_ITERATIONS, ..Config::default() }
}

fn with_algorithm(algorithm: Algorithm, c: Config) -> Config {
    Config { algorithm, ..c }
}

/// Variants of one preset as `(run name, config)`; seeds are left at 0.
pub fn preset(name: &str) -> Option<Vec<(String, Config)>> {
    let corner = base(Family::Corner);
    let runs: Vec<(&str, Config)> = match name {
        "corner-ours" => vec![("ours", corner)],
        "corner-baselines" => vec![
            ("ours", corner.clone()),
            ("maml-vpg", with_algorithm(Algorithm::MamlVpg, corner.clone())),
            ("emaml", with_algorithm(Algorithm::Emaml, corner.clone())),
            ("promp", with_algorithm(Algorithm::Promp, corner)),
        ],
        "corner-ablation-grid" => vec![
            ("ours", corner.clone()),
            ("vpg-inner", Config { inner_update: InnerUpdate::VpgImportance, ..corner.clone() }),
            ("reward-supervision", Config { supervision: Supervision::Reward, ..corner.clone() }),
            ("vanilla-dice", Config { phi_estimator: PhiEstimator::VanillaDice, ..corner.clone() }),
            ("emaml-based", Config { phi_estimator: PhiEstimator::Emaml, ..corner }),
        ],
        "adapt-sweep" => {
            let mut out = Vec::new();
            for (label, algorithm) in [("ours", Algorithm::Ours), ("maml-vpg", Algorithm::MamlVpg)] {
                for (n_pre, tasks) in SWEEP_PAIRS {
                    let c = Config {
                        algorithm,
                        n_pre_traj: n_pre,
                        meta_batch: tasks,
                        n_post_traj: SWEEP_POST_TOTAL / tasks,
                        desk_scale: SWEEP_SCALE,
                        ..corner.clone()
                    };
                    out.push((format!("sweep-{label}-{n_pre}x{tasks}"), c));
                }
            }
            return Some(out);
        }
        "semicircle" => {
            let semi = Config { n_pre_traj: 2, ..base(Family::Semicircle) };
            vec![
                ("ours", semi.clone()),
                ("ours-env-reward", Config { phi_estimator: PhiEstimator::EnvReward, ..semi.clone() }),
                ("maml-vpg", with_algorithm(Algorithm::MamlVpg, semi.clone())),
                ("promp", with_algorithm(Algorithm::Promp, semi)),
            ]
        }
        "dense" => vec![
            ("ours", base(Family::Dense)),
            ("maml-vpg", with_algorithm(Algorithm::MamlVpg, base(Family::Dense))),
        ],
        _ => return None,
    };
    Some(runs.into_iter().map(|(n, c)| (n.to_string(), c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in NAMES {
            let runs = preset(name).unwrap();
            assert!(!runs.is_empty());
            for (run, c) in &runs {
                c.validate().unwrap_or_else(|e| panic!("{name}/{run}: {e}"));
            }
            let mut names: Vec<&String> = runs.iter().map(|(n, _)| n).collect();
            names.dedup();
            assert_eq!(names.len(), runs.len(), "{name}: duplicate run names");
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn corner_ours_uses_reference_hyperparameters() {
        let (_, c) = &preset("corner-ours").unwrap()[0];
        assert_eq!((c.nstep, c.z_dim, c.outer_lr, c.horizon), (15, 32, 7e-4, 100));
        assert_eq!((c.meta_batch, c.n_pre_traj, c.n_post_traj), (20, 20, 20));
        assert_eq!(c.algorithm, Algorithm::Ours);
    }

    #[test]
    fn ablation_grid_has_five_variants() {
        let runs = preset("corner-ablation-grid").unwrap();
        assert_eq!(runs.len(), 5);
        assert!(runs.iter().any(|(_, c)| c.inner_update == InnerUpdate::VpgImportance));
        assert!(runs.iter().any(|(_, c)| c.supervision == Supervision::Reward));
    }

    #[test]
    fn sweep_keeps_ratios_and_records_scale() {
        let runs = preset("adapt-sweep").unwrap();
        assert_eq!(runs.len(), 8);
        for (_, c) in &runs {
            assert_eq!(c.n_pre_traj * c.meta_batch, 400);
            assert_eq!(c.n_post_traj * c.meta_batch, SWEEP_POST_TOTAL);
            assert_eq!(c.desk_scale, 0.5);
        }
    }

    #[test]
    fn semicircle_fixes_two_pre_trajectories() {
        for (_, c) in preset("semicircle").unwrap() {
            assert_eq!(c.n_pre_traj, 2);
            assert_eq!(c.env, Family::Semicircle);
        }
    }
}
