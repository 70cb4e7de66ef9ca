//! Experiment harness: config files, presets, run logs, plots and summaries.

pub mod compare;
pub mod config_file;
pub mod learner;
pub mod oracle;
pub mod plot;
pub mod presets;
pub mod runlog;

pub use learner::{Learner, PoolExecutor, THREADS_VAR};
pub use runlog::{run, run_or_load, RunLog};
