//! Run directories: config snapshot, metrics CSV, task snapshots and
//! checkpoints.
//!
//! ```text
//! <dir>/config.txt
//! <dir>/metrics.csv
//! <dir>/tasks.txt
//! <dir>/checkpoints/iter_00050.txt
//! ```

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use mexplore_core::exec::Executor;
use mexplore_core::{Config, IterationMetrics, ParamSet, Sequential, Tensor};

use crate::config_file;
use crate::learner::{Learner, PoolExecutor};

pub const CSV_HEADER: &str =
    "iteration,pre_return_mean,post_return_mean,inner_loss,phi_grad_norm,theta_grad_norm,phi_grad_rel_var,wall_time_s";

/// Shortest text that parses back to the same `f64`.
pub fn metrics_row(m: &IterationMetrics) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        m.iteration,
        m.pre_return_mean,
        m.post_return_mean,
        m.inner_loss,
        m.phi_grad_norm,
        m.theta_grad_norm,
        m.phi_grad_rel_var,
        m.wall_time_s
    )
}

pub fn parse_metrics_row(line: &str) -> anyhow::Result<IterationMetrics> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 8 {
        bail!("expected 8 columns, got {}", fields.len());
    }
    let f = |i: usize| -> anyhow::Result<f64> { fields[i].parse().with_context(|| format!("column {}", i + 1)) };
    Ok(IterationMetrics {
        iteration: fields[0].parse().context("iteration column")?,
        pre_return_mean: f(1)?,
        post_return_mean: f(2)?,
        inner_loss: f(3)?,
        phi_grad_norm: f(4)?,
        theta_grad_norm: f(5)?,
        phi_grad_rel_var: f(6)?,
        wall_time_s: f(7)?,
    })
}

/// A finished or partial run as read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub name: String,
    pub config: Config,
    pub rows: Vec<IterationMetrics>,
}

impl RunLog {
    pub fn load(dir: &Path) -> anyhow::Result<Self> {
        let config_path = dir.join("config.txt");
        let text = fs::read_to_string(&config_path).with_context(|| format!("reading {}", config_path.display()))?;
        let config = config_file::parse(&text).with_context(|| format!("parsing {}", config_path.display()))?;
        let csv_path = dir.join("metrics.csv");
        let csv = fs::read_to_string(&csv_path).with_context(|| format!("reading {}", csv_path.display()))?;
        let mut lines = csv.lines();
        if lines.next() != Some(CSV_HEADER) {
            bail!("{}: unexpected header", csv_path.display());
        }
        let rows = lines
            .enumerate()
            .map(|(i, l)| parse_metrics_row(l).with_context(|| format!("{} line {}", csv_path.display(), i + 2)))
            .collect::<anyhow::Result<_>>()?;
        let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| dir.display().to_string());
        Ok(Self { name, config, rows })
    }

    pub fn is_complete(&self) -> bool {
        self.rows.len() == self.config.iterations
    }

    /// Mean post-update return over the last `k` rows.
    pub fn final_post(&self, k: usize) -> f64 {
        tail_mean(&self.rows, k, |m| m.post_return_mean)
    }

    pub fn final_pre(&self, k: usize) -> f64 {
        tail_mean(&self.rows, k, |m| m.pre_return_mean)
    }
}

pub(crate) fn tail_mean(rows: &[IterationMetrics], k: usize, f: impl Fn(&IterationMetrics) -> f64) -> f64 {
    let k = k.min(rows.len()).max(1);
    let tail = &rows[rows.len().saturating_sub(k)..];
    tail.iter().map(f).sum::<f64>() / tail.len().max(1) as f64
}

pub fn checkpoint_path(dir: &Path, iteration: u64) -> PathBuf {
    dir.join("checkpoints").join(format!("iter_{iteration:05}.txt"))
}

/// Text checkpoint: an `iteration N` line, then per tensor a
/// `name rows cols` line and one line of values.
pub fn checkpoint_text(iteration: u64, params: &ParamSet) -> String {
    let mut out = format!("iteration {iteration}\n");
    for (name, t) in params.iter() {
        writeln!(out, "{name} {} {}", t.rows(), t.cols()).expect("writing to a String");
        let vals: Vec<String> = t.data().iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", vals.join(" ")).expect("writing to a String");
    }
    out
}

pub fn parse_checkpoint(text: &str) -> anyhow::Result<(u64, ParamSet)> {
    let mut lines = text.lines();
    let iteration = lines
        .next()
        .and_then(|l| l.strip_prefix("iteration "))
        .context("missing `iteration` line")?
        .trim()
        .parse()
        .context("iteration number")?;
    let mut params = ParamSet::new();
    while let Some(head) = lines.next() {
        if head.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = head.split_whitespace().collect();
        let [name, rows, cols] = parts[..] else { bail!("bad tensor header `{head}`") };
        let (rows, cols): (usize, usize) = (rows.parse()?, cols.parse()?);
        let data: Vec<f64> = lines
            .next()
            .with_context(|| format!("values of `{name}`"))?
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .with_context(|| format!("values of `{name}`"))?;
        if data.len() != rows * cols {
            bail!("`{name}`: {} values for a {rows}x{cols} tensor", data.len());
        }
        params.push(name, Tensor::from_vec(rows, cols, data))?;
    }
    Ok((iteration, params))
}

fn tasks_line(iteration: u64, tasks: &[mexplore_core::envs::Task]) -> String {
    let goals: Vec<String> = tasks.iter().map(|t| format!("{:e},{:e}", t.goal[0], t.goal[1])).collect();
    format!("{iteration} {}", goals.join(" "))
}

/// Trains `config` and writes the run directory, flushing every row.
/// Progress lines go to `progress` when given.
pub fn run(config: &Config, dir: &Path, mut progress: Option<&mut dyn Write>) -> anyhow::Result<RunLog> {
    config.validate()?;
    fs::create_dir_all(dir.join("checkpoints")).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config.txt"), config_file::to_text(config))?;
    let mut csv = BufWriter::new(File::create(dir.join("metrics.csv"))?);
    writeln!(csv, "{CSV_HEADER}")?;
    let mut tasks_out = BufWriter::new(File::create(dir.join("tasks.txt"))?);

    let pool = if config.parallel { Some(PoolExecutor::from_env()?) } else { None };
    let mut learner = Learner::new(config.clone())?;
    let start = Instant::now();
    let mut rows = Vec::with_capacity(config.iterations);
    for _ in 0..config.iterations {
        let it = learner.iteration();
        writeln!(tasks_out, "{}", tasks_line(it, &learner.tasks(it)?))?;
        let mut m = match &pool {
            Some(p) => step_with(&mut learner, p)?,
            None => step_with(&mut learner, &Sequential)?,
        };
        if config.log_wall_time {
            m.wall_time_s = start.elapsed().as_secs_f64();
        }
        writeln!(csv, "{}", metrics_row(&m))?;
        csv.flush()?;
        tasks_out.flush()?;
        if let Some(p) = progress.as_deref_mut() {
            writeln!(
                p,
                "iter {:4}  pre {:9.3}  post {:9.3}  {:7.1}s",
                m.iteration,
                m.pre_return_mean,
                m.post_return_mean,
                start.elapsed().as_secs_f64()
            )?;
        }
        rows.push(m);
        let done = learner.iteration();
        if done % config.checkpoint_every as u64 == 0 {
            fs::write(checkpoint_path(dir, done), checkpoint_text(done, &learner.param_set()))?;
        }
    }
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(RunLog { name, config: config.clone(), rows })
}

fn step_with<E: Executor>(learner: &mut Learner, exec: &E) -> anyhow::Result<IterationMetrics> {
    Ok(learner.step(exec)?)
}

/// Loads `dir` when it holds a complete run of exactly `config`, otherwise
/// trains it from scratch. Replay is deterministic, so a cached log is the
/// log a fresh run would write.
pub fn run_or_load(config: &Config, dir: &Path, progress: Option<&mut dyn Write>) -> anyhow::Result<RunLog> {
    if let Ok(log) = RunLog::load(dir) {
        if log.config == *config && log.is_complete() {
            return Ok(log);
        }
    }
    run(config, dir, progress)
}
