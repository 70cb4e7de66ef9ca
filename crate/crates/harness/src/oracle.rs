//! Per-corner single-task reference agents.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use mexplore_core::baselines::train_oracle;
use mexplore_core::envs::{Task, CORNERS};
use mexplore_core::Config;

use crate::config_file;

/// Learning curve of the agent trained on one goal.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleCurve {
    pub goal: [f64; 2],
    pub returns: Vec<f64>,
}

impl OracleCurve {
    pub fn final_return(&self, k: usize) -> f64 {
        let k = k.clamp(1, self.returns.len().max(1));
        let tail = &self.returns[self.returns.len().saturating_sub(k)..];
        tail.iter().sum::<f64>() / tail.len().max(1) as f64
    }
}

/// Mean over corners of each agent's final-window return.
pub fn mean_final_return(curves: &[OracleCurve], k: usize) -> f64 {
    curves.iter().map(|c| c.final_return(k)).sum::<f64>() / curves.len().max(1) as f64
}

/// Trains one agent per corner for `config.iterations` iterations and writes
/// `config.txt` and `oracle.csv` (`goal_x,goal_y,iteration,return`).
pub fn run(config: &Config, dir: &Path) -> anyhow::Result<Vec<OracleCurve>> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.txt"), config_file::to_text(config))?;
    let mut curves = Vec::new();
    for (i, goal) in CORNERS.iter().enumerate() {
        let task = Task::new(config.env, *goal);
        let returns = train_oracle(config, task, config.iterations, i as u64)?;
        curves.push(OracleCurve { goal: *goal, returns });
    }
    fs::write(dir.join("oracle.csv"), to_csv(&curves))?;
    Ok(curves)
}

fn to_csv(curves: &[OracleCurve]) -> String {
    let mut out = String::from("goal_x,goal_y,iteration,return\n");
    for c in curves {
        for (i, r) in c.returns.iter().enumerate() {
            let _ = writeln!(out, "{},{},{i},{r}", c.goal[0], c.goal[1]);
        }
    }
    out
}

pub fn load(dir: &Path) -> anyhow::Result<(Config, Vec<OracleCurve>)> {
    let config = config_file::parse(&fs::read_to_string(dir.join("config.txt"))?)?;
    let text = fs::read_to_string(dir.join("oracle.csv")).context("reading oracle.csv")?;
    let mut curves: Vec<OracleCurve> = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            bail!("bad oracle row `{line}`");
        }
        let goal = [f[0].parse()?, f[1].parse()?];
        let r: f64 = f[3].parse()?;
        match curves.last_mut() {
            Some(c) if c.goal == goal => c.returns.push(r),
            _ => curves.push(OracleCurve { goal, returns: vec![r] }),
        }
    }
    Ok((config, curves))
}

/// Reuses `dir` when it holds complete curves for exactly `config`.
pub fn run_or_load(config: &Config, dir: &Path) -> anyhow::Result<Vec<OracleCurve>> {
    if let Ok((c, curves)) = load(dir) {
        if c == *config && curves.len() == CORNERS.len() && curves.iter().all(|k| k.returns.len() == config.iterations) {
            return Ok(curves);
        }
    }
    run(config, dir)
}
