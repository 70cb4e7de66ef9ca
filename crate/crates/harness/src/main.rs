use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use mexplore::{compare, config_file, oracle, plot, presets, runlog, RunLog};
use mexplore_core::Config;

#[derive(Parser)]
#[command(name = "mexplore", version, about = "Meta-RL experiments on point-navigation tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train from a config file or every variant of a preset.
    Run(RunArgs),
    /// Train one single-task agent per corner as a reference.
    Oracle(RunArgs),
    /// Draw post-update return curves as SVG.
    Plot {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "post-update return")]
        title: String,
        #[arg(required = true)]
        runs: Vec<PathBuf>,
    },
    /// Final-window summary of runs.
    Compare {
        /// Iterations in the final window.
        #[arg(long, default_value_t = 20)]
        last: usize,
        #[arg(required = true)]
        runs: Vec<PathBuf>,
    },
    /// List presets, or write one's config files.
    Presets {
        name: Option<String>,
        /// Directory for the config files.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip runs whose directory already holds a complete log of the same config.
    #[arg(long)]
    resume: bool,
    #[arg(long, short)]
    quiet: bool,
}

fn read_config(path: &Path) -> anyhow::Result<Config> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    config_file::parse(&text).with_context(|| format!("in {}", path.display()))
}

/// `(run directory, config)` for every run requested.
fn planned(args: &RunArgs) -> anyhow::Result<Vec<(PathBuf, Config)>> {
    let root = args.out.clone().unwrap_or_else(|| PathBuf::from("runs"));
    let mut jobs = Vec::new();
    if let Some(path) = &args.config {
        let mut c = read_config(path)?;
        if let Some(s) = args.seed {
            c.seed = s;
        }
        let dir = match &args.out {
            Some(d) => d.clone(),
            None => {
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
                root.join(format!("{stem}-s{}", c.seed))
            }
        };
        jobs.push((dir, c));
    } else if let Some(name) = &args.preset {
        let Some(runs) = presets::preset(name) else {
            bail!("unknown preset `{name}`; known: {}", presets::NAMES.join(", "))
        };
        for (run, mut c) in runs {
            c.seed = args.seed.unwrap_or(c.seed);
            jobs.push((root.join(format!("{run}-s{}", c.seed)), c));
        }
    }
    Ok(jobs)
}

fn load_runs(dirs: &[PathBuf]) -> anyhow::Result<Vec<RunLog>> {
    dirs.iter().map(|d| RunLog::load(d)).collect()
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            for (dir, c) in planned(&args)? {
                let mut stderr = io::stderr();
                let progress: Option<&mut dyn io::Write> = if args.quiet { None } else { Some(&mut stderr) };
                eprintln!("run {}", dir.display());
                let log = if args.resume { runlog::run_or_load(&c, &dir, progress)? } else { runlog::run(&c, &dir, progress)? };
                print!("{}", compare::table(&[log], 20)?);
            }
        }
        Command::Oracle(args) => {
            for (dir, c) in planned(&args)? {
                let curves = if args.resume { oracle::run_or_load(&c, &dir)? } else { oracle::run(&c, &dir)? };
                for k in &curves {
                    println!("goal {:>5},{:<5} final {:.3}", k.goal[0], k.goal[1], k.final_return(20));
                }
                println!("mean {:.3}", oracle::mean_final_return(&curves, 20));
            }
        }
        Command::Plot { out, title, runs } => {
            let logs = load_runs(&runs)?;
            let series: Vec<plot::Series> = logs.iter().map(plot::Series::post_return).collect();
            fs::write(&out, plot::render(&series, &title)?).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Compare { last, runs } => print!("{}", compare::table(&load_runs(&runs)?, last)?),
        Command::Presets { name: None, .. } => {
            for name in presets::NAMES {
                let runs = presets::preset(name).expect("listed preset exists");
                let names: Vec<&str> = runs.iter().map(|(n, _)| n.as_str()).collect();
                println!("{name}: {}", names.join(" "));
            }
        }
        Command::Presets { name: Some(name), write } => {
            let Some(runs) = presets::preset(&name) else { bail!("unknown preset `{name}`") };
            for (run, c) in runs {
                match &write {
                    Some(dir) => {
                        fs::create_dir_all(dir)?;
                        fs::write(dir.join(format!("{run}.cfg")), config_file::to_text(&c))?;
                    }
                    None => println!("# {run}\n{}", config_file::to_text(&c)),
                }
            }
        }
    }
    Ok(())
}
