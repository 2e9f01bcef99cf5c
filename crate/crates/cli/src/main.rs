use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;
use perconet_cli::{run_with_threads, validate_value, write_outputs, Experiment};
use serde_json::Value;

/// Seeded percolation and entanglement experiments.
#[derive(Parser, Debug)]
#[command(name = "perconet", version)]
struct Args {
    /// One of: sample, events, blockScaling, extract, verifyRules, entPerc,
    /// squareDouble, subcriticalScaling.
    experiment: String,
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: config `out`, else the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: config `threads`, else all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    match try_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn try_main() -> Result<()> {
    let args = Args::parse();
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", args.config.display()))?;
    if let Some(obj) = value.as_object_mut() {
        // flags win over the file
        obj.entry("experiment").or_insert_with(|| Value::from(args.experiment.clone()));
        if let Some(s) = args.seed {
            obj.insert("seed".into(), s.into());
        }
        if let Some(t) = args.threads {
            obj.insert("threads".into(), t.into());
        }
        if let Some(o) = &args.out {
            obj.insert("out".into(), o.display().to_string().into());
        }
    }
    let cfg = validate_value(&value)?;
    if cfg.experiment.name() != args.experiment {
        let known = Experiment::ALL.iter().any(|e| e.name() == args.experiment);
        anyhow::bail!(
            "{} `{}` but the config is for `{}`",
            if known { "command is" } else { "unknown experiment" },
            args.experiment,
            cfg.experiment
        );
    }
    let dir = PathBuf::from(cfg.out.clone().unwrap_or_else(|| ".".into()));
    let start = Instant::now();
    let run = run_with_threads(&cfg, cfg.threads)?;
    let paths = write_outputs(&dir, &cfg, &run, start.elapsed())?;
    println!("{}", paths.csv.display());
    println!("{}", paths.json.display());
    for d in &paths.dots {
        println!("{}", d.display());
    }
    Ok(())
}
