//! Writes a finished run to `<dir>/<experiment>.{csv,json}` and any DOT
//! dumps. Only the JSON carries wall time, so the CSV is reproducible byte
//! for byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::experiments::{schema_tag, RunOutput};

#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub dots: Vec<PathBuf>,
}

pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, run: &RunOutput, wall_time: Duration) -> Result<OutputPaths> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = run.experiment.name();
    let csv = dir.join(format!("{name}.csv"));
    fs::write(&csv, &run.csv).with_context(|| format!("writing {}", csv.display()))?;
    let doc = json!({
        "experiment": name,
        "schema": schema_tag(run.experiment),
        "toolkitVersion": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "config": cfg,
        "wallTimeSeconds": wall_time.as_secs_f64(),
        "records": run.records,
        "summary": run.summary,
    });
    let json = dir.join(format!("{name}.json"));
    fs::write(&json, serde_json::to_string_pretty(&doc)? + "\n").with_context(|| format!("writing {}", json.display()))?;
    let mut dots = Vec::new();
    for (stem, src) in &run.dots {
        let path = dir.join(format!("{stem}.dot"));
        fs::write(&path, src).with_context(|| format!("writing {}", path.display()))?;
        dots.push(path);
    }
    Ok(OutputPaths { csv, json, dots })
}
