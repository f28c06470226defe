use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use deeplrr::io::format_real;
use deeplrr::{AlmState, SolverConfig};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// `iter,residual_inf,objective,mu`, one row per ALM iteration.
pub fn history_csv(state: &AlmState) -> String {
    let mut out = String::from("iter,residual_inf,objective,mu\n");
    for (i, ((r, o), m)) in state
        .residual_history
        .iter()
        .zip(&state.objective_history)
        .zip(&state.mu_history)
        .enumerate()
    {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            format_real(*r),
            format_real(*o),
            format_real(*m)
        );
    }
    out
}

/// Clustering quality of one repetition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunMetrics {
    pub run: usize,
    pub seed: u64,
    pub acc: f64,
    pub nmi: f64,
    pub f_score: f64,
    pub block_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

/// Mean and sample standard deviation (zero for a single value).
pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            mean: f64::NAN,
            std: f64::NAN,
        };
    }
    if values.iter().all(|&v| v == values[0]) {
        return Summary {
            mean: values[0],
            std: 0.0,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Summary { mean, std }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub acc: Summary,
    pub nmi: Summary,
    pub f_score: Summary,
    pub block_score: Summary,
}

impl MetricSummary {
    pub fn of(runs: &[RunMetrics]) -> Self {
        let col = |f: fn(&RunMetrics) -> f64| summarize(&runs.iter().map(f).collect::<Vec<_>>());
        MetricSummary {
            acc: col(|r| r.acc),
            nmi: col(|r| r.nmi),
            f_score: col(|r| r.f_score),
            block_score: col(|r| r.block_score),
        }
    }
}

/// Per-run rows followed by `mean` and `std` rows.
pub fn metrics_csv(runs: &[RunMetrics]) -> String {
    let mut out = String::from("run,seed,acc,nmi,f_score,block_score\n");
    for r in runs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.run,
            r.seed,
            format_real(r.acc),
            format_real(r.nmi),
            format_real(r.f_score),
            format_real(r.block_score)
        );
    }
    let s = MetricSummary::of(runs);
    for (name, pick) in [
        ("mean", (|s: &Summary| s.mean) as fn(&Summary) -> f64),
        ("std", |s: &Summary| s.std),
    ] {
        let _ = writeln!(
            out,
            "{name},,{},{},{},{}",
            format_real(pick(&s.acc)),
            format_real(pick(&s.nmi)),
            format_real(pick(&s.f_score)),
            format_real(pick(&s.block_score))
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerRecord {
    pub layer: usize,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub train_ms: f64,
}

/// Per-layer solver summary. Timings are left out so the file is reproducible.
pub fn layers_csv(records: &[LayerRecord]) -> String {
    let mut out = String::from("layer,lambda,iterations,converged,final_residual\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.layer,
            format_real(r.lambda),
            r.iterations,
            r.converged,
            format_real(r.final_residual)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigRecord {
    pub layers: usize,
    pub alpha: f64,
    pub lambda1: f64,
    pub rho: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub eta: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub clusters: usize,
    pub kmeans_restarts: usize,
}

impl From<&SolverConfig> for ConfigRecord {
    fn from(c: &SolverConfig) -> Self {
        ConfigRecord {
            layers: c.layers,
            alpha: c.alpha,
            lambda1: c.lambda1,
            rho: c.rho,
            mu0: c.mu0,
            mu_max: c.mu_max,
            eta: c.eta,
            eps: c.eps,
            max_iter: c.max_iter,
            seed: c.seed,
            clusters: c.clusters,
            kmeans_restarts: c.kmeans_restarts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Artifact {
    /// Relative to the run directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
}

/// Every regular file under `root`, sorted by path, excluding `skip`.
pub fn list_artifacts(root: &Path, skip: &[&str]) -> CliResult<Vec<Artifact>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> CliResult<()> {
        let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| CliError::io(dir, e))?;
            let path = entry.path();
            if path.is_dir() {
                walk(&path, out)?;
            } else {
                out.push(path);
            }
        }
        Ok(())
    }
    let mut paths = Vec::new();
    walk(root, &mut paths)?;
    let mut artifacts = Vec::with_capacity(paths.len());
    for p in paths {
        let rel = p.strip_prefix(root).unwrap_or(&p);
        let rel = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        if skip.contains(&rel.as_str()) {
            continue;
        }
        let bytes = std::fs::metadata(&p).map_err(|e| CliError::io(&p, e))?.len();
        artifacts.push(Artifact { path: rel, bytes });
    }
    artifacts.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(artifacts)
}
