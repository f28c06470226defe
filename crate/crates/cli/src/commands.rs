use std::path::{Path, PathBuf};
use std::time::Instant;

use deeplrr::network::SavedModel;
use deeplrr::synth::{CorruptionKind, CorruptionSpec};
use deeplrr::{
    block_diagonal_score, build_affinity, evaluate, generate_subspaces, ncut_from_affinity, read_labels, read_matrix,
    write_labels, write_matrix, DataMatrix, LabelVector, Matrix, MatrixFormat, NetworkModel, SolverConfig,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{
    input_format, ClusterArgs, Command, GridArgs, HeatmapArgs, PipelineArgs, SynthArgs, SynthParams, TrainArgs,
};
use crate::error::{CliError, CliResult};
use crate::heatmap::encode_pgm;
use crate::report::{
    create_dir, history_csv, layers_csv, list_artifacts, metrics_csv, write_file, Artifact, ConfigRecord, LayerRecord,
    MetricSummary, RunMetrics,
};

/// Offset separating the corruption stream from the data stream of the same seed.
const CORRUPTION_SEED_OFFSET: u64 = 0x5DEE_CE66;

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Synth(a) => {
            let (data, labels) = synth(&a)?;
            println!("wrote {} and {}", data.display(), labels.display());
        }
        Command::Train(a) => {
            let records = train(&a)?;
            for r in &records {
                println!(
                    "layer {}: {} iterations, residual {:.3e}, converged {}, {:.1} ms",
                    r.layer, r.iterations, r.final_residual, r.converged, r.train_ms
                );
            }
        }
        Command::Cluster(a) => {
            if let Some(s) = cluster(&a)? {
                print_summary(&s);
            }
        }
        Command::Grid(a) => {
            let cells = grid(&a)?;
            let failed = cells.iter().filter(|c| c.outcome.is_err()).count();
            println!(
                "{} cells, {} failed; wrote {}",
                cells.len(),
                failed,
                a.out.join("grid.csv").display()
            );
        }
        Command::Heatmap(a) => heatmap(&a)?,
        Command::Pipeline(a) => {
            let manifest = pipeline(&a)?;
            if let Some(last) = manifest.layers.last() {
                print_summary(&last.metrics);
            }
            println!(
                "{} artifacts listed in {}",
                manifest.artifacts.len(),
                a.out.join("manifest.json").display()
            );
        }
    }
    Ok(())
}

fn print_summary(s: &MetricSummary) {
    println!(
        "acc {:.4} ± {:.4}  nmi {:.4} ± {:.4}  f {:.4} ± {:.4}  block {:.4}",
        s.acc.mean, s.acc.std, s.nmi.mean, s.nmi.std, s.f_score.mean, s.f_score.std, s.block_score.mean
    );
}

/// Clean data from the subspace model, then the optional corruption.
pub fn synthesize(params: &SynthParams, seed: u64) -> CliResult<(DataMatrix, LabelVector)> {
    let (mut x, labels) = generate_subspaces(&params.spec(seed))?;
    let corruption_seed = seed.wrapping_add(CORRUPTION_SEED_OFFSET);
    if let Some(v) = params.gaussian_noise {
        x = CorruptionSpec {
            kind: CorruptionKind::Gaussian {
                variance_255: v,
                clamp: params.clamp,
            },
            seed: corruption_seed,
        }
        .apply(&x)?;
    }
    if let Some(f) = params.corrupt_pixels {
        x = CorruptionSpec {
            kind: CorruptionKind::Pixel { fraction: f },
            seed: corruption_seed.wrapping_add(1),
        }
        .apply(&x)?;
    }
    Ok((x, labels))
}

fn write_dataset(
    x: &DataMatrix,
    labels: &LabelVector,
    dir: &Path,
    format: MatrixFormat,
) -> CliResult<(PathBuf, PathBuf)> {
    create_dir(dir)?;
    let data = dir.join(format!("X.{}", format.extension()));
    let label_path = dir.join("labels.txt");
    write_matrix(x, &data, format)?;
    write_labels(labels, &label_path)?;
    Ok((data, label_path))
}

/// Returns the data and label paths.
pub fn synth(args: &SynthArgs) -> CliResult<(PathBuf, PathBuf)> {
    let (x, labels) = synthesize(&args.params, args.seed)?;
    write_dataset(&x, &labels, &args.out, args.format.into())
}

/// Trains layer by layer, timing each, and writes the model, one history
/// file per layer and `layers.csv` into `out`.
pub fn train_to_dir(x: &DataMatrix, cfg: &SolverConfig, out: &Path) -> CliResult<(NetworkModel, Vec<LayerRecord>)> {
    let mut model = NetworkModel::new(x, cfg)?;
    let mut records = Vec::with_capacity(cfg.layers);
    for l in 1..=cfg.layers {
        let start = Instant::now();
        let layer = model.train_next_layer()?;
        records.push(LayerRecord {
            layer: l,
            lambda: layer.lambda,
            iterations: layer.state.iter,
            converged: layer.state.converged,
            final_residual: layer.state.final_residual().unwrap_or(f64::NAN),
            train_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    model.save(out)?;
    for (i, layer) in model.layers.iter().enumerate() {
        write_file(
            &out.join(format!("layer{}_history.csv", i + 1)),
            history_csv(&layer.state),
        )?;
    }
    write_file(&out.join("layers.csv"), layers_csv(&records))?;
    Ok((model, records))
}

pub fn train(args: &TrainArgs) -> CliResult<Vec<LayerRecord>> {
    let cfg = args.config.resolve()?;
    let x = read_matrix(&args.input, input_format(&args.input, args.format))?;
    Ok(train_to_dir(&x, &cfg, &args.out)?.1)
}

/// `repeat` clusterings of `z` with seeds `seed + r`; labels of the first
/// run, plus per-run metrics when `truth` is given.
pub fn cluster_repeated(
    z: &Matrix,
    truth: Option<&LabelVector>,
    k: usize,
    seed: u64,
    restarts: usize,
    repeat: usize,
) -> CliResult<(LabelVector, Vec<RunMetrics>)> {
    if repeat == 0 {
        return Err(CliError::Usage("--repeat must be positive".into()));
    }
    if let Some(t) = truth {
        if t.len() != z.ncols() {
            return Err(deeplrr::Error::LengthMismatch(t.len(), z.ncols()).into());
        }
    }
    let affinity = build_affinity(z)?;
    let block_score = truth.map(|t| block_diagonal_score(&affinity, t)).transpose()?;
    let results: Vec<CliResult<(LabelVector, Option<RunMetrics>)>> = (0..repeat)
        .into_par_iter()
        .map(|r| {
            let run_seed = seed.wrapping_add(r as u64);
            let res = ncut_from_affinity(affinity.clone(), k, run_seed, restarts)?;
            let metrics = match truth {
                Some(t) => {
                    let m = evaluate(t.as_slice(), res.labels.as_slice())?;
                    Some(RunMetrics {
                        run: r,
                        seed: run_seed,
                        acc: m.acc,
                        nmi: m.nmi,
                        f_score: m.f_score,
                        block_score: block_score.unwrap_or(0.0),
                    })
                }
                None => None,
            };
            Ok((res.labels, metrics))
        })
        .collect();
    let mut first = None;
    let mut runs = Vec::new();
    for res in results {
        let (labels, metrics) = res?;
        first.get_or_insert(labels);
        runs.extend(metrics);
    }
    Ok((first.expect("repeat >= 1"), runs))
}

/// Writes `pred_labels.txt` and, with truth, `metrics.csv`.
pub fn cluster(args: &ClusterArgs) -> CliResult<Option<MetricSummary>> {
    let model = SavedModel::load(&args.model)?;
    let l = args.layer.unwrap_or(model.layers.len());
    let params = model.layer(l)?;
    let truth = args.truth.as_ref().map(read_labels).transpose()?;
    let cfg = &model.config;
    let (labels, runs) = cluster_repeated(
        &params.z,
        truth.as_ref(),
        args.clusters.unwrap_or(cfg.clusters),
        args.seed.unwrap_or(cfg.seed),
        args.kmeans_restarts.unwrap_or(cfg.kmeans_restarts),
        args.repeat,
    )?;
    create_dir(&args.out)?;
    write_labels(&labels, args.out.join("pred_labels.txt"))?;
    if truth.is_none() {
        return Ok(None);
    }
    write_file(&args.out.join("metrics.csv"), metrics_csv(&runs))?;
    Ok(Some(MetricSummary::of(&runs)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub index: usize,
    pub lambda1: f64,
    pub alpha: f64,
    pub rho: f64,
    pub layers: usize,
    pub outcome: Result<MetricSummary, String>,
}

fn grid_csv(cells: &[GridCell]) -> String {
    use deeplrr::io::format_real as f;
    let mut out = String::from(
        "cell,lambda1,alpha,rho,layers,status,acc_mean,acc_std,nmi_mean,nmi_std,f_score_mean,f_score_std,block_score_mean,block_score_std,error\n",
    );
    for c in cells {
        let head = format!("{},{},{},{},{}", c.index, f(c.lambda1), f(c.alpha), f(c.rho), c.layers);
        match &c.outcome {
            Ok(s) => {
                let vals: Vec<String> = [s.acc, s.nmi, s.f_score, s.block_score]
                    .iter()
                    .flat_map(|m| [f(m.mean), f(m.std)])
                    .collect();
                out.push_str(&format!("{head},ok,{},\n", vals.join(",")));
            }
            Err(e) => {
                let msg = e.replace('"', "'");
                out.push_str(&format!("{head},failed,,,,,,,,,\"{msg}\"\n"));
            }
        }
    }
    out
}

fn run_cell(
    x: &DataMatrix,
    truth: &LabelVector,
    cfg: &SolverConfig,
    repeat: usize,
    dir: &Path,
) -> CliResult<MetricSummary> {
    cfg.validate()?;
    create_dir(dir)?;
    let mut model = NetworkModel::new(x, cfg)?;
    for _ in 0..cfg.layers {
        model.train_next_layer()?;
    }
    for (i, layer) in model.layers.iter().enumerate() {
        write_file(
            &dir.join(format!("layer{}_history.csv", i + 1)),
            history_csv(&layer.state),
        )?;
    }
    let z = &model.layer(cfg.layers)?.params.z;
    let (labels, runs) = cluster_repeated(z, Some(truth), cfg.clusters, cfg.seed, cfg.kmeans_restarts, repeat)?;
    write_labels(&labels, dir.join("pred_labels.txt"))?;
    write_file(&dir.join("metrics.csv"), metrics_csv(&runs))?;
    Ok(MetricSummary::of(&runs))
}

/// Cartesian sweep over lambda1 x alpha x rho x layers, cells in parallel.
/// A failing cell is recorded and the sweep continues.
pub fn grid(args: &GridArgs) -> CliResult<Vec<GridCell>> {
    let base = args.base_config()?;
    if args.repeat == 0 {
        return Err(CliError::Usage("--repeat must be positive".into()));
    }
    let or_base = |v: &Vec<f64>, b: f64| if v.is_empty() { vec![b] } else { v.clone() };
    let lambdas = or_base(&args.lambda1, base.lambda1);
    let alphas = or_base(&args.alpha, base.alpha);
    let rhos = or_base(&args.rho, base.rho);
    let depths = if args.layers.is_empty() {
        vec![base.layers]
    } else {
        args.layers.clone()
    };

    let x = read_matrix(&args.input, input_format(&args.input, args.format))?;
    let truth = read_labels(&args.truth)?;
    let mut specs = Vec::new();
    for &lambda1 in &lambdas {
        for &alpha in &alphas {
            for &rho in &rhos {
                for &layers in &depths {
                    specs.push((specs.len(), lambda1, alpha, rho, layers));
                }
            }
        }
    }
    create_dir(&args.out)?;
    let cells: Vec<GridCell> = specs
        .into_par_iter()
        .map(|(index, lambda1, alpha, rho, layers)| {
            let cfg = SolverConfig {
                lambda1,
                alpha,
                rho,
                layers,
                ..base.clone()
            };
            let dir = args.out.join(format!("cell{index:03}"));
            let outcome = run_cell(&x, &truth, &cfg, args.repeat, &dir).map_err(|e| e.to_string());
            GridCell {
                index,
                lambda1,
                alpha,
                rho,
                layers,
                outcome,
            }
        })
        .collect();
    write_file(&args.out.join("grid.csv"), grid_csv(&cells))?;
    Ok(cells)
}

pub fn heatmap_image(m: &Matrix, affinity: bool) -> CliResult<Vec<u8>> {
    if affinity {
        Ok(encode_pgm(build_affinity(m)?.matrix()))
    } else {
        Ok(encode_pgm(m))
    }
}

pub fn heatmap(args: &HeatmapArgs) -> CliResult<()> {
    let m = read_matrix(&args.input, input_format(&args.input, args.format))?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_file(&args.out, heatmap_image(m.as_matrix(), args.affinity)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineLayer {
    #[serde(flatten)]
    pub training: LayerRecord,
    pub metrics: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub seed: u64,
    pub repetitions: usize,
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub subspaces: usize,
    pub samples_per_subspace: usize,
    pub noise_variance: f64,
    pub config: ConfigRecord,
    pub layers: Vec<PipelineLayer>,
    pub artifacts: Vec<Artifact>,
}

/// Data, model, clustering of every layer, affinity heatmap of the deepest
/// layer and `manifest.json`, all under `args.out`.
pub fn pipeline(args: &PipelineArgs) -> CliResult<Manifest> {
    let cfg = args.config.resolve().map_err(|e| e.in_stage("config"))?;
    let out = &args.out;
    create_dir(out)?;

    let (x, truth) = synthesize(&args.synth, cfg.seed).map_err(|e| e.in_stage("synth"))?;
    write_dataset(&x, &truth, &out.join("data"), args.format.into()).map_err(|e| e.in_stage("synth"))?;

    let (model, records) = train_to_dir(&x, &cfg, &out.join("model")).map_err(|e| e.in_stage("train"))?;

    let cluster_dir = out.join("cluster");
    create_dir(&cluster_dir)?;
    let mut layers = Vec::with_capacity(records.len());
    for record in records {
        let l = record.layer;
        let z = &model.layers[l - 1].params.z;
        let (labels, runs) = cluster_repeated(
            z,
            Some(&truth),
            cfg.clusters,
            cfg.seed,
            cfg.kmeans_restarts,
            args.repeat,
        )
        .map_err(|e| e.in_stage("cluster"))?;
        if l == cfg.layers {
            write_labels(&labels, cluster_dir.join("pred_labels.txt"))
                .map_err(|e| CliError::from(e).in_stage("cluster"))?;
            write_file(&cluster_dir.join("metrics.csv"), metrics_csv(&runs))?;
        } else {
            write_file(&cluster_dir.join(format!("metrics_layer{l}.csv")), metrics_csv(&runs))?;
        }
        layers.push(PipelineLayer {
            training: record,
            metrics: MetricSummary::of(&runs),
        });
    }

    let deepest = &model.layers[cfg.layers - 1].params.z;
    let image = heatmap_image(deepest, true).map_err(|e| e.in_stage("heatmap"))?;
    write_file(&out.join("heatmap.pgm"), image)?;

    let manifest = Manifest {
        seed: cfg.seed,
        repetitions: args.repeat,
        ambient_dim: args.synth.ambient_dim,
        subspace_dim: args.synth.subspace_dim,
        subspaces: args.synth.subspaces,
        samples_per_subspace: args.synth.samples_per_subspace,
        noise_variance: args.synth.noise_variance,
        config: ConfigRecord::from(&cfg),
        layers,
        artifacts: list_artifacts(out, &["manifest.json"])?,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&out.join("manifest.json"), json + "\n")?;
    Ok(manifest)
}
