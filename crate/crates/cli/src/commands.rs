use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rtd_core::datasets::{generate, load_csv, save_csv, DatasetName, DatasetSpec};
use rtd_core::grad::{rtd_subgradient_with, SubgradientOptions};
use rtd_core::metrics::{evaluate, topoae_loss, EvalOptions, EvalReport, DEFAULT_TRIPLETS};
use rtd_core::model::{encode, train, Checkpoint, EpochStats, TrainConfig};
use rtd_core::optimize::{minimize_rtd, OptimizerConfig};
use rtd_core::{pairwise_distances, rips_barcode, Barcode, PointCloud};
use serde::Serialize;

use crate::config::{parse_json, ExperimentConfig};
use crate::error::{usage, CliResult};
use crate::manifest::{sidecar, RunManifest};
use crate::plot::{barcode_svg, scatter_svg};
use crate::{Command, PlotKind};

pub(crate) fn dispatch(cmd: Command, stdout: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Barcode { input, dims, max_value, out } => barcode(&input, dims, max_value, out.as_deref(), stdout),
        Command::Rtd { a, b, variant, grad, grad_tilde, bypass, topoae } => {
            let opts = SubgradientOptions { minimum_bypass: bypass, variant };
            rtd_cmd(&a, &b, opts, grad.as_deref(), grad_tilde.as_deref(), topoae, stdout)
        }
        Command::Train { config, out, seeds, epochs, lambda } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            override_common(&mut cfg, out, seeds);
            let t = cfg.train.get_or_insert_with(TrainConfig::default);
            if let Some(e) = epochs {
                t.epochs = e;
                t.rtd_start_epoch = t.rtd_start_epoch.min(e);
            }
            if let Some(l) = lambda {
                t.lambda = l;
            }
            cfg.validate()?;
            train_cmd(&cfg, &config, stdout)
        }
        Command::Reduce { checkpoint, input, out } => reduce(&checkpoint, &input, &out),
        Command::Eval { x, z, report, triplets, seed, h1, sample_size, resamples } => {
            let opts = EvalOptions {
                num_triplets: triplets.unwrap_or(DEFAULT_TRIPLETS),
                seed,
                include_h1: h1,
                sample_size,
                resamples,
            };
            if opts.num_triplets == 0 {
                return usage("--triplets must be positive");
            }
            eval_cmd(&x, &z, &report, &opts, stdout)
        }
        Command::Gen { spec, out, n, seed, dim } => gen(&spec, &out, n, seed, dim),
        Command::Morph { config, out, seeds, steps, lr } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            override_common(&mut cfg, out, seeds);
            let o = cfg.optimizer.get_or_insert_with(OptimizerConfig::default);
            if let Some(s) = steps {
                o.steps = s;
            }
            if let Some(r) = lr {
                o.schedule = vec![(0, r)];
            }
            cfg.validate()?;
            morph(&cfg, &config, stdout)
        }
        Command::Plot { input, out, kind, labels, title } => plot(&input, &out, kind, labels.as_deref(), &title),
    }
}

fn override_common(cfg: &mut ExperimentConfig, out: Option<PathBuf>, seeds: Vec<u64>) {
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    if !seeds.is_empty() {
        cfg.seeds = seeds;
    }
}

fn read_cloud(path: &Path) -> anyhow::Result<PointCloud> {
    load_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn write_cloud(cloud: &PointCloud, path: &Path) -> anyhow::Result<()> {
    save_csv(cloud, path).with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn create_dir(path: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

#[derive(Serialize)]
struct BarcodeArgs<'a> {
    dims: &'a BTreeSet<usize>,
    max_value: Option<f64>,
}

fn barcode(
    input: &Path,
    dims: Vec<usize>,
    max_value: Option<f64>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let dims: BTreeSet<usize> = if dims.is_empty() { BTreeSet::from([0, 1]) } else { dims.into_iter().collect() };
    if max_value.is_some_and(f64::is_nan) {
        return usage("--max-value must be a number");
    }
    let cloud = read_cloud(input)?;
    let bc = rips_barcode(&pairwise_distances(&cloud), &dims, max_value.unwrap_or(f64::INFINITY))?;
    match out {
        Some(path) => {
            write_text(path, &bc.to_csv_string())?;
            let mut m = RunManifest::new("barcode", &BarcodeArgs { dims: &dims, max_value }, vec![]);
            m.inputs = vec![input.to_path_buf()];
            m.artifacts = vec![path.to_path_buf()];
            m.write(&sidecar(path))?;
        }
        None => stdout.write_all(bc.to_csv_string().as_bytes()).context("writing output")?,
    }
    Ok(())
}

fn rtd_cmd(
    a: &Path,
    b: &Path,
    opts: SubgradientOptions,
    grad: Option<&Path>,
    grad_tilde: Option<&Path>,
    topoae: bool,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let x = read_cloud(a)?;
    let y = read_cloud(b)?;
    let value = if grad.is_some() || grad_tilde.is_some() {
        let (v, g) = rtd_subgradient_with(&x, &y, opts)?;
        if let Some(p) = grad {
            write_cloud(&PointCloud::new(g.dx)?, p)?;
        }
        if let Some(p) = grad_tilde {
            write_cloud(&PointCloud::new(g.dx_tilde)?, p)?;
        }
        v
    } else {
        rtd_core::rcross::rtd_variant(&x, &y, opts.variant)?
    };
    writeln!(stdout, "{value:?}").context("writing output")?;
    if topoae {
        writeln!(stdout, "{:?}", topoae_loss(&x, &y)?).context("writing output")?;
    }
    Ok(())
}

fn seeds_or(cfg: &ExperimentConfig, fallback: u64) -> Vec<u64> {
    if cfg.seeds.is_empty() {
        vec![fallback]
    } else {
        cfg.seeds.clone()
    }
}

fn history_csv(history: &[EpochStats]) -> String {
    let mut s = String::from("epoch,reconstruction,rtd,eval_reconstruction,skipped_rtd_batches\n");
    for e in history {
        let rtd = e.rtd.map_or(String::new(), |v| v.to_string());
        s += &format!("{},{},{},{},{}\n", e.epoch, e.reconstruction, rtd, e.eval_reconstruction, e.skipped_rtd_batches);
    }
    s
}

#[derive(Serialize)]
struct Summary {
    seeds: Vec<u64>,
    mean: Metrics,
    std: Metrics,
}

#[derive(Serialize, Default)]
struct Metrics {
    linear_correlation: f64,
    triplet_accuracy: f64,
    wd_h0: f64,
    wd_h1: Option<f64>,
    rtd_metric: f64,
}

/// Mean and sample standard deviation of each metric over runs.
fn summarize(seeds: Vec<u64>, reports: &[EvalReport]) -> Summary {
    let n = reports.len() as f64;
    let stats = |f: &dyn Fn(&EvalReport) -> f64| {
        let mean = reports.iter().map(f).sum::<f64>() / n;
        let var = if reports.len() > 1 {
            reports.iter().map(|r| (f(r) - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        (mean, var.sqrt())
    };
    let (lc, ta, h0, rt) = (
        stats(&|r| r.linear_correlation),
        stats(&|r| r.triplet_accuracy),
        stats(&|r| r.wd_h0),
        stats(&|r| r.rtd_metric),
    );
    let h1 = reports.iter().all(|r| r.wd_h1.is_some()).then(|| stats(&|r| r.wd_h1.unwrap_or(0.0)));
    Summary {
        seeds,
        mean: Metrics {
            linear_correlation: lc.0,
            triplet_accuracy: ta.0,
            wd_h0: h0.0,
            wd_h1: h1.map(|s| s.0),
            rtd_metric: rt.0,
        },
        std: Metrics {
            linear_correlation: lc.1,
            triplet_accuracy: ta.1,
            wd_h0: h0.1,
            wd_h1: h1.map(|s| s.1),
            rtd_metric: rt.1,
        },
    }
}

fn train_cmd(cfg: &ExperimentConfig, config_path: &Path, stdout: &mut dyn Write) -> CliResult<()> {
    let base = cfg.train.clone().unwrap_or_default();
    let seeds = seeds_or(cfg, base.seed);
    let data = generate(&cfg.dataset)?;
    create_dir(&cfg.output_dir)?;
    let mut manifest = RunManifest::new("train", cfg, seeds.clone());
    manifest.inputs.push(config_path.to_path_buf());
    manifest.inputs.extend(cfg.dataset.path.clone());
    let mut reports = Vec::new();
    for &seed in &seeds {
        let tc = TrainConfig { seed, ..base.clone() };
        let (params, history) = train(&data, &tc).with_context(|| format!("training seed {seed}"))?;
        let dir = cfg.output_dir.join(format!("seed_{seed}"));
        create_dir(&dir)?;
        let ckpt = dir.join("checkpoint.json");
        Checkpoint::new(&params, Some(tc)).save(&ckpt).with_context(|| format!("writing {}", ckpt.display()))?;
        let latent = encode(&params, &data)?;
        let emb = dir.join("embedding.csv");
        write_cloud(&latent, &emb)?;
        let hist = dir.join("history.csv");
        write_text(&hist, &history_csv(&history))?;
        manifest.artifacts.extend([ckpt, emb, hist]);
        if cfg.metrics.enabled {
            let report = evaluate(&data, &latent, &cfg.metrics.options(seed))?;
            let path = dir.join("report.json");
            write_json(&path, &report)?;
            manifest.artifacts.push(path);
            writeln!(
                stdout,
                "seed {seed}: linear_correlation {:.4} triplet_accuracy {:.4} wd_h0 {:.4} rtd {:.4}",
                report.linear_correlation, report.triplet_accuracy, report.wd_h0, report.rtd_metric
            )
            .context("writing output")?;
            reports.push(report);
        } else {
            writeln!(stdout, "seed {seed}: done").context("writing output")?;
        }
    }
    if !reports.is_empty() {
        let path = cfg.output_dir.join("summary.json");
        write_json(&path, &summarize(seeds, &reports))?;
        manifest.artifacts.push(path);
    }
    manifest.write(&cfg.output_dir.join("manifest.json"))?;
    Ok(())
}

fn reduce(checkpoint: &Path, input: &Path, out: &Path) -> CliResult<()> {
    let ckpt = Checkpoint::load(checkpoint).with_context(|| format!("reading {}", checkpoint.display()))?;
    let params = ckpt.params()?;
    let cloud = read_cloud(input)?;
    write_cloud(&encode(&params, &cloud)?, out)?;
    let mut m = RunManifest::new("reduce", &ckpt.config, ckpt.config.as_ref().map(|c| vec![c.seed]).unwrap_or_default());
    m.inputs = vec![checkpoint.to_path_buf(), input.to_path_buf()];
    m.artifacts = vec![out.to_path_buf()];
    m.write(&sidecar(out))?;
    Ok(())
}

fn eval_cmd(x: &Path, z: &Path, report: &Path, opts: &EvalOptions, stdout: &mut dyn Write) -> CliResult<()> {
    let xs = read_cloud(x)?;
    let zs = read_cloud(z)?;
    let r = evaluate(&xs, &zs, opts)?;
    write_json(report, &r)?;
    writeln!(
        stdout,
        "linear_correlation {:.4} triplet_accuracy {:.4} wd_h0 {:.4} rtd {:.4}",
        r.linear_correlation, r.triplet_accuracy, r.wd_h0, r.rtd_metric
    )
    .context("writing output")?;
    let mut m = RunManifest::new("eval", opts, vec![opts.seed]);
    m.inputs = vec![x.to_path_buf(), z.to_path_buf()];
    m.artifacts = vec![report.to_path_buf()];
    m.write(&sidecar(report))?;
    Ok(())
}

fn gen(spec: &str, out: &Path, n: Option<usize>, seed: Option<u64>, dim: Option<usize>) -> CliResult<()> {
    let mut s: DatasetSpec = if spec.ends_with(".json") {
        let text = match std::fs::read_to_string(spec) {
            Ok(t) => t,
            Err(e) => return usage(format!("cannot read spec {spec}: {e}")),
        };
        parse_json(&text, spec)?
    } else {
        match spec.parse::<DatasetName>() {
            Ok(DatasetName::File) => return usage("the file dataset needs a JSON spec with a path"),
            Ok(name) => DatasetSpec::new(name, 0),
            Err(e) => return usage(e.to_string()),
        }
    };
    s.n = n.or(s.n);
    s.seed = seed.unwrap_or(s.seed);
    s.dim = dim.or(s.dim);
    if s.n == Some(0) {
        return usage("--n must be positive");
    }
    let cloud = generate(&s)?;
    write_cloud(&cloud, out)?;
    let mut m = RunManifest::new("gen", &s, vec![s.seed]);
    m.inputs.extend(s.path.clone());
    m.artifacts = vec![out.to_path_buf()];
    m.write(&sidecar(out))?;
    Ok(())
}

fn morph(cfg: &ExperimentConfig, config_path: &Path, stdout: &mut dyn Write) -> CliResult<()> {
    let opt = cfg.optimizer.clone().unwrap_or_default();
    let target = generate(&cfg.dataset)?;
    let init_seed = cfg.init.as_ref().map_or(0, |s| s.seed);
    let seeds = seeds_or(cfg, init_seed);
    create_dir(&cfg.output_dir)?;
    let mut manifest = RunManifest::new("morph", cfg, seeds.clone());
    manifest.inputs.push(config_path.to_path_buf());
    manifest.inputs.extend(cfg.dataset.path.clone());
    for &seed in &seeds {
        let spec = match &cfg.init {
            Some(s) => DatasetSpec { seed, ..s.clone() },
            None => DatasetSpec::new(DatasetName::Random, seed).with_size(target.len()),
        };
        let start = generate(&spec)?;
        if start.len() != target.len() {
            return Err(anyhow::anyhow!(
                "init has {} points but the target has {}",
                start.len(),
                target.len()
            )
            .into());
        }
        let (moved, trace) = minimize_rtd(&start, &target, &opt).with_context(|| format!("seed {seed}"))?;
        let dir = cfg.output_dir.join(format!("seed_{seed}"));
        create_dir(&dir)?;
        let (fin, tr) = (dir.join("final.csv"), dir.join("trace.csv"));
        write_cloud(&moved, &fin)?;
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        std::fs::write(&tr, buf).with_context(|| format!("writing {}", tr.display()))?;
        manifest.artifacts.extend([fin, tr]);
        let first = trace.points.first().map_or(0.0, |p| p.1);
        writeln!(stdout, "seed {seed}: rtd {first:.4} -> {:.4}", trace.last().unwrap_or(0.0)).context("writing output")?;
    }
    manifest.write(&cfg.output_dir.join("manifest.json"))?;
    Ok(())
}

fn looks_like_barcode(text: &str) -> bool {
    text.lines().next().is_some_and(|l| l.trim() == "dim,birth,death")
}

fn plot(input: &Path, out: &Path, kind: PlotKind, labels: Option<&Path>, title: &str) -> CliResult<()> {
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let as_barcode = match kind {
        PlotKind::Auto => looks_like_barcode(&text),
        PlotKind::Barcode => true,
        PlotKind::Scatter => false,
    };
    let svg = if as_barcode {
        if labels.is_some() {
            return usage("--labels only applies to scatter plots");
        }
        let bc = Barcode::from_csv_str(&text).with_context(|| format!("parsing {}", input.display()))?;
        barcode_svg(&bc, title)
    } else {
        let cloud = rtd_core::datasets::parse_csv(&text).with_context(|| format!("parsing {}", input.display()))?;
        let labels = match labels {
            Some(p) => Some(read_labels(p, cloud.len())?),
            None => None,
        };
        scatter_svg(&cloud, labels.as_deref(), title)
    };
    write_text(out, &svg)?;
    Ok(())
}

fn read_labels(path: &Path, n: usize) -> anyhow::Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let labels: Vec<usize> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| l.parse().with_context(|| format!("{} line {}: not a label", path.display(), i + 1)))
        .collect::<anyhow::Result<_>>()?;
    anyhow::ensure!(labels.len() == n, "{} has {} labels for {} points", path.display(), labels.len(), n);
    Ok(labels)
}
