use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use osd::dataset::{load_csv, write_csv, LabelColumn};
use osd::detectors::DetectorKind;
use osd::error::{OsdError, Result};
use osd::explosion::{DirectionMode, SignMode};
use osd::pipeline::{
    run_and_evaluate, run_osd, scaling_probe, write_probe_csv, Ablation, RunConfig,
};
use osd::synth;

#[derive(Parser)]
#[command(
    name = "osd",
    version,
    about = "Explosion-based outlier separation preprocessing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transform a dataset and write the moved objects.
    Transform(RunArgs),
    /// Transform a labeled dataset and compare detectors before and after.
    Eval(RunArgs),
    /// Generate a synthetic labeled dataset.
    Synth(SynthArgs),
    /// Time the transform on generated datasets of growing size.
    Probe(ProbeArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    /// Label column, by header name or 0-based index.
    #[arg(long)]
    label_col: Option<String>,
    /// Neighbor count (default min(10, N-1)).
    #[arg(long)]
    k: Option<usize>,
    /// Explosion duration.
    #[arg(long = "T", default_value_t = 1.0, allow_hyphen_values = true)]
    t: f64,
    /// Pruning threshold override (an edge weight, usually negative).
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<f64>,
    #[arg(long, value_enum, default_value_t = SignMode::Corrected)]
    sign_mode: SignMode,
    #[arg(long, value_enum, default_value_t = DirectionMode::Corrected)]
    direction_mode: DirectionMode,
    /// Skip min-max normalization.
    #[arg(long)]
    no_normalize: bool,
    #[arg(long, value_enum, default_value_t = Ablation::None)]
    ablation: Ablation,
    /// Detectors to evaluate (repeatable; default all).
    #[arg(long, value_enum)]
    detector: Vec<DetectorKind>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_report: Option<PathBuf>,
    #[arg(long)]
    out_data: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig {
            input: Some(self.input.clone()),
            label_col: self.label_col.clone(),
            threshold: self.threshold,
            normalize: !self.no_normalize,
            ablation: self.ablation,
            seed: self.seed,
            out_report: self.out_report.clone(),
            out_data: self.out_data.clone(),
            ..Default::default()
        };
        cfg.explosion.k = self.k;
        cfg.explosion.duration = self.t;
        cfg.explosion.sign_mode = self.sign_mode;
        cfg.explosion.direction_mode = self.direction_mode;
        if !self.detector.is_empty() {
            cfg.detectors = self.detector.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Clusters,
    Imbalance,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value_t = SynthKind::Clusters)]
    kind: SynthKind,
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    #[arg(long, default_value_t = 100)]
    per_cluster: usize,
    #[arg(long, default_value_t = 15)]
    outliers: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 10.0)]
    separation: f64,
    /// Density ratio for `--kind imbalance`.
    #[arg(long, default_value_t = 4.0)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_data: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeArgs {
    /// Dataset sizes, ascending.
    #[arg(long, value_delimiter = ',', default_values_t = [1000, 2000, 4000])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_data: Option<PathBuf>,
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| OsdError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Opens `path`, or stdout when absent.
fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    create(path)?
        .write_all(text.as_bytes())
        .map_err(|source| OsdError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn transform(args: &RunArgs) -> Result<()> {
    let cfg = args.config()?;
    let label = cfg.label_col.as_deref().map(LabelColumn::parse);
    let (raw, labels) = load_csv(&args.input, label.as_ref())?;
    let out = run_osd(&cfg.prepare(&raw), &cfg)?;
    for w in &out.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(p) = &cfg.out_report {
        write_text(p, &serde_json::to_string_pretty(&out.diagnostics)?)?;
    }
    write_csv(sink(cfg.out_data.as_ref())?, &out.data, labels.as_ref())
}

fn eval(args: &RunArgs) -> Result<()> {
    let cfg = args.config()?;
    let Some(col) = cfg.label_col.as_deref() else {
        return Err(OsdError::Config("eval needs --label-col".into()));
    };
    let (raw, labels) = load_csv(&args.input, Some(&LabelColumn::parse(col)))?;
    let labels = labels.expect("label column requested");
    let (_, out, report) = run_and_evaluate(&raw, &labels, &cfg)?;
    for w in &out.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    for d in &report.detectors {
        eprintln!(
            "{:<8} auc {:.4} -> {:.4}   ap {:.4} -> {:.4}",
            d.detector.name(),
            d.auc_before,
            d.auc_after,
            d.ap_before,
            d.ap_after
        );
    }
    if let Some(p) = &cfg.out_data {
        osd::dataset::save_csv(p, &out.data, Some(&labels))?;
    }
    let json = report.to_json()?;
    match &cfg.out_report {
        Some(p) => write_text(p, &json),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn synth_cmd(args: &SynthArgs) -> Result<()> {
    let (ds, labels) = match args.kind {
        SynthKind::Clusters => synth::gen_clusters_outliers(
            args.clusters,
            args.per_cluster,
            args.outliers,
            args.dim,
            args.separation,
            args.seed,
        )?,
        SynthKind::Imbalance => {
            let spec = synth::ImbalanceSpec {
                dim: args.dim,
                pts_per_cluster: args.per_cluster,
                n_outliers: args.outliers,
                separation: args.separation,
            };
            synth::gen_imbalance_series_with(&[args.level], args.seed, &spec)?.remove(0)
        }
    };
    write_csv(sink(args.out_data.as_ref())?, &ds, Some(&labels))
}

fn probe(args: &ProbeArgs) -> Result<()> {
    let mut cfg = RunConfig {
        seed: args.seed,
        ..Default::default()
    };
    cfg.explosion.k = args.k;
    cfg.validate()?;
    let rows = scaling_probe(&args.sizes, &cfg, args.repeats)?;
    write_probe_csv(sink(args.out_data.as_ref())?, &rows)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Transform(a) => transform(a),
        Command::Eval(a) => eval(a),
        Command::Synth(a) => synth_cmd(a),
        Command::Probe(a) => probe(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
