//! Command-line front end: synthetic data generation, ingestion,
//! training, cross-validation, and prediction.
//!
//! Exit codes: 0 success, 2 usage/configuration errors, 3 data errors,
//! 4 training divergence.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use saeforest::data::Dataset;
use saeforest::ingest::{self, IngestReport};
use saeforest::metrics::MetricsReport;
use saeforest::pipeline::{
    cross_validate, load_model, save_model, train_holdout, AblationModel, CrossValReport,
};
use saeforest::preprocess::Normalizer;
use saeforest::synth::{generate, DefectFlags, SynthSpec};

use config::{ModelFlags, RunConfig};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "saeforest",
    version,
    about = "Two-stage stacked-autoencoder + random-forest classifier for network flow CSVs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic flow-record CSVs.
    Synth(SynthArgs),
    /// Read, repair, merge, encode, and normalize flow CSVs.
    Ingest(IngestArgs),
    /// Train on a stratified 80/20 split and report held-out metrics.
    Train(TrainArgs),
    /// Stratified 10-fold cross-validation of the configured model.
    Crossval(CrossvalArgs),
    /// Classify a CSV with a saved model bundle.
    Predict(PredictArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output CSV path; with --files N > 1, N numbered files are written.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,

    #[arg(long, default_value_t = 2000)]
    rows: usize,

    #[arg(long, default_value_t = 80)]
    features: usize,

    /// Comma-separated class names; the first one is the benign class.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "BENIGN,Web Attack - Brute Force"
    )]
    classes: Vec<String>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Split the rows across this many files with a shared header.
    #[arg(long, default_value_t = 1)]
    files: usize,

    /// Inject Infinity cells.
    #[arg(long)]
    inject_infinity: bool,

    /// Inject NaN cells.
    #[arg(long)]
    inject_nan: bool,

    /// Corrupt some label separators with a replacement character.
    #[arg(long)]
    inject_mojibake: bool,

    /// Prefix alternating header names with a space.
    #[arg(long)]
    inject_header_whitespace: bool,

    /// Switch on every defect.
    #[arg(long)]
    inject_all: bool,
}

#[derive(Args)]
struct IngestArgs {
    /// Input CSV files (merged in order).
    #[arg(required = true)]
    paths: Vec<PathBuf>,

    #[command(flatten)]
    flags: ModelFlags,

    /// Write the repaired, encoded, normalized CSV here.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    #[arg(long, default_value = "text", value_parser = ["text", "json"])]
    format: String,
}

#[derive(Args)]
struct TrainArgs {
    /// Input CSV files (merged in order).
    #[arg(required = true)]
    paths: Vec<PathBuf>,

    #[command(flatten)]
    flags: ModelFlags,

    /// Write the trained model bundle here (two-stage-dsae-rf only).
    #[arg(long, value_name = "FILE")]
    model_out: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    report_out: Option<PathBuf>,

    #[arg(long, default_value = "text", value_parser = ["text", "json"])]
    format: String,
}

#[derive(Args)]
struct CrossvalArgs {
    /// Input CSV files (merged in order).
    #[arg(required = true)]
    paths: Vec<PathBuf>,

    #[command(flatten)]
    flags: ModelFlags,

    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    report_out: Option<PathBuf>,

    #[arg(long, default_value = "text", value_parser = ["text", "json"])]
    format: String,
}

#[derive(Args)]
struct PredictArgs {
    /// Saved model bundle.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,

    /// CSV of flows to classify (label column optional, ignored).
    #[arg(long, value_name = "FILE")]
    input: PathBuf,

    /// Output CSV path; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Train(args) => cmd_train(args),
        Command::Crossval(args) => cmd_crossval(args),
        Command::Predict(args) => cmd_predict(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(error_exit_code(&err));
    }
}

fn error_exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<saeforest::Error>() {
        Some(saeforest::Error::Training { .. }) => 4,
        Some(saeforest::Error::InvalidConfig { .. }) => 2,
        _ => 3,
    }
}

// ── synth ──────────────────────────────────────────────────────────────────

fn cmd_synth(args: SynthArgs) -> anyhow::Result<()> {
    let class_names: Vec<&str> = args.classes.iter().map(String::as_str).collect();
    let defects = if args.inject_all {
        DefectFlags::all()
    } else {
        DefectFlags {
            infinity_cells: args.inject_infinity,
            nan_cells: args.inject_nan,
            mojibake_labels: args.inject_mojibake,
            header_whitespace: args.inject_header_whitespace,
        }
    };
    let spec = SynthSpec::separable(args.rows, args.features, &class_names, args.seed)
        .with_defects(defects);
    let out = generate(&spec)?;

    if args.files <= 1 {
        write_text(&args.out, &out.csv)?;
        println!("wrote {} rows to {}", args.rows, args.out.display());
    } else {
        let mut lines = out.csv.lines();
        let header = lines.next().unwrap_or_default().to_string();
        let rows: Vec<&str> = lines.collect();
        let chunk = rows.len().div_ceil(args.files);
        for (i, part) in rows.chunks(chunk.max(1)).enumerate() {
            let path = numbered_path(&args.out, i + 1);
            let mut text = String::with_capacity(header.len() + part.len() * 16);
            text.push_str(&header);
            text.push('\n');
            for row in part {
                text.push_str(row);
                text.push('\n');
            }
            write_text(&path, &text)?;
            println!("wrote {} rows to {}", part.len(), path.display());
        }
    }
    println!(
        "injected defects: infinity={} nan={} mojibake={} whitespace-headers={}",
        out.injected.infinity_cells,
        out.injected.nan_cells,
        out.injected.mojibake_labels,
        out.injected.whitespace_headers
    );
    Ok(())
}

fn numbered_path(base: &Path, index: usize) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}-{index}.{ext}"))
}

// ── ingest ─────────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct IngestJsonReport<'a> {
    version: &'a str,
    command: &'a str,
    config: &'a RunConfig,
    ingest: &'a IngestReport,
    rows: usize,
    features: usize,
}

fn cmd_ingest(args: IngestArgs) -> anyhow::Result<()> {
    let cfg = RunConfig::resolve(&args.flags)?;
    let (dataset, report) = ingest::load_dataset(&args.paths, &cfg.ingest_options())?;

    if let Some(out) = &args.out {
        let normalizer = Normalizer::fit(&dataset.features, cfg.normalizer)?;
        let normalized = normalizer.apply(&dataset.features)?;
        let mut text = String::new();
        for name in dataset.schema.feature_names() {
            text.push_str(&csv_cell(name));
            text.push(',');
        }
        text.push_str(&csv_cell(dataset.schema.label_name()));
        text.push('\n');
        let label_map = dataset.schema.label_map();
        for r in 0..normalized.rows() {
            for v in normalized.row(r) {
                text.push_str(&format!("{v}"));
                text.push(',');
            }
            let name = label_map
                .name_of(dataset.labels.raw()[r])
                .unwrap_or("unknown");
            text.push_str(&csv_cell(name));
            text.push('\n');
        }
        write_text(out, &text)?;
    }

    match args.format.as_str() {
        "json" => {
            let json = IngestJsonReport {
                version: VERSION,
                command: "ingest",
                config: &cfg,
                ingest: &report,
                rows: dataset.features.rows(),
                features: dataset.features.cols(),
            };
            println!("{}", serde_json::to_string_pretty(&json)?);
        }
        _ => {
            println!("saeforest ingest v{VERSION}");
            print_config_line(&cfg)?;
            print_ingest_line(&report);
            println!(
                "dataset: {} rows x {} features, {} classes",
                dataset.features.rows(),
                dataset.features.cols(),
                dataset.schema.label_map().len()
            );
            if let Some(out) = &args.out {
                println!("normalized csv: {}", out.display());
            }
        }
    }
    Ok(())
}

// ── train ──────────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct TrainJsonReport<'a> {
    version: &'a str,
    command: &'a str,
    config: &'a RunConfig,
    ingest: &'a IngestReport,
    ablation: &'a str,
    metrics: &'a MetricsReport,
    model_out: Option<String>,
}

fn cmd_train(args: TrainArgs) -> anyhow::Result<()> {
    let cfg = RunConfig::resolve(&args.flags)?;
    let (dataset, ingest_report) = ingest::load_dataset(&args.paths, &cfg.ingest_options())?;
    let Dataset {
        features,
        labels,
        schema,
    } = dataset;

    let kind = cfg.ablation_kind();
    let (model, metrics) = train_holdout(&features, &labels, &schema, &cfg.pipeline_config(), kind)?;

    let mut model_path = None;
    if let Some(out) = &args.model_out {
        if let AblationModel::TwoStageDsaeRf(full) = &model {
            save_model(full, out)?;
            model_path = Some(out.display().to_string());
        } else {
            eprintln!(
                "note: model bundles hold the two-stage-dsae-rf variant; \
                 --model-out skipped for ablation {kind}"
            );
        }
    }

    let rendered = match args.format.as_str() {
        "json" => serde_json::to_string_pretty(&TrainJsonReport {
            version: VERSION,
            command: "train",
            config: &cfg,
            ingest: &ingest_report,
            ablation: kind.as_str(),
            metrics: &metrics,
            model_out: model_path.clone(),
        })? + "\n",
        _ => {
            let mut text = format!("saeforest train v{VERSION}\n");
            text.push_str(&config_line(&cfg)?);
            text.push_str(&ingest_line(&ingest_report));
            text.push_str(&format!("ablation: {kind}\n"));
            text.push_str(&metrics_line("held-out 20%", &metrics));
            if let Some(path) = &model_path {
                text.push_str(&format!("model bundle: {path}\n"));
            }
            text
        }
    };
    emit(args.report_out.as_deref(), &rendered)
}

// ── crossval ───────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct CrossvalJsonReport<'a> {
    version: &'a str,
    command: &'a str,
    config: &'a RunConfig,
    ingest: &'a IngestReport,
    ablation: &'a str,
    crossval: &'a CrossValReport,
}

fn cmd_crossval(args: CrossvalArgs) -> anyhow::Result<()> {
    let cfg = RunConfig::resolve(&args.flags)?;
    let (dataset, ingest_report) = ingest::load_dataset(&args.paths, &cfg.ingest_options())?;
    let kind = cfg.ablation_kind();
    let report = cross_validate(
        &dataset.features,
        &dataset.labels,
        &dataset.schema,
        &cfg.pipeline_config(),
        kind,
    )?;

    let rendered = match args.format.as_str() {
        "json" => serde_json::to_string_pretty(&CrossvalJsonReport {
            version: VERSION,
            command: "crossval",
            config: &cfg,
            ingest: &ingest_report,
            ablation: kind.as_str(),
            crossval: &report,
        })? + "\n",
        _ => {
            let mut text = format!("saeforest crossval v{VERSION}\n");
            text.push_str(&config_line(&cfg)?);
            text.push_str(&ingest_line(&ingest_report));
            text.push_str(&format!(
                "ablation: {kind} ({} folds, assignment digest {})\n",
                report.folds.len(),
                report.fold_digest
            ));
            for (i, fold) in report.folds.iter().enumerate() {
                text.push_str(&metrics_line(&format!("fold {i}"), fold));
            }
            text.push_str(&format!(
                "mean: accuracy={:.6} precision={:.6} recall={:.6} f1={:.6}\n",
                report.mean.accuracy, report.mean.precision, report.mean.recall, report.mean.f1
            ));
            text.push_str(&format!(
                "std:  accuracy={:.6} precision={:.6} recall={:.6} f1={:.6}\n",
                report.std.accuracy, report.std.precision, report.std.recall, report.std.f1
            ));
            text
        }
    };
    emit(args.report_out.as_deref(), &rendered)
}

// ── predict ────────────────────────────────────────────────────────────────

fn cmd_predict(args: PredictArgs) -> anyhow::Result<()> {
    let model = load_model(&args.model)?;
    let table = ingest::read_csv(&args.input)?;
    let features = ingest::encode_for_prediction(model.schema(), &table)?;
    let (codes, probabilities) = model.predict(&features)?;

    let mut text = String::from("predicted_code,predicted_label,attack_probability\n");
    for (code, p) in codes.iter().zip(&probabilities) {
        text.push_str(&format!("{code},{},{p}\n", csv_cell(&model.class_label(*code))));
    }
    emit(args.output.as_deref(), &text)
}

// ── shared rendering helpers ───────────────────────────────────────────────

fn config_line(cfg: &RunConfig) -> anyhow::Result<String> {
    Ok(format!("config: {}\n", serde_json::to_string(cfg)?))
}

fn print_config_line(cfg: &RunConfig) -> anyhow::Result<()> {
    print!("{}", config_line(cfg)?);
    Ok(())
}

fn ingest_line(r: &IngestReport) -> String {
    format!(
        "ingest: files={} rows={} repaired-labels={} imputed-cells={} dropped-rows={}\n",
        r.files_read, r.rows_total, r.rows_repaired, r.cells_imputed, r.rows_dropped
    )
}

fn print_ingest_line(r: &IngestReport) {
    print!("{}", ingest_line(r));
}

fn metrics_line(tag: &str, m: &MetricsReport) -> String {
    format!(
        "metrics [{tag}]: accuracy={:.6} precision={:.6} recall={:.6} f1={:.6} \
         (tp={} fp={} tn={} fn={})\n",
        m.accuracy, m.precision, m.recall, m.f1, m.counts.tp, m.counts.fp, m.counts.tn,
        m.counts.fn_count
    )
}

fn csv_cell(cell: &str) -> String {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .context("writing to stdout")?;
            Ok(())
        }
    }
}
