//! Batch CLI over the fairness metric library: evaluate score files, create
//! synthetic biased datasets, run the three-scenario benchmark, and re-render
//! saved reports.
//!
//! Exit codes: 0 — success; 1 — configuration or I/O error (nothing
//! written); 2 — evaluation completed but some metrics failed (the report is
//! still written; clamps and rate floors are warnings, not failures).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use fairscore_core::{
    evaluate_with_provenance, export_csv, generate, ingest_csv, ingest_json, parse_json,
    parse_metric_list, render_json, render_markdown, summarize, BaseLaws, EvalOptions, Metric,
    MetricReport, Polarity, Scenario, ScenarioSpec, SplitSource,
};
use fairscore_core::table1::{
    render_table1_json, render_table1_markdown, run_table1, Table1Spec,
};

#[derive(Parser)]
#[command(
    name = "fairscore",
    version,
    about = "Demographic fairness metrics for 1:1 verification score files"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate fairness metrics on a labeled score file
    Evaluate(EvaluateArgs),
    /// Generate a synthetic biased score dataset
    Synth(SynthArgs),
    /// Run the three bias scenarios and check the detection pattern
    Table1(Table1Args),
    /// Re-render a saved JSON report
    Render(RenderArgs),
}

#[derive(Args)]
struct EvaluateArgs {
    /// Labeled score file (CSV with header `score,kind,group`, or JSON)
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Score orientation: similarity or distance
    #[arg(long)]
    polarity: Option<String>,
    /// Number of histogram bins
    #[arg(long)]
    bins: Option<usize>,
    /// Additive smoothing mass per bin
    #[arg(long)]
    smoothing: Option<f64>,
    /// Pooled FMR target for the operating threshold
    #[arg(long = "target-fmr")]
    target_fmr: Option<f64>,
    /// Comma-separated split percentiles, e.g. 75,90,95
    #[arg(long)]
    percentiles: Option<String>,
    /// Semicolon-separated (w_tail, w_center) pairs, e.g. 0.2,0.8;0.8,0.2
    #[arg(long)]
    weights: Option<String>,
    /// Comma-separated metric selector: dfi,inequity,garbe,cei
    #[arg(long)]
    metrics: Option<String>,
    /// Report output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: json or markdown
    #[arg(long)]
    format: Option<String>,
    /// JSON config file; command-line flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Scenario: clean, bg, bi, or bc
    #[arg(long, required_unless_present = "spec")]
    scenario: Option<String>,
    /// Bias magnitude (0 reduces every scenario to clean)
    #[arg(long)]
    strength: Option<f64>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Genuine comparisons per group
    #[arg(long = "n-genuine")]
    n_genuine: Option<usize>,
    /// Impostor comparisons per group
    #[arg(long = "n-impostor")]
    n_impostor: Option<usize>,
    /// Comma-separated group keys; the first is the biased group
    #[arg(long)]
    groups: Option<String>,
    /// Full scenario description as a JSON file; flags override its fields
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Table1Args {
    /// RNG seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Bias strength applied to all three scenarios
    #[arg(long, default_value_t = 1.0)]
    strength: f64,
    /// Pooled FMR target
    #[arg(long = "target-fmr", default_value_t = fairscore_core::table1::DEFAULT_TARGET_FMR)]
    target_fmr: f64,
    /// Genuine comparisons per group
    #[arg(long = "n-genuine", default_value_t = 100_000)]
    n_genuine: usize,
    /// Impostor comparisons per group
    #[arg(long = "n-impostor", default_value_t = 100_000)]
    n_impostor: usize,
    /// Report output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: json or markdown
    #[arg(long, default_value = "markdown")]
    format: String,
}

#[derive(Args)]
struct RenderArgs {
    /// Saved JSON report
    report: PathBuf,
    /// Output format: json or markdown
    #[arg(long, default_value = "markdown")]
    format: String,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// JSON config file accepted by `evaluate`. Flags override fields.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    scores_path: Option<PathBuf>,
    polarity: Option<Polarity>,
    n_bins: Option<usize>,
    smoothing: Option<f64>,
    target_fmr: Option<f64>,
    percentiles: Option<Vec<f64>>,
    weight_sets: Option<Vec<(f64, f64)>>,
    metrics: Option<Vec<Metric>>,
    split_source: Option<SplitSource>,
    min_per_cell: Option<usize>,
    output: Option<FileOutput>,
}

#[derive(Debug, Default, Deserialize)]
struct FileOutput {
    path: Option<PathBuf>,
    format: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Markdown,
}

fn parse_format(s: &str) -> Result<Format> {
    match s.to_ascii_lowercase().as_str() {
        "json" => Ok(Format::Json),
        "markdown" | "md" => Ok(Format::Markdown),
        other => bail!("unknown format {other:?} (expected json or markdown)"),
    }
}

fn parse_polarity(s: &str) -> Result<Polarity> {
    match s.to_ascii_lowercase().as_str() {
        "similarity" => Ok(Polarity::Similarity),
        "distance" => Ok(Polarity::Distance),
        other => bail!("unknown polarity {other:?} (expected similarity or distance)"),
    }
}

fn parse_percentiles(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .with_context(|| format!("cannot parse percentile {p:?}"))
        })
        .collect()
}

fn parse_weights(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(';')
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                bail!("weight pair {pair:?} must be w_tail,w_center");
            }
            let wt: f64 = parts[0]
                .parse()
                .with_context(|| format!("cannot parse weight {:?}", parts[0]))?;
            let wc: f64 = parts[1]
                .parse()
                .with_context(|| format!("cannot parse weight {:?}", parts[1]))?;
            Ok((wt, wc))
        })
        .collect()
}

fn load_scores(path: &Path, polarity: Polarity) -> Result<fairscore_core::ScoreSet> {
    if !path.exists() {
        bail!("scores file {} does not exist", path.display());
    }
    let set = if path.extension().is_some_and(|e| e == "json") {
        ingest_json(path, polarity)
    } else {
        ingest_csv(path, polarity)
    };
    set.with_context(|| format!("failed to ingest {}", path.display()))
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .with_context(|| format!("failed to write {}", path.display()))?;
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let data = std::fs::read_to_string(path)
                .with_context(|| format!("failed to read config {}", path.display()))?;
            serde_json::from_str(&data)
                .with_context(|| format!("invalid config {}", path.display()))?
        }
        None => FileConfig::default(),
    };

    let scores_path = args
        .scores
        .or(file.scores_path)
        .context("--scores (or scores_path in the config file) is required")?;
    let polarity = match &args.polarity {
        Some(s) => parse_polarity(s)?,
        None => file
            .polarity
            .context("--polarity (or polarity in the config file) is required")?,
    };
    let target_fmr = args
        .target_fmr
        .or(file.target_fmr)
        .context("--target-fmr (or target_fmr in the config file) is required")?;

    let mut opts = EvalOptions::new(target_fmr);
    if let Some(b) = args.bins.or(file.n_bins) {
        opts.n_bins = b;
    }
    if let Some(s) = args.smoothing.or(file.smoothing) {
        opts.smoothing = s;
    }
    if let Some(p) = &args.percentiles {
        opts.percentiles = parse_percentiles(p)?;
    } else if let Some(p) = file.percentiles {
        opts.percentiles = p;
    }
    if let Some(w) = &args.weights {
        opts.weight_sets = parse_weights(w)?;
    } else if let Some(w) = file.weight_sets {
        opts.weight_sets = w;
    }
    if let Some(m) = &args.metrics {
        opts.metrics = parse_metric_list(m)?;
    } else if let Some(m) = file.metrics {
        if m.is_empty() {
            bail!("empty metric selector in config file");
        }
        opts.metrics = m;
    }
    if let Some(s) = file.split_source {
        opts.split_source = s;
    }
    if let Some(m) = file.min_per_cell {
        opts.min_per_cell = m;
    }
    opts.validate().context("invalid evaluation options")?;

    let out_path = args.out.or(file.output.as_ref().and_then(|o| o.path.clone()));
    let format = match args
        .format
        .as_deref()
        .or(file.output.as_ref().and_then(|o| o.format.as_deref()))
    {
        Some(s) => parse_format(s)?,
        None => Format::Json,
    };

    let set = load_scores(&scores_path, polarity)?;
    let report = evaluate_with_provenance(
        &set,
        &opts,
        Some(scores_path.display().to_string()),
        None,
    )?;

    // single write point, after all computation succeeded
    if let Some(path) = &out_path {
        let rendered = match format {
            Format::Json => render_json(&report),
            Format::Markdown => render_markdown(&report),
        };
        write_output(path, &rendered)?;
    }
    print!("{}", render_markdown(&report));

    if report.is_clean() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("evaluation completed with {} failed metric(s)", report.failures.len());
        Ok(ExitCode::from(2))
    }
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode> {
    let mut spec = match &args.spec {
        Some(path) => {
            let data = std::fs::read_to_string(path)
                .with_context(|| format!("failed to read spec {}", path.display()))?;
            serde_json::from_str::<ScenarioSpec>(&data)
                .with_context(|| format!("invalid scenario spec {}", path.display()))?
        }
        None => ScenarioSpec {
            scenario: Scenario::Clean,
            n_genuine: 100_000,
            n_impostor: 100_000,
            groups: vec!["A".to_string(), "B".to_string()],
            biased_group: None,
            strength: 1.0,
            seed: 42,
            laws: BaseLaws::default(),
        },
    };
    if let Some(s) = &args.scenario {
        spec.scenario = Scenario::parse(s)?;
    }
    if let Some(s) = args.strength {
        spec.strength = s;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(n) = args.n_genuine {
        spec.n_genuine = n;
    }
    if let Some(n) = args.n_impostor {
        spec.n_impostor = n;
    }
    if let Some(g) = &args.groups {
        spec.groups = g.split(',').map(|g| g.trim().to_string()).collect();
        spec.biased_group = None;
    }
    let set = generate(&spec)?;
    export_csv(&set, &args.out)?;

    println!(
        "wrote {} rows to {} (scenario {}, strength {}, seed {})",
        set.len(),
        args.out.display(),
        spec.scenario.as_str(),
        spec.strength,
        spec.seed
    );
    println!();
    println!("| group | kind | count | mean | std | min | max | 5% error-tail mass |");
    println!("|---|---|---|---|---|---|---|---|");
    for s in summarize(&set) {
        println!(
            "| {} | {} | {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |",
            s.group, s.kind, s.count, s.mean, s.std_dev, s.min, s.max, s.error_tail_mass
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_table1(args: Table1Args) -> Result<ExitCode> {
    let mut spec = Table1Spec::new(args.seed, args.strength);
    spec.n_genuine = args.n_genuine;
    spec.n_impostor = args.n_impostor;
    spec.eval.target_fmr = args.target_fmr;
    let format = parse_format(&args.format)?;

    let report = run_table1(&spec)?;
    let rendered = match format {
        Format::Json => render_table1_json(&report),
        Format::Markdown => render_table1_markdown(&report),
    };
    if let Some(path) = &args.out {
        write_output(path, &rendered)?;
        print!("{}", render_table1_markdown(&report));
    } else {
        print!("{rendered}");
    }
    if report.pattern_ok {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("pattern check failed");
        Ok(ExitCode::from(2))
    }
}

fn cmd_render(args: RenderArgs) -> Result<ExitCode> {
    let data = std::fs::read_to_string(&args.report)
        .with_context(|| format!("failed to read {}", args.report.display()))?;
    let report: MetricReport = parse_json(&data)
        .with_context(|| format!("{} is not a valid report", args.report.display()))?;
    let format = parse_format(&args.format)?;
    let rendered = match format {
        Format::Json => render_json(&report),
        Format::Markdown => render_markdown(&report),
    };
    match &args.out {
        Some(path) => write_output(path, &rendered)?,
        None => print!("{rendered}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Table1(args) => cmd_table1(args),
        Command::Render(args) => cmd_render(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
