//! Full-evaluation orchestration and report rendering.
//!
//! [`evaluate_all`] runs every selected metric on one score set at one
//! operating configuration, sweeping the tail/center index over a percentile
//! and weight grid, and records the complete configuration next to every
//! number. Per-metric errors become structured failure entries instead of
//! aborting the remaining metrics.
//!
//! Reports serialize to versioned JSON (stable field order, lossless floats)
//! and render to markdown tables with metrics as rows and the tail/center
//! sweep as a percentile-by-weights grid.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dist::{build_distribution, BinGrid, Distribution, OutOfRangePolicy};
use crate::error::{Error, Result};
use crate::metrics::{
    aggregate_index, dfi, garbe, inequity, kind_distributions, split_dissimilarities, CeiConfig,
    MetricFlag, MetricValue, RateKind, SplitSource, Variant,
};
use crate::rates::{fnmr_at, group_rates, threshold_at_global_fmr, GroupRates, OperatingPoint};
use crate::score::{
    error_side, validate_for_fairness, Kind, Polarity, ScoreSet, ValidationReport,
    DEFAULT_MIN_PER_CELL,
};

/// Version tag carried by every serialized report.
pub const SCHEMA_VERSION: u32 = 1;

/// Which metric families to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Dfi,
    Inequity,
    Garbe,
    Cei,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dfi" => Ok(Metric::Dfi),
            "inequity" | "in" => Ok(Metric::Inequity),
            "garbe" => Ok(Metric::Garbe),
            "cei" => Ok(Metric::Cei),
            other => Err(Error::InvalidConfig {
                reason: format!("unknown metric {other:?} (expected dfi|inequity|garbe|cei)"),
            }),
        }
    }

    pub fn all() -> Vec<Metric> {
        vec![Metric::Dfi, Metric::Inequity, Metric::Garbe, Metric::Cei]
    }
}

/// Parses a comma-separated metric selector; the empty selector is a
/// configuration error, never a render-time one.
pub fn parse_metric_list(s: &str) -> Result<Vec<Metric>> {
    let mut out: Vec<Metric> = Vec::new();
    for part in s.split(',') {
        let m = Metric::parse(part)?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig {
            reason: "empty metric selector".into(),
        });
    }
    out.sort();
    Ok(out)
}

/// Everything an evaluation needs besides the scores themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub n_bins: usize,
    pub smoothing: f64,
    pub target_fmr: f64,
    pub percentiles: Vec<f64>,
    /// (w_tail, w_center) pairs.
    pub weight_sets: Vec<(f64, f64)>,
    pub metrics: Vec<Metric>,
    pub split_source: SplitSource,
    pub min_per_cell: usize,
}

impl EvalOptions {
    /// Defaults: 100 bins, 1e-10 smoothing, the percentile grid
    /// {75, 90, 95} and weight grid {(0.2,0.8), (0.5,0.5), (0.8,0.2)}, all
    /// metrics, split threshold from the mean distribution.
    pub fn new(target_fmr: f64) -> Self {
        EvalOptions {
            n_bins: crate::dist::DEFAULT_BINS,
            smoothing: crate::dist::DEFAULT_SMOOTHING,
            target_fmr,
            percentiles: vec![75.0, 90.0, 95.0],
            weight_sets: vec![(0.2, 0.8), (0.5, 0.5), (0.8, 0.2)],
            metrics: Metric::all(),
            split_source: SplitSource::default(),
            min_per_cell: DEFAULT_MIN_PER_CELL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins == 0 {
            return Err(Error::InvalidConfig {
                reason: "n_bins must be positive".into(),
            });
        }
        if !self.smoothing.is_finite() || self.smoothing <= 0.0 {
            return Err(Error::InvalidConfig {
                reason: "smoothing must be positive".into(),
            });
        }
        if !(self.target_fmr > 0.0 && self.target_fmr <= 1.0) {
            return Err(Error::InvalidConfig {
                reason: format!("target FMR must be in (0, 1], got {}", self.target_fmr),
            });
        }
        if self.metrics.is_empty() {
            return Err(Error::InvalidConfig {
                reason: "empty metric selector".into(),
            });
        }
        if self.metrics.contains(&Metric::Cei) {
            if self.percentiles.is_empty() || self.weight_sets.is_empty() {
                return Err(Error::InvalidConfig {
                    reason: "tail/center sweep needs at least one percentile and one weight pair"
                        .into(),
                });
            }
            for &p in &self.percentiles {
                if !(p > 0.0 && p < 100.0) {
                    return Err(Error::InvalidConfig {
                        reason: format!("percentile must be in (0, 100), got {p}"),
                    });
                }
            }
            for &(wt, wc) in &self.weight_sets {
                // reuse the weight validation
                CeiConfig::new(50.0, wt, wc, Kind::Genuine)?;
            }
        }
        Ok(())
    }

    pub fn wants(&self, metric: Metric) -> bool {
        self.metrics.contains(&metric)
    }
}

/// Compact grid provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub lo: f64,
    pub hi: f64,
    pub n_bins: usize,
}

impl From<&BinGrid> for GridInfo {
    fn from(g: &BinGrid) -> Self {
        GridInfo {
            lo: g.lo(),
            hi: g.hi(),
            n_bins: g.n_bins(),
        }
    }
}

/// The exact configuration that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub polarity: Polarity,
    pub n_bins: usize,
    pub smoothing: f64,
    pub target_fmr: f64,
    pub percentiles: Vec<f64>,
    pub weight_sets: Vec<(f64, f64)>,
    pub metrics: Vec<Metric>,
    pub split_source: SplitSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operating_point: Option<OperatingPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combined_grid: Option<GridInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genuine_grid: Option<GridInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impostor_grid: Option<GridInfo>,
    pub validation: ValidationReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// One cell of the tail/center sweep: all four index variants at one
/// (percentile, weights) configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeiCell {
    pub percentile: f64,
    pub w_tail: f64,
    pub w_center: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genuine_normal: Option<MetricValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genuine_extreme: Option<MetricValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impostor_normal: Option<MetricValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impostor_extreme: Option<MetricValue>,
}

/// A metric that could not be computed, with the module error that stopped
/// it. Failures make the evaluation exit nonzero; flags do not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFailure {
    pub metric: String,
    pub error: String,
}

/// All metric values of one evaluation, with full configuration provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub schema_version: u32,
    pub config: ReportConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dfi_n: Option<MetricValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dfi_e: Option<MetricValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_fmr: Option<MetricValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_fnmr: Option<MetricValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub garbe_fmr: Option<MetricValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub garbe_fnmr: Option<MetricValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pooled_fmr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pooled_fnmr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_rates: Option<Vec<GroupRates>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cei: Vec<CeiCell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<MetricFailure>,
}

impl MetricReport {
    /// The sweep cell at a given percentile and weight pair, if present.
    pub fn cei_cell(&self, percentile: f64, w_tail: f64, w_center: f64) -> Option<&CeiCell> {
        self.cei.iter().find(|c| {
            (c.percentile - percentile).abs() < 1e-9
                && (c.w_tail - w_tail).abs() < 1e-9
                && (c.w_center - w_center).abs() < 1e-9
        })
    }

    /// True when every requested metric computed (flags allowed).
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs every selected metric on `set` and assembles the report.
///
/// Fails hard only when fairness over groups is undefined (fewer than two
/// groups) or the options are invalid; per-metric errors are captured as
/// failure entries so the remaining metrics still compute.
pub fn evaluate_all(set: &ScoreSet, opts: &EvalOptions) -> Result<MetricReport> {
    evaluate_with_provenance(set, opts, None, None)
}

/// [`evaluate_all`] with source-path / seed provenance attached.
pub fn evaluate_with_provenance(
    set: &ScoreSet,
    opts: &EvalOptions,
    scores_path: Option<String>,
    seed: Option<u64>,
) -> Result<MetricReport> {
    opts.validate()?;
    let validation = validate_for_fairness(set, opts.min_per_cell);
    if validation.k < 2 {
        return Err(Error::KTooSmall { k: validation.k });
    }
    let mut warnings: Vec<String> = validation.flags.iter().map(|f| f.to_string()).collect();
    let mut failures: Vec<MetricFailure> = Vec::new();

    let mut config = ReportConfig {
        polarity: set.polarity(),
        n_bins: opts.n_bins,
        smoothing: opts.smoothing,
        target_fmr: opts.target_fmr,
        percentiles: opts.percentiles.clone(),
        weight_sets: opts.weight_sets.clone(),
        metrics: opts.metrics.clone(),
        split_source: opts.split_source,
        operating_point: None,
        combined_grid: None,
        genuine_grid: None,
        impostor_grid: None,
        validation,
        scores_path,
        seed,
    };

    // distribution fairness over combined per-group distributions
    let (mut dfi_n, mut dfi_e) = (None, None);
    if opts.wants(Metric::Dfi) {
        match combined_distributions(set, opts.n_bins) {
            Ok((grid, dists)) => {
                config.combined_grid = Some((&grid).into());
                match dfi(&dists, Variant::Normal, opts.smoothing) {
                    Ok(v) => dfi_n = Some(MetricValue::plain(v)),
                    Err(e) => failures.push(MetricFailure {
                        metric: "dfi_n".into(),
                        error: e.to_string(),
                    }),
                }
                match dfi(&dists, Variant::Extreme, opts.smoothing) {
                    Ok(v) => dfi_e = Some(MetricValue::plain(v)),
                    Err(e) => failures.push(MetricFailure {
                        metric: "dfi_e".into(),
                        error: e.to_string(),
                    }),
                }
            }
            Err(e) => failures.push(MetricFailure {
                metric: "dfi".into(),
                error: e.to_string(),
            }),
        }
    }

    // outcome metrics at the shared operating point
    let (mut in_fmr, mut in_fnmr) = (None, None);
    let (mut garbe_fmr, mut garbe_fnmr) = (None, None);
    let (mut pooled_fmr, mut pooled_fnmr) = (None, None);
    let mut rates_out = None;
    if opts.wants(Metric::Inequity) || opts.wants(Metric::Garbe) {
        match threshold_at_global_fmr(set, opts.target_fmr) {
            Ok(op) => {
                config.operating_point = Some(op);
                if op.low_sample() {
                    warnings.push(format!(
                        "impostor pool of {} cannot resolve target FMR {}",
                        op.n_impostor, op.target_fmr
                    ));
                }
                let rates = group_rates(set, op.threshold);
                pooled_fmr = Some(op.achieved_fmr);
                pooled_fnmr = fnmr_at(&set.pooled(Kind::Genuine), op.threshold, set.polarity()).ok();
                let low_sample_flag = op.low_sample().then_some(MetricFlag::LowSample {
                    n_impostor: op.n_impostor,
                    target_fmr: op.target_fmr,
                });
                let attach = |mut v: MetricValue| {
                    if let Some(f) = &low_sample_flag {
                        v.flags.push(f.clone());
                    }
                    v
                };
                if opts.wants(Metric::Inequity) {
                    for (name, which, slot) in [
                        ("in_fmr", RateKind::Fmr, &mut in_fmr),
                        ("in_fnmr", RateKind::Fnmr, &mut in_fnmr),
                    ] {
                        match inequity(&rates, which) {
                            Ok(v) => *slot = Some(attach(v)),
                            Err(e) => failures.push(MetricFailure {
                                metric: name.into(),
                                error: e.to_string(),
                            }),
                        }
                    }
                }
                if opts.wants(Metric::Garbe) {
                    for (name, which, slot) in [
                        ("garbe_fmr", RateKind::Fmr, &mut garbe_fmr),
                        ("garbe_fnmr", RateKind::Fnmr, &mut garbe_fnmr),
                    ] {
                        match garbe(&rates, which) {
                            Ok(v) => *slot = Some(attach(v)),
                            // a system with zero errors everywhere is trivially fair
                            Err(Error::ZeroMeanRate { .. }) => {
                                *slot = Some(MetricValue {
                                    value: 0.0,
                                    flags: vec![MetricFlag::AllRatesZero],
                                })
                            }
                            Err(e) => failures.push(MetricFailure {
                                metric: name.into(),
                                error: e.to_string(),
                            }),
                        }
                    }
                }
                rates_out = Some(rates);
            }
            Err(e) => failures.push(MetricFailure {
                metric: "operating_point".into(),
                error: e.to_string(),
            }),
        }
    }

    // tail/center sweep, per kind
    let mut cei_cells: Vec<CeiCell> = Vec::new();
    if opts.wants(Metric::Cei) {
        for (&percentile, &(w_tail, w_center)) in opts
            .percentiles
            .iter()
            .flat_map(|p| opts.weight_sets.iter().map(move |w| (p, w)))
        {
            cei_cells.push(CeiCell {
                percentile,
                w_tail,
                w_center,
                genuine_normal: None,
                genuine_extreme: None,
                impostor_normal: None,
                impostor_extreme: None,
            });
        }
        for kind in [Kind::Genuine, Kind::Impostor] {
            let group_scores = set.partition(kind);
            let pooled = set.pooled(kind);
            let prepared = BinGrid::spanning(&pooled, opts.n_bins).and_then(|grid| {
                kind_distributions(&group_scores, &grid).map(|kd| (grid, kd))
            });
            let (grid, kd) = match prepared {
                Ok(v) => v,
                Err(e) => {
                    failures.push(MetricFailure {
                        metric: format!("cei_{kind}"),
                        error: e.to_string(),
                    });
                    continue;
                }
            };
            match kind {
                Kind::Genuine => config.genuine_grid = Some((&grid).into()),
                Kind::Impostor => config.impostor_grid = Some((&grid).into()),
            }
            let side = error_side(kind, set.polarity());
            for cell in cei_cells.iter_mut() {
                let cfg = CeiConfig {
                    percentile: cell.percentile,
                    w_tail: cell.w_tail,
                    w_center: cell.w_center,
                    kind,
                    split_source: opts.split_source,
                };
                match split_dissimilarities(&kd, &cfg, side, opts.smoothing) {
                    Ok(scores) => {
                        let divergences: Vec<f64> = scores.values().cloned().collect();
                        let normal = aggregate_index(&divergences, Variant::Normal);
                        let extreme = aggregate_index(&divergences, Variant::Extreme);
                        match kind {
                            Kind::Genuine => {
                                cell.genuine_normal = Some(normal);
                                cell.genuine_extreme = Some(extreme);
                            }
                            Kind::Impostor => {
                                cell.impostor_normal = Some(normal);
                                cell.impostor_extreme = Some(extreme);
                            }
                        }
                    }
                    Err(e) => failures.push(MetricFailure {
                        metric: format!(
                            "cei_{kind}@p{}_w{}/{}",
                            cell.percentile, cell.w_tail, cell.w_center
                        ),
                        error: e.to_string(),
                    }),
                }
            }
        }
    }

    Ok(MetricReport {
        schema_version: SCHEMA_VERSION,
        config,
        dfi_n,
        dfi_e,
        in_fmr,
        in_fnmr,
        garbe_fmr,
        garbe_fnmr,
        pooled_fmr,
        pooled_fnmr,
        group_rates: rates_out,
        cei: cei_cells,
        warnings,
        failures,
    })
}

/// Per-group combined (genuine + impostor) distributions on a grid spanning
/// every score in the set.
pub fn combined_distributions(set: &ScoreSet, n_bins: usize) -> Result<(BinGrid, Vec<Distribution>)> {
    let all = set.all_scores();
    let grid = BinGrid::spanning(&all, n_bins)?;
    let mut dists = Vec::new();
    for group in set.groups() {
        let scores: Vec<f64> = set
            .records()
            .iter()
            .filter(|r| r.group == group)
            .map(|r| r.score)
            .collect();
        dists.push(build_distribution(&scores, &grid, OutOfRangePolicy::Reject)?);
    }
    Ok((grid, dists))
}

/// Serializes a report to pretty JSON (schema-stable, round-trips exactly).
pub fn render_json(report: &MetricReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Parses a JSON report produced by [`render_json`].
pub fn parse_json(data: &str) -> Result<MetricReport> {
    Ok(serde_json::from_str(data)?)
}

fn fmt_value(v: &Option<MetricValue>) -> String {
    match v {
        Some(mv) => {
            let mut s = format!("{:.4}", mv.value);
            if !mv.flags.is_empty() {
                let tags: Vec<String> = mv.flags.iter().map(flag_tag).collect();
                write!(s, " [{}]", tags.join(", ")).unwrap();
            }
            s
        }
        None => "-".to_string(),
    }
}

fn flag_tag(f: &MetricFlag) -> String {
    match f {
        MetricFlag::Clamped { raw } => format!("clamped from {raw:.4}"),
        MetricFlag::RateFloor { group } => format!("rate floor: {group}"),
        MetricFlag::AllRatesZero => "all rates zero".to_string(),
        MetricFlag::LowSample { .. } => "low sample".to_string(),
    }
}

/// Renders a report as markdown tables: a metric/value block, group rates,
/// and one percentile-by-weights grid per index variant.
pub fn render_markdown(report: &MetricReport) -> String {
    let mut out = String::new();
    let c = &report.config;
    writeln!(out, "# Fairness evaluation report").unwrap();
    writeln!(out).unwrap();
    writeln!(out, "- schema version: {}", report.schema_version).unwrap();
    writeln!(out, "- polarity: {}", c.polarity).unwrap();
    writeln!(out, "- groups (K): {}", c.validation.k).unwrap();
    writeln!(out, "- bins: {}; smoothing: {:e}", c.n_bins, c.smoothing).unwrap();
    writeln!(out, "- target FMR: {:e}", c.target_fmr).unwrap();
    if let Some(op) = &c.operating_point {
        writeln!(
            out,
            "- operating threshold: {:.6} (achieved FMR {:.6} over {} impostors)",
            op.threshold, op.achieved_fmr, op.n_impostor
        )
        .unwrap();
    }
    writeln!(out, "- split source: {:?}", c.split_source).unwrap();
    if let Some(path) = &c.scores_path {
        writeln!(out, "- scores: {path}").unwrap();
    }
    if let Some(seed) = c.seed {
        writeln!(out, "- seed: {seed}").unwrap();
    }
    writeln!(out).unwrap();

    writeln!(out, "## Per-group counts").unwrap();
    writeln!(out).unwrap();
    writeln!(out, "| group | genuine | impostor |").unwrap();
    writeln!(out, "|---|---|---|").unwrap();
    for (g, cell) in &c.validation.cells {
        writeln!(out, "| {g} | {} | {} |", cell.genuine, cell.impostor).unwrap();
    }
    writeln!(out).unwrap();

    let has_base = report.dfi_n.is_some()
        || report.in_fmr.is_some()
        || report.garbe_fmr.is_some()
        || report.pooled_fmr.is_some();
    if has_base {
        writeln!(out, "## Distribution and outcome metrics").unwrap();
        writeln!(out).unwrap();
        writeln!(out, "| metric | value |").unwrap();
        writeln!(out, "|---|---|").unwrap();
        let rows: [(&str, &Option<MetricValue>); 6] = [
            ("DFI_N", &report.dfi_n),
            ("DFI_E", &report.dfi_e),
            ("GARBE_FMR", &report.garbe_fmr),
            ("GARBE_FNMR", &report.garbe_fnmr),
            ("IN_FMR", &report.in_fmr),
            ("IN_FNMR", &report.in_fnmr),
        ];
        for (name, value) in rows {
            if value.is_some() {
                writeln!(out, "| {name} | {} |", fmt_value(value)).unwrap();
            }
        }
        if let Some(v) = report.pooled_fmr {
            writeln!(out, "| pooled FMR | {v:.6} |").unwrap();
        }
        if let Some(v) = report.pooled_fnmr {
            writeln!(out, "| pooled FNMR | {v:.6} |").unwrap();
        }
        writeln!(out).unwrap();
    }

    if let Some(rates) = &report.group_rates {
        writeln!(out, "## Group rates at the operating threshold").unwrap();
        writeln!(out).unwrap();
        writeln!(out, "| group | n_genuine | n_impostor | FMR | FNMR |").unwrap();
        writeln!(out, "|---|---|---|---|---|").unwrap();
        for r in rates {
            let fmt_rate = |x: &Option<f64>| {
                x.map_or("undefined".to_string(), |v| format!("{v:.6}"))
            };
            writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                r.group,
                r.n_genuine,
                r.n_impostor,
                fmt_rate(&r.fmr),
                fmt_rate(&r.fnmr)
            )
            .unwrap();
        }
        writeln!(out).unwrap();
    }

    if !report.cei.is_empty() {
        for (title, pick) in [
            (
                "CEI_N",
                (|c: &CeiCell| (c.genuine_normal.clone(), c.impostor_normal.clone()))
                    as fn(&CeiCell) -> (Option<MetricValue>, Option<MetricValue>),
            ),
            ("CEI_E", |c: &CeiCell| {
                (c.genuine_extreme.clone(), c.impostor_extreme.clone())
            }),
        ] {
            writeln!(out, "## {title}").unwrap();
            writeln!(out).unwrap();
            writeln!(out, "| percentile | weights (tail, center) | Genuine | Impostor |").unwrap();
            writeln!(out, "|---|---|---|---|").unwrap();
            for cell in &report.cei {
                let (g, i) = pick(cell);
                writeln!(
                    out,
                    "| P{} | ({}, {}) | {} | {} |",
                    cell.percentile,
                    cell.w_tail,
                    cell.w_center,
                    fmt_value(&g),
                    fmt_value(&i)
                )
                .unwrap();
            }
            writeln!(out).unwrap();
        }
    }

    if !report.warnings.is_empty() {
        writeln!(out, "## Warnings").unwrap();
        writeln!(out).unwrap();
        for w in &report.warnings {
            writeln!(out, "- {w}").unwrap();
        }
        writeln!(out).unwrap();
    }
    if !report.failures.is_empty() {
        writeln!(out, "## Failures").unwrap();
        writeln!(out).unwrap();
        for f in &report.failures {
            writeln!(out, "- {}: {}", f.metric, f.error).unwrap();
        }
        writeln!(out).unwrap();
    }
    out
}
