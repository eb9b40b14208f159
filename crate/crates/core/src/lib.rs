//! Demographic fairness metrics for 1:1 verification systems, computed from
//! raw comparison scores.
//!
//! The crate ingests labeled similarity or distance scores, estimates
//! per-group score distributions, and quantifies demographic disparity two
//! ways: through error rates at a shared operating threshold (GARBE,
//! Inequity) and through divergences between the distributions themselves
//! (DFI, and the tail/center-weighted CEI, which keeps error-side tail
//! differences visible without pinning an operating point). A seeded
//! synthetic generator produces tail- and center-biased score populations
//! for validating what each metric can and cannot detect.
//!
//! ```
//! use fairscore_core::{
//!     evaluate_all, generate, EvalOptions, Scenario, ScenarioSpec,
//! };
//!
//! let mut spec = ScenarioSpec::new(Scenario::BiasedGenuineTail, 1.0, 42);
//! spec.n_genuine = 2000;
//! spec.n_impostor = 2000;
//! let scores = generate(&spec).unwrap();
//!
//! let report = evaluate_all(&scores, &EvalOptions::new(5e-3)).unwrap();
//! assert!(report.dfi_n.unwrap().value > 0.9);
//! ```

pub mod dist;
pub mod error;
pub mod metrics;
pub mod rates;
pub mod report;
pub mod score;
pub mod synth;
pub mod table1;

pub use dist::{
    build_distribution, kl_divergence, mean_distribution, percentile_threshold, split, BinGrid,
    Distribution, OutOfRangePolicy, SplitDistribution, DEFAULT_BINS, DEFAULT_SMOOTHING,
};
pub use error::{Error, Result};
pub use metrics::{
    cei, cei_scores, dfi, garbe, inequity, CeiConfig, MetricFlag, MetricValue, RateKind,
    SplitSource, Variant,
};
pub use rates::{fmr_at, fnmr_at, group_rates, threshold_at_global_fmr, GroupRates, OperatingPoint};
pub use report::{
    evaluate_all, evaluate_with_provenance, parse_json, parse_metric_list, render_json,
    render_markdown, CeiCell, EvalOptions, Metric, MetricFailure, MetricReport, ReportConfig,
    SCHEMA_VERSION,
};
pub use score::{
    error_side, ingest_csv, ingest_csv_with, ingest_json, validate_for_fairness, CellCounts,
    ErrorSide, IngestOptions, Kind, Polarity, ScoreRecord, ScoreSet, ValidationFlag,
    ValidationReport, CSV_HEADER, DEFAULT_MIN_PER_CELL,
};
pub use synth::{export_csv, generate, summarize, BaseLaws, CellSummary, Scenario, ScenarioSpec};
pub use table1::{
    parse_table1_json, render_table1_json, render_table1_markdown, run_table1, PatternCheck,
    Table1Report, Table1Spec,
};
