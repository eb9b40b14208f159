//! Three-scenario benchmark: generates the tail- and center-bias datasets,
//! evaluates the full metric family on each, and checks the expected
//! detection pattern — distribution indices blind to tail bias but sensitive
//! to center shifts, outcome metrics side-specific, and the tail/center
//! index catching all three.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::MetricValue;
use crate::report::{evaluate_with_provenance, EvalOptions, MetricReport};
use crate::synth::{generate, BaseLaws, Scenario, ScenarioSpec};

/// The headline sweep cell reported in the scenario table.
pub const HEADLINE_PERCENTILE: f64 = 95.0;
pub const HEADLINE_WEIGHTS: (f64, f64) = (0.8, 0.2);

/// Default pooled FMR target for the scenario benchmark: large enough that
/// both error counts stay stable at 1e5 comparisons per cell.
pub const DEFAULT_TARGET_FMR: f64 = 5e-3;

/// Configuration of one scenario-benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Spec {
    pub seed: u64,
    /// Bias strengths for (tail-genuine, tail-impostor, centers).
    pub strengths: [f64; 3],
    pub n_genuine: usize,
    pub n_impostor: usize,
    #[serde(default)]
    pub laws: BaseLaws,
    pub eval: EvalOptions,
}

impl Table1Spec {
    pub fn new(seed: u64, strength: f64) -> Self {
        let mut eval = EvalOptions::new(DEFAULT_TARGET_FMR);
        eval.percentiles = vec![HEADLINE_PERCENTILE];
        eval.weight_sets = vec![HEADLINE_WEIGHTS];
        Table1Spec {
            seed,
            strengths: [strength; 3],
            n_genuine: 100_000,
            n_impostor: 100_000,
            laws: BaseLaws::default(),
            eval,
        }
    }

    fn all_null(&self) -> bool {
        self.strengths.iter().all(|&s| s == 0.0)
    }
}

/// One directional assertion over the scenario results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Metric values of every scenario plus the pattern verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub schema_version: u32,
    pub seed: u64,
    pub strengths: [f64; 3],
    pub n_genuine: usize,
    pub n_impostor: usize,
    /// Scenario key order: bg, bi, bc.
    pub scenarios: Vec<String>,
    pub reports: Vec<MetricReport>,
    pub pattern_checks: Vec<PatternCheck>,
    pub pattern_ok: bool,
}

impl Table1Report {
    pub fn report_for(&self, scenario: &str) -> &MetricReport {
        let idx = self
            .scenarios
            .iter()
            .position(|s| s == scenario)
            .expect("known scenario");
        &self.reports[idx]
    }
}

/// Values of the headline sweep cell for one scenario.
#[derive(Debug, Clone, Copy)]
struct HeadlineCei {
    genuine_n: f64,
    impostor_n: f64,
    genuine_e: f64,
    impostor_e: f64,
}

fn headline(report: &MetricReport) -> Option<HeadlineCei> {
    let cell = report.cei_cell(HEADLINE_PERCENTILE, HEADLINE_WEIGHTS.0, HEADLINE_WEIGHTS.1)?;
    Some(HeadlineCei {
        genuine_n: cell.genuine_normal.as_ref()?.value,
        impostor_n: cell.impostor_normal.as_ref()?.value,
        genuine_e: cell.genuine_extreme.as_ref()?.value,
        impostor_e: cell.impostor_extreme.as_ref()?.value,
    })
}

fn value(v: &Option<MetricValue>) -> f64 {
    v.as_ref().map(|m| m.value).unwrap_or(f64::NAN)
}

/// Runs the three scenarios and assembles the benchmark report.
pub fn run_table1(spec: &Table1Spec) -> Result<Table1Report> {
    let scenarios = [
        Scenario::BiasedGenuineTail,
        Scenario::BiasedImpostorTail,
        Scenario::BiasedCenters,
    ];
    let mut reports = Vec::new();
    for (scenario, &strength) in scenarios.iter().zip(&spec.strengths) {
        let mut scen_spec = ScenarioSpec::new(*scenario, strength, spec.seed);
        scen_spec.n_genuine = spec.n_genuine;
        scen_spec.n_impostor = spec.n_impostor;
        scen_spec.laws = spec.laws;
        let set = generate(&scen_spec)?;
        reports.push(evaluate_with_provenance(
            &set,
            &spec.eval,
            None,
            Some(spec.seed),
        )?);
    }

    let pattern_checks = if spec.all_null() {
        null_pattern_checks(&reports)
    } else {
        bias_pattern_checks(&reports)
    };
    let pattern_ok = pattern_checks.iter().all(|c| c.passed);

    Ok(Table1Report {
        schema_version: crate::report::SCHEMA_VERSION,
        seed: spec.seed,
        strengths: spec.strengths,
        n_genuine: spec.n_genuine,
        n_impostor: spec.n_impostor,
        scenarios: scenarios.iter().map(|s| s.as_str().to_string()).collect(),
        reports,
        pattern_checks,
        pattern_ok,
    })
}

/// The directional detection pattern at non-zero strengths.
fn bias_pattern_checks(reports: &[MetricReport]) -> Vec<PatternCheck> {
    let (bg, bi, bc) = (&reports[0], &reports[1], &reports[2]);
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(PatternCheck {
            name: name.to_string(),
            passed,
            detail,
        });
    };

    let dfi_vals = |r: &MetricReport| (value(&r.dfi_n), value(&r.dfi_e));
    let (bg_n, bg_e) = dfi_vals(bg);
    let (bi_n, bi_e) = dfi_vals(bi);
    let (bc_n, bc_e) = dfi_vals(bc);
    push(
        "dfi_blind_to_tail_bias",
        bg_n >= 0.99 && bg_e >= 0.99 && bi_n >= 0.99 && bi_e >= 0.99,
        format!("DFI on tail scenarios: bg N={bg_n:.4} E={bg_e:.4}, bi N={bi_n:.4} E={bi_e:.4} (all >= 0.99)"),
    );
    push(
        "dfi_detects_center_bias",
        bc_n <= 0.90 && bc_e <= 0.90,
        format!("DFI on center scenario: N={bc_n:.4} E={bc_e:.4} (both <= 0.90)"),
    );

    let g_fnmr_bg = value(&bg.garbe_fnmr);
    let g_fnmr_bi = value(&bi.garbe_fnmr);
    let g_fmr_bg = value(&bg.garbe_fmr);
    let g_fmr_bi = value(&bi.garbe_fmr);
    push(
        "garbe_is_side_specific",
        g_fnmr_bg >= 5.0 * g_fnmr_bi && g_fmr_bi >= 5.0 * g_fmr_bg,
        format!(
            "GARBE_FNMR bg={g_fnmr_bg:.4} vs bi={g_fnmr_bi:.4}; GARBE_FMR bi={g_fmr_bi:.4} vs bg={g_fmr_bg:.4} (5x separation)"
        ),
    );

    let in_fnmr_bg = value(&bg.in_fnmr);
    let in_fnmr_bi = value(&bi.in_fnmr);
    let in_fmr_bg = value(&bg.in_fmr);
    let in_fmr_bi = value(&bi.in_fmr);
    push(
        "inequity_is_side_specific",
        in_fnmr_bg >= 1.5 && in_fmr_bi >= 1.5 && in_fmr_bg <= 1.1 && in_fnmr_bi <= 1.1,
        format!(
            "IN_FNMR bg={in_fnmr_bg:.4} (>=1.5) bi={in_fnmr_bi:.4} (<=1.1); IN_FMR bi={in_fmr_bi:.4} (>=1.5) bg={in_fmr_bg:.4} (<=1.1)"
        ),
    );

    match (headline(bg), headline(bi), headline(bc)) {
        (Some(hbg), Some(hbi), Some(hbc)) => {
            push(
                "cei_detects_genuine_tail_bias",
                hbg.genuine_n <= 0.90 && hbg.impostor_n >= 0.99,
                format!(
                    "bg cell: CEI_N genuine={:.4} (<=0.90) impostor={:.4} (>=0.99)",
                    hbg.genuine_n, hbg.impostor_n
                ),
            );
            push(
                "cei_detects_impostor_tail_bias",
                hbi.impostor_n <= 0.90 && hbi.genuine_n >= 0.99,
                format!(
                    "bi cell: CEI_N impostor={:.4} (<=0.90) genuine={:.4} (>=0.99)",
                    hbi.impostor_n, hbi.genuine_n
                ),
            );
            let cells = [
                ("bg genuine", hbg.genuine_n),
                ("bg impostor", hbg.impostor_n),
                ("bi genuine", hbi.genuine_n),
                ("bi impostor", hbi.impostor_n),
                ("bc genuine", hbc.genuine_n),
                ("bc impostor", hbc.impostor_n),
            ];
            let min = cells
                .iter()
                .cloned()
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            push(
                "cei_bc_impostor_is_global_minimum",
                min.0 == "bc impostor",
                format!("minimum CEI_N cell is {} = {:.4}", min.0, min.1),
            );
        }
        _ => push(
            "cei_cells_present",
            false,
            "headline sweep cell missing from a scenario report".to_string(),
        ),
    }

    checks
}

/// With all strengths at zero, nothing should be detected anywhere.
fn null_pattern_checks(reports: &[MetricReport]) -> Vec<PatternCheck> {
    let tol = 0.02;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for r in reports {
        for v in [&r.dfi_n, &r.dfi_e] {
            let d = (value(v) - 1.0).abs();
            worst = worst.max(d);
            ok &= d <= tol;
        }
        for v in [&r.garbe_fmr, &r.garbe_fnmr] {
            let d = value(v).abs();
            worst = worst.max(d);
            ok &= d <= tol;
        }
        for v in [&r.in_fmr, &r.in_fnmr] {
            let d = (value(v) - 1.0).abs();
            worst = worst.max(d);
            ok &= d <= tol;
        }
        for cell in &r.cei {
            for v in [
                &cell.genuine_normal,
                &cell.genuine_extreme,
                &cell.impostor_normal,
                &cell.impostor_extreme,
            ] {
                let d = (value(v) - 1.0).abs();
                worst = worst.max(d);
                ok &= d <= tol;
            }
        }
    }
    vec![PatternCheck {
        name: "no_bias_detected_anywhere".to_string(),
        passed: ok,
        detail: format!(
            "all strengths zero: every metric within {tol} of its fair point (worst deviation {worst:.4})"
        ),
    }]
}

/// Serializes the benchmark report to pretty JSON.
pub fn render_table1_json(report: &Table1Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn parse_table1_json(data: &str) -> Result<Table1Report> {
    Ok(serde_json::from_str(data)?)
}

/// Renders the scenario table: twelve metric rows by three scenario
/// columns, followed by the pattern verdict.
pub fn render_table1_markdown(report: &Table1Report) -> String {
    let mut out = String::new();
    writeln!(out, "# Synthetic bias scenarios").unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "- seed: {}; strengths (bg, bi, bc): ({}, {}, {}); comparisons per cell: {} genuine / {} impostor",
        report.seed,
        report.strengths[0],
        report.strengths[1],
        report.strengths[2],
        report.n_genuine,
        report.n_impostor
    )
    .unwrap();
    let cfg = &report.reports[0].config;
    writeln!(
        out,
        "- target FMR: {:e}; bins: {}; smoothing: {:e}; CEI cell: P{} w=({}, {})",
        cfg.target_fmr,
        cfg.n_bins,
        cfg.smoothing,
        HEADLINE_PERCENTILE,
        HEADLINE_WEIGHTS.0,
        HEADLINE_WEIGHTS.1
    )
    .unwrap();
    writeln!(out).unwrap();

    let fmt = |v: f64| {
        if v.is_nan() {
            "-".to_string()
        } else {
            format!("{v:.4}")
        }
    };
    let cei_rows = |r: &MetricReport| {
        headline(r).map_or([f64::NAN; 4], |h| {
            [h.genuine_n, h.impostor_n, h.genuine_e, h.impostor_e]
        })
    };
    let per_scenario = |f: &dyn Fn(&MetricReport) -> f64| -> Vec<f64> {
        report.reports.iter().map(f).collect()
    };

    let rows: Vec<(&str, Vec<f64>)> = vec![
        ("DFI_N", per_scenario(&|r| value(&r.dfi_n))),
        ("DFI_E", per_scenario(&|r| value(&r.dfi_e))),
        ("GARBE_FMR", per_scenario(&|r| value(&r.garbe_fmr))),
        ("GARBE_FNMR", per_scenario(&|r| value(&r.garbe_fnmr))),
        ("IN_FMR", per_scenario(&|r| value(&r.in_fmr))),
        ("IN_FNMR", per_scenario(&|r| value(&r.in_fnmr))),
        ("Pooled FMR", per_scenario(&|r| r.pooled_fmr.unwrap_or(f64::NAN))),
        ("Pooled FNMR", per_scenario(&|r| r.pooled_fnmr.unwrap_or(f64::NAN))),
        ("CEI_N_Genuine", per_scenario(&|r| cei_rows(r)[0])),
        ("CEI_N_Impostor", per_scenario(&|r| cei_rows(r)[1])),
        ("CEI_E_Genuine", per_scenario(&|r| cei_rows(r)[2])),
        ("CEI_E_Impostor", per_scenario(&|r| cei_rows(r)[3])),
    ];

    writeln!(out, "| metric | BG | BI | BC |").unwrap();
    writeln!(out, "|---|---|---|---|").unwrap();
    for (name, vals) in rows {
        writeln!(
            out,
            "| {name} | {} | {} | {} |",
            fmt(vals[0]),
            fmt(vals[1]),
            fmt(vals[2])
        )
        .unwrap();
    }
    writeln!(out).unwrap();

    writeln!(out, "## Pattern check").unwrap();
    writeln!(out).unwrap();
    for check in &report.pattern_checks {
        writeln!(
            out,
            "- {}: {} — {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        )
        .unwrap();
    }
    writeln!(out).unwrap();
    writeln!(
        out,
        "Overall: {}",
        if report.pattern_ok { "PASS" } else { "FAIL" }
    )
    .unwrap();
    out
}

/// Convenience for determinism checks: the default JSON rendering.
pub fn table1_bytes(spec: &Table1Spec) -> Result<String> {
    Ok(render_table1_json(&run_table1(spec)?))
}
