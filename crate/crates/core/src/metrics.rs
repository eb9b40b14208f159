//! The fairness metric family.
//!
//! Two differential **performance** indices work on score distributions and
//! need no operating point:
//!
//! * [`dfi`] — 1 minus the normalized KL divergence of each group's combined
//!   (genuine + impostor) distribution from the mean distribution.
//! * [`cei`] — the same construction applied per kind (genuine and impostor
//!   separately) after splitting each distribution into an error-side tail
//!   and a center at a percentile threshold, with a weighted sum of tail and
//!   center divergences. This keeps tail differences visible even when they
//!   carry little total mass.
//!
//! Two differential **outcome** metrics aggregate per-group error rates at a
//! shared threshold:
//!
//! * [`inequity`] — worst group rate over the geometric mean of all rates.
//! * [`garbe`] — Gini-style mean absolute rate difference, normalized.
//!
//! [`evaluate_all`](crate::report::evaluate_all) drives the whole family
//! over a percentile/weight sweep and assembles a
//! [`MetricReport`](crate::report::MetricReport) with full configuration
//! provenance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::{
    build_distribution, kl_divergence, mean_distribution, percentile_threshold, split, BinGrid,
    Distribution, OutOfRangePolicy,
};
use crate::error::{Error, Result};
use crate::rates::GroupRates;
use crate::score::{error_side, ErrorSide, Kind, Polarity};

/// Normal averages the per-group divergences; Extreme keeps only the group
/// that diverges the most from the mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Normal,
    Extreme,
}

/// Which error rate an outcome metric aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateKind {
    Fmr,
    Fnmr,
}

impl RateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RateKind::Fmr => "FMR",
            RateKind::Fnmr => "FNMR",
        }
    }
}

/// Where the tail/center split threshold comes from.
///
/// The split percentile is resolved on the mean distribution by default and
/// the resulting score threshold is applied identically to every group:
/// per-group percentiles would force equal tail masses and erase exactly the
/// tail-mass differences the index is meant to detect. The alternatives stay
/// available for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSource {
    #[default]
    MeanDistribution,
    PooledDistribution,
    PerGroup,
}

/// Configuration of one tail/center split evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CeiConfig {
    pub percentile: f64,
    pub w_tail: f64,
    pub w_center: f64,
    pub kind: Kind,
    #[serde(default)]
    pub split_source: SplitSource,
}

impl CeiConfig {
    /// Builds a config, requiring `w_tail + w_center = 1` within 1e-9 so
    /// values stay comparable across configurations.
    pub fn new(percentile: f64, w_tail: f64, w_center: f64, kind: Kind) -> Result<Self> {
        if !(percentile > 0.0 && percentile < 100.0) {
            return Err(Error::InvalidConfig {
                reason: format!("percentile must be in (0, 100), got {percentile}"),
            });
        }
        if w_tail < 0.0 || w_center < 0.0 {
            return Err(Error::InvalidConfig {
                reason: "weights must be non-negative".into(),
            });
        }
        if (w_tail + w_center - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "weights must sum to 1 (got {w_tail} + {w_center}); \
                     use new_unnormalized to override"
                ),
            });
        }
        Ok(CeiConfig {
            percentile,
            w_tail,
            w_center,
            kind,
            split_source: SplitSource::default(),
        })
    }

    /// Override escape hatch for weight pairs that do not sum to 1.
    pub fn new_unnormalized(percentile: f64, w_tail: f64, w_center: f64, kind: Kind) -> Result<Self> {
        if !(percentile > 0.0 && percentile < 100.0) {
            return Err(Error::InvalidConfig {
                reason: format!("percentile must be in (0, 100), got {percentile}"),
            });
        }
        if w_tail < 0.0 || w_center < 0.0 {
            return Err(Error::InvalidConfig {
                reason: "weights must be non-negative".into(),
            });
        }
        Ok(CeiConfig {
            percentile,
            w_tail,
            w_center,
            kind,
            split_source: SplitSource::default(),
        })
    }

    pub fn with_split_source(mut self, source: SplitSource) -> Self {
        self.split_source = source;
        self
    }
}

/// A warning attached to a metric value. Flags are advisories, not failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "flag", rename_all = "snake_case")]
pub enum MetricFlag {
    /// The raw index fell outside [0, 1] and was clamped; `raw` preserves
    /// the unclamped value.
    Clamped { raw: f64 },
    /// A zero rate was replaced by `1/(2n)` of its cell before the geometric
    /// mean.
    RateFloor { group: String },
    /// Every group's rate was zero: no errors anywhere, trivially fair.
    AllRatesZero,
    /// The impostor pool is too small to resolve the target FMR.
    LowSample { n_impostor: usize, target_fmr: f64 },
}

/// A metric value plus any advisory flags raised while computing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<MetricFlag>,
}

impl MetricValue {
    pub fn plain(value: f64) -> Self {
        MetricValue {
            value,
            flags: Vec::new(),
        }
    }

    pub fn is_clamped(&self) -> bool {
        self.flags
            .iter()
            .any(|f| matches!(f, MetricFlag::Clamped { .. }))
    }
}

pub(crate) fn aggregate_index(divergences: &[f64], variant: Variant) -> MetricValue {
    let k = divergences.len() as f64;
    let log2k = k.log2();
    let raw = match variant {
        Variant::Normal => 1.0 - divergences.iter().sum::<f64>() / (k * log2k),
        Variant::Extreme => {
            1.0 - divergences.iter().cloned().fold(0.0, f64::max) / log2k
        }
    };
    if !(0.0..=1.0).contains(&raw) {
        MetricValue {
            value: raw.clamp(0.0, 1.0),
            flags: vec![MetricFlag::Clamped { raw }],
        }
    } else {
        MetricValue::plain(raw)
    }
}

/// Distribution fairness index over per-group combined (genuine + impostor)
/// distributions on a shared grid.
///
/// `Normal`: `1 - (1/(K log2 K)) * sum_i KL(z_i || z_mean)`;
/// `Extreme`: `1 - (1/log2 K) * max_i KL(z_i || z_mean)`.
///
/// `KL(z_i || mean)` is bounded by `log2 K` because the mean dominates each
/// component bin-wise, so no clamping can fire here.
pub fn dfi(dists: &[Distribution], variant: Variant, eps: f64) -> Result<f64> {
    if dists.len() < 2 {
        return Err(Error::KTooSmall { k: dists.len() });
    }
    let mean = mean_distribution(dists)?;
    let divergences = dists
        .iter()
        .map(|d| kl_divergence(d, &mean, eps))
        .collect::<Result<Vec<f64>>>()?;
    Ok(aggregate_index(&divergences, variant).value)
}

fn rate_of(r: &GroupRates, which: RateKind) -> Option<f64> {
    match which {
        RateKind::Fmr => r.fmr,
        RateKind::Fnmr => r.fnmr,
    }
}

fn cell_size(r: &GroupRates, which: RateKind) -> usize {
    match which {
        RateKind::Fmr => r.n_impostor,
        RateKind::Fnmr => r.n_genuine,
    }
}

/// Rates per group with zero entries floored to `1/(2n)` of their cell, the
/// geometric-mean guard for the inequity ratio.
fn floored_rates(rates: &[GroupRates], which: RateKind) -> Result<(Vec<f64>, Vec<MetricFlag>)> {
    let mut out = Vec::with_capacity(rates.len());
    let mut flags = Vec::new();
    for r in rates {
        let rate = rate_of(r, which).ok_or_else(|| Error::UndefinedRate {
            group: r.group.clone(),
            which: which.as_str(),
        })?;
        if rate == 0.0 {
            let n = cell_size(r, which);
            out.push(1.0 / (2.0 * n as f64));
            flags.push(MetricFlag::RateFloor {
                group: r.group.clone(),
            });
        } else {
            out.push(rate);
        }
    }
    Ok((out, flags))
}

/// Worst-group rate over the geometric mean of all group rates. Equal rates
/// give exactly 1; the ratio is invariant to uniform rate scaling.
pub fn inequity(rates: &[GroupRates], which: RateKind) -> Result<MetricValue> {
    if rates.len() < 2 {
        return Err(Error::KTooSmall { k: rates.len() });
    }
    let (floored, flags) = floored_rates(rates, which)?;
    let max = floored.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = floored.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == min {
        // equal rates: the ratio is 1 by definition, skip the log round-trip
        return Ok(MetricValue { value: 1.0, flags });
    }
    let mean_log: f64 = floored.iter().map(|r| r.ln()).sum::<f64>() / floored.len() as f64;
    let value = (max.ln() - mean_log).exp();
    Ok(MetricValue { value, flags })
}

/// Gini-style aggregation: mean absolute pairwise rate difference over twice
/// the arithmetic mean. Zero for equal rates, bounded by `1 - 1/K`.
pub fn garbe(rates: &[GroupRates], which: RateKind) -> Result<MetricValue> {
    if rates.len() < 2 {
        return Err(Error::KTooSmall { k: rates.len() });
    }
    let values = rates
        .iter()
        .map(|r| {
            rate_of(r, which).ok_or_else(|| Error::UndefinedRate {
                group: r.group.clone(),
                which: which.as_str(),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if mean == 0.0 {
        return Err(Error::ZeroMeanRate {
            which: which.as_str(),
        });
    }
    let mut abs_diff_sum = 0.0;
    for &a in &values {
        for &b in &values {
            abs_diff_sum += (a - b).abs();
        }
    }
    Ok(MetricValue::plain(abs_diff_sum / (2.0 * k * k * mean)))
}

/// Per-group distributions of one kind, their mean, and the shared grid —
/// the reusable half of a tail/center evaluation.
pub(crate) struct KindDistributions {
    pub groups: BTreeMap<String, Distribution>,
    pub mean: Distribution,
    pub pooled: Distribution,
}

pub(crate) fn kind_distributions(
    group_scores: &BTreeMap<String, Vec<f64>>,
    grid: &BinGrid,
) -> Result<KindDistributions> {
    if group_scores.len() < 2 {
        return Err(Error::KTooSmall {
            k: group_scores.len(),
        });
    }
    let mut groups = BTreeMap::new();
    let mut all = Vec::new();
    for (g, scores) in group_scores {
        groups.insert(
            g.clone(),
            build_distribution(scores, grid, OutOfRangePolicy::Reject)?,
        );
        all.extend_from_slice(scores);
    }
    let dists: Vec<Distribution> = groups.values().cloned().collect();
    let mean = mean_distribution(&dists)?;
    let pooled = build_distribution(&all, grid, OutOfRangePolicy::Reject)?;
    Ok(KindDistributions {
        groups,
        mean,
        pooled,
    })
}

pub(crate) fn split_dissimilarities(
    kd: &KindDistributions,
    cfg: &CeiConfig,
    side: ErrorSide,
    eps: f64,
) -> Result<BTreeMap<String, f64>> {
    let shared_threshold = match cfg.split_source {
        SplitSource::MeanDistribution => {
            Some(percentile_threshold(&kd.mean, cfg.percentile, side)?)
        }
        SplitSource::PooledDistribution => {
            Some(percentile_threshold(&kd.pooled, cfg.percentile, side)?)
        }
        SplitSource::PerGroup => None,
    };

    let mut out = BTreeMap::new();
    for (g, dist) in &kd.groups {
        let threshold = match shared_threshold {
            Some(t) => t,
            None => percentile_threshold(dist, cfg.percentile, side)?,
        };
        let group_split = split(dist, threshold, side, eps)?;
        let mean_split = split(&kd.mean, threshold, side, eps)?;
        let tail_kl = kl_divergence(&group_split.tail, &mean_split.tail, eps)?;
        let center_kl = kl_divergence(&group_split.center, &mean_split.center, eps)?;
        out.insert(g.clone(), cfg.w_tail * tail_kl + cfg.w_center * center_kl);
    }
    Ok(out)
}

/// Per-group weighted tail/center dissimilarity from the mean distribution.
///
/// Builds one distribution per group on `grid`, derives the split threshold
/// at `cfg.percentile` on the error side of `cfg.kind` under `polarity`,
/// splits every group and the mean at that threshold, and returns the
/// weighted sum of tail and center KL divergences per group.
pub fn cei_scores(
    group_scores: &BTreeMap<String, Vec<f64>>,
    grid: &BinGrid,
    cfg: &CeiConfig,
    polarity: Polarity,
    eps: f64,
) -> Result<BTreeMap<String, f64>> {
    let kd = kind_distributions(group_scores, grid)?;
    let side = error_side(cfg.kind, polarity);
    split_dissimilarities(&kd, cfg, side, eps)
}

/// Comprehensive equity index: the DFI aggregation applied to tail/center
/// dissimilarities of one kind. Clamped to [0, 1] with a flag when the
/// renormalized-tail divergences push the raw value outside.
pub fn cei(
    group_scores: &BTreeMap<String, Vec<f64>>,
    grid: &BinGrid,
    cfg: &CeiConfig,
    polarity: Polarity,
    eps: f64,
    variant: Variant,
) -> Result<MetricValue> {
    let scores = cei_scores(group_scores, grid, cfg, polarity, eps)?;
    let divergences: Vec<f64> = scores.values().cloned().collect();
    Ok(aggregate_index(&divergences, variant))
}
