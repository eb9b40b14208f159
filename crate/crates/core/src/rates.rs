//! Empirical FMR/FNMR per group and operating-threshold selection.
//!
//! Comparison conventions are fixed and tested: under `Similarity` a pair
//! matches iff `score >= tau`; under `Distance` iff `score <= tau`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::score::{Kind, Polarity, ScoreSet};

/// A decision threshold pinned to a pooled false-match-rate target.
///
/// `achieved_fmr` is the largest empirical rate not exceeding the target;
/// rates move in steps of `1/n_impostor`, so it usually sits below the
/// target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub threshold: f64,
    pub target_fmr: f64,
    pub achieved_fmr: f64,
    pub n_impostor: usize,
}

impl OperatingPoint {
    /// True when the impostor pool is too small to resolve the target rate.
    pub fn low_sample(&self) -> bool {
        (self.n_impostor as f64) * self.target_fmr < 1.0
    }
}

/// Empirical error rates of one group at a shared threshold. `None` rates
/// mark empty cells: treating them as zero would poison the ratio-based
/// indices downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRates {
    pub group: String,
    pub fmr: Option<f64>,
    pub fnmr: Option<f64>,
    pub n_impostor: usize,
    pub n_genuine: usize,
}

/// Fraction of impostor scores that match at `tau`.
pub fn fmr_at(impostor_scores: &[f64], tau: f64, polarity: Polarity) -> Result<f64> {
    if impostor_scores.is_empty() {
        return Err(Error::EmptyInput { context: "fmr" });
    }
    let matches = impostor_scores
        .iter()
        .filter(|&&s| match polarity {
            Polarity::Similarity => s >= tau,
            Polarity::Distance => s <= tau,
        })
        .count();
    Ok(matches as f64 / impostor_scores.len() as f64)
}

/// Fraction of genuine scores that fail to match at `tau`.
pub fn fnmr_at(genuine_scores: &[f64], tau: f64, polarity: Polarity) -> Result<f64> {
    if genuine_scores.is_empty() {
        return Err(Error::EmptyInput { context: "fnmr" });
    }
    let rejections = genuine_scores
        .iter()
        .filter(|&&s| match polarity {
            Polarity::Similarity => s < tau,
            Polarity::Distance => s > tau,
        })
        .count();
    Ok(rejections as f64 / genuine_scores.len() as f64)
}

/// Picks the least-strict threshold whose pooled FMR does not exceed
/// `target`: the smallest such threshold under `Similarity`, the largest
/// under `Distance`.
///
/// The threshold is resolved as the midpoint between the adjacent impostor
/// order statistics that bracket the cut, which keeps it deterministic and
/// independent of float spacing. Tied scores at the cut cannot be separated,
/// so the achieved rate drops to the next attainable step below the target.
pub fn threshold_at_global_fmr(set: &ScoreSet, target: f64) -> Result<OperatingPoint> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidConfig {
            reason: format!("target FMR must be in (0, 1], got {target}"),
        });
    }
    let mut impostors = set.pooled(Kind::Impostor);
    if impostors.is_empty() {
        return Err(Error::Unachievable { target });
    }
    impostors.sort_unstable_by(|a, b| a.partial_cmp(b).expect("scores are finite"));
    let n = impostors.len();
    // guard against 0.3 * 10 = 2.999...
    let mut matches = (((target * n as f64) + 1e-9).floor() as usize).min(n);

    let polarity = set.polarity();
    let threshold = loop {
        if matches == n {
            // every impostor allowed to match
            break match polarity {
                Polarity::Similarity => impostors[0],
                Polarity::Distance => impostors[n - 1],
            };
        }
        if matches == 0 {
            break match polarity {
                Polarity::Similarity => next_up(impostors[n - 1]),
                Polarity::Distance => next_down(impostors[0]),
            };
        }
        let (inside, outside) = match polarity {
            // top `matches` scores match at tau in (impostors[n-m-1], impostors[n-m]]
            Polarity::Similarity => (impostors[n - matches], impostors[n - matches - 1]),
            // bottom `matches` scores match at tau in [impostors[m-1], impostors[m])
            Polarity::Distance => (impostors[matches - 1], impostors[matches]),
        };
        if inside != outside {
            break (inside + outside) / 2.0;
        }
        // tie straddles the cut; admit fewer matches
        matches -= 1;
    };

    let achieved_fmr = fmr_at(&impostors, threshold, polarity)?;
    debug_assert!(achieved_fmr <= target + 1e-12);
    Ok(OperatingPoint {
        threshold,
        target_fmr: target,
        achieved_fmr,
        n_impostor: n,
    })
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

fn next_down(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

/// FMR and FNMR of every group at a shared threshold; exactly one entry per
/// group, in sorted key order.
pub fn group_rates(set: &ScoreSet, tau: f64) -> Vec<GroupRates> {
    let polarity = set.polarity();
    let genuine = set.partition(Kind::Genuine);
    let impostor = set.partition(Kind::Impostor);
    set.groups()
        .into_iter()
        .map(|g| {
            let gen = &genuine[g];
            let imp = &impostor[g];
            GroupRates {
                group: g.to_string(),
                fmr: fmr_at(imp, tau, polarity).ok(),
                fnmr: fnmr_at(gen, tau, polarity).ok(),
                n_impostor: imp.len(),
                n_genuine: gen.len(),
            }
        })
        .collect()
}
