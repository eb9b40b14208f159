//! Seeded generation of synthetic genuine/impostor score populations with
//! controllable bias injection.
//!
//! Reference groups draw genuine scores from a high-similarity bell law and
//! impostor scores from a low-similarity one, truncated to [0, 1] and well
//! separated. The biased group perturbs exactly one aspect per scenario:
//!
//! * `BiasedGenuineTail` — the genuine law becomes a mixture with a wide
//!   same-center component, fattening its error-side tail while leaving the
//!   impostor law untouched.
//! * `BiasedImpostorTail` — the mirror image on the impostor law.
//! * `BiasedCenters` — both laws shift by `strength * center_shift`, with
//!   each spread re-solved so the error-side quantile at the operating
//!   region matches the reference law's; centers move, tails stay aligned.
//!
//! Generation is deterministic: every (group, kind) pair derives its own
//! stream from the spec seed, so group order and parallelism cannot change
//! the output.

use std::collections::BTreeMap;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as NormalCdf};

use crate::error::{Error, Result};
use crate::score::{Kind, Polarity, ScoreRecord, ScoreSet, CSV_HEADER};

/// Which bias is injected into the designated group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Clean,
    #[serde(rename = "bg")]
    BiasedGenuineTail,
    #[serde(rename = "bi")]
    BiasedImpostorTail,
    #[serde(rename = "bc")]
    BiasedCenters,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Clean => "clean",
            Scenario::BiasedGenuineTail => "bg",
            Scenario::BiasedImpostorTail => "bi",
            Scenario::BiasedCenters => "bc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clean" => Ok(Scenario::Clean),
            "bg" => Ok(Scenario::BiasedGenuineTail),
            "bi" => Ok(Scenario::BiasedImpostorTail),
            "bc" => Ok(Scenario::BiasedCenters),
            other => Err(Error::InvalidSpec {
                reason: format!("unknown scenario {other:?} (expected clean|bg|bi|bc)"),
            }),
        }
    }
}

/// Base score laws and bias-injection magnitudes.
///
/// Defaults are calibrated so that the clean pooled FNMR at FMR = 1e-3 stays
/// below 1% (a competitive-model regime) while the per-group error counts at
/// the default operating point are large enough for stable rate ratios at
/// 1e5 comparisons per cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaseLaws {
    pub genuine_loc: f64,
    pub genuine_scale: f64,
    pub impostor_loc: f64,
    pub impostor_scale: f64,
    /// Scale multiplier of the wide mixture component used by the tail
    /// scenarios.
    pub tail_scale_mult: f64,
    /// Mixture weight of the wide component per unit strength.
    pub tail_weight: f64,
    /// Center displacement per unit strength for `BiasedCenters`.
    pub center_shift: f64,
    /// Error-side tail probability at which `BiasedCenters` re-matches the
    /// reference quantile (the operating region).
    pub quantile_p0: f64,
}

impl Default for BaseLaws {
    fn default() -> Self {
        BaseLaws {
            genuine_loc: 0.74,
            genuine_scale: 0.13,
            impostor_loc: 0.30,
            impostor_scale: 0.04,
            tail_scale_mult: 5.5,
            tail_weight: 0.07,
            center_shift: 0.06,
            quantile_p0: 0.005,
        }
    }
}

/// Full description of one synthetic dataset. Identical specs (including the
/// seed) generate identical score sets; scores are always similarities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    /// Genuine comparisons per group.
    pub n_genuine: usize,
    /// Impostor comparisons per group.
    pub n_impostor: usize,
    /// Group keys; `biased_group` names the one that gets the injection.
    pub groups: Vec<String>,
    #[serde(default)]
    pub biased_group: Option<String>,
    pub strength: f64,
    pub seed: u64,
    #[serde(default)]
    pub laws: BaseLaws,
}

impl ScenarioSpec {
    /// Two groups `A` (biased) and `B`, 1e5 comparisons per cell.
    pub fn new(scenario: Scenario, strength: f64, seed: u64) -> Self {
        ScenarioSpec {
            scenario,
            n_genuine: 100_000,
            n_impostor: 100_000,
            groups: vec!["A".to_string(), "B".to_string()],
            biased_group: None,
            strength,
            seed,
            laws: BaseLaws::default(),
        }
    }

    pub fn biased(&self) -> &str {
        self.biased_group
            .as_deref()
            .unwrap_or_else(|| self.groups[0].as_str())
    }

    fn validate(&self) -> Result<()> {
        if self.n_genuine == 0 || self.n_impostor == 0 {
            return Err(Error::InvalidSpec {
                reason: "per-group counts must be at least 1".into(),
            });
        }
        if self.groups.len() < 2 {
            return Err(Error::InvalidSpec {
                reason: format!("need at least 2 groups, got {}", self.groups.len()),
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for g in &self.groups {
            if g.is_empty() {
                return Err(Error::InvalidSpec {
                    reason: "empty group key".into(),
                });
            }
            if !seen.insert(g) {
                return Err(Error::InvalidSpec {
                    reason: format!("duplicate group key {g:?}"),
                });
            }
        }
        if let Some(b) = &self.biased_group {
            if !self.groups.contains(b) {
                return Err(Error::InvalidSpec {
                    reason: format!("biased group {b:?} is not in the group list"),
                });
            }
        }
        if !self.strength.is_finite() || self.strength < 0.0 {
            return Err(Error::InvalidSpec {
                reason: format!("strength must be non-negative, got {}", self.strength),
            });
        }
        if self.strength * self.laws.tail_weight > 1.0 {
            return Err(Error::InvalidSpec {
                reason: "strength pushes the tail mixture weight above 1".into(),
            });
        }
        Ok(())
    }
}

/// A normal law truncated to [0, 1], optionally mixed with a wide
/// same-family component.
#[derive(Debug, Clone, Copy)]
struct MixedLaw {
    loc: f64,
    scale: f64,
    mix_weight: f64,
    mix_loc: f64,
    mix_scale: f64,
}

impl MixedLaw {
    fn pure(loc: f64, scale: f64) -> Self {
        MixedLaw {
            loc,
            scale,
            mix_weight: 0.0,
            mix_loc: loc,
            mix_scale: scale,
        }
    }

    fn sample(&self, rng: &mut ChaCha12Rng) -> f64 {
        // the gate draw happens unconditionally so a zero-weight mixture
        // consumes the stream exactly like a pure law
        let use_mix = rng.random::<f64>() < self.mix_weight;
        let (loc, scale) = if use_mix {
            (self.mix_loc, self.mix_scale)
        } else {
            (self.loc, self.scale)
        };
        let normal = Normal::new(loc, scale).expect("valid law");
        loop {
            let x: f64 = normal.sample(rng);
            if (0.0..=1.0).contains(&x) {
                return x;
            }
        }
    }
}

/// Quantile of a normal law truncated to [0, 1].
fn truncated_quantile(loc: f64, scale: f64, p: f64) -> f64 {
    let n = NormalCdf::new(loc, scale).expect("valid law");
    let lo = n.cdf(0.0);
    let hi = n.cdf(1.0);
    n.inverse_cdf(lo + p * (hi - lo))
}

/// Solves for the scale that keeps the error-side quantile of a shifted law
/// at the reference position. Bisection to 1e-6 in score units.
fn match_tail_scale(
    ref_loc: f64,
    ref_scale: f64,
    shifted_loc: f64,
    p0: f64,
    side_low: bool,
) -> Result<f64> {
    let p = if side_low { p0 } else { 1.0 - p0 };
    let target = truncated_quantile(ref_loc, ref_scale, p);
    let q = |scale: f64| truncated_quantile(shifted_loc, scale, p);
    // the quantile is monotone in scale on each side of the center
    let (mut lo, mut hi) = (ref_scale * 1e-3, ref_scale * 20.0);
    let increasing = q(hi) > q(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = q(mid);
        if (v - target).abs() < 1e-9 {
            return Ok(mid);
        }
        if (v < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    if (q(mid) - target).abs() > 1e-6 {
        return Err(Error::InvalidSpec {
            reason: format!(
                "cannot match the tail quantile at p0={p0} for a center shift to {shifted_loc}"
            ),
        });
    }
    Ok(mid)
}

/// The (genuine, impostor) laws of one group under a scenario.
fn group_laws(spec: &ScenarioSpec, group: &str) -> Result<(MixedLaw, MixedLaw)> {
    let laws = &spec.laws;
    let genuine = MixedLaw::pure(laws.genuine_loc, laws.genuine_scale);
    let impostor = MixedLaw::pure(laws.impostor_loc, laws.impostor_scale);
    // strength zero reduces every scenario to the clean laws exactly
    if group != spec.biased() || spec.strength == 0.0 {
        return Ok((genuine, impostor));
    }
    match spec.scenario {
        Scenario::Clean => Ok((genuine, impostor)),
        Scenario::BiasedGenuineTail => Ok((
            MixedLaw {
                mix_weight: spec.strength * laws.tail_weight,
                mix_scale: laws.genuine_scale * laws.tail_scale_mult,
                ..genuine
            },
            impostor,
        )),
        Scenario::BiasedImpostorTail => Ok((
            genuine,
            MixedLaw {
                mix_weight: spec.strength * laws.tail_weight,
                mix_scale: laws.impostor_scale * laws.tail_scale_mult,
                ..impostor
            },
        )),
        Scenario::BiasedCenters => {
            let shift = spec.strength * laws.center_shift;
            let g_loc = laws.genuine_loc + shift;
            let i_loc = laws.impostor_loc + shift;
            let g_scale = match_tail_scale(
                laws.genuine_loc,
                laws.genuine_scale,
                g_loc,
                laws.quantile_p0,
                true, // genuine errors sit in the low tail
            )?;
            let i_scale = match_tail_scale(
                laws.impostor_loc,
                laws.impostor_scale,
                i_loc,
                laws.quantile_p0,
                false, // impostor errors sit in the high tail
            )?;
            Ok((MixedLaw::pure(g_loc, g_scale), MixedLaw::pure(i_loc, i_scale)))
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Independent sub-seed per (group, kind): group order and parallel
/// generation cannot change any group's stream.
fn sub_seed(seed: u64, group: &str, kind: Kind) -> u64 {
    let tag = match kind {
        Kind::Genuine => 0x67u64,
        Kind::Impostor => 0x69u64,
    };
    splitmix64(seed ^ fnv1a(group.as_bytes()).rotate_left(8) ^ tag)
}

/// Generates the score set described by `spec`.
pub fn generate(spec: &ScenarioSpec) -> Result<ScoreSet> {
    spec.validate()?;
    let mut records = Vec::with_capacity(spec.groups.len() * (spec.n_genuine + spec.n_impostor));
    for group in &spec.groups {
        let (genuine_law, impostor_law) = group_laws(spec, group)?;
        for (kind, law, n) in [
            (Kind::Genuine, genuine_law, spec.n_genuine),
            (Kind::Impostor, impostor_law, spec.n_impostor),
        ] {
            let mut rng = ChaCha12Rng::seed_from_u64(sub_seed(spec.seed, group, kind));
            for _ in 0..n {
                records.push(ScoreRecord {
                    score: law.sample(&mut rng),
                    kind,
                    group: group.clone(),
                });
            }
        }
    }
    ScoreSet::new(records, Polarity::Similarity)
}

/// Writes the exact CSV schema consumed by ingestion. Floats are printed
/// with shortest round-trip formatting, so export/ingest is lossless; group
/// keys containing delimiters get quoted.
pub fn export_csv(set: &ScoreSet, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(CSV_HEADER.split(','))?;
    for r in set.records() {
        w.write_record([r.score.to_string().as_str(), r.kind.as_str(), &r.group])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-(group, kind) summary statistics for generated data.
#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub group: String,
    pub kind: Kind,
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    /// Fraction of this cell's scores in its error-side 5% region of the
    /// pooled per-kind distribution.
    pub error_tail_mass: f64,
}

/// Summaries per (group, kind), with tail mass measured against the pooled
/// per-kind 5% error quantile.
pub fn summarize(set: &ScoreSet) -> Vec<CellSummary> {
    let mut out = Vec::new();
    for kind in [Kind::Genuine, Kind::Impostor] {
        let mut pooled = set.pooled(kind);
        if pooled.is_empty() {
            continue;
        }
        pooled.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
        let side_low = crate::score::error_side(kind, set.polarity()) == crate::score::ErrorSide::Low;
        let q_idx = ((pooled.len() as f64) * 0.05).floor() as usize;
        let tail_threshold = if side_low {
            pooled[q_idx.min(pooled.len() - 1)]
        } else {
            pooled[pooled.len() - 1 - q_idx.min(pooled.len() - 1)]
        };
        for (group, scores) in set.partition(kind) {
            if scores.is_empty() {
                continue;
            }
            let n = scores.len() as f64;
            let mean = scores.iter().sum::<f64>() / n;
            let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
            let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let tail_count = scores
                .iter()
                .filter(|&&s| if side_low { s <= tail_threshold } else { s >= tail_threshold })
                .count();
            out.push(CellSummary {
                group,
                kind,
                count: scores.len(),
                mean,
                std_dev: var.sqrt(),
                min,
                max,
                error_tail_mass: tail_count as f64 / n,
            });
        }
    }
    out
}

/// Convenience: per-group scores of one kind for metric entry points.
pub fn grouped(set: &ScoreSet, kind: Kind) -> BTreeMap<String, Vec<f64>> {
    set.partition(kind)
}
