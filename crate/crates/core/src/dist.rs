//! Histogram distributions over a shared bin grid: estimation, mean
//! distribution, KL divergence in bits, percentile thresholds, and
//! tail/center splitting with fractional bin assignment.
//!
//! Every divergence in this crate compares distributions on one identical
//! grid; KL is meaningless otherwise. Grids are therefore value-compared and
//! any mixed-grid call fails with `GridMismatch`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::score::ErrorSide;

/// Default number of histogram bins. Resolves a 5% tail into roughly five
/// bins at typical score spreads.
pub const DEFAULT_BINS: usize = 100;

/// Default additive smoothing mass per bin for KL; far below 1/N for any
/// realistic sample, so distortion is negligible while empty bins stay
/// defined.
pub const DEFAULT_SMOOTHING: f64 = 1e-10;

/// An equal-width binning of `[lo, hi]` into `n_bins` half-open bins
/// `[edge_j, edge_{j+1})`, the last bin closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    lo: f64,
    hi: f64,
    n_bins: usize,
}

impl BinGrid {
    pub fn new(lo: f64, hi: f64, n_bins: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidGrid {
                reason: "bounds must be finite".into(),
            });
        }
        if lo >= hi {
            return Err(Error::InvalidGrid {
                reason: format!("lo {lo} must be below hi {hi}"),
            });
        }
        if n_bins == 0 {
            return Err(Error::InvalidGrid {
                reason: "need at least one bin".into(),
            });
        }
        Ok(BinGrid { lo, hi, n_bins })
    }

    /// Grid spanning the min/max of `scores`. A degenerate range (all scores
    /// equal) is widened by half a unit on each side so the grid stays valid.
    pub fn spanning(scores: &[f64], n_bins: usize) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::EmptyInput {
                context: "grid span",
            });
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &s in scores {
            if !s.is_finite() {
                return Err(Error::NonFiniteScore { line: 0 });
            }
            lo = lo.min(s);
            hi = hi.max(s);
        }
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        BinGrid::new(lo, hi, n_bins)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.n_bins as f64
    }

    /// The `j`-th bin edge, `j` in `0..=n_bins`. Endpoints are exact.
    pub fn edge(&self, j: usize) -> f64 {
        if j == 0 {
            self.lo
        } else if j >= self.n_bins {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * (j as f64 / self.n_bins as f64)
        }
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.n_bins).map(|j| self.edge(j)).collect()
    }

    /// Bin index of a value inside `[lo, hi]`; `hi` lands in the last bin.
    pub fn bin_index(&self, x: f64) -> usize {
        if x >= self.hi {
            return self.n_bins - 1;
        }
        let j = ((x - self.lo) / self.width()).floor();
        (j.max(0.0) as usize).min(self.n_bins - 1)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// What to do with scores outside the grid range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutOfRangePolicy {
    /// Fail with `OutOfRange`.
    #[default]
    Reject,
    /// Clamp to the nearest edge bin.
    Clamp,
}

/// A normalized histogram: per-bin probability mass over a [`BinGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    grid: BinGrid,
    mass: Vec<f64>,
    count: usize,
}

impl Distribution {
    /// Wraps a raw mass vector, checking normalization to 1 within 1e-9 and
    /// non-negativity.
    pub fn from_mass(grid: BinGrid, mass: Vec<f64>, count: usize) -> Result<Self> {
        if mass.len() != grid.n_bins() {
            return Err(Error::InvalidGrid {
                reason: format!(
                    "mass vector has {} entries for a {}-bin grid",
                    mass.len(),
                    grid.n_bins()
                ),
            });
        }
        if mass.iter().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(Error::InvalidGrid {
                reason: "mass entries must be finite and non-negative".into(),
            });
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidGrid {
                reason: format!("mass sums to {total}, expected 1"),
            });
        }
        Ok(Distribution { grid, mass, count })
    }

    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Number of samples the histogram was built from (inherited by split
    /// pieces).
    pub fn count(&self) -> usize {
        self.count
    }

    /// Cumulative mass strictly below `x`, with linear interpolation inside
    /// the bin containing `x`.
    pub fn cumulative_below(&self, x: f64) -> f64 {
        if x <= self.grid.lo() {
            return 0.0;
        }
        if x >= self.grid.hi() {
            return 1.0;
        }
        let j = self.grid.bin_index(x);
        let below: f64 = self.mass[..j].iter().sum();
        let frac = (x - self.grid.edge(j)) / self.grid.width();
        below + self.mass[j] * frac.clamp(0.0, 1.0)
    }

    /// JSON debug/plotting export: `{edges, mass, count}`.
    pub fn export_json(&self) -> String {
        let export = DistributionExport {
            edges: self.grid.edges(),
            mass: self.mass.clone(),
            count: self.count,
        };
        serde_json::to_string(&export).expect("export serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DistributionExport {
    edges: Vec<f64>,
    mass: Vec<f64>,
    count: usize,
}

/// Histograms `scores` onto `grid`: `mass[j]` is the fraction of scores in
/// bin `j`. Values on a bin edge belong to the upper bin (half-open rule).
pub fn build_distribution(
    scores: &[f64],
    grid: &BinGrid,
    policy: OutOfRangePolicy,
) -> Result<Distribution> {
    if scores.is_empty() {
        return Err(Error::EmptyInput {
            context: "histogram",
        });
    }
    let mut counts = vec![0u64; grid.n_bins()];
    for &s in scores {
        if !s.is_finite() {
            return Err(Error::NonFiniteScore { line: 0 });
        }
        let x = if grid.contains(s) {
            s
        } else {
            match policy {
                OutOfRangePolicy::Reject => {
                    return Err(Error::OutOfRange {
                        value: s,
                        lo: grid.lo(),
                        hi: grid.hi(),
                    })
                }
                OutOfRangePolicy::Clamp => s.clamp(grid.lo(), grid.hi()),
            }
        };
        counts[grid.bin_index(x)] += 1;
    }
    let n = scores.len() as f64;
    let mass = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(Distribution {
        grid: *grid,
        mass,
        count: scores.len(),
    })
}

fn check_same_grid<'a>(dists: &'a [&Distribution]) -> Result<&'a BinGrid> {
    let first = dists.first().ok_or(Error::EmptyInput {
        context: "distribution list",
    })?;
    for d in &dists[1..] {
        if d.grid != first.grid {
            return Err(Error::GridMismatch);
        }
    }
    Ok(&first.grid)
}

/// Bin-wise arithmetic mean of distributions on one shared grid.
pub fn mean_distribution(dists: &[Distribution]) -> Result<Distribution> {
    let refs: Vec<&Distribution> = dists.iter().collect();
    let grid = *check_same_grid(&refs)?;
    let k = dists.len() as f64;
    let mut mass = vec![0.0; grid.n_bins()];
    for d in dists {
        for (m, &x) in mass.iter_mut().zip(&d.mass) {
            *m += x;
        }
    }
    for m in &mut mass {
        *m /= k;
    }
    let count = dists.iter().map(|d| d.count).sum();
    Ok(Distribution { grid, mass, count })
}

/// Kullback-Leibler divergence `D(p || q)` in bits.
///
/// Both arguments get `eps` added to every bin and are renormalized before
/// the sum, so empty bins stay defined. Base-2 logarithm throughout: the
/// fairness indices normalize divergences by `log2 K`.
pub fn kl_divergence(p: &Distribution, q: &Distribution, eps: f64) -> Result<f64> {
    if p.grid != q.grid {
        return Err(Error::GridMismatch);
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidConfig {
            reason: format!("smoothing must be positive, got {eps}"),
        });
    }
    let n = p.grid.n_bins() as f64;
    let norm = 1.0 + n * eps;
    let mut sum = 0.0;
    for (&pm, &qm) in p.mass.iter().zip(&q.mass) {
        let ps = (pm + eps) / norm;
        let qs = (qm + eps) / norm;
        sum += ps * (ps / qs).log2();
    }
    // Gibbs' inequality guarantees >= 0; rounding can leave a tiny negative.
    Ok(sum.max(0.0))
}

/// Score `t` such that the error-side tail beyond `t` holds mass
/// `1 - percentile/100`, resolved by linear interpolation inside the
/// containing bin.
///
/// For `ErrorSide::High` the cumulative mass below `t` equals
/// `percentile/100`; for `ErrorSide::Low` it equals `1 - percentile/100`.
pub fn percentile_threshold(d: &Distribution, percentile: f64, side: ErrorSide) -> Result<f64> {
    if !(percentile > 0.0 && percentile < 100.0) {
        return Err(Error::InvalidConfig {
            reason: format!("percentile must be in (0, 100), got {percentile}"),
        });
    }
    let target = match side {
        ErrorSide::High => percentile / 100.0,
        ErrorSide::Low => 1.0 - percentile / 100.0,
    };
    let grid = &d.grid;
    let mut cum = 0.0;
    for (j, &m) in d.mass.iter().enumerate() {
        if m > 0.0 && cum + m >= target {
            let frac = ((target - cum) / m).clamp(0.0, 1.0);
            return Ok(grid.edge(j) + frac * grid.width());
        }
        cum += m;
    }
    Ok(grid.hi())
}

/// A distribution split at a threshold into renormalized tail and center
/// pieces, both on the parent grid. `tail_mass` is the tail's share of the
/// parent before renormalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDistribution {
    pub threshold: f64,
    pub tail: Distribution,
    pub center: Distribution,
    pub tail_mass: f64,
}

/// Splits `d` at `threshold`: the error side of the threshold becomes the
/// tail, the remainder the center. The bin containing the threshold is
/// apportioned by fractional (linear) mass, which keeps downstream indices
/// continuous in the percentile and independent of bin phase. Pieces with
/// pre-normalization mass below `eps` fail with `DegenerateTail`.
pub fn split(d: &Distribution, threshold: f64, side: ErrorSide, eps: f64) -> Result<SplitDistribution> {
    let grid = &d.grid;
    if !grid.contains(threshold) {
        return Err(Error::OutOfRange {
            value: threshold,
            lo: grid.lo(),
            hi: grid.hi(),
        });
    }
    let j = grid.bin_index(threshold);
    let frac_below = ((threshold - grid.edge(j)) / grid.width()).clamp(0.0, 1.0);

    let n = grid.n_bins();
    let mut below = vec![0.0; n];
    let mut above = vec![0.0; n];
    for (i, &m) in d.mass.iter().enumerate() {
        if i < j {
            below[i] = m;
        } else if i > j {
            above[i] = m;
        } else {
            below[i] = m * frac_below;
            above[i] = m * (1.0 - frac_below);
        }
    }
    let (mut tail, mut center) = match side {
        ErrorSide::Low => (below, above),
        ErrorSide::High => (above, below),
    };
    let tail_mass: f64 = tail.iter().sum();
    let center_mass: f64 = center.iter().sum();
    let small = tail_mass.min(center_mass);
    if small < eps {
        return Err(Error::DegenerateTail { mass: small, eps });
    }
    for m in &mut tail {
        *m /= tail_mass;
    }
    for m in &mut center {
        *m /= center_mass;
    }
    Ok(SplitDistribution {
        threshold,
        tail: Distribution {
            grid: *grid,
            mass: tail,
            count: d.count,
        },
        center: Distribution {
            grid: *grid,
            mass: center,
            count: d.count,
        },
        tail_mass,
    })
}
