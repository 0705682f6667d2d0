//! Ensembles of initially identical engines, each run for one cycle.
//!
//! Trial `i` of a run with seed `s` always uses the random stream
//! `streams::stream(s, i)`. Trials are grouped into fixed-size blocks whose
//! partial statistics are merged in block order, so the floating-point
//! result does not depend on the number of workers.

use std::collections::BTreeMap;

use ordered_float::OrderedFloat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{mean_heats_ring, work_statistics_ring, RingSpec};
use crate::streams::stream;
use crate::urn::{cycle_work, CycleOutcome, EngineRing};
use crate::{Error, Result};

const BLOCK_TRIALS: u64 = 1 << 14;
const GENERAL_BINS: usize = 256;
/// Relative tolerance for the per-trial energy balance.
pub const CONSERVATION_TOLERANCE: f64 = 1e-12;
/// Exact enumeration is attempted up to this many reservoirs.
pub const MAX_ENUMERATED_RESERVOIRS: usize = 20;

/// Distribution of the sampled work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Histogram {
    /// One entry per distinct work value, sorted by value. Used for 0/1
    /// weights, where the support is finite.
    Exact { values: Vec<ExactBin> },
    /// `bins` equal-width bins over `[lo, hi]`, the full support of the work.
    Binned { lo: f64, hi: f64, counts: Vec<u64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactBin {
    pub work: f64,
    pub count: u64,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        match self {
            Histogram::Exact { values } => values.iter().map(|b| b.count).sum(),
            Histogram::Binned { counts, .. } => counts.iter().sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub trials: u64,
    pub seed: u64,
    pub mean_w: f64,
    /// Unbiased sample variance; zero for a single trial.
    pub var_w: f64,
    pub stderr_w: f64,
    /// Mean energy gained by each reservoir.
    pub mean_q: Vec<f64>,
    pub histogram: Histogram,
    /// Largest `|W + ΣQ|` seen in any trial.
    pub max_conservation_residual: f64,
    /// Trials whose energy balance missed [`CONSERVATION_TOLERANCE`].
    pub conservation_violations: u64,
}

/// Outcome of trial `index` alone, as seen inside any ensemble run with `seed`.
pub fn simulate_trial(ring: &EngineRing, seed: u64, index: u64) -> CycleOutcome {
    ring.exchange_step(&mut stream(seed, index))
}

/// Runs `trials` independent cycles on the global rayon pool.
pub fn run_ensemble(ring: &EngineRing, trials: u64, seed: u64) -> Result<EnsembleStats> {
    run_blocks(ring, trials, seed, |blocks| {
        blocks.into_par_iter().map(|b| b.run()).collect()
    })
}

/// As [`run_ensemble`] on a dedicated pool of `workers` threads. The result
/// is identical for every `workers >= 1`.
pub fn run_ensemble_with_workers(
    ring: &EngineRing,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<EnsembleStats> {
    if workers == 0 {
        return Err(Error::InvalidParameter("workers must be at least 1".into()));
    }
    if workers == 1 {
        return run_blocks(ring, trials, seed, |blocks| {
            blocks.into_iter().map(|b| b.run()).collect()
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| run_ensemble(ring, trials, seed))
}

fn run_blocks<F>(ring: &EngineRing, trials: u64, seed: u64, execute: F) -> Result<EnsembleStats>
where
    F: FnOnce(Vec<Block<'_>>) -> Vec<Partial>,
{
    if trials == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let layout = HistogramLayout::for_ring(ring);
    let blocks: Vec<Block<'_>> = (0..trials.div_ceil(BLOCK_TRIALS))
        .map(|b| Block {
            ring,
            layout: &layout,
            seed,
            start: b * BLOCK_TRIALS,
            end: ((b + 1) * BLOCK_TRIALS).min(trials),
        })
        .collect();

    let total = execute(blocks)
        .into_iter()
        .reduce(Partial::merge)
        .expect("at least one block");

    let var_w = if total.count > 1 {
        total.m2_w / (total.count - 1) as f64
    } else {
        0.0
    };
    Ok(EnsembleStats {
        trials: total.count,
        seed,
        mean_w: total.mean_w,
        var_w,
        stderr_w: (var_w / total.count as f64).sqrt(),
        mean_q: total.mean_q,
        histogram: layout.finish(total.hist),
        max_conservation_residual: total.max_residual,
        conservation_violations: total.violations,
    })
}

struct Block<'a> {
    ring: &'a EngineRing,
    layout: &'a HistogramLayout,
    seed: u64,
    start: u64,
    end: u64,
}

impl Block<'_> {
    fn run(self) -> Partial {
        let mut acc = Partial::empty(self.ring.len(), self.layout);
        for i in self.start..self.end {
            let out = simulate_trial(self.ring, self.seed, i);
            acc.push(&out, self.layout);
        }
        acc
    }
}

/// Welford accumulator for one block, mergeable with Chan's update.
struct Partial {
    count: u64,
    mean_w: f64,
    m2_w: f64,
    mean_q: Vec<f64>,
    hist: HistCounts,
    max_residual: f64,
    violations: u64,
}

enum HistCounts {
    Exact(BTreeMap<OrderedFloat<f64>, u64>),
    Binned(Vec<u64>),
}

impl Partial {
    fn empty(len: usize, layout: &HistogramLayout) -> Self {
        Self {
            count: 0,
            mean_w: 0.0,
            m2_w: 0.0,
            mean_q: vec![0.0; len],
            hist: layout.empty_counts(),
            max_residual: 0.0,
            violations: 0,
        }
    }

    fn push(&mut self, out: &CycleOutcome, layout: &HistogramLayout) {
        self.count += 1;
        let n = self.count as f64;
        let delta = out.work - self.mean_w;
        self.mean_w += delta / n;
        self.m2_w += delta * (out.work - self.mean_w);
        for (mq, q) in self.mean_q.iter_mut().zip(&out.heat_increments) {
            *mq += (q - *mq) / n;
        }
        layout.record(&mut self.hist, out.work);

        let residual = out.energy_residual().abs();
        self.max_residual = self.max_residual.max(residual);
        if residual > CONSERVATION_TOLERANCE * out.energy_scale() {
            self.violations += 1;
        }
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta = other.mean_w - self.mean_w;
        let mean_q = self
            .mean_q
            .iter()
            .zip(&other.mean_q)
            .map(|(a, b)| a + (b - a) * nb / n)
            .collect();
        let hist = match (self.hist, other.hist) {
            (HistCounts::Exact(mut a), HistCounts::Exact(b)) => {
                for (k, c) in b {
                    *a.entry(k).or_insert(0) += c;
                }
                HistCounts::Exact(a)
            }
            (HistCounts::Binned(mut a), HistCounts::Binned(b)) => {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                HistCounts::Binned(a)
            }
            _ => unreachable!("all blocks share one layout"),
        };
        Self {
            count: self.count + other.count,
            mean_w: self.mean_w + delta * nb / n,
            m2_w: self.m2_w + other.m2_w + delta * delta * na * nb / n,
            mean_q,
            hist,
            max_residual: self.max_residual.max(other.max_residual),
            violations: self.violations + other.violations,
        }
    }
}

enum HistogramLayout {
    Exact,
    Binned { lo: f64, hi: f64 },
}

impl HistogramLayout {
    fn for_ring(ring: &EngineRing) -> Self {
        if ring.is_binary() {
            return Self::Exact;
        }
        // Work is a sum of independent per-reservoir terms, so its support
        // is bounded by the sums of their extremes.
        let eps = ring.altitudes();
        let len = eps.len();
        let (mut lo, mut hi) = (0.0, 0.0);
        for (k, r) in ring.reservoirs().iter().enumerate() {
            let d = eps[k] - eps[(k + 1) % len];
            let terms = r.classes().iter().map(|c| d * c.weight);
            lo += terms.clone().fold(f64::INFINITY, f64::min);
            hi += terms.fold(f64::NEG_INFINITY, f64::max);
        }
        Self::Binned { lo, hi }
    }

    fn empty_counts(&self) -> HistCounts {
        match self {
            Self::Exact => HistCounts::Exact(BTreeMap::new()),
            Self::Binned { .. } => HistCounts::Binned(vec![0; GENERAL_BINS]),
        }
    }

    fn record(&self, counts: &mut HistCounts, work: f64) {
        match (self, counts) {
            (Self::Exact, HistCounts::Exact(map)) => {
                *map.entry(OrderedFloat(work)).or_insert(0) += 1;
            }
            (Self::Binned { lo, hi }, HistCounts::Binned(bins)) => {
                let span = hi - lo;
                let idx = if span > 0.0 {
                    (((work - lo) / span) * GENERAL_BINS as f64).floor()
                } else {
                    0.0
                };
                let idx = (idx.max(0.0) as usize).min(GENERAL_BINS - 1);
                bins[idx] += 1;
            }
            _ => unreachable!("counts created from this layout"),
        }
    }

    fn finish(&self, counts: HistCounts) -> Histogram {
        match (self, counts) {
            (Self::Exact, HistCounts::Exact(map)) => Histogram::Exact {
                values: map
                    .into_iter()
                    .map(|(w, count)| ExactBin { work: w.0, count })
                    .collect(),
            },
            (Self::Binned { lo, hi }, HistCounts::Binned(counts)) => Histogram::Binned {
                lo: *lo,
                hi: *hi,
                counts,
            },
            _ => unreachable!("counts created from this layout"),
        }
    }
}

/// Exact work distribution of a 0/1-weight ring by enumerating all
/// `2^{2m}` draw patterns. Values are computed with the same summation as
/// the simulator, so keys line up with [`Histogram::Exact`].
pub fn exact_work_distribution(spec: &RingSpec) -> Result<Vec<(f64, f64)>> {
    let f = spec.bernoulli_fractions().ok_or_else(|| {
        Error::InvalidParameter("enumeration needs 0/1-weight occupancies".into())
    })?;
    let len = f.len();
    if len > MAX_ENUMERATED_RESERVOIRS {
        return Err(Error::InvalidParameter(format!(
            "enumeration limited to {MAX_ENUMERATED_RESERVOIRS} reservoirs, got {len}"
        )));
    }
    let eps = spec.altitudes();
    let mut weights = vec![0.0; len];
    let mut dist: BTreeMap<OrderedFloat<f64>, f64> = BTreeMap::new();
    for pattern in 0u32..(1 << len) {
        let mut p = 1.0;
        for k in 0..len {
            let one = pattern >> k & 1 == 1;
            weights[k] = if one { 1.0 } else { 0.0 };
            p *= if one { f[k] } else { 1.0 - f[k] };
        }
        if p > 0.0 {
            *dist
                .entry(OrderedFloat(cycle_work(&eps, &weights)))
                .or_insert(0.0) += p;
        }
    }
    Ok(dist.into_iter().map(|(w, p)| (w.0, p)).collect())
}

/// Exact-enumeration check of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationCheck {
    pub outcomes: usize,
    pub exact_mean: f64,
    pub exact_variance: f64,
    /// `½ Σ |p_empirical − p_exact|` over the work support.
    pub total_variation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub analytic_mean: f64,
    pub analytic_variance: Option<f64>,
    /// `None` when the analytic standard error vanishes.
    pub z_mean: Option<f64>,
    pub z_variance: Option<f64>,
    /// Deterministic ring reproduced exactly.
    pub exact_match: bool,
    pub enumeration: Option<EnumerationCheck>,
}

/// z-scores of the sample mean and variance against the closed forms, plus
/// an exact-enumeration comparison for small 0/1-weight rings.
pub fn compare_to_analytic(stats: &EnsembleStats, spec: &RingSpec) -> Result<ComparisonReport> {
    if stats.mean_q.len() != spec.len() {
        return Err(Error::Mismatch(format!(
            "ensemble has {} reservoirs, spec has {}",
            stats.mean_q.len(),
            spec.len()
        )));
    }
    let n = stats.trials as f64;
    let analytic_mean = mean_heats_ring(spec).work;
    let bernoulli = work_statistics_ring(spec).ok();
    let analytic_variance = bernoulli.map(|b| b.variance);

    let mean_se = match analytic_variance {
        Some(v) => (v / n).sqrt(),
        None => stats.stderr_w,
    };
    let z_mean = (mean_se > 0.0).then(|| (stats.mean_w - analytic_mean) / mean_se);

    let z_variance = match (bernoulli, spec.bernoulli_fractions()) {
        (Some(b), Some(f)) if stats.trials > 1 => {
            // Sampling variance of s²: κ₄/n + 2σ⁴/(n − 1), with the fourth
            // cumulant of a sum of scaled Bernoulli draws.
            let kappa4: f64 = spec
                .steps()
                .iter()
                .zip(&f)
                .map(|(d, f)| {
                    let pq = f * (1.0 - f);
                    d.powi(4) * pq * (1.0 - 6.0 * pq)
                })
                .sum();
            let var_s2 = kappa4 / n + 2.0 * b.variance * b.variance / (n - 1.0);
            (var_s2 > 0.0).then(|| (stats.var_w - b.variance) / var_s2.sqrt())
        }
        _ => None,
    };

    let scale = analytic_mean.abs().max(1.0);
    let exact_match = analytic_variance == Some(0.0)
        && stats.var_w == 0.0
        && (stats.mean_w - analytic_mean).abs() <= 1e-12 * scale;

    let enumeration = if spec.len() <= MAX_ENUMERATED_RESERVOIRS && bernoulli.is_some() {
        Some(enumeration_check(stats, spec)?)
    } else {
        None
    };

    Ok(ComparisonReport {
        analytic_mean,
        analytic_variance,
        z_mean,
        z_variance,
        exact_match,
        enumeration,
    })
}

fn enumeration_check(stats: &EnsembleStats, spec: &RingSpec) -> Result<EnumerationCheck> {
    let dist = exact_work_distribution(spec)?;
    let exact_mean: f64 = dist.iter().map(|(w, p)| w * p).sum();
    let exact_variance: f64 = dist.iter().map(|(w, p)| p * (w - exact_mean).powi(2)).sum();

    let mut gap: BTreeMap<OrderedFloat<f64>, f64> =
        dist.iter().map(|&(w, p)| (OrderedFloat(w), -p)).collect();
    if let Histogram::Exact { values } = &stats.histogram {
        let n = stats.trials as f64;
        for b in values {
            *gap.entry(OrderedFloat(b.work)).or_insert(0.0) += b.count as f64 / n;
        }
    } else {
        return Err(Error::Mismatch(
            "0/1-weight spec but ensemble histogram is binned".into(),
        ));
    }
    Ok(EnumerationCheck {
        outcomes: dist.len(),
        exact_mean,
        exact_variance,
        total_variation: 0.5 * gap.values().map(|g| g.abs()).sum::<f64>(),
    })
}
