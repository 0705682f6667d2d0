//! Efficiency versus work.
//!
//! For fixed bath temperatures, every choice of altitudes gives a mean work
//! `W` and an efficiency `η = W/(−Q_h)`. This module samples that region and
//! finds the largest or smallest `η` reachable at a prescribed `W`, for
//! rings with `m` sub-reservoirs per bath and for the continuum limit.
//!
//! The constrained problem is solved with a quadratic penalty on
//! `W − target`, raised tenfold until the residual is within tolerance,
//! using a derivative-free local search from several random starts.

mod search;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{mean_heats_ring, RingHeats, RingSpec};
use crate::continuum::{continuum_heats, CarnotEndpoints};
use crate::streams::stream;
use crate::thermo::InverseTemperature;
use crate::{Error, Result};

use search::{minimize, Bounds, Budget, SearchSettings};

/// Smallest altitude (or reduced endpoint magnitude) the optimizer visits.
const FLOOR: f64 = 1e-9;
const MIN_STEP: f64 = 1e-6;
const PENALTY_START: f64 = 1e2;
const PENALTY_GROWTH: f64 = 10.0;
const PENALTY_MAX: f64 = 1e14;
/// Objective offset for configurations where `η` is undefined.
const INVALID_OFFSET: f64 = 10.0;
/// Objectives closer than this are ties, won by the lowest start index.
const TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Max,
    Min,
}

impl Mode {
    fn sign(self) -> f64 {
        match self {
            Mode::Max => -1.0,
            Mode::Min => 1.0,
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Mode::Max),
            "min" => Ok(Mode::Min),
            _ => Err(Error::InvalidParameter(format!(
                "mode must be max or min, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Max => "max",
            Mode::Min => "min",
        })
    }
}

/// Number of sub-reservoirs per bath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleKind {
    SubReservoirs(usize),
    /// `m → ∞`.
    Carnot,
}

impl FromStr for CycleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "infinity" | "carnot" => Ok(CycleKind::Carnot),
            _ => match s.parse::<usize>() {
                Ok(m) if m >= 1 => Ok(CycleKind::SubReservoirs(m)),
                _ => Err(Error::InvalidParameter(format!(
                    "m must be a positive integer or inf, got {s:?}"
                ))),
            },
        }
    }
}

impl fmt::Display for CycleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CycleKind::SubReservoirs(m) => write!(f, "{m}"),
            CycleKind::Carnot => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    /// Accepted `|W − target|`.
    pub tol_w: f64,
    /// Objective evaluations per start.
    pub budget: u64,
    pub starts: u32,
    /// Upper altitude bound for finite rings; the initial search step is
    /// one eighth of it.
    pub eps_max: f64,
    /// Upper bound on `|ℒ|`, `|ℋ|` for the continuum cycle.
    pub reduced_max: f64,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            tol_w: 1e-4,
            budget: 200_000,
            starts: 16,
            eps_max: 10.0,
            reduced_max: 40.0,
            seed: 0,
        }
    }
}

impl OptimizerOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol_w.is_finite() && self.tol_w > 0.0) {
            return Err(Error::InvalidParameter("tol_w must be positive".into()));
        }
        if self.starts == 0 || self.budget == 0 {
            return Err(Error::InvalidParameter(
                "starts and budget must be at least 1".into(),
            ));
        }
        for (v, name) in [(self.eps_max, "eps_max"), (self.reduced_max, "reduced_max")] {
            if !(v.is_finite() && v > FLOOR) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub target_w: f64,
    pub eta: f64,
    pub mode: Mode,
    pub cycle: CycleKind,
    /// Altitudes of the optimum: `2m` values, low group first, or
    /// `[ε_l1, ε_lm, ε_h1, ε_hm]` for the continuum cycle.
    pub eps_config: Vec<f64>,
    pub work: f64,
    /// `|work − target_w|`.
    pub residual: f64,
    pub evaluations: u64,
    /// Start that produced the optimum.
    pub start: u32,
}

impl FrontierPoint {
    /// Heat-pump coefficient of performance, `1/η`.
    pub fn cop(&self) -> f64 {
        1.0 / self.eta
    }
}

/// Mean heats of a finite ring with equilibrium occupancies.
pub fn ring_heats(
    beta_l: InverseTemperature,
    beta_h: InverseTemperature,
    eps: &[f64],
) -> Result<RingHeats> {
    Ok(mean_heats_ring(&RingSpec::equilibrium(
        eps, beta_l, beta_h,
    )?))
}

/// One sampled configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub eps: Vec<f64>,
    pub work: f64,
    pub q_high: f64,
    pub eta: Option<f64>,
    /// No heat is taken from the hot bath (`−Q_h ≤ 0`).
    pub flagged: bool,
}

/// Scatter of `(W, η)` over altitudes drawn uniformly from `(0, eps_max]`.
pub fn sample_region(
    m: usize,
    beta_l: InverseTemperature,
    beta_h: InverseTemperature,
    samples: u64,
    eps_max: f64,
    seed: u64,
) -> Result<Vec<RegionPoint>> {
    if m == 0 || samples == 0 {
        return Err(Error::InvalidParameter(
            "m and samples must be at least 1".into(),
        ));
    }
    if !(eps_max.is_finite() && eps_max > 0.0) {
        return Err(Error::InvalidParameter("eps_max must be positive".into()));
    }
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let eps: Vec<f64> = (0..2 * m)
                .map(|_| eps_max * (1.0 - rng.random::<f64>()))
                .collect();
            let heats = ring_heats(beta_l, beta_h, &eps)?;
            Ok(RegionPoint {
                work: heats.work,
                q_high: heats.q_high,
                eta: heats.efficiency(),
                flagged: heats.q_high >= 0.0,
                eps,
            })
        })
        .collect()
}

/// Maps search coordinates to a cycle.
trait CycleModel: Sync {
    fn kind(&self) -> CycleKind;
    fn dim(&self) -> usize;
    fn upper(&self) -> f64;
    /// Mean heats; `None` for a degenerate configuration.
    fn evaluate(&self, x: &[f64]) -> Option<RingHeats>;
    fn eps_config(&self, x: &[f64]) -> Vec<f64>;
}

struct FiniteRing {
    m: usize,
    beta_l: InverseTemperature,
    beta_h: InverseTemperature,
    eps_max: f64,
}

impl CycleModel for FiniteRing {
    fn kind(&self) -> CycleKind {
        CycleKind::SubReservoirs(self.m)
    }

    fn dim(&self) -> usize {
        2 * self.m
    }

    fn upper(&self) -> f64 {
        self.eps_max
    }

    fn evaluate(&self, x: &[f64]) -> Option<RingHeats> {
        ring_heats(self.beta_l, self.beta_h, x).ok()
    }

    fn eps_config(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

/// Coordinates are `|ℒ_1|, |ℒ_m|, |ℋ_1|, |ℋ_m|`; signs follow the baths.
struct Continuum {
    beta_l: InverseTemperature,
    beta_h: InverseTemperature,
    reduced_max: f64,
}

impl Continuum {
    fn endpoints(&self, x: &[f64]) -> Result<CarnotEndpoints> {
        let sl = self.beta_l.value().signum();
        let sh = self.beta_h.value().signum();
        CarnotEndpoints::from_reduced(
            self.beta_l,
            self.beta_h,
            sl * x[0],
            sl * x[1],
            sh * x[2],
            sh * x[3],
        )
    }
}

impl CycleModel for Continuum {
    fn kind(&self) -> CycleKind {
        CycleKind::Carnot
    }

    fn dim(&self) -> usize {
        4
    }

    fn upper(&self) -> f64 {
        self.reduced_max
    }

    fn evaluate(&self, x: &[f64]) -> Option<RingHeats> {
        let h = continuum_heats(&self.endpoints(x).ok()?);
        Some(RingHeats {
            q_low: h.q_l,
            q_high: h.q_h,
            work: h.work,
        })
    }

    fn eps_config(&self, x: &[f64]) -> Vec<f64> {
        self.endpoints(x)
            .map(|ep| ep.altitudes().to_vec())
            .unwrap_or_default()
    }
}

struct StartOutcome {
    x: Vec<f64>,
    work: f64,
    eta: f64,
}

/// `η` counts only in the regime of the target: an engine (`W ≥ 0`, heat
/// drawn from the hot side) for `target_w ≥ 0`, a heat pump otherwise.
/// Without this the tolerance band around `W = 0` admits near-degenerate
/// pumps whose `W/(−Q_h)` is arbitrarily large.
///
/// A pump must also draw heat from the cold side, which is the same as
/// `η ≤ 1` (COP ≥ 1); cycles that heat both baths are plain heaters.
///
/// Returns `Err(violation)` otherwise, where the violation measures how far
/// the signs are from the wanted regime so the search can head back.
fn assess(h: &RingHeats, target_w: f64) -> std::result::Result<f64, f64> {
    let relu = |v: f64| v.max(0.0);
    let violation = if target_w >= 0.0 {
        relu(-h.work) + relu(h.q_high)
    } else {
        relu(h.work) + relu(-h.q_high) + relu(h.q_low)
    };
    let engine_ok = target_w >= 0.0 && h.work >= 0.0;
    let pump_ok = target_w < 0.0 && h.work < 0.0 && h.q_low < 0.0;
    match h.efficiency() {
        Some(e) if (engine_ok || pump_ok) && e.is_finite() && e >= 0.0 => Ok(e),
        _ => Err(violation),
    }
}

fn random_start(dim: usize, upper: f64, seed: u64, index: u32) -> Vec<f64> {
    let mut rng = stream(seed, u64::from(index));
    (0..dim)
        .map(|_| FLOOR + (upper - FLOOR) * (1.0 - rng.random::<f64>()))
        .collect()
}

fn settings_for(model: &dyn CycleModel) -> SearchSettings {
    SearchSettings {
        initial_step: model.upper() / 8.0,
        min_step: MIN_STEP,
        bounds: Bounds {
            lower: FLOOR,
            upper: model.upper(),
        },
    }
}

fn constrained_start(
    model: &dyn CycleModel,
    target_w: f64,
    mode: Mode,
    opts: &OptimizerOptions,
    index: u32,
) -> (Option<StartOutcome>, u64) {
    let settings = settings_for(model);
    let mut budget = Budget::new(opts.budget);
    let mut x = random_start(model.dim(), model.upper(), opts.seed, index);
    let mut mu = PENALTY_START;
    loop {
        let mut objective = |y: &[f64]| match model.evaluate(y) {
            Some(h) if h.work.is_finite() => {
                let base = match assess(&h, target_w) {
                    Ok(e) => mode.sign() * e,
                    Err(v) => INVALID_OFFSET + v,
                };
                base + mu * (h.work - target_w).powi(2)
            }
            _ => f64::INFINITY,
        };
        x = minimize(&mut objective, x, &settings, &mut budget).0;

        if let Some(h) = model.evaluate(&x) {
            if let Ok(eta) = assess(&h, target_w) {
                if (h.work - target_w).abs() <= opts.tol_w {
                    let work = h.work;
                    return (Some(StartOutcome { x, work, eta }), budget.used);
                }
            }
        }
        if mu >= PENALTY_MAX || budget.exhausted() {
            return (None, budget.used);
        }
        mu *= PENALTY_GROWTH;
    }
}

fn optimize_model(
    model: &dyn CycleModel,
    target_w: f64,
    mode: Mode,
    opts: &OptimizerOptions,
) -> Result<FrontierPoint> {
    opts.validate()?;
    if !target_w.is_finite() {
        return Err(Error::InvalidParameter("target_w must be finite".into()));
    }
    let runs: Vec<(Option<StartOutcome>, u64)> = (0..opts.starts)
        .into_par_iter()
        .map(|i| constrained_start(model, target_w, mode, opts, i))
        .collect();

    let evaluations = runs.iter().map(|(_, n)| n).sum();
    let mut best: Option<(u32, StartOutcome)> = None;
    for (i, (outcome, _)) in runs.into_iter().enumerate() {
        let Some(outcome) = outcome else { continue };
        let better = match &best {
            None => true,
            Some((_, b)) => mode.sign() * outcome.eta < mode.sign() * b.eta - TIE,
        };
        if better {
            best = Some((i as u32, outcome));
        }
    }
    let (start, best) = best.ok_or_else(|| {
        Error::Infeasible(format!(
            "no start reached W = {target_w} within {} ({} evaluations)",
            opts.tol_w, evaluations
        ))
    })?;
    Ok(FrontierPoint {
        target_w,
        eta: best.eta,
        mode,
        cycle: model.kind(),
        eps_config: model.eps_config(&best.x),
        work: best.work,
        residual: (best.work - target_w).abs(),
        evaluations,
        start,
    })
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    Ok(())
}

/// Extremal efficiency of a ring with `m` sub-reservoirs per bath at mean
/// work `target_w` (negative for heat pumps).
pub fn optimize_efficiency(
    m: usize,
    beta_l: InverseTemperature,
    beta_h: InverseTemperature,
    target_w: f64,
    mode: Mode,
    opts: &OptimizerOptions,
) -> Result<FrontierPoint> {
    check_m(m)?;
    let model = FiniteRing {
        m,
        beta_l,
        beta_h,
        eps_max: opts.eps_max,
    };
    optimize_model(&model, target_w, mode, opts)
}

/// Same as [`optimize_efficiency`] for the continuum cycle, over the four
/// reduced endpoints.
pub fn carnot_frontier(
    beta_l: InverseTemperature,
    beta_h: InverseTemperature,
    target_w: f64,
    mode: Mode,
    opts: &OptimizerOptions,
) -> Result<FrontierPoint> {
    let model = Continuum {
        beta_l,
        beta_h,
        reduced_max: opts.reduced_max,
    };
    optimize_model(&model, target_w, mode, opts)
}

/// Dispatches on [`CycleKind`].
pub fn optimize(
    kind: CycleKind,
    beta_l: InverseTemperature,
    beta_h: InverseTemperature,
    target_w: f64,
    mode: Mode,
    opts: &OptimizerOptions,
) -> Result<FrontierPoint> {
    match kind {
        CycleKind::SubReservoirs(m) => optimize_efficiency(m, beta_l, beta_h, target_w, mode, opts),
        CycleKind::Carnot => carnot_frontier(beta_l, beta_h, target_w, mode, opts),
    }
}

/// Unconstrained maximum of the mean work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkOptimum {
    pub work: f64,
    pub eta: Option<f64>,
    pub eps_config: Vec<f64>,
    pub evaluations: u64,
}

/// Largest mean work of an `m`-ring over altitudes in `(0, eps_max]`.
pub fn maximize_work(
    m: usize,
    beta_l: InverseTemperature,
    beta_h: InverseTemperature,
    opts: &OptimizerOptions,
) -> Result<WorkOptimum> {
    check_m(m)?;
    opts.validate()?;
    let model = FiniteRing {
        m,
        beta_l,
        beta_h,
        eps_max: opts.eps_max,
    };
    let settings = settings_for(&model);
    let runs: Vec<(Vec<f64>, f64, u64)> = (0..opts.starts)
        .into_par_iter()
        .map(|i| {
            let mut budget = Budget::new(opts.budget);
            let x0 = random_start(model.dim(), model.upper(), opts.seed, i);
            let mut objective = |y: &[f64]| match model.evaluate(y) {
                Some(h) if h.work.is_finite() => -h.work,
                _ => f64::INFINITY,
            };
            let (x, fx) = minimize(&mut objective, x0, &settings, &mut budget);
            (x, fx, budget.used)
        })
        .collect();

    let evaluations = runs.iter().map(|r| r.2).sum();
    let (x, _, _) = runs
        .into_iter()
        .reduce(|best, r| if r.1 < best.1 - TIE { r } else { best })
        .expect("at least one start");
    let h = model
        .evaluate(&x)
        .ok_or_else(|| Error::Infeasible("degenerate work optimum".into()))?;
    Ok(WorkOptimum {
        work: h.work,
        eta: h.efficiency(),
        eps_config: x,
        evaluations,
    })
}
