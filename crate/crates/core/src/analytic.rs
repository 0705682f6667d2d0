//! Closed-form cycle averages.
//!
//! Mean heats only depend on the fluid densities `w/N`. The work variance
//! depends on the microscopic model; the exact expression is available for
//! 0/1 weights, where every draw is a Bernoulli trial, and a general-weight
//! version is provided separately.

use serde::{Deserialize, Serialize};

use crate::thermo::{occupancy, InverseTemperature};
use crate::urn::EngineRing;
use crate::{Error, Result};

/// Two-reservoir engine described by total weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OttoSpec {
    pub eps_l: f64,
    pub eps_h: f64,
    pub total: u64,
    pub w_l: f64,
    pub w_h: f64,
}

impl OttoSpec {
    pub fn new(eps_l: f64, eps_h: f64, total: u64, w_l: f64, w_h: f64) -> Result<Self> {
        check_altitude_order(eps_l, eps_h)?;
        if total == 0 {
            return Err(Error::InvalidPopulation("N must be at least 1".into()));
        }
        for w in [w_l, w_h] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidPopulation(format!("total weight {w}")));
            }
        }
        Ok(Self {
            eps_l,
            eps_h,
            total,
            w_l,
            w_h,
        })
    }

    /// 0/1-weight reservoirs with `n_l`, `n_h` weight-one balls out of `N`.
    pub fn from_counts(eps_l: f64, eps_h: f64, total: u64, n_l: u64, n_h: u64) -> Result<Self> {
        for n in [n_l, n_h] {
            if n > total {
                return Err(Error::InvalidOccupation { n, total });
            }
        }
        Self::new(eps_l, eps_h, total, n_l as f64, n_h as f64)
    }

    /// Equivalent two-site ring.
    pub fn to_ring(&self, bernoulli: bool) -> RingSpec {
        let n = self.total as f64;
        let (f_l, f_h) = (self.w_l / n, self.w_h / n);
        let site = |eps, f: f64| RingSite {
            eps,
            mean_weight: f,
            bernoulli_f: bernoulli.then_some(f),
        };
        RingSpec {
            sites: vec![site(self.eps_l, f_l), site(self.eps_h, f_h)],
        }
    }
}

fn check_altitude_order(eps_l: f64, eps_h: f64) -> Result<()> {
    if !(eps_l.is_finite() && eps_l > 0.0) {
        return Err(Error::InvalidAltitude(eps_l));
    }
    if !eps_h.is_finite() {
        return Err(Error::InvalidAltitude(eps_h));
    }
    if eps_l >= eps_h {
        return Err(Error::InvalidAltitudeOrder { eps_l, eps_h });
    }
    Ok(())
}

/// `(⟨Q_l⟩, ⟨Q_h⟩)`: energy gained per cycle by the low and high reservoirs.
pub fn mean_heats_otto(spec: &OttoSpec) -> (f64, f64) {
    let d = (spec.w_h - spec.w_l) / spec.total as f64;
    (spec.eps_l * d, -spec.eps_h * d)
}

/// `⟨W⟩ = −⟨Q_l⟩ − ⟨Q_h⟩ = (ε_h − ε_l)(w_h − w_l)/N`.
pub fn mean_work_otto(spec: &OttoSpec) -> f64 {
    let (q_l, q_h) = mean_heats_otto(spec);
    -(q_l + q_h)
}

/// `η = 1 − ε_l/ε_h`, whatever the populations.
pub fn efficiency_otto(eps_l: f64, eps_h: f64) -> Result<f64> {
    check_altitude_order(eps_l, eps_h)?;
    Ok(1.0 - eps_l / eps_h)
}

/// `W/(−Q_h)` in the regimes where it is meaningful: heat drawn from the
/// hot side (`Q_h < 0`), or a heat pump (`W < 0`, `Q_h > 0`), where it is
/// the reciprocal of the coefficient of performance.
pub fn cycle_efficiency(work: f64, q_high: f64) -> Option<f64> {
    if q_high < 0.0 || (q_high > 0.0 && work < 0.0) {
        Some(work / -q_high)
    } else {
        None
    }
}

/// One reservoir of a ring as seen by the closed-form formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingSite {
    pub eps: f64,
    /// Mean weight of a single draw, `w_k/N`.
    pub mean_weight: f64,
    /// Probability of drawing a weight-one ball, for 0/1-weight reservoirs.
    pub bernoulli_f: Option<f64>,
}

/// `2m` sites, low group first, indexed cyclically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    sites: Vec<RingSite>,
}

impl RingSpec {
    pub fn new(sites: Vec<RingSite>) -> Result<Self> {
        if sites.len() < 2 || !sites.len().is_multiple_of(2) {
            return Err(Error::InvalidRing(format!(
                "need an even number (>= 2) of sites, got {}",
                sites.len()
            )));
        }
        for s in &sites {
            if !(s.eps.is_finite() && s.eps > 0.0) {
                return Err(Error::InvalidAltitude(s.eps));
            }
            if !(s.mean_weight.is_finite() && s.mean_weight >= 0.0) {
                return Err(Error::InvalidPopulation(format!(
                    "mean weight {}",
                    s.mean_weight
                )));
            }
            if let Some(f) = s.bernoulli_f {
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::InvalidPopulation(format!("occupancy {f}")));
                }
            }
        }
        Ok(Self { sites })
    }

    /// 0/1-weight ring from altitudes and weight-one fractions.
    pub fn bernoulli(eps: &[f64], f: &[f64]) -> Result<Self> {
        if eps.len() != f.len() {
            return Err(Error::InvalidRing(format!(
                "{} altitudes but {} occupancies",
                eps.len(),
                f.len()
            )));
        }
        Self::new(
            eps.iter()
                .zip(f)
                .map(|(&eps, &f)| RingSite {
                    eps,
                    mean_weight: f,
                    bernoulli_f: Some(f),
                })
                .collect(),
        )
    }

    /// Ring whose reservoirs are in equilibrium: occupancy `f(β_l ε)` on the
    /// low group and `f(β_h ε)` on the high group.
    pub fn equilibrium(
        eps: &[f64],
        beta_l: InverseTemperature,
        beta_h: InverseTemperature,
    ) -> Result<Self> {
        let m = eps.len() / 2;
        let f: Vec<f64> = eps
            .iter()
            .enumerate()
            .map(|(k, &e)| {
                let beta = if k < m { beta_l } else { beta_h };
                occupancy(beta.value() * e)
            })
            .collect();
        Self::bernoulli(eps, &f)
    }

    /// Densities from a concrete ring; Bernoulli fractions are filled in when
    /// every reservoir holds only 0/1 weights.
    pub fn from_ring(ring: &EngineRing) -> Result<Self> {
        let binary = ring.is_binary();
        Self::new(
            ring.reservoirs()
                .iter()
                .map(|r| RingSite {
                    eps: r.altitude(),
                    mean_weight: r.density(),
                    bernoulli_f: binary.then(|| r.fraction(1.0)),
                })
                .collect(),
        )
    }

    pub fn sites(&self) -> &[RingSite] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn m(&self) -> usize {
        self.sites.len() / 2
    }

    pub fn altitudes(&self) -> Vec<f64> {
        self.sites.iter().map(|s| s.eps).collect()
    }

    /// `ε_k − ε_{k+1}` with `ε_{2m+1} ≡ ε_1`.
    pub fn steps(&self) -> Vec<f64> {
        let len = self.sites.len();
        (0..len)
            .map(|k| self.sites[k].eps - self.sites[(k + 1) % len].eps)
            .collect()
    }

    /// All Bernoulli fractions, if every site has one.
    pub fn bernoulli_fractions(&self) -> Option<Vec<f64>> {
        self.sites.iter().map(|s| s.bernoulli_f).collect()
    }
}

/// Group heats and the work they imply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingHeats {
    pub q_low: f64,
    pub q_high: f64,
    pub work: f64,
}

impl RingHeats {
    pub fn efficiency(&self) -> Option<f64> {
        cycle_efficiency(self.work, self.q_high)
    }
}

/// Mean energy gained by each group, `Σ_k ε_k (f̄_{k−1} − f̄_k)` over its
/// sites, and `W = −Q_low − Q_high`.
pub fn mean_heats_ring(spec: &RingSpec) -> RingHeats {
    let sites = spec.sites();
    let len = sites.len();
    let m = spec.m();
    let mut q_low = 0.0;
    let mut q_high = 0.0;
    for k in 0..len {
        let incoming = sites[(k + len - 1) % len].mean_weight;
        let q = sites[k].eps * (incoming - sites[k].mean_weight);
        if k < m {
            q_low += q;
        } else {
            q_high += q;
        }
    }
    RingHeats {
        q_low,
        q_high,
        work: -q_low - q_high,
    }
}

/// Mean and variance of the work of the 0/1-weight ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkStatistics {
    pub mean: f64,
    pub variance: f64,
}

impl WorkStatistics {
    /// `variance / mean`; `None` when the mean vanishes.
    pub fn ratio(&self) -> Option<f64> {
        (self.mean != 0.0).then(|| self.variance / self.mean)
    }
}

/// `mean = Σ δ_k f_k`, `variance = Σ δ_k² f_k(1 − f_k)` with
/// `δ_k = ε_k − ε_{k+1}`; draws are independent Bernoulli trials.
pub fn work_statistics_ring(spec: &RingSpec) -> Result<WorkStatistics> {
    let f = spec.bernoulli_fractions().ok_or_else(|| {
        Error::InvalidParameter("work variance needs 0/1-weight occupancies on every site".into())
    })?;
    let steps = spec.steps();
    let mean = steps.iter().zip(&f).map(|(d, f)| d * f).sum();
    let variance = steps
        .iter()
        .zip(&f)
        .map(|(d, f)| d * d * f * (1.0 - f))
        .sum();
    Ok(WorkStatistics { mean, variance })
}

/// General-weight extension of the variance: `Σ δ_k² Var(w_k)` using each
/// reservoir's actual weight distribution.
pub fn work_statistics_general(ring: &EngineRing) -> WorkStatistics {
    let eps = ring.altitudes();
    let len = eps.len();
    let mut mean = 0.0;
    let mut variance = 0.0;
    for (k, r) in ring.reservoirs().iter().enumerate() {
        let d = eps[k] - eps[(k + 1) % len];
        mean += d * r.density();
        variance += d * d * r.weight_variance();
    }
    WorkStatistics { mean, variance }
}

/// Otto work at fixed bath temperatures:
/// `(ε_h − ε_l)(f(β_h ε_h) − f(β_l ε_l))`.
pub fn work_from_betas(eps_l: f64, eps_h: f64, beta_l: f64, beta_h: f64) -> f64 {
    (eps_h - eps_l) * (occupancy(beta_h * eps_h) - occupancy(beta_l * eps_l))
}
