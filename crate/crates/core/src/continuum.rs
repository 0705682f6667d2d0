//! Many-sub-reservoir limit.
//!
//! With `m → ∞` and small altitude steps the sums over sub-reservoirs turn
//! into integrals of the occupancy, and the group heats only depend on the
//! reduced endpoints `ℒ_k = β_l ε_lk`, `ℋ_k = β_h ε_hk`:
//!
//! ```text
//! β_l Q_l = s(ℒ_1, ℋ_m) − s(ℒ_m)
//! β_h Q_h = s(ℋ_1, ℒ_m) − s(ℋ_m)
//! ```
//!
//! Closing the cycle with `ℋ_m = ℒ_1` and `ℒ_m = ℋ_1` makes it reversible.

use serde::{Deserialize, Serialize};

use crate::analytic::{cycle_efficiency, RingSpec};
use crate::thermo::{carnot_efficiency, entropy_s, entropy_s1, InverseTemperature};
use crate::{Error, Result};

/// Bath temperatures and reduced endpoints of the cold and hot branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarnotEndpoints {
    pub beta_l: InverseTemperature,
    pub beta_h: InverseTemperature,
    pub l1: f64,
    pub lm: f64,
    pub h1: f64,
    pub hm: f64,
}

impl CarnotEndpoints {
    /// Each reduced endpoint must be finite, nonzero, and share the sign of
    /// its bath's `β` so the altitude it implies is positive.
    pub fn from_reduced(
        beta_l: InverseTemperature,
        beta_h: InverseTemperature,
        l1: f64,
        lm: f64,
        h1: f64,
        hm: f64,
    ) -> Result<Self> {
        for (beta, name) in [(beta_l, "beta_l"), (beta_h, "beta_h")] {
            if beta.value() == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be nonzero to convert between altitudes and reduced endpoints"
                )));
            }
        }
        for (x, beta, name) in [
            (l1, beta_l, "L1"),
            (lm, beta_l, "Lm"),
            (h1, beta_h, "H1"),
            (hm, beta_h, "Hm"),
        ] {
            let eps = x / beta.value();
            if !(x.is_finite() && eps > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {x} implies a non-positive altitude at {beta}"
                )));
            }
        }
        Ok(Self {
            beta_l,
            beta_h,
            l1,
            lm,
            h1,
            hm,
        })
    }

    pub fn from_altitudes(
        beta_l: InverseTemperature,
        beta_h: InverseTemperature,
        eps_l1: f64,
        eps_lm: f64,
        eps_h1: f64,
        eps_hm: f64,
    ) -> Result<Self> {
        let (bl, bh) = (beta_l.value(), beta_h.value());
        Self::from_reduced(
            beta_l,
            beta_h,
            bl * eps_l1,
            bl * eps_lm,
            bh * eps_h1,
            bh * eps_hm,
        )
    }

    /// Otto cycle: each branch collapses to a single bath (`ℒ_1 = ℒ_m`,
    /// `ℋ_1 = ℋ_m`).
    pub fn otto(
        beta_l: InverseTemperature,
        beta_h: InverseTemperature,
        eps_l: f64,
        eps_h: f64,
    ) -> Result<Self> {
        Self::from_altitudes(beta_l, beta_h, eps_l, eps_l, eps_h, eps_h)
    }

    /// Reversible closure `ℋ_m = ℒ_1`, `ℋ_1 = ℒ_m`.
    pub fn reversible(
        beta_l: InverseTemperature,
        beta_h: InverseTemperature,
        l1: f64,
        lm: f64,
    ) -> Result<Self> {
        Self::from_reduced(beta_l, beta_h, l1, lm, lm, l1)
    }

    /// `[ε_l1, ε_lm, ε_h1, ε_hm]`.
    pub fn altitudes(&self) -> [f64; 4] {
        let (bl, bh) = (self.beta_l.value(), self.beta_h.value());
        [self.l1 / bl, self.lm / bl, self.h1 / bh, self.hm / bh]
    }

    /// Finite-`m` ring with altitudes spaced linearly between the endpoints
    /// of each branch and equilibrium occupancies.
    pub fn discretize(&self, m: usize) -> Result<RingSpec> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        let [l1, lm, h1, hm] = self.altitudes();
        let mut eps = linspace(l1, lm, m);
        eps.extend(linspace(h1, hm, m));
        RingSpec::equilibrium(&eps, self.beta_l, self.beta_h)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuumHeats {
    pub q_l: f64,
    pub q_h: f64,
    pub work: f64,
    /// `W/(−Q_h)`; `None` outside the engine and heat-pump regimes.
    pub eta: Option<f64>,
}

impl ContinuumHeats {
    /// `β_l Q_l + β_h Q_h`, the entropy handed to the baths per cycle.
    pub fn entropy_production(&self, ep: &CarnotEndpoints) -> f64 {
        ep.beta_l.value() * self.q_l + ep.beta_h.value() * self.q_h
    }
}

pub fn continuum_heats(ep: &CarnotEndpoints) -> ContinuumHeats {
    let q_l = (entropy_s(ep.l1, ep.hm).value() - entropy_s1(ep.lm).value()) / ep.beta_l.value();
    let q_h = (entropy_s(ep.h1, ep.lm).value() - entropy_s1(ep.hm).value()) / ep.beta_h.value();
    let work = -q_l - q_h;
    ContinuumHeats {
        q_l,
        q_h,
        work,
        eta: cycle_efficiency(work, q_h),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReversibleCycle {
    pub work: f64,
    pub eta: f64,
    pub endpoints: CarnotEndpoints,
}

/// Reversible cycle between `ℒ_1` and `ℒ_m`:
/// `W = (T_h − T_l)(s(ℒ_1) − s(ℒ_m))` at Carnot efficiency.
pub fn reversible_work(
    beta_l: InverseTemperature,
    beta_h: InverseTemperature,
    l1: f64,
    lm: f64,
) -> Result<ReversibleCycle> {
    let endpoints = CarnotEndpoints::reversible(beta_l, beta_h, l1, lm)?;
    let delta_s = entropy_s1(l1).value() - entropy_s1(lm).value();
    Ok(ReversibleCycle {
        work: (beta_h.temperature() - beta_l.temperature()) * delta_s,
        eta: carnot_efficiency(beta_l, beta_h)?,
        endpoints,
    })
}

/// `(T_h − T_l) ln 2`, the supremum of [`reversible_work`] over endpoints,
/// approached as `ℒ_1 → 0` and `ℒ_m → ∞`.
pub fn max_reversible_work(beta_l: InverseTemperature, beta_h: InverseTemperature) -> f64 {
    max_reversible_work_levels(beta_l, beta_h, 2)
}

/// `(T_h − T_l) ln L` for working agents with `L` equally spaced levels
/// (ball weights `0, 1, …, L − 1`).
pub fn max_reversible_work_levels(
    beta_l: InverseTemperature,
    beta_h: InverseTemperature,
    levels: u32,
) -> f64 {
    (beta_h.temperature() - beta_l.temperature()) * f64::from(levels).ln()
}
