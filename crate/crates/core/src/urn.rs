//! Reservoirs of weighted balls and the simultaneous exchange cycle.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which bath a reservoir belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Low,
    High,
}

/// `count` balls of identical `weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightClass {
    pub weight: f64,
    pub count: u64,
}

/// An urn of `N` distinguishable balls at altitude `ε`.
///
/// Populations are fixed after construction. Weight classes are kept sorted
/// by weight with duplicates merged and empty classes removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    altitude: f64,
    classes: Vec<WeightClass>,
    group: Group,
    total_count: u64,
    total_weight: f64,
}

impl Reservoir {
    pub fn new<I>(altitude: f64, population: I, group: Group) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, u64)>,
    {
        if !(altitude.is_finite() && altitude >= 0.0) {
            return Err(Error::InvalidAltitude(altitude));
        }

        let mut classes: Vec<WeightClass> = Vec::new();
        for (weight, count) in population {
            if !(weight.is_finite() && weight >= 0.0) {
                return Err(Error::InvalidPopulation(format!("weight {weight}")));
            }
            if count == 0 {
                continue;
            }
            classes.push(WeightClass { weight, count });
        }
        classes.sort_by(|a, b| a.weight.total_cmp(&b.weight));
        classes.dedup_by(|next, kept| {
            if next.weight == kept.weight {
                kept.count += next.count;
                true
            } else {
                false
            }
        });

        let total_count = classes
            .iter()
            .try_fold(0u64, |acc, c| acc.checked_add(c.count))
            .ok_or_else(|| Error::InvalidPopulation("ball count overflows".into()))?;
        if total_count == 0 {
            return Err(Error::EmptyReservoir);
        }
        let total_weight: f64 = classes.iter().map(|c| c.weight * c.count as f64).sum();
        if !total_weight.is_finite() {
            return Err(Error::InvalidPopulation(
                "total weight is not finite".into(),
            ));
        }

        Ok(Self {
            altitude,
            classes,
            group,
            total_count,
            total_weight,
        })
    }

    /// `excited` weight-1 balls and `total - excited` weight-0 balls.
    pub fn two_level(altitude: f64, excited: u64, total: u64, group: Group) -> Result<Self> {
        if excited > total {
            return Err(Error::InvalidPopulation(format!(
                "{excited} excited balls exceed total {total}"
            )));
        }
        Self::new(altitude, [(1.0, excited), (0.0, total - excited)], group)
    }

    pub fn altitude(&self) -> f64 {
        self.altitude
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn classes(&self) -> &[WeightClass] {
        &self.classes
    }

    /// `N`.
    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    /// `w = Σ weight · count`.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Fluid density `w / N`, i.e. the mean weight of one draw.
    pub fn density(&self) -> f64 {
        self.total_weight / self.total_count as f64
    }

    /// Fraction of balls with exactly this weight.
    pub fn fraction(&self, weight: f64) -> f64 {
        self.classes
            .iter()
            .find(|c| c.weight == weight)
            .map_or(0.0, |c| c.count as f64 / self.total_count as f64)
    }

    /// Variance of the weight of a single uniform draw.
    pub fn weight_variance(&self) -> f64 {
        let n = self.total_count as f64;
        let mean = self.density();
        self.classes
            .iter()
            .map(|c| (c.count as f64 / n) * (c.weight - mean).powi(2))
            .sum()
    }

    /// Every ball weighs 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.classes
            .iter()
            .all(|c| c.weight == 0.0 || c.weight == 1.0)
    }

    /// Weight of a uniformly chosen ball. Each ball has probability `1/N`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut ticket = rng.random_range(0..self.total_count);
        for class in &self.classes {
            if ticket < class.count {
                return class.weight;
            }
            ticket -= class.count;
        }
        unreachable!("ticket below total count always lands in a class")
    }
}

/// Cyclic sequence of `2m` reservoirs; a ball drawn from reservoir `k` goes
/// to reservoir `k + 1`, and the last one feeds the first.
///
/// The first `m` reservoirs form the low group `l1..lm`, the last `m` the
/// high group `h1..hm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineRing {
    reservoirs: Vec<Reservoir>,
}

impl EngineRing {
    pub fn new(reservoirs: Vec<Reservoir>) -> Result<Self> {
        let len = reservoirs.len();
        if len < 2 || !len.is_multiple_of(2) {
            return Err(Error::InvalidRing(format!(
                "need an even number (>= 2) of reservoirs, got {len}"
            )));
        }
        let n = reservoirs[0].total_count();
        if let Some(r) = reservoirs.iter().find(|r| r.total_count() != n) {
            return Err(Error::InvalidRing(format!(
                "all reservoirs must hold the same number of balls ({n} vs {})",
                r.total_count()
            )));
        }
        let m = len / 2;
        for (k, r) in reservoirs.iter().enumerate() {
            let expected = if k < m { Group::Low } else { Group::High };
            if r.group() != expected {
                return Err(Error::InvalidRing(format!(
                    "reservoir {} must be in the {expected:?} group",
                    k + 1
                )));
            }
        }
        Ok(Self { reservoirs })
    }

    /// Two-reservoir Otto ring.
    pub fn otto(low: Reservoir, high: Reservoir) -> Result<Self> {
        Self::new(vec![low, high])
    }

    /// Ring of two-level reservoirs: altitudes and excited counts listed
    /// low group first.
    pub fn two_level(altitudes: &[f64], excited: &[u64], total: u64) -> Result<Self> {
        if altitudes.len() != excited.len() {
            return Err(Error::InvalidRing(format!(
                "{} altitudes but {} populations",
                altitudes.len(),
                excited.len()
            )));
        }
        let m = altitudes.len() / 2;
        let reservoirs = altitudes
            .iter()
            .zip(excited)
            .enumerate()
            .map(|(k, (&eps, &n))| {
                let group = if k < m { Group::Low } else { Group::High };
                Reservoir::two_level(eps, n, total, group)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(reservoirs)
    }

    pub fn reservoirs(&self) -> &[Reservoir] {
        &self.reservoirs
    }

    /// Number of reservoirs, `2m`.
    pub fn len(&self) -> usize {
        self.reservoirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reservoirs.is_empty()
    }

    /// Sub-reservoirs per group.
    pub fn m(&self) -> usize {
        self.reservoirs.len() / 2
    }

    /// Balls per reservoir.
    pub fn total_count(&self) -> u64 {
        self.reservoirs[0].total_count()
    }

    pub fn altitudes(&self) -> Vec<f64> {
        self.reservoirs.iter().map(Reservoir::altitude).collect()
    }

    pub fn is_binary(&self) -> bool {
        self.reservoirs.iter().all(Reservoir::is_binary)
    }

    /// One cycle: a ball is drawn from every reservoir's pre-cycle
    /// population and all of them move one step along the ring at once.
    pub fn exchange_step<R: Rng + ?Sized>(&self, rng: &mut R) -> CycleOutcome {
        let drawn: Vec<f64> = self.reservoirs.iter().map(|r| r.draw(rng)).collect();
        let altitudes = self.altitudes();
        CycleOutcome {
            work: cycle_work(&altitudes, &drawn),
            heat_increments: heat_increments(&altitudes, &drawn),
            drawn_weights: drawn,
        }
    }
}

/// Work released by moving weight `w_k` from altitude `ε_k` to `ε_{k+1}`
/// around the ring: `Σ_k (ε_k − ε_{k+1}) w_k`.
pub fn cycle_work(altitudes: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(altitudes.len(), weights.len());
    let len = altitudes.len();
    (0..len)
        .map(|k| (altitudes[k] - altitudes[(k + 1) % len]) * weights[k])
        .sum()
}

/// Energy gained by each reservoir: `ε_k (w_{k−1} − w_k)`.
pub fn heat_increments(altitudes: &[f64], weights: &[f64]) -> Vec<f64> {
    debug_assert_eq!(altitudes.len(), weights.len());
    let len = altitudes.len();
    (0..len)
        .map(|k| altitudes[k] * (weights[(k + len - 1) % len] - weights[k]))
        .collect()
}

/// Result of one exchange cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleOutcome {
    pub work: f64,
    pub heat_increments: Vec<f64>,
    pub drawn_weights: Vec<f64>,
}

impl CycleOutcome {
    /// `W + Σ Q_k`; zero up to rounding.
    pub fn energy_residual(&self) -> f64 {
        self.work + self.heat_increments.iter().sum::<f64>()
    }

    /// Magnitude against which [`Self::energy_residual`] should be judged.
    pub fn energy_scale(&self) -> f64 {
        self.work.abs() + self.heat_increments.iter().map(|q| q.abs()).sum::<f64>()
    }
}
