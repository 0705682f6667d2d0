//! Temperatures, occupancies and entropies of two-level reservoirs.
//!
//! A reservoir of `N` two-level systems at gap `ε` with `n` excited has
//! inverse temperature `β = ln(N/n − 1)/ε`, equivalently occupancy
//! `n/N = f(βε)` with `f(x) = 1/(eˣ + 1)`. Negative `β` corresponds to
//! population inversion (`n > N/2`).

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// `β = 1/T` with `k_B = 1`. Finite; may be zero or negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InverseTemperature(f64);

impl InverseTemperature {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() {
            Ok(Self(beta))
        } else {
            Err(Error::NonFiniteBeta)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `T = 1/β`; infinite at `β = 0`.
    pub fn temperature(self) -> f64 {
        1.0 / self.0
    }

    pub fn is_negative_temperature(self) -> bool {
        self.0 < 0.0
    }
}

impl fmt::Display for InverseTemperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "β={}", self.0)
    }
}

/// Dimensionless entropy per two-level system.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntropyValue(f64);

impl EntropyValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `ln(N/n − 1)/ε`.
pub fn beta_from_occupancy(n: u64, total: u64, eps: f64) -> Result<InverseTemperature> {
    if n > total {
        return Err(Error::InvalidOccupation { n, total });
    }
    if n == 0 || n == total {
        return Err(Error::DegenerateOccupancy { n, total });
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidAltitude(eps));
    }
    // ln((N - n)/n) keeps the ratio exact in integers before the log.
    let ratio = (total - n) as f64 / n as f64;
    InverseTemperature::new(ratio.ln() / eps)
}

/// Fermi occupancy `1/(eˣ + 1)`, stable over the whole real line including
/// the infinite limits.
pub fn occupancy(x: f64) -> f64 {
    if x >= 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `ln(1 + eˣ)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `s(x, y) = x f(y) + ln(1 + e^{−x})`.
///
/// This is `x f(y) − φ(x)` with `φ(x) = −ln(1 + e^{−x})`, the antiderivative
/// of `f` that vanishes at `+∞`.
pub fn entropy_s(x: f64, y: f64) -> EntropyValue {
    EntropyValue(x * occupancy(y) + softplus(-x))
}

/// Equilibrium two-level entropy `s(x) = s(x, x)`.
pub fn entropy_s1(x: f64) -> EntropyValue {
    entropy_s(x, x)
}

/// `ln C(N, n)`, the log of the number of configurations with `n` excited.
///
/// Exact binomial arithmetic is used while it fits in 128 bits, log-gamma
/// beyond that.
pub fn log_degeneracy(total: u64, n: u64) -> Result<f64> {
    if n > total {
        return Err(Error::InvalidOccupation { n, total });
    }
    let k = n.min(total - n);
    if let Some(c) = exact_binomial(total, k) {
        return Ok((c as f64).ln());
    }
    let (t, n) = (total as f64, n as f64);
    Ok(ln_gamma(t + 1.0) - ln_gamma(n + 1.0) - ln_gamma(t - n + 1.0))
}

fn exact_binomial(total: u64, k: u64) -> Option<u128> {
    let mut c: u128 = 1;
    for i in 1..=k as u128 {
        // C(N-k+i, i) = C(N-k+i-1, i-1) * (N-k+i) / i, exact at every step.
        c = c.checked_mul(total as u128 - k as u128 + i)? / i;
    }
    Some(c)
}

/// Carnot bound `1 − β_h/β_l`, capped at 1.
///
/// When the hot bath has negative temperature the ratio is negative and the
/// raw expression exceeds one; the attainable bound there is unity.
pub fn carnot_efficiency(beta_l: InverseTemperature, beta_h: InverseTemperature) -> Result<f64> {
    if beta_l.value() == 0.0 {
        return Err(Error::InfiniteColdTemperature);
    }
    Ok((1.0 - beta_h.value() / beta_l.value()).min(1.0))
}

/// Gibbs entropy of a ladder of `levels` equally spaced states at reduced
/// gap `x`: `ln Z + x⟨k⟩` with `Z = Σ_{k<levels} e^{−kx}`.
///
/// Evaluated with a log-sum-exp shift so any finite `x` is safe.
///
/// # Panics
/// If `levels < 2`.
pub fn entropy_equally_spaced(x: f64, levels: u32) -> f64 {
    assert!(levels >= 2, "need at least two levels, got {levels}");
    let top = f64::from(levels - 1);
    let shift = if x >= 0.0 { 0.0 } else { -top * x };
    let mut z = 0.0;
    let mut k_weighted = 0.0;
    for k in 0..levels {
        let k = f64::from(k);
        let b = (-k * x - shift).exp();
        z += b;
        k_weighted += k * b;
    }
    z.ln() + shift + x * (k_weighted / z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn beta_examples() {
        let b = beta_from_occupancy(2000, 10_000, 1.0).unwrap().value();
        assert!(close(b, 1.3863, 5e-5), "{b}");
        assert_eq!(beta_from_occupancy(5000, 10_000, 3.0).unwrap().value(), 0.0);
        let b = beta_from_occupancy(7000, 10_000, 1.0).unwrap().value();
        assert!(close(b, -0.8473, 5e-5), "{b}");
    }

    #[test]
    fn beta_rejects_degenerate_occupancies() {
        assert!(matches!(
            beta_from_occupancy(0, 10, 1.0),
            Err(Error::DegenerateOccupancy { .. })
        ));
        assert!(matches!(
            beta_from_occupancy(10, 10, 1.0),
            Err(Error::DegenerateOccupancy { .. })
        ));
        assert!(matches!(
            beta_from_occupancy(11, 10, 1.0),
            Err(Error::InvalidOccupation { .. })
        ));
        assert!(beta_from_occupancy(3, 10, 0.0).is_err());
    }

    #[test]
    fn occupancy_examples_and_limits() {
        assert_eq!(occupancy(0.0), 0.5);
        assert!(close(occupancy((7.0f64 / 3.0).ln()), 0.3, 1e-15));
        assert!(close(occupancy(0.8473), 0.3, 1e-5));
        assert_eq!(occupancy(f64::INFINITY), 0.0);
        assert_eq!(occupancy(f64::NEG_INFINITY), 1.0);
        assert!(occupancy(800.0) >= 0.0 && occupancy(800.0) < 1e-300);
        assert_eq!(occupancy(-800.0), 1.0);
        for x in [0.1, 1.0, 5.0, 37.0] {
            assert!(close(occupancy(x) + occupancy(-x), 1.0, 1e-15));
        }
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert_eq!(softplus(-1000.0), 0.0);
        assert!(close(softplus(0.0), 2f64.ln(), 1e-16));
    }

    #[test]
    fn entropy_examples() {
        assert!(close(entropy_s(0.0, 0.0).value(), 2f64.ln(), 1e-16));
        // f = 0.2 at x = ln 4
        assert!(close(entropy_s1(4f64.ln()).value(), 0.5004, 5e-5));
        assert!(close(entropy_s1(1.386).value(), 0.5004, 1e-4));
        for x in [0.3, 1.7, 12.0, 40.0] {
            assert!(close(entropy_s1(x).value(), entropy_s1(-x).value(), 1e-14));
        }
        assert!(entropy_s1(800.0).value() >= 0.0);
        assert!(entropy_s1(800.0).value() < 1e-300);
    }

    #[test]
    fn degeneracy_examples() {
        assert_eq!(log_degeneracy(3, 1).unwrap(), 3f64.ln());
        assert_eq!(log_degeneracy(17, 0).unwrap(), 0.0);
        assert_eq!(log_degeneracy(17, 17).unwrap(), 0.0);
        assert_eq!(log_degeneracy(10, 5).unwrap(), 252f64.ln());
        assert!(matches!(
            log_degeneracy(3, 4),
            Err(Error::InvalidOccupation { .. })
        ));
    }

    #[test]
    fn degeneracy_log_gamma_path_matches_exact_path() {
        // C(200, 100) overflows u128 and goes through log-gamma.
        let direct: f64 = (1..=100).map(|i| ((100 + i) as f64 / i as f64).ln()).sum();
        let lg = log_degeneracy(200, 100).unwrap();
        assert!(close(lg, direct, 1e-10), "{lg} vs {direct}");
    }

    #[test]
    fn carnot_examples() {
        let b = |x| InverseTemperature::new(x).unwrap();
        assert!(close(
            carnot_efficiency(b(1.38), b(0.42)).unwrap(),
            0.6957,
            1e-4
        ));
        assert_eq!(carnot_efficiency(b(0.9), b(0.9)).unwrap(), 0.0);
        assert_eq!(carnot_efficiency(b(0.2), b(-0.1)).unwrap(), 1.0);
        assert_eq!(
            carnot_efficiency(b(0.0), b(0.4)),
            Err(Error::InfiniteColdTemperature)
        );
    }

    #[test]
    fn equally_spaced_entropy() {
        for x in [-30.0, -1.2, 0.0, 0.4, 3.0, 50.0] {
            assert!(close(
                entropy_equally_spaced(x, 2),
                entropy_s1(x).value(),
                1e-12
            ));
        }
        for levels in [2, 3, 5, 9] {
            assert!(close(
                entropy_equally_spaced(0.0, levels),
                f64::from(levels).ln(),
                1e-14
            ));
        }
        assert!(entropy_equally_spaced(-800.0, 5).is_finite());
    }

    #[test]
    fn inverse_temperature_rejects_non_finite() {
        assert_eq!(InverseTemperature::new(f64::NAN), Err(Error::NonFiniteBeta));
        assert_eq!(
            InverseTemperature::new(f64::INFINITY),
            Err(Error::NonFiniteBeta)
        );
    }
}
