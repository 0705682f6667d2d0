//! Urn-model heat engines.
//!
//! Reservoirs are urns of distinguishable weighted balls sitting at an
//! altitude `ε`. One engine cycle draws a ball from every reservoir of a
//! ring and moves it to the next one; the work delivered is the potential
//! energy released. With weights restricted to 0 and 1 the same model is a
//! quantum Otto (m = 1) or multi-bath Carnot-like (m > 1) engine running
//! on two-level systems.
//!
//! * [`urn`] holds reservoirs, rings and the randomized exchange step.
//! * [`analytic`] gives closed-form mean heats, work, variance and efficiency.
//! * [`thermo`] maps populations to inverse temperatures and entropies.
//! * [`continuum`] is the many-sub-reservoir limit.
//! * [`montecarlo`] runs reproducible ensembles and checks them against [`analytic`].
//! * [`frontier`] explores and optimizes efficiency versus work.
//!
//! Reduced units are used throughout: `k_B = 1`, `T = 1/β`.

pub mod analytic;
pub mod continuum;
mod error;
pub mod frontier;
pub mod montecarlo;
pub mod streams;
pub mod thermo;
pub mod urn;

pub use error::{Error, Result};
