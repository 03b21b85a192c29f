//! Non-abelian holonomy of a spin-3/2 quadrupole doublet driven around a noisy
//! loop, with closed-form first-order statistics and the Monte Carlo, exact
//! integrator and Schrödinger oracles that check them.

pub mod adiabatic;
pub mod analytics;
pub mod error;
pub mod holonomy;
pub mod lab;
pub mod noise;
pub mod nqr;
pub mod quad;
pub mod stats;
pub mod su2;

pub use error::{Error, Result};
pub use holonomy::{integrate_holonomy, omega, HolonomyResult, NoisyCurve};
pub use noise::{NoiseRealization, NoiseSpec};
pub use su2::{AlgebraVector, Frame, GroupElement2};
