//! Closed-form first-order statistics of Λ: r.m.s. distances, the mean
//! spectral weight ⟨|F̃(Ω)|²⟩ and the gaussian law of Λ in the tilded frame.
//!
//! Amplitudes follow the noise module's convention (per-component σ). The
//! d_rms functions take the r.m.s. amplitude √⟨|θ_m|²⟩ instead, which is the
//! quantity the single-mode autocorrelation is written in.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holonomy::{a1_interaction_coefficients, lambda_mode_tilded, m_prime, omega, sin_pi_over, sin_pi_ratio};
use crate::noise::{Autocorrelation, NoiseSpec};
use crate::quad;
use crate::su2::{dot, frame_rotation, AlgebraVector, Frame};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Tolerance of the single σ-integral.
pub const DRMS_TOL: f64 = 1e-10;
/// Relative size below which a cancelling integral is indistinguishable from 0.
const ROUNDOFF_FLOOR: f64 = 1e-13;
/// Tolerance of the double-integral cross-check.
pub const DRMS_2D_TOL: f64 = 1e-6;

/// d_rms = ε √(((Ω²−1)/(2Ω²)) ∫₀^{2π} R(σ) K(σ) dσ) for autocorrelation R.
pub fn drms_general<R: Fn(f64) -> f64>(r: R, theta0: f64, eps: f64) -> Result<f64> {
    let om = omega(theta0);
    let om2 = om * om;
    let kernel = |s: f64| {
        let (sn, cs) = (s * om).sin_cos();
        s * om2 + 4.0 * (2.0 * PI - s) * (om2 - 1.0) * cs - 4.0 * om * sn
            + 4.0 * om * (2.0 * PI * om - s * om).sin()
            - 4.0 * s
            - 2.0 * PI * om2
            + 8.0 * PI
    };
    let integral = quad::integrate(|s| r(s) * kernel(s), 0.0, 2.0 * PI, DRMS_TOL)?;
    // the integrand cancels to zero on the zeros of d_rms; anything below the
    // roundoff floor of ∫|RK| is not resolved and is reported as zero
    let scale = quad::integrate(|s| (r(s) * kernel(s)).abs(), 0.0, 2.0 * PI, DRMS_TOL)?;
    if integral.abs() <= ROUNDOFF_FLOOR * scale {
        return Ok(0.0);
    }
    let msq = (om2 - 1.0) / (2.0 * om2) * integral;
    Ok(eps * msq.max(0.0).sqrt())
}

/// d_rms from the double integral of ⟨|−θ(0)m′ + ∫A₁ᴵ|²⟩ before integrating by parts.
pub fn drms_double_integral<A: Autocorrelation>(r: &A, theta0: f64, eps: f64) -> Result<f64> {
    let mp = m_prime(theta0).v;
    let twopi = 2.0 * PI;
    let inner = |t1: f64, t2: f64| {
        let (c1, s1) = a1_interaction_coefficients(theta0, t1);
        let (c2, s2) = a1_interaction_coefficients(theta0, t2);
        let d = t1 - t2;
        let (r0, r1, r2) = (r.value(d), r.first_derivative(d), r.second_derivative(d));
        dot(&c1, &c2) * r0 - dot(&c1, &s2) * r1 + dot(&s1, &c2) * r1 - dot(&s1, &s2) * r2
    };
    let double = quad::integrate_2d(inner, 0.0, twopi, |_| 0.0, |_| twopi, DRMS_2D_TOL)?;
    let cross = quad::integrate(
        |t| {
            let (c, s) = a1_interaction_coefficients(theta0, t);
            dot(&c, &mp) * r.value(t) + dot(&s, &mp) * r.first_derivative(t)
        },
        0.0,
        twopi,
        DRMS_2D_TOL / 10.0,
    )?;
    let msq = r.value(0.0) * dot(&mp, &mp) + double - 2.0 * cross;
    Ok(eps * msq.max(0.0).sqrt())
}

/// Single-mode closed form of d_rms for r.m.s. amplitude `rms` = √⟨|θ_m|²⟩.
pub fn drms_mode(m: u32, rms: f64, theta0: f64, eps: f64) -> f64 {
    let om = omega(theta0);
    let om2 = om * om;
    if m == 0 {
        let s = (PI * om).sin();
        let body = 4.0 * (om2 - 1.0) * s * s + PI * PI * om2 * (4.0 - om2);
        return eps * rms / SQRT_2PI * (om2 - 1.0).max(0.0).sqrt() / om2 * body.max(0.0).sqrt();
    }
    let k = m as f64;
    eps * rms / PI.sqrt() * 2.0 * (k * k + om2).sqrt() * ((om2 - 1.0) * sin_pi_ratio(m, om)).abs() / om
}

/// d_rms of a full spectrum; statistically independent modes add in quadrature.
pub fn drms_spec(spec: &NoiseSpec, theta0: f64, eps: f64) -> Result<f64> {
    let total: f64 = spec
        .resolved()?
        .iter()
        .map(|mode| drms_mode(mode.m, NoiseSpec::mean_square(mode).sqrt(), theta0, eps).powi(2))
        .sum();
    Ok(total.sqrt())
}

/// ⟨|F̃(Ω)|²⟩ = (sin²πΩ/π²)(σ₀²/Ω² + Σ_k 2[Ω²(k²−1)² + k²(Ω²−1)²]⟨|θ_k|²⟩/(k²−Ω²)²).
pub fn f2_avg(spec: &NoiseSpec, theta0: f64) -> Result<f64> {
    f2_avg_at(spec, omega(theta0))
}

/// ⟨|F̃(ω)|²⟩ at an arbitrary frequency ω ≥ 0.
pub fn f2_avg_at(spec: &NoiseSpec, om: f64) -> Result<f64> {
    let om2 = om * om;
    let mut acc = 0.0;
    for mode in spec.resolved()? {
        let ms = NoiseSpec::mean_square(&mode);
        if mode.m == 0 {
            // sin²(πω)/ω², finite at ω = 0
            acc += sin_pi_over(om).powi(2) * ms;
        } else {
            let k2 = (mode.m as f64).powi(2);
            let ratio = sin_pi_ratio(mode.m, om);
            acc += 2.0 * (om2 * (k2 - 1.0).powi(2) + k2 * (om2 - 1.0).powi(2)) * ratio * ratio * ms;
        }
    }
    Ok(acc / (PI * PI))
}

/// Gaussian law of first-order Λ in the tilded frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionParams {
    pub theta0: f64,
    pub omega: f64,
    /// (m, σ̄_m) for the m ≥ 1 modes of the spec.
    pub sigma_bar: Vec<(u32, f64)>,
    /// σ₀ of the spec (0 when there is no m = 0 mode).
    pub sigma0: f64,
    /// σ̄₀ = n₃̃ σ₀.
    pub sigma_bar0: f64,
    /// Tilt n₁̃/n₃̃; `None` where cosΘ₀ sinΘ₀ = 0 and the ratio diverges.
    pub mu: Option<f64>,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Direction of Λ⁽⁰⁾ per unit θ₀, tilded frame.
    pub n: AlgebraVector,
    /// Same vector in the base frame.
    pub n_base: AlgebraVector,
    pub frame: Frame,
}

/// σ̄_m = |4m sin(πΩ)(Ω²−1)/(√(2π)(m²−Ω²))| σ_m.
pub fn sigma_bar(m: u32, sigma: f64, theta0: f64) -> f64 {
    let om = omega(theta0);
    (4.0 * m as f64 * (om * om - 1.0) * sin_pi_ratio(m, om) / SQRT_2PI).abs() * sigma
}

/// n with Λ⁽⁰⁾ = θ₀ n, tilded frame.
pub fn n_vector(theta0: f64) -> AlgebraVector {
    lambda_mode_tilded(theta0, 0, Complex64::new(1.0, 0.0))
}

pub fn distribution_params(spec: &NoiseSpec, theta0: f64) -> Result<DistributionParams> {
    let om = omega(theta0);
    let modes = spec.resolved()?;
    let sigma0 = modes.iter().find(|m| m.m == 0).map_or(0.0, |m| m.sigma);
    let sigma_bar: Vec<(u32, f64)> = modes
        .iter()
        .filter(|m| m.m > 0)
        .map(|m| (m.m, sigma_bar(m.m, m.sigma, theta0)))
        .collect();
    let alpha1 = sigma_bar.iter().map(|&(m, s)| (s / m as f64).powi(2)).sum::<f64>().sqrt();
    let alpha2 = sigma_bar.iter().map(|&(_, s)| s * s).sum::<f64>().sqrt() / om;
    let n = n_vector(theta0);
    let n_base = frame_rotation(theta0, Frame::Tilded, Frame::Base)?.apply(&n)?;
    let sc = theta0.sin() * theta0.cos();
    let mu = if sc.abs() < 1e-12 { None } else { Some(n.v[0] / n.v[2]) };
    Ok(DistributionParams {
        theta0,
        omega: om,
        sigma_bar,
        sigma0,
        sigma_bar0: (n.v[2] * sigma0).abs(),
        mu,
        alpha1,
        alpha2,
        n,
        n_base,
        frame: Frame::Tilded,
    })
}

impl DistributionParams {
    /// Covariance of Λ in the tilded frame: Σ_m diag(σ̄²/m², σ̄²/Ω², 0) + σ₀² n nᵀ.
    pub fn covariance(&self) -> [[f64; 3]; 3] {
        let mut c = [[0.0; 3]; 3];
        c[0][0] = self.alpha1 * self.alpha1;
        c[1][1] = self.alpha2 * self.alpha2;
        let s2 = self.sigma0 * self.sigma0;
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] += s2 * self.n.v[i] * self.n.v[j];
            }
        }
        c
    }

    /// ⟨|Λ|²⟩, the trace of the covariance.
    pub fn second_moment(&self) -> f64 {
        let c = self.covariance();
        c[0][0] + c[1][1] + c[2][2]
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.alpha1 > 0.0 && self.alpha2 > 0.0 && self.sigma_bar0 > 0.0) || self.mu.is_none()
    }
}

/// Density of the full three-dimensional gaussian at tilded-frame Λ.
pub fn pdf_lambda(params: &DistributionParams, lambda: &AlgebraVector) -> Result<f64> {
    if lambda.frame != Frame::Tilded {
        return Err(Error::FrameMismatch {
            left: lambda.frame,
            right: Frame::Tilded,
        });
    }
    if params.is_degenerate() {
        return Err(Error::DegenerateDistribution(
            "general density needs alpha1, alpha2, sigma_bar0 > 0 and a finite mu",
        ));
    }
    let mu = params.mu.expect("checked");
    let [l1, l2, l3] = lambda.v;
    let q = ((l1 - mu * l3) / params.alpha1).powi(2)
        + (l2 / params.alpha2).powi(2)
        + (l3 / params.sigma_bar0).powi(2);
    let norm = (2.0 * PI).powf(1.5) * params.alpha1 * params.alpha2 * params.sigma_bar0;
    Ok((-0.5 * q).exp() / norm)
}

/// Degenerate single-mode laws, described by their support and the density on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModeDistribution {
    /// m ≥ 1: the Λ₃̃ = 0 plane with independent gaussians along 1̃ and 2̃.
    Plane { semiaxes: [f64; 2] },
    /// m = 0: the line spanned by `direction` (unit, tilded) with N(0, std²) along it.
    Line { direction: AlgebraVector, std: f64 },
}

impl ModeDistribution {
    pub fn for_mode(m: u32, sigma: f64, theta0: f64) -> Self {
        if m == 0 {
            let n = n_vector(theta0);
            let len = n.norm();
            let direction = if len > 0.0 {
                n.scale(1.0 / len)
            } else {
                AlgebraVector::new([1.0, 0.0, 0.0], Frame::Tilded)
            };
            ModeDistribution::Line {
                direction,
                std: len * sigma,
            }
        } else {
            let sb = sigma_bar(m, sigma, theta0);
            ModeDistribution::Plane {
                semiaxes: [sb / m as f64, sb / omega(theta0)],
            }
        }
    }

    /// Coordinates on the support and the distance of Λ from it.
    pub fn project(&self, lambda: &AlgebraVector) -> (Vec<f64>, f64) {
        match self {
            ModeDistribution::Plane { .. } => (vec![lambda.v[0], lambda.v[1]], lambda.v[2].abs()),
            ModeDistribution::Line { direction, .. } => {
                let t = dot(&lambda.v, &direction.v);
                let off = std::array::from_fn::<f64, 3, _>(|k| lambda.v[k] - t * direction.v[k]);
                (vec![t], dot(&off, &off).sqrt())
            }
        }
    }

    /// Density on the support at the given support coordinates.
    pub fn marginal_pdf(&self, coords: &[f64]) -> f64 {
        let g = |x: f64, s: f64| (-0.5 * (x / s).powi(2)).exp() / (SQRT_2PI * s);
        match self {
            ModeDistribution::Plane { semiaxes } => g(coords[0], semiaxes[0]) * g(coords[1], semiaxes[1]),
            ModeDistribution::Line { std, .. } => g(coords[0], *std),
        }
    }

    pub fn second_moment(&self) -> f64 {
        match self {
            ModeDistribution::Plane { semiaxes } => semiaxes[0].powi(2) + semiaxes[1].powi(2),
            ModeDistribution::Line { std, .. } => std * std,
        }
    }
}

/// Present here so the analytics can be checked against sampled Λ.
pub fn theta0_of_mode_peak(m: u32, grid: usize) -> (f64, f64) {
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..=grid {
        let th = PI * k as f64 / grid as f64;
        let v = drms_mode(m, 1.0, th, 1.0);
        if v > best.1 {
            best = (th, v);
        }
    }
    best
}
