//! The periodic stochastic process
//! `θ(Φ) = θ₀/√(2π) + Σ_m (θ_m* e^{−imΦ} + θ_m e^{imΦ})/√(2π)`
//! with independent gaussian Fourier amplitudes.
//!
//! `sigma` in a [`ModeSpec`] is the standard deviation of each of θ_m^R and
//! θ_m^I (and of θ₀ for m = 0), so `⟨|θ_m|²⟩ = 2σ²` for m ≥ 1. The closed-form
//! statistics are written in terms of `⟨|θ_m|²⟩`; see [`NoiseSpec::mean_square`].

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{Estimate, Running};

/// Cutoff used by a decay law when none is given.
pub const DEFAULT_CUTOFF: u32 = 100;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub m: u32,
    pub sigma: f64,
}

/// σ_m = amplitude · m^{−(1+α)/2} for 1 ≤ m ≤ cutoff, so ⟨|θ_m|²⟩ ∝ m^{−(1+α)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayLaw {
    pub amplitude: f64,
    pub alpha: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: u32,
    /// Standard deviation of θ₀; omitted means no m = 0 mode.
    #[serde(default)]
    pub sigma0: Option<f64>,
}

fn default_cutoff() -> u32 {
    DEFAULT_CUTOFF
}

/// Noise specification: an explicit mode list, optionally extended by a decay law.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub modes: Vec<ModeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayLaw>,
}

impl NoiseSpec {
    pub fn single(m: u32, sigma: f64) -> Self {
        Self {
            modes: vec![ModeSpec { m, sigma }],
            decay: None,
        }
    }

    pub fn from_modes(modes: impl IntoIterator<Item = (u32, f64)>) -> Self {
        Self {
            modes: modes.into_iter().map(|(m, sigma)| ModeSpec { m, sigma }).collect(),
            decay: None,
        }
    }

    pub fn from_decay(law: DecayLaw) -> Self {
        Self {
            modes: Vec::new(),
            decay: Some(law),
        }
    }

    /// Spectrum used for the figure 1 trajectory: σ₀ = √(2π), σ_k = √(2π)/k up to k = 100.
    pub fn figure_one() -> Self {
        let a = (2.0 * PI).sqrt();
        Self::from_decay(DecayLaw {
            amplitude: a,
            alpha: 1.0,
            cutoff: DEFAULT_CUTOFF,
            sigma0: Some(a),
        })
    }

    /// Explicit modes followed by decay-law modes, sorted by m.
    pub fn resolved(&self) -> Result<Vec<ModeSpec>> {
        let mut out = self.modes.clone();
        if let Some(law) = &self.decay {
            if !(law.amplitude >= 0.0 && law.amplitude.is_finite()) {
                return Err(Error::config(format!("decay amplitude {} must be finite and >= 0", law.amplitude)));
            }
            if !(law.alpha >= 0.0 && law.alpha.is_finite()) {
                return Err(Error::config(format!("decay exponent {} must be finite and >= 0", law.alpha)));
            }
            if let Some(s0) = law.sigma0 {
                out.push(ModeSpec { m: 0, sigma: s0 });
            }
            for m in 1..=law.cutoff {
                out.push(ModeSpec {
                    m,
                    sigma: law.amplitude * (m as f64).powf(-(1.0 + law.alpha) / 2.0),
                });
            }
        }
        let mut seen = BTreeSet::new();
        for mode in &out {
            if !seen.insert(mode.m) {
                return Err(Error::config(format!("noise mode m = {} listed twice", mode.m)));
            }
            if !(mode.sigma >= 0.0 && mode.sigma.is_finite()) {
                return Err(Error::config(format!(
                    "noise mode m = {} has invalid sigma {}",
                    mode.m, mode.sigma
                )));
            }
        }
        out.sort_by_key(|mode| mode.m);
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.resolved().map(|_| ())
    }

    /// ⟨|θ_m|²⟩: 2σ² for m ≥ 1, σ₀² for m = 0.
    pub fn mean_square(mode: &ModeSpec) -> f64 {
        if mode.m == 0 {
            mode.sigma * mode.sigma
        } else {
            2.0 * mode.sigma * mode.sigma
        }
    }
}

/// One draw of the Fourier amplitudes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseRealization {
    pub theta0: f64,
    /// (m, θ_m) for m ≥ 1, sorted by m.
    pub coeffs: Vec<(u32, Complex64)>,
}

impl NoiseRealization {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(theta0: f64, coeffs: impl IntoIterator<Item = (u32, Complex64)>) -> Self {
        let mut coeffs: Vec<_> = coeffs.into_iter().filter(|(m, _)| *m > 0).collect();
        coeffs.sort_by_key(|(m, _)| *m);
        Self { theta0, coeffs }
    }

    pub fn single(m: u32, amp: Complex64) -> Self {
        if m == 0 {
            Self::new(amp.re, [])
        } else {
            Self::new(0.0, [(m, amp)])
        }
    }

    pub fn is_zero(&self) -> bool {
        self.theta0 == 0.0 && self.coeffs.iter().all(|(_, c)| *c == Complex64::new(0.0, 0.0))
    }

    pub fn coefficient(&self, m: u32) -> Complex64 {
        if m == 0 {
            return Complex64::new(self.theta0, 0.0);
        }
        self.coeffs
            .iter()
            .find(|(k, _)| *k == m)
            .map(|(_, c)| *c)
            .unwrap_or_default()
    }

    /// θ(Φ).
    pub fn evaluate(&self, phi: f64) -> f64 {
        let mut s = self.theta0;
        for &(m, c) in &self.coeffs {
            let (sn, cs) = (m as f64 * phi).sin_cos();
            s += 2.0 * (c.re * cs - c.im * sn);
        }
        s * INV_SQRT_2PI
    }

    /// dθ/dΦ.
    pub fn evaluate_derivative(&self, phi: f64) -> f64 {
        let mut s = 0.0;
        for &(m, c) in &self.coeffs {
            let k = m as f64;
            let (sn, cs) = (k * phi).sin_cos();
            s -= 2.0 * k * (c.re * sn + c.im * cs);
        }
        s * INV_SQRT_2PI
    }

    /// (θ, dθ/dΦ) with one trigonometric evaluation per mode.
    pub fn evaluate_both(&self, phi: f64) -> (f64, f64) {
        let mut v = self.theta0;
        let mut d = 0.0;
        for &(m, c) in &self.coeffs {
            let k = m as f64;
            let (sn, cs) = (k * phi).sin_cos();
            v += 2.0 * (c.re * cs - c.im * sn);
            d -= 2.0 * k * (c.re * sn + c.im * cs);
        }
        (v * INV_SQRT_2PI, d * INV_SQRT_2PI)
    }

    /// Upper bound on max_Φ |θ(Φ)|.
    pub fn sup_bound(&self) -> f64 {
        (self.theta0.abs() + 2.0 * self.coeffs.iter().map(|(_, c)| c.norm()).sum::<f64>()) * INV_SQRT_2PI
    }

    /// ∫₀^{2π} θ² dΦ (Parseval).
    pub fn square_integral(&self) -> f64 {
        self.theta0 * self.theta0 + 2.0 * self.coeffs.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>()
    }
}

/// Random stream for realization `index` under master `seed`.
///
/// Each index selects its own ChaCha stream, so a realization does not depend
/// on how many others were drawn before it or on which thread draws it.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws θ₀ ~ N(0, σ₀²) and θ_m^R, θ_m^I ~ N(0, σ_m²), in mode order.
pub fn sample<R: Rng + ?Sized>(spec: &NoiseSpec, rng: &mut R) -> Result<NoiseRealization> {
    Ok(sample_resolved(&spec.resolved()?, rng))
}

pub(crate) fn sample_resolved<R: Rng + ?Sized>(modes: &[ModeSpec], rng: &mut R) -> NoiseRealization {
    let mut theta0 = 0.0;
    let mut coeffs = Vec::with_capacity(modes.len());
    for mode in modes {
        if mode.m == 0 {
            let z: f64 = rng.sample(StandardNormal);
            theta0 = mode.sigma * z;
        } else {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            coeffs.push((mode.m, Complex64::new(mode.sigma * re, mode.sigma * im)));
        }
    }
    NoiseRealization { theta0, coeffs }
}

/// Stationary autocorrelation R(Δ) = ⟨θ(Φ + Δ)θ(Φ)⟩ and its first two derivatives.
pub trait Autocorrelation {
    fn value(&self, delta: f64) -> f64;
    fn first_derivative(&self, delta: f64) -> f64;
    fn second_derivative(&self, delta: f64) -> f64;
}

/// Autocorrelation of a concrete spectrum, precomputed from a spec.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumAutocorrelation {
    /// (m, ⟨|θ_m|²⟩)
    terms: Vec<(u32, f64)>,
}

impl SpectrumAutocorrelation {
    pub fn new(spec: &NoiseSpec) -> Result<Self> {
        Ok(Self {
            terms: spec
                .resolved()?
                .iter()
                .map(|mode| (mode.m, NoiseSpec::mean_square(mode)))
                .collect(),
        })
    }

    fn sum(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|&(m, ms)| if m == 0 { f(0.0, ms / 2.0) } else { f(m as f64, ms) })
            .sum::<f64>()
            / PI
    }
}

impl Autocorrelation for SpectrumAutocorrelation {
    fn value(&self, delta: f64) -> f64 {
        self.sum(|k, ms| ms * (k * delta).cos())
    }

    fn first_derivative(&self, delta: f64) -> f64 {
        self.sum(|k, ms| -k * ms * (k * delta).sin())
    }

    fn second_derivative(&self, delta: f64) -> f64 {
        self.sum(|k, ms| -k * k * ms * (k * delta).cos())
    }
}

/// Σ_{m≥1} ⟨|θ_m|²⟩ cos(mΔ)/π + σ₀²/(2π).
pub fn autocorrelation_theory(spec: &NoiseSpec, delta: f64) -> Result<f64> {
    Ok(SpectrumAutocorrelation::new(spec)?.value(delta))
}

/// Which product an empirical correlation estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correlator {
    /// ⟨θ(Φ₁)θ(Φ₂)⟩ ≈ R(Δ)
    ValueValue,
    /// ⟨θ′(Φ₁)θ(Φ₂)⟩ ≈ R′(Δ)
    DerivativeValue,
    /// ⟨θ′(Φ₁)θ′(Φ₂)⟩ ≈ −R″(Δ)
    DerivativeDerivative,
}

/// Number of Φ₁ points averaged per realization by the empirical estimators.
pub const EMPIRICAL_PHI_POINTS: usize = 16;

/// Monte Carlo estimate of a correlator at lag Δ = Φ₁ − Φ₂, averaging each
/// realization over a uniform Φ₁ grid before taking the sample mean.
pub fn correlation_empirical<R: Rng + ?Sized>(
    spec: &NoiseSpec,
    delta: f64,
    kind: Correlator,
    samples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if samples < 2 {
        return Err(Error::config("empirical correlation needs at least 2 samples"));
    }
    let modes = spec.resolved()?;
    let mut acc = Running::new();
    for _ in 0..samples {
        let r = sample_resolved(&modes, rng);
        let mut s = 0.0;
        for k in 0..EMPIRICAL_PHI_POINTS {
            let p1 = 2.0 * PI * k as f64 / EMPIRICAL_PHI_POINTS as f64;
            let (v1, d1) = r.evaluate_both(p1);
            let (v2, d2) = r.evaluate_both(p1 - delta);
            s += match kind {
                Correlator::ValueValue => v1 * v2,
                Correlator::DerivativeValue => d1 * v2,
                Correlator::DerivativeDerivative => d1 * d2,
            };
        }
        acc.push(s / EMPIRICAL_PHI_POINTS as f64);
    }
    Ok(acc.estimate())
}

/// Estimator of R(Δ) from `samples` realizations.
pub fn autocorrelation_empirical<R: Rng + ?Sized>(
    spec: &NoiseSpec,
    delta: f64,
    samples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    correlation_empirical(spec, delta, Correlator::ValueValue, samples, rng)
}

/// ⟨θ²(Φ)⟩ estimated separately at each Φ of `grid` from the same samples.
pub fn variance_profile<R: Rng + ?Sized>(
    spec: &NoiseSpec,
    grid: &[f64],
    samples: usize,
    rng: &mut R,
) -> Result<Vec<Estimate>> {
    if samples < 2 {
        return Err(Error::config("variance profile needs at least 2 samples"));
    }
    let modes = spec.resolved()?;
    let mut acc = vec![Running::new(); grid.len()];
    for _ in 0..samples {
        let r = sample_resolved(&modes, rng);
        for (a, &phi) in acc.iter_mut().zip(grid) {
            let v = r.evaluate(phi);
            a.push(v * v);
        }
    }
    Ok(acc.iter().map(Running::estimate).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_realization(seed: u64) -> NoiseRealization {
        let spec = NoiseSpec::from_modes([(0, 0.7), (1, 1.0), (3, 0.5), (8, 0.2)]);
        sample(&spec, &mut substream(seed, 0)).unwrap()
    }

    #[test]
    fn zero_spec_gives_zero_realization() {
        let spec = NoiseSpec::from_modes([(0, 0.0), (2, 0.0)]);
        let r = sample(&spec, &mut substream(1, 0)).unwrap();
        assert!(r.is_zero());
        assert_eq!(r.evaluate(1.3), 0.0);
        assert_eq!(r.evaluate_derivative(1.3), 0.0);
    }

    #[test]
    fn single_mode_moments() {
        let spec = NoiseSpec::single(1, 1.0);
        let mut rng = substream(2024, 7);
        let n = 100_000;
        let (mut rr, mut ii, mut ri) = (Running::new(), Running::new(), Running::new());
        for _ in 0..n {
            let c = sample(&spec, &mut rng).unwrap().coefficient(1);
            rr.push(c.re * c.re);
            ii.push(c.im * c.im);
            ri.push(c.re * c.im);
        }
        assert!(ri.mean().abs() < 3.0 / (n as f64).sqrt());
        assert!((rr.mean() - 1.0).abs() < 0.01);
        assert!((ii.mean() - 1.0).abs() < 0.01);
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        assert_eq!(random_realization(9), random_realization(9));
        assert_ne!(random_realization(9), random_realization(10));
        // streams differ by index
        let spec = NoiseSpec::single(2, 1.0);
        let a = sample(&spec, &mut substream(5, 0)).unwrap();
        let b = sample(&spec, &mut substream(5, 1)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let r = random_realization(3);
        let h = 1e-5;
        for k in 0..100 {
            let phi = 2.0 * PI * k as f64 / 100.0;
            let fd = (r.evaluate(phi + h) - r.evaluate(phi - h)) / (2.0 * h);
            assert!((fd - r.evaluate_derivative(phi)).abs() < 1e-6);
            let (v, d) = r.evaluate_both(phi);
            assert_eq!(v, r.evaluate(phi));
            assert_eq!(d, r.evaluate_derivative(phi));
        }
    }

    #[test]
    fn sup_bound_holds() {
        let r = random_realization(4);
        let b = r.sup_bound();
        for k in 0..1000 {
            assert!(r.evaluate(k as f64 * 0.00628).abs() <= b + 1e-15);
        }
    }

    #[test]
    fn theory_examples() {
        let s = NoiseSpec::single(3, 0.8);
        let ms = 2.0 * 0.64;
        assert!((autocorrelation_theory(&s, 0.0).unwrap() - ms / PI).abs() < 1e-15);
        let z = NoiseSpec::single(0, 1.3);
        for d in [0.0, 1.0, 4.0] {
            assert!((autocorrelation_theory(&z, d).unwrap() - 1.69 / (2.0 * PI)).abs() < 1e-15);
        }
    }

    #[test]
    fn empirical_autocorrelation_matches_theory() {
        let spec = NoiseSpec::from_modes([(0, 0.5), (1, 1.0), (2, 0.7)]);
        let e = autocorrelation_empirical(&spec, PI / 3.0, 100_000, &mut substream(11, 0)).unwrap();
        let t = autocorrelation_theory(&spec, PI / 3.0).unwrap();
        assert!(e.z_score(t) < 3.0, "{e:?} vs {t}");

        let zero = NoiseSpec::single(4, 0.0);
        let e = autocorrelation_empirical(&zero, 0.4, 10, &mut substream(11, 1)).unwrap();
        assert_eq!(e.mean, 0.0);

        let m2 = NoiseSpec::single(2, 1.0);
        let e = autocorrelation_empirical(&m2, PI / 2.0, 20_000, &mut substream(11, 2)).unwrap();
        // cos(2 · π/2) = −1, ⟨|θ₂|²⟩ = 2
        assert!(e.z_score(-2.0 / PI) < 3.0, "{e:?}");
    }

    #[test]
    fn derivative_correlations_match_theory() {
        let spec = NoiseSpec::from_modes([(1, 1.0), (3, 0.5)]);
        let r = SpectrumAutocorrelation::new(&spec).unwrap();
        for (i, delta) in [0.3, 1.7].into_iter().enumerate() {
            let e = correlation_empirical(&spec, delta, Correlator::DerivativeValue, 40_000, &mut substream(12, i as u64))
                .unwrap();
            assert!(e.z_score(r.first_derivative(delta)) < 3.0, "{e:?}");
            let e = correlation_empirical(
                &spec,
                delta,
                Correlator::DerivativeDerivative,
                40_000,
                &mut substream(13, i as u64),
            )
            .unwrap();
            assert!(e.z_score(-r.second_derivative(delta)) < 3.0, "{e:?}");
        }
    }

    #[test]
    fn derivatives_of_theory_are_consistent() {
        let spec = NoiseSpec::from_modes([(0, 0.3), (2, 1.0), (5, 0.4)]);
        let r = SpectrumAutocorrelation::new(&spec).unwrap();
        let h = 1e-5;
        for &d in &[0.1, 1.0, 2.5] {
            let fd1 = (r.value(d + h) - r.value(d - h)) / (2.0 * h);
            let fd2 = (r.first_derivative(d + h) - r.first_derivative(d - h)) / (2.0 * h);
            assert!((fd1 - r.first_derivative(d)).abs() < 1e-7);
            assert!((fd2 - r.second_derivative(d)).abs() < 1e-6);
        }
    }

    #[test]
    fn stationarity_of_variance() {
        let spec = NoiseSpec::from_modes([(1, 1.0), (2, 0.6)]);
        let grid: Vec<f64> = (0..12).map(|k| k as f64 * PI / 6.0).collect();
        let prof = variance_profile(&spec, &grid, 20_000, &mut substream(14, 0)).unwrap();
        let r0 = autocorrelation_theory(&spec, 0.0).unwrap();
        for e in prof {
            assert!(e.z_score(r0) < 4.0, "{e:?}");
        }
    }

    #[test]
    fn decay_law_spectrum() {
        let spec = NoiseSpec::from_decay(DecayLaw {
            amplitude: 2.0,
            alpha: 0.5,
            cutoff: 30,
            sigma0: None,
        });
        let modes = spec.resolved().unwrap();
        assert_eq!(modes.len(), 30);
        let ms1 = NoiseSpec::mean_square(&modes[0]);
        for mode in &modes {
            let ratio = NoiseSpec::mean_square(mode) / ms1;
            let expect = (mode.m as f64).powf(-1.5);
            assert!((ratio - expect).abs() < 1e-14 * expect.max(1.0));
        }
        let fig = NoiseSpec::figure_one().resolved().unwrap();
        assert_eq!(fig.len(), 101);
        assert!((fig[0].sigma - (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!((fig[10].sigma - (2.0 * PI).sqrt() / 10.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(NoiseSpec::from_modes([(1, 1.0), (1, 2.0)]).validate().is_err());
        assert!(NoiseSpec::from_modes([(1, -1.0)]).validate().is_err());
        assert!(NoiseSpec::from_modes([(2, f64::NAN)]).validate().is_err());
    }

    #[test]
    fn serde_round_trip() {
        let spec = NoiseSpec::from_modes([(0, 0.5), (2, 1.0)]);
        let text = serde_json::to_string(&spec).unwrap();
        let back: NoiseSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
        let law: NoiseSpec = serde_json::from_str(r#"{"decay":{"amplitude":1.0,"alpha":0.0}}"#).unwrap();
        assert_eq!(law.decay.unwrap().cutoff, DEFAULT_CUTOFF);
    }

    proptest! {
        #[test]
        fn realizations_are_periodic(seed in 0u64..10_000) {
            let r = random_realization(seed);
            prop_assert!((r.evaluate(0.0) - r.evaluate(2.0 * PI)).abs() < 1e-12);
            prop_assert!((r.evaluate_derivative(0.0) - r.evaluate_derivative(2.0 * PI)).abs() < 1e-11);
        }
    }
}
