//! Holonomy of the doublet along the noisy field loop, exact and perturbative.
//!
//! The loop is parametrized by t ∈ [−1, 2π+1]:
//!
//! * lead-in, t ∈ [−1, 0]: Φ = 0, Θ goes linearly from Θ₀ to Θ₀ + εθ(0);
//! * circle, t ∈ [0, 2π]: Φ = t, Θ = Θ₀ + εθ(t);
//! * lead-out, t ∈ [2π, 2π+1]: Φ = 2π, Θ returns to Θ₀.
//!
//! The exact integrator solves U̇ = iA U with the unexpanded equator-gauge
//! connection, so it holds to all orders in ε and serves as the oracle for the
//! first-order formulas.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseRealization;
use crate::nqr::{FieldDirection, Gauge};
use crate::quad;
use crate::su2::{
    cross, dot, exp_components, frame_rotation, log_map, AlgebraVector, Frame, GroupElement2,
    LadderComponents,
};

/// Curves must keep Θ within [δ, π − δ] so the equator chart applies.
pub const CHART_MARGIN: f64 = 1e-6;
/// Default number of RK4 steps on the fluctuating circle.
pub const DEFAULT_MIDDLE_STEPS: usize = 20_000;
/// Fewest steps accepted by the integrator.
pub const MIN_STEPS: usize = 100;
/// Largest per-step quaternion norm drift tolerated before renormalization.
pub const UNITARITY_TOL: f64 = 1e-9;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Ω = √(1 + 3 sin²Θ₀) ∈ [1, 2].
pub fn omega(theta0: f64) -> f64 {
    let s = theta0.sin();
    (1.0 + 3.0 * s * s).sqrt()
}

/// Coefficients of the unperturbed generator A₀ = −sinΘ₀ σ₁ + ½cosΘ₀ σ₃.
pub fn a0(theta0: f64) -> [f64; 3] {
    [-theta0.sin(), 0.0, 0.5 * theta0.cos()]
}

/// U₀ = e^{−iπ} exp(2πi A₀), the holonomy of the unperturbed loop.
pub fn u0(theta0: f64) -> GroupElement2 {
    exp_components(&a0(theta0).map(|c| 2.0 * PI * c)).negate()
}

/// sin(πx)/x, continuous at 0.
pub(crate) fn sin_pi_over(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        let px = PI * x;
        PI * (1.0 - px * px / 6.0)
    } else {
        (PI * x).sin() / x
    }
}

/// sin(πΩ)/(m² − Ω²), using the analytic limit −π(−1)^m/(2m) at Ω = m.
pub fn sin_pi_ratio(m: u32, om: f64) -> f64 {
    let k = m as f64;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    // sin(πΩ) = −(−1)^m sin(π(m − Ω))
    -sign * sin_pi_over(k - om) / (k + om)
}

/// Field loop with noise amplitude ε and a fixed realization of θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyCurve {
    pub theta0: f64,
    pub eps: f64,
    pub realization: NoiseRealization,
}

/// Point of a parameter path: direction plus (dΘ/ds, dΦ/ds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub theta: f64,
    pub phi: f64,
    pub dtheta: f64,
    pub dphi: f64,
}

/// Smooth path in (Θ, Φ) over a parameter interval.
pub trait ParameterPath {
    fn span(&self) -> (f64, f64);
    fn point(&self, s: f64) -> PathPoint;
}

/// One of the three smooth pieces of a [`NoisyCurve`].
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    curve: &'a NoisyCurve,
    kind: SegmentKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    LeadIn,
    Circle,
    LeadOut,
}

impl ParameterPath for Segment<'_> {
    fn span(&self) -> (f64, f64) {
        match self.kind {
            SegmentKind::LeadIn => (-1.0, 0.0),
            SegmentKind::Circle => (0.0, 2.0 * PI),
            SegmentKind::LeadOut => (2.0 * PI, 2.0 * PI + 1.0),
        }
    }

    fn point(&self, t: f64) -> PathPoint {
        let c = self.curve;
        match self.kind {
            SegmentKind::Circle => {
                let (v, d) = c.realization.evaluate_both(t);
                PathPoint {
                    theta: c.theta0 + c.eps * v,
                    phi: t,
                    dtheta: c.eps * d,
                    dphi: 1.0,
                }
            }
            SegmentKind::LeadIn => {
                let lift = c.eps * c.realization.evaluate(0.0);
                PathPoint {
                    theta: c.theta0 + lift * (t + 1.0),
                    phi: 0.0,
                    dtheta: lift,
                    dphi: 0.0,
                }
            }
            SegmentKind::LeadOut => {
                let lift = c.eps * c.realization.evaluate(0.0);
                PathPoint {
                    theta: c.theta0 + lift - lift * (t - 2.0 * PI),
                    phi: 2.0 * PI,
                    dtheta: -lift,
                    dphi: 0.0,
                }
            }
        }
    }
}

impl NoisyCurve {
    pub fn new(theta0: f64, eps: f64, realization: NoiseRealization) -> Result<Self> {
        if !(theta0 > 0.0 && theta0 < PI) {
            return Err(Error::Domain {
                what: "curve theta0 (must lie in (0, pi))",
                value: theta0,
            });
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::Domain {
                what: "noise amplitude eps",
                value: eps,
            });
        }
        Ok(Self {
            theta0,
            eps,
            realization,
        })
    }

    pub fn unperturbed(theta0: f64) -> Result<Self> {
        Self::new(theta0, 0.0, NoiseRealization::zero())
    }

    pub fn segment(&self, kind: SegmentKind) -> Segment<'_> {
        Segment { curve: self, kind }
    }

    pub fn segments(&self) -> [Segment<'_>; 3] {
        [
            self.segment(SegmentKind::LeadIn),
            self.segment(SegmentKind::Circle),
            self.segment(SegmentKind::LeadOut),
        ]
    }

    /// Point at t ∈ [−1, 2π+1] of the full three-segment loop.
    pub fn point(&self, t: f64) -> PathPoint {
        let kind = if t < 0.0 {
            SegmentKind::LeadIn
        } else if t <= 2.0 * PI {
            SegmentKind::Circle
        } else {
            SegmentKind::LeadOut
        };
        self.segment(kind).point(t)
    }

    pub fn direction(&self, t: f64) -> FieldDirection {
        let p = self.point(t);
        FieldDirection {
            theta: p.theta,
            phi: p.phi,
        }
    }

    /// Fails when Θ(t) can leave [δ, π − δ]. Uses the amplitude bound first and
    /// samples the circle only when the bound is inconclusive.
    pub fn check_chart(&self, samples: usize) -> Result<()> {
        let lo = CHART_MARGIN;
        let hi = PI - CHART_MARGIN;
        let bound = self.eps * self.realization.sup_bound();
        if self.theta0 - bound >= lo && self.theta0 + bound <= hi {
            return Ok(());
        }
        let n = samples.max(MIN_STEPS);
        for k in 0..=n {
            let th = self.point(2.0 * PI * k as f64 / n as f64).theta;
            if !(lo..=hi).contains(&th) {
                return Err(Error::OffChart {
                    gauge: Gauge::Equator,
                    theta: th,
                });
            }
        }
        Ok(())
    }
}

/// su(2) generator `aΘ Θ′ + aΦ Φ′` of a gauge's connection along a path.
pub fn generator(gauge: Gauge, p: &PathPoint) -> [f64; 3] {
    let (st, ct) = p.theta.sin_cos();
    match gauge {
        Gauge::Equator => [-st * p.dphi, p.dtheta, 0.5 * ct * p.dphi],
        Gauge::North | Gauge::South => {
            let (sp, cp) = p.phi.sin_cos();
            let (gx, gz) = if gauge == Gauge::North {
                (-sp, 0.5 * (ct - 1.0))
            } else {
                (sp, 0.5 * (ct + 1.0))
            };
            let gy = if gauge == Gauge::North { -st * sp } else { st * sp };
            [
                gx * p.dtheta - st * cp * p.dphi,
                cp * p.dtheta + gy * p.dphi,
                gz * p.dphi,
            ]
        }
    }
}

/// Fixed-step RK4 transport of `U̇ = i a(s)·σ U`.
///
/// In quaternion form ẋ₀ = −a·x, ẋ = x₀a − a×x. The state is renormalized
/// after every step; the largest drift seen before renormalization is returned.
pub fn transport<F: FnMut(f64) -> [f64; 3]>(
    mut gen: F,
    s0: f64,
    s1: f64,
    steps: usize,
    start: GroupElement2,
) -> (GroupElement2, f64) {
    let h = (s1 - s0) / steps as f64;
    let mut q = [start.x0, start.x[0], start.x[1], start.x[2]];
    let mut drift: f64 = 0.0;
    let rhs = |a: &[f64; 3], q: &[f64; 4]| -> [f64; 4] {
        let x = [q[1], q[2], q[3]];
        let c = cross(a, &x);
        [
            -dot(a, &x),
            q[0] * a[0] - c[0],
            q[0] * a[1] - c[1],
            q[0] * a[2] - c[2],
        ]
    };
    let mut a_start = gen(s0);
    for k in 0..steps {
        let s = s0 + h * k as f64;
        let a_mid = gen(s + 0.5 * h);
        let a_end = gen(if k + 1 == steps { s1 } else { s + h });
        let k1 = rhs(&a_start, &q);
        let y2 = std::array::from_fn(|i| q[i] + 0.5 * h * k1[i]);
        let k2 = rhs(&a_mid, &y2);
        let y3 = std::array::from_fn(|i| q[i] + 0.5 * h * k2[i]);
        let k3 = rhs(&a_mid, &y3);
        let y4 = std::array::from_fn(|i| q[i] + h * k3[i]);
        let k4 = rhs(&a_end, &y4);
        for i in 0..4 {
            q[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let n2 = q.iter().map(|v| v * v).sum::<f64>();
        drift = drift.max((n2 - 1.0).abs());
        let n = n2.sqrt();
        q.iter_mut().for_each(|v| *v /= n);
        a_start = a_end;
    }
    (
        GroupElement2 {
            x0: q[0],
            x: [q[1], q[2], q[3]],
            phase: start.phase,
        },
        drift,
    )
}

/// Path-ordered exponential of a gauge's connection along a path.
pub fn path_ordered_exponential<P: ParameterPath + ?Sized>(
    path: &P,
    gauge: Gauge,
    steps: usize,
) -> Result<GroupElement2> {
    if steps < 1 {
        return Err(Error::Domain {
            what: "integrator steps",
            value: steps as f64,
        });
    }
    let (s0, s1) = path.span();
    let (u, drift) = transport(|s| generator(gauge, &path.point(s)), s0, s1, steps, GroupElement2::IDENTITY);
    if drift > UNITARITY_TOL {
        return Err(Error::UnitarityDrift { drift });
    }
    Ok(u)
}

/// Smooth monotone reparametrization s ↦ t = s + κ·(L/2π)·sin(2π(s − s₀)/L)
/// of another path, used to check that holonomies are geometric.
pub struct Reparametrized<'a, P: ParameterPath + ?Sized> {
    pub inner: &'a P,
    /// |κ| < 1 keeps the map monotone.
    pub kappa: f64,
}

impl<P: ParameterPath + ?Sized> ParameterPath for Reparametrized<'_, P> {
    fn span(&self) -> (f64, f64) {
        self.inner.span()
    }

    fn point(&self, s: f64) -> PathPoint {
        let (s0, s1) = self.inner.span();
        let len = s1 - s0;
        let w = 2.0 * PI / len;
        let t = s + self.kappa * (w * (s - s0)).sin() / w;
        let dt = 1.0 + self.kappa * (w * (s - s0)).cos();
        let p = self.inner.point(t);
        PathPoint {
            dtheta: p.dtheta * dt,
            dphi: p.dphi * dt,
            ..p
        }
    }
}

/// Output of [`integrate_holonomy`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyResult {
    /// Full-loop holonomy in the north gauge.
    pub u_n: GroupElement2,
    /// Noise correction, U_N = U₀ U_ε.
    pub u_eps: GroupElement2,
    /// log(U_ε)/ε in the base frame (zero when ε = 0).
    pub lambda: AlgebraVector,
    /// Holonomy of the circle alone in the equator gauge.
    pub u_circle: GroupElement2,
    pub steps: usize,
    pub eps: f64,
    pub theta0: f64,
    pub unitarity_drift: f64,
}

/// Exact holonomy of the noisy loop.
///
/// The circle is integrated with RK4 in the equator gauge; the closing segments
/// have constant generators ±εθ(0)σ₂ and are applied as exact exponentials.
/// Returning to the north gauge at Φ = 2π contributes ρ₂(2π) = −1.
pub fn integrate_holonomy(curve: &NoisyCurve, steps: usize) -> Result<HolonomyResult> {
    if steps < MIN_STEPS {
        return Err(Error::Domain {
            what: "integrator steps (at least 100)",
            value: steps as f64,
        });
    }
    curve.check_chart(steps)?;
    let circle = curve.segment(SegmentKind::Circle);
    let (u_circle, drift) = transport(
        |t| generator(Gauge::Equator, &circle.point(t)),
        0.0,
        2.0 * PI,
        steps,
        GroupElement2::IDENTITY,
    );
    if drift > UNITARITY_TOL {
        return Err(Error::UnitarityDrift { drift });
    }
    let lift = curve.eps * curve.realization.evaluate(0.0);
    let lead_in = exp_components(&[0.0, lift, 0.0]);
    let u_e = lead_in.adjoint() * u_circle * lead_in;
    let u_n = u_e.negate();
    let u_eps = u0(curve.theta0).adjoint() * u_n;
    let lambda = if curve.eps == 0.0 {
        AlgebraVector::zero(Frame::Base)
    } else {
        log_map(&u_eps)?.scale(1.0 / curve.eps)
    };
    Ok(HolonomyResult {
        u_n,
        u_eps,
        lambda,
        u_circle,
        steps,
        eps: curve.eps,
        theta0: curve.theta0,
        unitarity_drift: drift,
    })
}

/// Full-loop holonomy by integrating one gauge's connection over all three
/// segments, with `steps` RK4 steps on the circle and `closing_steps` on each
/// closing segment. No gauge factor is applied.
pub fn integrate_loop_in_gauge(
    curve: &NoisyCurve,
    gauge: Gauge,
    steps: usize,
    closing_steps: usize,
) -> Result<GroupElement2> {
    curve.check_chart(steps)?;
    let [lead_in, circle, lead_out] = curve.segments();
    let a = path_ordered_exponential(&lead_in, gauge, closing_steps)?;
    let b = path_ordered_exponential(&circle, gauge, steps)?;
    let c = path_ordered_exponential(&lead_out, gauge, closing_steps)?;
    Ok(c * b * a)
}

/// Circle holonomy in the interaction picture, W(2π) = e^{−2πiA₀} U_c.
pub fn interaction_circle(curve: &NoisyCurve, steps: usize) -> Result<GroupElement2> {
    let r = integrate_holonomy(curve, steps)?;
    Ok(exp_components(&a0(curve.theta0).map(|c| -2.0 * PI * c)) * r.u_circle)
}

/// m̂ with m̂·σ = e^{−2πiA₀} σ₂ e^{2πiA₀}.
pub fn m_hat(theta0: f64) -> AlgebraVector {
    let om = omega(theta0);
    let (s2, c2) = (2.0 * PI * om).sin_cos();
    let (st, ct) = theta0.sin_cos();
    AlgebraVector::base([-ct * s2 / om, c2, -2.0 * st * s2 / om])
}

/// m′ = m̂ − e₂.
pub fn m_prime(theta0: f64) -> AlgebraVector {
    let mut v = m_hat(theta0);
    v.v[1] -= 1.0;
    v
}

/// Interaction-picture coefficients: A₁ᴵ(t) = c(t) θ(t) + s(t) θ̇(t).
pub fn a1_interaction_coefficients(theta0: f64, t: f64) -> ([f64; 3], [f64; 3]) {
    let om = omega(theta0);
    let (st, ct) = theta0.sin_cos();
    let (so, co) = (om * t).sin_cos();
    let om2 = om * om;
    let c = [
        ct / om2 * (1.0 - om2 - co),
        -so / om,
        st / (2.0 * om2) * (4.0 - om2 - 4.0 * co),
    ];
    let s = [-ct * so / om, co, -2.0 * st * so / om];
    (c, s)
}

/// A₁ᴵ(t)·σ for a realization.
pub fn a1_interaction(theta0: f64, r: &NoiseRealization, t: f64) -> [f64; 3] {
    let (c, s) = a1_interaction_coefficients(theta0, t);
    let (v, d) = r.evaluate_both(t);
    std::array::from_fn(|k| c[k] * v + s[k] * d)
}

/// Λ per mode in the tilded frame: the m ≥ 1 term, or the θ₀ term for m = 0.
pub fn lambda_mode_tilded(theta0: f64, m: u32, coeff: Complex64) -> AlgebraVector {
    let om = omega(theta0);
    let om2 = om * om;
    if m == 0 {
        let th0 = coeff.re;
        let k = 2.0 * th0 / (SQRT_2PI * om2);
        let (st, ct) = theta0.sin_cos();
        return AlgebraVector::new(
            [
                k * (om2 - 1.0) * (PI * om).sin(),
                0.0,
                k * 1.5 * PI * om * st * ct,
            ],
            Frame::Tilded,
        );
    }
    let k = -4.0 * (om2 - 1.0) * sin_pi_ratio(m, om) / (SQRT_2PI * om);
    AlgebraVector::new([k * om * coeff.re, -k * m as f64 * coeff.im, 0.0], Frame::Tilded)
}

/// First-order Λ in the tilded frame, Λ⁽⁰⁾ + Σ_m Λ⁽ᵐ⁾.
pub fn lambda_perturbative_tilded(theta0: f64, r: &NoiseRealization) -> AlgebraVector {
    let mut acc = lambda_mode_tilded(theta0, 0, Complex64::new(r.theta0, 0.0));
    for &(m, c) in &r.coeffs {
        let t = lambda_mode_tilded(theta0, m, c);
        for k in 0..3 {
            acc.v[k] += t.v[k];
        }
    }
    acc
}

/// First-order Λ in the base frame.
pub fn lambda_perturbative(theta0: f64, r: &NoiseRealization) -> AlgebraVector {
    let rot = frame_rotation(theta0, Frame::Tilded, Frame::Base).expect("theta0 in [0, pi]");
    rot.apply(&lambda_perturbative_tilded(theta0, r))
        .expect("tilded input")
}

/// Λ = −θ(0)m′ + ∫₀^{2π} A₁ᴵ dt, integrated numerically (base frame).
pub fn lambda_first_order_integral(theta0: f64, r: &NoiseRealization) -> Result<AlgebraVector> {
    let pieces = 8 + 2 * r.coeffs.last().map_or(0, |c| c.0 as usize);
    let i1 = quad::integrate_vec(|t| a1_interaction(theta0, r, t), 0.0, 2.0 * PI, 1e-13, pieces)?;
    let mp = m_prime(theta0);
    let th = r.evaluate(0.0);
    Ok(AlgebraVector::base(std::array::from_fn(|k| i1[k] - th * mp.v[k])))
}

/// F̃(ω) = (2π)^{−1/2} ∫₀^{2π} (θ + iΩθ̇) e^{−iωt} dt in closed form.
pub fn f_tilde(r: &NoiseRealization, theta0: f64, w: f64) -> Complex64 {
    let om = omega(theta0);
    let sign = |k: u32| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    // every term carries sin(πω)/(pole); written through sin(πx)/x
    let mut sum = Complex64::new(r.theta0 * sin_pi_over(w), 0.0);
    for &(k, c) in &r.coeffs {
        let kf = k as f64;
        let minus = -sign(k) * sin_pi_over(kf - w);
        let plus = sign(k) * sin_pi_over(kf + w);
        sum += c * ((kf * om - 1.0) * minus) + c.conj() * ((kf * om + 1.0) * plus);
    }
    Complex64::from_polar(1.0 / PI, -PI * w) * sum
}

/// Ladder components of the first-order Λ:
/// Λ₊ = −(√(2π)/Ω) F̃(Ω) + iθ(0)(e^{−2πiΩ} − 1), Λ₀ = 3√(2π) θ₀ sinΘ₀ cosΘ₀/(2Ω).
pub fn lambda_perturbative_ladder(theta0: f64, r: &NoiseRealization) -> LadderComponents {
    let om = omega(theta0);
    let th = r.evaluate(0.0);
    let plus = -f_tilde(r, theta0, om) * (SQRT_2PI / om)
        + Complex64::i() * th * (Complex64::from_polar(1.0, -2.0 * PI * om) - 1.0);
    let zero = 3.0 * SQRT_2PI * r.theta0 * theta0.sin() * theta0.cos() / (2.0 * om);
    LadderComponents {
        plus,
        zero,
        minus: plus.conj(),
    }
}

/// Integrals entering the second-order Dyson exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DysonTerms {
    /// ∫ A₁ᴵ
    pub first: [f64; 3],
    /// ∫ A₂ᴵ, with A₂ = −½θ²A₀ commuting with A₀
    pub second: [f64; 3],
    /// ∫∫_{t₂<t₁} A₁ᴵ(t₁) × A₁ᴵ(t₂)
    pub nested: [f64; 3],
}

/// Default RK4 steps for [`dyson_terms`].
pub const DYSON_STEPS: usize = 4000;

/// Integrates G′ = a, C′ = a × G and the A₂ integral together with RK4.
pub fn dyson_terms(theta0: f64, r: &NoiseRealization, steps: usize) -> DysonTerms {
    let a0v = a0(theta0);
    let h = 2.0 * PI / steps as f64;
    let mut g = [0.0; 3];
    let mut c = [0.0; 3];
    let mut q = 0.0;
    let f = |t: f64| -> ([f64; 3], f64) {
        let a = a1_interaction(theta0, r, t);
        let v = r.evaluate(t);
        (a, v * v)
    };
    let mut start = f(0.0);
    for k in 0..steps {
        let t = h * k as f64;
        let mid = f(t + 0.5 * h);
        let end = f(t + h);
        // y = (G, C): G′ = a(t), C′ = a(t) × G
        let k1g = start.0;
        let k1c = cross(&start.0, &g);
        let g2: [f64; 3] = std::array::from_fn(|i| g[i] + 0.5 * h * k1g[i]);
        let k2g = mid.0;
        let k2c = cross(&mid.0, &g2);
        let g3: [f64; 3] = std::array::from_fn(|i| g[i] + 0.5 * h * k2g[i]);
        let k3g = mid.0;
        let k3c = cross(&mid.0, &g3);
        let g4: [f64; 3] = std::array::from_fn(|i| g[i] + h * k3g[i]);
        let k4g = end.0;
        let k4c = cross(&end.0, &g4);
        for i in 0..3 {
            g[i] += h / 6.0 * (k1g[i] + 2.0 * k2g[i] + 2.0 * k3g[i] + k4g[i]);
            c[i] += h / 6.0 * (k1c[i] + 2.0 * k2c[i] + 2.0 * k3c[i] + k4c[i]);
        }
        q += h / 6.0 * (start.1 + 4.0 * mid.1 + end.1);
        start = end;
    }
    DysonTerms {
        first: g,
        second: a0v.map(|x| -0.5 * q * x),
        nested: c,
    }
}

/// Dyson (Magnus) approximation of W(2π) to the given order in ε.
///
/// Order 2 uses the exponent εI₁ + ε²(I₂ − C): for U̇ = i a·σ U the second
/// Magnus term is ½∫∫[ia(t₁)·σ, ia(t₂)·σ] = −i ∫∫ (a(t₁) × a(t₂))·σ.
pub fn w_dyson(theta0: f64, r: &NoiseRealization, eps: f64, order: u8) -> Result<GroupElement2> {
    w_dyson_with(&dyson_terms(theta0, r, DYSON_STEPS), eps, order)
}

/// [`w_dyson`] from precomputed integrals.
pub fn w_dyson_with(terms: &DysonTerms, eps: f64, order: u8) -> Result<GroupElement2> {
    let v: [f64; 3] = match order {
        1 => terms.first.map(|x| eps * x),
        2 => std::array::from_fn(|k| {
            eps * terms.first[k] + eps * eps * (terms.second[k] - terms.nested[k])
        }),
        _ => {
            return Err(Error::Domain {
                what: "Dyson order (1 or 2)",
                value: order as f64,
            })
        }
    };
    Ok(exp_components(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{sample, substream, NoiseSpec};
    use crate::su2::{distance_geodesic, distance_su2, Matrix2};
    use crate::stats::log_log_slope;
    use rand::{Rng, SeedableRng};

    fn test_realization() -> NoiseRealization {
        NoiseRealization::new(
            0.6,
            [
                (1, Complex64::new(0.7, -0.3)),
                (2, Complex64::new(0.2, 0.5)),
                (3, Complex64::new(-0.4, 0.1)),
            ],
        )
    }

    fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    fn pauli(v: [f64; 3]) -> Matrix2 {
        [
            [Complex64::new(v[2], 0.0), Complex64::new(v[0], -v[1])],
            [Complex64::new(v[0], v[1]), Complex64::new(-v[2], 0.0)],
        ]
    }

    fn components(m: &Matrix2) -> [f64; 3] {
        [
            0.5 * (m[0][1] + m[1][0]).re,
            0.5 * (m[1][0] - m[0][1]).im,
            0.5 * (m[0][0] - m[1][1]).re,
        ]
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(0.0), 1.0);
        assert!((omega(PI / 2.0) - 2.0).abs() < 1e-15);
        assert!((omega(PI / 3.0) - 13f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn u0_limits() {
        let near_pole = u0(1e-9);
        assert!(distance_su2(&near_pole, &GroupElement2::IDENTITY).unwrap() < 1e-7);
        let eq = u0(PI / 2.0);
        assert!(distance_su2(&eq, &GroupElement2::IDENTITY.negate()).unwrap() < 1e-12);
        // determinant one: SU(2) element by construction
        assert!(eq.is_special() && (eq.norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unperturbed_loop_matches_u0() {
        for k in 1..=30 {
            let th = 0.1 * k as f64;
            let r = integrate_holonomy(&NoisyCurve::unperturbed(th).unwrap(), 2000).unwrap();
            assert!(distance_su2(&r.u_n, &u0(th)).unwrap() < 1e-8, "{th}");
            assert_eq!(r.lambda.v, [0.0; 3]);
        }
    }

    #[test]
    fn step_self_convergence() {
        let curve = NoisyCurve::new(PI / 3.0, 1e-2, test_realization()).unwrap();
        let a = integrate_holonomy(&curve, 10_000).unwrap();
        let b = integrate_holonomy(&curve, 20_000).unwrap();
        assert!(distance_su2(&a.u_n, &b.u_n).unwrap() < 1e-10);
        assert!(b.u_n.unitarity_defect() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let curve = NoisyCurve::unperturbed(1.0).unwrap();
        assert!(integrate_holonomy(&curve, 50).is_err());
        assert!(NoisyCurve::unperturbed(0.0).is_err());
        assert!(NoisyCurve::new(1.0, -1.0, NoiseRealization::zero()).is_err());
        let off = NoisyCurve::new(0.01, 1.0, NoiseRealization::single(0, Complex64::new(-1.0, 0.0))).unwrap();
        assert!(matches!(integrate_holonomy(&off, 200), Err(Error::OffChart { .. })));
    }

    #[test]
    fn curve_is_continuous() {
        let curve = NoisyCurve::new(1.2, 0.1, test_realization()).unwrap();
        let e = 1e-12;
        for t in [0.0, 2.0 * PI] {
            let a = curve.point(t - e);
            let b = curve.point(t + e);
            assert!((a.theta - b.theta).abs() < 1e-9);
            assert!((a.phi - b.phi).abs() < 1e-9);
        }
        assert_eq!(curve.point(-1.0).theta, 1.2);
        assert!((curve.point(2.0 * PI + 1.0).theta - 1.2).abs() < 1e-15);
    }

    #[test]
    fn gauge_covariance_north_vs_equator() {
        let curve = NoisyCurve::new(1.1, 1e-2, test_realization()).unwrap();
        let exact = integrate_holonomy(&curve, 20_000).unwrap();
        let north = integrate_loop_in_gauge(&curve, Gauge::North, 20_000, 100).unwrap();
        assert!(distance_su2(&north, &exact.u_n).unwrap() < 1e-8);
    }

    #[test]
    fn reparametrization_invariance() {
        let curve = NoisyCurve::new(0.9, 1e-2, test_realization()).unwrap();
        let circle = curve.segment(SegmentKind::Circle);
        let plain = path_ordered_exponential(&circle, Gauge::Equator, 20_000).unwrap();
        let warped = Reparametrized {
            inner: &circle,
            kappa: 0.4,
        };
        let other = path_ordered_exponential(&warped, Gauge::Equator, 20_000).unwrap();
        assert!(distance_su2(&plain, &other).unwrap() < 1e-8);
    }

    #[test]
    fn holonomy_consistency() {
        let curve = NoisyCurve::new(PI / 3.0, 1e-3, test_realization()).unwrap();
        let r = integrate_holonomy(&curve, 4000).unwrap();
        let d = distance_su2(&r.u_n, &u0(curve.theta0)).unwrap();
        assert!((d - curve.eps * r.lambda.norm()).abs() < 1e-10);
        let rebuilt = u0(curve.theta0) * r.u_eps;
        assert!(distance_geodesic(&rebuilt, &r.u_n) < 1e-14);
    }

    #[test]
    fn first_order_agreement() {
        let curve = NoisyCurve::new(PI / 3.0, 1e-3, NoiseRealization::single(1, Complex64::new(1.0, 0.0))).unwrap();
        let r = integrate_holonomy(&curve, 4000).unwrap();
        let pert = lambda_perturbative(curve.theta0, &curve.realization);
        assert!(r.lambda.try_sub(&pert).unwrap().norm() < 5.0 * curve.eps);
    }

    #[test]
    fn interaction_picture_coefficients_match_conjugation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let th0: f64 = rng.random_range(0.0..PI);
            let t: f64 = rng.random_range(0.0..2.0 * PI);
            let (v, d): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let (st, ct) = th0.sin_cos();
            let a1 = [-ct * v, d, -0.5 * st * v];
            let e = exp_components(&a0(th0).map(|x| -t * x)).matrix();
            let mut e_dag = e;
            for i in 0..2 {
                for j in 0..2 {
                    e_dag[i][j] = e[j][i].conj();
                }
            }
            let num = components(&mat_mul(&mat_mul(&e, &pauli(a1)), &e_dag));
            let (c, s) = a1_interaction_coefficients(th0, t);
            for k in 0..3 {
                assert!((num[k] - (c[k] * v + s[k] * d)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn m_hat_properties() {
        for k in 0..=100 {
            let th = PI * k as f64 / 100.0;
            assert!((m_hat(th).norm() - 1.0).abs() < 1e-14);
            // m̂·σ = e^{−2πiA₀} σ₂ e^{2πiA₀}
            let e = exp_components(&a0(th).map(|x| -2.0 * PI * x)).matrix();
            let mut e_dag = e;
            for i in 0..2 {
                for j in 0..2 {
                    e_dag[i][j] = e[j][i].conj();
                }
            }
            let num = components(&mat_mul(&mat_mul(&e, &pauli([0.0, 1.0, 0.0])), &e_dag));
            for c in 0..3 {
                assert!((num[c] - m_hat(th).v[c]).abs() < 1e-12);
            }
        }
        for th in [0.0, PI / 2.0, PI] {
            assert!(m_prime(th).norm() < 1e-12);
        }
    }

    #[test]
    fn m_prime_ladder_form() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        for _ in 0..50 {
            let th: f64 = rng.random_range(0.0..PI);
            let om = omega(th);
            let rot = frame_rotation(th, Frame::Base, Frame::Primed).unwrap();
            let l = rot.apply(&m_prime(th)).unwrap().ladder().unwrap();
            let expect = -Complex64::i() * (Complex64::from_polar(1.0, -2.0 * PI * om) - 1.0);
            assert!((l.plus - expect).norm() < 1e-12);
            assert!(l.zero.abs() < 1e-12);
        }
    }

    #[test]
    fn three_routes_to_first_order_lambda() {
        let r = test_realization();
        for &th in &[0.3, PI / 3.0, 1.4, 2.5] {
            let direct = lambda_first_order_integral(th, &r).unwrap();
            let modes = lambda_perturbative(th, &r);
            let ladder = lambda_perturbative_ladder(th, &r);
            let from_ladder = frame_rotation(th, Frame::Primed, Frame::Base)
                .unwrap()
                .apply(&AlgebraVector::from_ladder(ladder.plus, ladder.zero))
                .unwrap();
            for k in 0..3 {
                assert!((direct.v[k] - modes.v[k]).abs() < 1e-11, "{th} {direct} {modes}");
                assert!((from_ladder.v[k] - modes.v[k]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn perturbative_examples() {
        assert_eq!(lambda_perturbative(1.0, &NoiseRealization::zero()).norm(), 0.0);
        let t = lambda_perturbative_tilded(1.0, &NoiseRealization::single(3, Complex64::new(0.3, -0.8)));
        assert_eq!(t.v[2], 0.0);
        // m = 0 at Θ₀ = π/4 lies along n with |Λ| = |n| for θ₀ = 1
        let th = PI / 4.0;
        let om = omega(th);
        let l = lambda_perturbative_tilded(th, &NoiseRealization::single(0, Complex64::new(1.0, 0.0)));
        let pref = 2.0 / (SQRT_2PI * om * om);
        let n = [pref * (om * om - 1.0) * (PI * om).sin(), 0.0, pref * 1.5 * PI * om * th.sin() * th.cos()];
        for k in 0..3 {
            assert!((l.v[k] - n[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn f_tilde_matches_quadrature() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let spec = NoiseSpec::from_modes([(0, 1.0), (1, 1.0), (2, 0.5), (4, 0.3)]);
        for i in 0..20 {
            let r = sample(&spec, &mut substream(99, i)).unwrap();
            let th: f64 = rng.random_range(0.1..3.0);
            let w: f64 = if i % 4 == 0 { 2.0 } else { rng.random_range(0.0..4.5) };
            let om = omega(th);
            let f = |t: f64, part: usize| {
                let (v, d) = r.evaluate_both(t);
                let z = Complex64::new(v, om * d) * Complex64::from_polar(1.0, -w * t);
                if part == 0 { z.re } else { z.im }
            };
            let re = quad::integrate(|t| f(t, 0), 0.0, 2.0 * PI, 1e-12).unwrap();
            let im = quad::integrate(|t| f(t, 1), 0.0, 2.0 * PI, 1e-12).unwrap();
            let q = Complex64::new(re, im) / SQRT_2PI;
            assert!((q - f_tilde(&r, th, w)).norm() < 1e-8, "{w} {q} {}", f_tilde(&r, th, w));
        }
        let one = NoiseRealization::single(1, Complex64::new(1.0, 0.0));
        assert!(f_tilde(&one, 0.0, 1.0).norm() < 1e-15);
        assert_eq!(f_tilde(&NoiseRealization::zero(), 1.0, 1.3).norm(), 0.0);
    }

    #[test]
    fn dyson_order_one_is_the_circle_integral() {
        let r = test_realization();
        let th = 1.2;
        let terms = dyson_terms(th, &r, DYSON_STEPS);
        let direct = lambda_first_order_integral(th, &r).unwrap();
        let mp = m_prime(th);
        let th_at0 = r.evaluate(0.0);
        for k in 0..3 {
            assert!((terms.first[k] - (direct.v[k] + th_at0 * mp.v[k])).abs() < 1e-11);
        }
        assert_eq!(w_dyson(th, &r, 0.0, 2).unwrap(), GroupElement2::IDENTITY);
        assert!(w_dyson(th, &r, 1e-3, 3).is_err());
    }

    #[test]
    fn dyson_order_two_residual_scaling() {
        let r = test_realization();
        let th = PI / 3.0;
        let terms = dyson_terms(th, &r, DYSON_STEPS);
        let eps = [1e-2, 5e-3, 2.5e-3];
        let res: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let curve = NoisyCurve::new(th, e, r.clone()).unwrap();
                let exact = interaction_circle(&curve, 20_000).unwrap();
                let w = w_dyson_with(&terms, e, 2).unwrap();
                log_map(&(exact.adjoint() * w)).unwrap().norm()
            })
            .collect();
        let slope = log_log_slope(&eps, &res);
        assert!((slope - 3.0).abs() < 0.3, "{res:?} {slope}");
    }

    #[test]
    fn sin_pi_ratio_limit() {
        for m in 1..6u32 {
            let k = m as f64;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            assert!((sin_pi_ratio(m, k) + PI * sign / (2.0 * k)).abs() < 1e-14);
            let near = k + 1e-4;
            let naive = (PI * near).sin() / (k * k - near * near);
            assert!((sin_pi_ratio(m, near) - naive).abs() < 1e-9);
        }
    }
}
