//! Full spin-3/2 Schrödinger evolution along the loop, used as an oracle for
//! the adiabatic (Wilczek-Zee) prediction and as a leakage diagnostic.
//!
//! Physical time τ ∈ [0, T] maps to the loop parameter t = −1 + (2π+2)τ/T.
//! The doublet energy 1/4 is subtracted from H, so no dynamical phase needs to
//! be removed afterwards. Because the spectrum is {1/4, 9/4}, the projector
//! onto the ±3/2 doublet is simply (H − 1/4)/2.

use std::f64::consts::PI;

use nalgebra::Matrix4x2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holonomy::{integrate_holonomy, NoisyCurve, DEFAULT_MIDDLE_STEPS};
use crate::noise::NoiseRealization;
use crate::nqr::{eigenframe, FieldDirection, Gauge, Operator, SpinOperators32};
use crate::su2::{distance_geodesic, distance_su2, GroupElement2, Matrix2};

/// Target physical time step.
pub const DEFAULT_DT: f64 = 0.02;
/// Default total time, calibrated so leakage stays below 1e-3 for ε = 1e-3, m ≤ 7.
pub const DEFAULT_T: f64 = 2000.0;
/// Per-step norm drift that aborts a run.
pub const NORM_TOL: f64 = 1e-9;
/// Number of checkpoints at which the instantaneous leakage is sampled.
pub const CHECKPOINTS: usize = 100;

const QUARTER: f64 = 0.25;

/// Steps of size ≈ [`DEFAULT_DT`] for total time `t_total`.
pub fn default_steps(t_total: f64) -> usize {
    (t_total / DEFAULT_DT).ceil().max(1.0) as usize
}

/// Result of one evolution of both doublet states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerRun {
    pub t_total: f64,
    pub steps: usize,
    pub theta0: f64,
    pub eps: f64,
    /// Final 4-vectors, one per initial doublet state (row-major, 4 × 2).
    pub final_states: [[Complex64; 2]; 4],
    /// ⟨+½|, ⟨−½| of the final north frame applied to the finals.
    pub map_raw: Matrix2,
    /// `map_raw` projected onto U(2).
    pub map: GroupElement2,
    /// Population outside the ±1/2 doublet at the end (worst column).
    pub leakage: f64,
    /// Largest leakage over the checkpoints.
    pub max_leakage: f64,
    /// Largest per-step norm correction.
    pub norm_drift: f64,
}

impl SchrodingerRun {
    /// Geodesic U(2) distance of the extracted map to `u`.
    pub fn distance_to(&self, u: &GroupElement2) -> f64 {
        distance_geodesic(&self.map, u)
    }

    /// SU(2) distance after discarding the global phase, minimized over ±.
    pub fn distance_su2_to(&self, u: &GroupElement2) -> Result<f64> {
        let a = self.map.su2_part();
        let b = u.su2_part();
        Ok(distance_su2(&a, &b)?.min(distance_su2(&a, &b.negate())?))
    }

    /// Overall phase of the map relative to `u`.
    pub fn phase_offset(&self, u: &GroupElement2) -> f64 {
        self.map.half_trace_with(u).arg()
    }
}

struct Stepper {
    ops: SpinOperators32,
}

impl Stepper {
    fn shifted_h(&self, dir: &FieldDirection) -> Operator {
        let bj = self.ops.along(dir.unit_vector());
        bj * bj - Operator::identity() * Complex64::new(QUARTER, 0.0)
    }

    fn deriv(&self, dir: &FieldDirection, psi: &Matrix4x2<Complex64>) -> Matrix4x2<Complex64> {
        (self.shifted_h(dir) * psi) * Complex64::new(0.0, -1.0)
    }

    fn leakage(&self, dir: &FieldDirection, psi: &Matrix4x2<Complex64>) -> f64 {
        let p = self.shifted_h(dir) * Complex64::new(0.5, 0.0);
        (0..2)
            .map(|c| {
                let col = psi.column(c);
                (col.adjoint() * p * col)[(0, 0)].re.clamp(0.0, 1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Evolve both doublet states along `path(s)`, s ∈ [0, 1], for total time T.
fn evolve_path<F: Fn(f64) -> FieldDirection>(
    path: F,
    t_total: f64,
    steps: usize,
) -> Result<(Matrix4x2<Complex64>, f64, f64, f64)> {
    let stepper = Stepper {
        ops: SpinOperators32::new(),
    };
    let start = path(0.0);
    let mut psi = eigenframe(&start, Gauge::North)?.doublet();
    let h = t_total / steps as f64;
    let ds = 1.0 / steps as f64;
    let hc = Complex64::new(h, 0.0);
    let every = (steps / CHECKPOINTS).max(1);
    let mut drift: f64 = 0.0;
    let mut max_leak: f64 = 0.0;
    for k in 0..steps {
        let s = k as f64 * ds;
        let (d0, dm, d1) = (path(s), path(s + 0.5 * ds), path(s + ds));
        let k1 = stepper.deriv(&d0, &psi);
        let k2 = stepper.deriv(&dm, &(psi + k1 * (hc * 0.5)));
        let k3 = stepper.deriv(&dm, &(psi + k2 * (hc * 0.5)));
        let k4 = stepper.deriv(&d1, &(psi + k3 * hc));
        let two = Complex64::new(2.0, 0.0);
        psi += (k1 + k2 * two + k3 * two + k4) * (hc / 6.0);
        for c in 0..2 {
            let n = psi.column(c).norm();
            drift = drift.max((n - 1.0).abs());
            psi.column_mut(c).unscale_mut(n);
        }
        if drift > NORM_TOL {
            return Err(Error::NormDrift { drift });
        }
        if (k + 1) % every == 0 || k + 1 == steps {
            max_leak = max_leak.max(stepper.leakage(&d1, &psi));
        }
    }
    let end = path(1.0);
    let leak = stepper.leakage(&end, &psi);
    Ok((psi, leak, max_leak.max(leak), drift))
}

fn finish(
    psi: Matrix4x2<Complex64>,
    end: &FieldDirection,
    t_total: f64,
    steps: usize,
    theta0: f64,
    eps: f64,
    stats: (f64, f64, f64),
) -> Result<SchrodingerRun> {
    let frame = eigenframe(end, Gauge::North)?.doublet();
    let m = frame.adjoint() * psi;
    let map_raw = [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]];
    let final_states = std::array::from_fn(|r| [psi[(r, 0)], psi[(r, 1)]]);
    Ok(SchrodingerRun {
        t_total,
        steps,
        theta0,
        eps,
        final_states,
        map_raw,
        map: GroupElement2::from_matrix(&map_raw),
        leakage: stats.0,
        max_leakage: stats.1,
        norm_drift: stats.2,
    })
}

fn check_time(t_total: f64, steps: usize) -> Result<()> {
    if !(t_total > 0.0 && t_total.is_finite()) {
        return Err(Error::Domain {
            what: "total evolution time T",
            value: t_total,
        });
    }
    if steps == 0 {
        return Err(Error::Domain {
            what: "Schrodinger steps",
            value: 0.0,
        });
    }
    Ok(())
}

/// Drive the field around `curve` in time `t_total` with `steps` RK4 steps.
pub fn evolve(curve: &NoisyCurve, t_total: f64, steps: usize) -> Result<SchrodingerRun> {
    check_time(t_total, steps)?;
    curve.check_chart(steps.min(100_000))?;
    let span = 2.0 * PI + 2.0;
    let (psi, leak, max_leak, drift) = evolve_path(|s| curve.direction(-1.0 + span * s), t_total, steps)?;
    finish(
        psi,
        &curve.direction(2.0 * PI + 1.0),
        t_total,
        steps,
        curve.theta0,
        curve.eps,
        (leak, max_leak, drift),
    )
}

/// Evolution in a static field; the map should be the identity.
pub fn evolve_frozen(dir: &FieldDirection, t_total: f64, steps: usize) -> Result<SchrodingerRun> {
    check_time(t_total, steps)?;
    let (psi, leak, max_leak, drift) = evolve_path(|_| *dir, t_total, steps)?;
    finish(psi, dir, t_total, steps, dir.theta, 0.0, (leak, max_leak, drift))
}

/// Evolution together with the Wilczek-Zee prediction it is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticComparison {
    pub run: SchrodingerRun,
    pub u_n: GroupElement2,
    /// Geodesic U(2) distance d(M, U_N).
    pub distance: f64,
    pub distance_su2: f64,
    pub phase_offset: f64,
}

pub fn compare_with_holonomy(curve: &NoisyCurve, t_total: f64, steps: usize) -> Result<AdiabaticComparison> {
    let run = evolve(curve, t_total, steps)?;
    let u_n = integrate_holonomy(curve, DEFAULT_MIDDLE_STEPS)?.u_n;
    Ok(AdiabaticComparison {
        distance: run.distance_to(&u_n),
        distance_su2: run.distance_su2_to(&u_n)?,
        phase_offset: run.phase_offset(&u_n),
        u_n,
        run,
    })
}

/// One row of a leakage scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageRow {
    /// Mode index; `None` for the noise-free baseline.
    pub m: Option<u32>,
    pub leakage: f64,
    pub max_leakage: f64,
}

/// Leakage against mode index for θ_m = σ(1 + i), plus a noise-free first row.
pub fn leakage_spectrum_scan(
    modes: &[u32],
    sigma: f64,
    theta0: f64,
    eps: f64,
    t_total: f64,
    steps: usize,
) -> Result<Vec<LeakageRow>> {
    let base = evolve(&NoisyCurve::unperturbed(theta0)?, t_total, steps)?;
    let mut rows = vec![LeakageRow {
        m: None,
        leakage: base.leakage,
        max_leakage: base.max_leakage,
    }];
    for &m in modes {
        let r = NoiseRealization::single(m, Complex64::new(sigma, sigma));
        let run = evolve(&NoisyCurve::new(theta0, eps, r)?, t_total, steps)?;
        rows.push(LeakageRow {
            m: Some(m),
            leakage: run.leakage,
            max_leakage: run.max_leakage,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomy::u0;

    #[test]
    fn frozen_field_is_identity() {
        let dir = FieldDirection::new(1.1, 0.7).unwrap();
        let run = evolve_frozen(&dir, 50.0, default_steps(50.0)).unwrap();
        assert!(run.distance_to(&GroupElement2::IDENTITY) < 1e-8);
        assert!(run.max_leakage < 1e-10);
        assert!(run.norm_drift < NORM_TOL);
    }

    #[test]
    fn slow_unperturbed_loop_gives_u0() {
        let th = PI / 3.0;
        let curve = NoisyCurve::unperturbed(th).unwrap();
        let run = evolve(&curve, DEFAULT_T, default_steps(DEFAULT_T)).unwrap();
        let d = run.distance_to(&u0(th));
        assert!(d < 1e-2, "{d}");
        assert!(run.max_leakage < 1e-3);
        assert!((0.0..=1.0).contains(&run.leakage));
    }

    #[test]
    fn conjugation_invariance() {
        let th = 0.9;
        let curve = NoisyCurve::unperturbed(th).unwrap();
        let run = evolve(&curve, 200.0, default_steps(200.0)).unwrap();
        let target = u0(th);
        let v = GroupElement2::from_quaternion(0.6, [0.0, 0.48, 0.64]).with_phase(0.3);
        let d0 = run.distance_to(&target);
        let d1 = distance_geodesic(&(v * run.map * v.adjoint()), &(v * target * v.adjoint()));
        assert!((d0 - d1).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_time() {
        let curve = NoisyCurve::unperturbed(1.0).unwrap();
        assert!(evolve(&curve, 0.0, 10).is_err());
        assert!(evolve(&curve, 10.0, 0).is_err());
    }

    #[test]
    fn scan_baseline_row() {
        let rows = leakage_spectrum_scan(&[1, 4], 1.0, 1.0, 1e-3, 200.0, default_steps(200.0)).unwrap();
        let base = evolve(&NoisyCurve::unperturbed(1.0).unwrap(), 200.0, default_steps(200.0)).unwrap();
        assert_eq!(rows[0].m, None);
        assert_eq!(rows[0].leakage, base.leakage);
        assert_eq!(rows.len(), 3);
    }
}
