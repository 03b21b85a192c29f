//! Data behind figures 1 and 3 to 8, computed from the closed forms.
//!
//! Figures that plot quantities "per unit σ_m" use the unit r.m.s. amplitude
//! ⟨|θ_m|²⟩ = 1, i.e. per-component σ = 1/√2 for m ≥ 1 and σ₀ = 1.

use std::f64::consts::PI;

use nalgebra::Matrix3;

use super::table::{Cell, ResultTable};
use crate::analytics::{distribution_params, drms_mode, f2_avg, f2_avg_at, n_vector, sigma_bar};
use crate::error::{Error, Result};
use crate::holonomy::{omega, NoisyCurve};
use crate::noise::{sample, substream, NoiseSpec};
use crate::su2::{frame_rotation, AlgebraVector, Frame};

pub const FIGURES: [u32; 7] = [1, 3, 4, 5, 6, 7, 8];
/// Seed of the representative realization of figure 1.
pub const FIG1_SEED: u64 = 1;
pub const FIG1_EPS: f64 = 0.05;
const GRID: usize = 181;

fn theta_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| PI * k as f64 / (n - 1) as f64)
}

fn unit_rms_spec(m: u32) -> NoiseSpec {
    NoiseSpec::single(m, if m == 0 { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 })
}

pub fn figure_tables(id: u32) -> Result<Vec<ResultTable>> {
    match id {
        1 => fig1(),
        3 => Ok(vec![fig3()]),
        4 => fig4(),
        5 => fig5(),
        6 => Ok(vec![fig6()?]),
        7 => Ok(vec![fig7()?]),
        8 => fig8(),
        _ => Err(Error::config(format!("no data for figure {id}; expected one of {FIGURES:?}"))),
    }
}

/// Representative realization under the decaying spectrum and its curve on the sphere.
fn fig1() -> Result<Vec<ResultTable>> {
    let r = sample(&NoiseSpec::figure_one(), &mut substream(FIG1_SEED, 0))?;
    let curve = NoisyCurve::new(PI / 3.0, FIG1_EPS, r)?;
    let mut t = ResultTable::new("fig1", &["segment", "t", "phi", "theta_fn", "x", "y", "z"]);
    let mut push = |seg: &str, tt: f64, dir: crate::nqr::FieldDirection, f: f64| {
        let [x, y, z] = dir.unit_vector();
        t.push(vec![seg.into(), tt.into(), dir.phi.into(), f.into(), x.into(), y.into(), z.into()]);
    };
    let n = 1001;
    for k in 0..n {
        let tt = 2.0 * PI * k as f64 / (n - 1) as f64;
        push("circle", tt, curve.direction(tt), curve.realization.evaluate(tt));
        let flat = crate::nqr::FieldDirection { theta: PI / 3.0, phi: tt };
        push("unperturbed", tt, flat, 0.0);
    }
    let f0 = curve.realization.evaluate(0.0);
    for k in 0..=20 {
        let s = k as f64 / 20.0;
        push("lead_in", s - 1.0, curve.direction(s - 1.0), f0);
        push("lead_out", 2.0 * PI + s, curve.direction(2.0 * PI + s), f0);
    }
    Ok(vec![t])
}

/// d_rms^(m)(Θ₀)/(εσ_m) for m = 0..7.
fn fig3() -> ResultTable {
    let mut t = ResultTable::new("fig3", &["theta0", "m", "drms_analytic_over_eps_sigma"]);
    for m in 0..=7u32 {
        for th in theta_grid(GRID) {
            t.push(vec![th.into(), m.into(), drms_mode(m, 1.0, th, 1.0).into()]);
        }
    }
    t
}

/// r.m.s. |F̃| against ω, and along the stripe 1 ≤ Ω ≤ 2 against Θ₀.
fn fig4() -> Result<Vec<ResultTable>> {
    let mut by_omega = ResultTable::new("omega", &["m", "omega", "f_rms", "in_stripe"]);
    let mut by_theta = ResultTable::new("theta0", &["m", "theta0", "omega", "f_rms"]);
    for m in 0..=3u32 {
        let spec = unit_rms_spec(m);
        for k in 0..=400 {
            let w = 4.0 * k as f64 / 400.0;
            let stripe = (1.0..=2.0).contains(&w) as i64;
            by_omega.push(vec![m.into(), w.into(), f2_avg_at(&spec, w)?.sqrt().into(), stripe.into()]);
        }
        for th in theta_grid(GRID) {
            by_theta.push(vec![m.into(), th.into(), omega(th).into(), f2_avg(&spec, th)?.sqrt().into()]);
        }
    }
    Ok(vec![by_omega, by_theta])
}

/// Θ₀ on a fine grid maximizing `f`.
fn argmax(f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let mut best = (0.0, f64::NEG_INFINITY);
    for th in theta_grid(2001) {
        let v = f(th)?;
        if v > best.1 {
            best = (th, v);
        }
    }
    Ok(best)
}

/// Equiprobability ellipses of single-mode Λ in the 1′-2′ plane at the Θ₀
/// maximizing σ̄_m, and σ̄_m against Θ₀; ⟨|θ_m|²⟩ = 1/m.
fn fig5() -> Result<Vec<ResultTable>> {
    let mut contours = ResultTable::new("contours", &["m", "theta0", "level", "point", "lam_p1", "lam_p2"]);
    let mut sigmas = ResultTable::new("sigma_bar", &["m", "theta0", "sigma_bar", "is_plotted"]);
    for m in 1..=3u32 {
        let sigma = (0.5 / m as f64).sqrt();
        let (th_star, sb) = argmax(|th| Ok(sigma_bar(m, sigma, th)))?;
        for th in theta_grid(GRID) {
            sigmas.push(vec![m.into(), th.into(), sigma_bar(m, sigma, th).into(), 0i64.into()]);
        }
        sigmas.push(vec![m.into(), th_star.into(), sb.into(), 1i64.into()]);
        let to_primed = frame_rotation(th_star, Frame::Tilded, Frame::Primed)?;
        let (a, b) = (sb / m as f64, sb / omega(th_star));
        for level in 1..=3u32 {
            for p in 0..=180usize {
                let phi = 2.0 * PI * p as f64 / 180.0;
                let l = level as f64;
                let v = AlgebraVector::new([l * a * phi.cos(), l * b * phi.sin(), 0.0], Frame::Tilded);
                let w = to_primed.apply(&v)?;
                contours.push(vec![m.into(), th_star.into(), level.into(), p.into(), w.v[0].into(), w.v[1].into()]);
            }
        }
    }
    Ok(vec![contours, sigmas])
}

/// Rotation angle and angle-axis path of R(Θ₀), the base-to-tilded map.
fn fig6() -> Result<ResultTable> {
    let mut t = ResultTable::new("fig6", &["theta0", "alpha", "rv_x", "rv_y", "rv_z"]);
    for th in theta_grid(GRID) {
        let rv = frame_rotation(th, Frame::Base, Frame::Tilded)?.angle_axis();
        let alpha = (rv[0] * rv[0] + rv[1] * rv[1] + rv[2] * rv[2]).sqrt();
        t.push(vec![th.into(), alpha.into(), rv[0].into(), rv[1].into(), rv[2].into()]);
    }
    Ok(t)
}

/// n(Θ₀) in the base frame.
fn fig7() -> Result<ResultTable> {
    let mut t = ResultTable::new("fig7", &["theta0", "n1", "n2", "n3"]);
    for th in theta_grid(GRID) {
        let n = frame_rotation(th, Frame::Tilded, Frame::Base)?.apply(&n_vector(th))?;
        t.push(vec![th.into(), n.v[0].into(), n.v[1].into(), n.v[2].into()]);
    }
    Ok(t)
}

fn semiaxes(th: f64, spec: &NoiseSpec) -> Result<([f64; 3], Matrix3<f64>)> {
    let c = distribution_params(spec, th)?.covariance();
    let eig = Matrix3::from_fn(|i, j| c[i][j]).symmetric_eigen();
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let axes = idx.map(|k| eig.eigenvalues[k].max(0.0).sqrt());
    let vecs = Matrix3::from_columns(&idx.map(|k| eig.eigenvectors.column(k).into_owned()));
    Ok((axes, vecs))
}

/// Semiaxes of the general gaussian against Θ₀ and its level surfaces at the
/// Θ₀ maximizing their product, for the decaying spectrum of figure 1.
fn fig8() -> Result<Vec<ResultTable>> {
    let spec = NoiseSpec::figure_one();
    let mut axes_t = ResultTable::new(
        "semiaxes",
        &["theta0", "axis_1", "axis_2", "axis_3", "product", "alpha1", "alpha2", "sigma_bar0"],
    );
    let mut best = (0.0, f64::NEG_INFINITY);
    // the product vanishes at the poles and the equator
    for th in theta_grid(GRID).filter(|t| *t > 0.0 && *t < PI) {
        let (ax, _) = semiaxes(th, &spec)?;
        let p = distribution_params(&spec, th)?;
        let prod = ax[0] * ax[1] * ax[2];
        if prod > best.1 {
            best = (th, prod);
        }
        let row: Vec<Cell> = vec![
            th.into(),
            ax[0].into(),
            ax[1].into(),
            ax[2].into(),
            prod.into(),
            p.alpha1.into(),
            p.alpha2.into(),
            p.sigma_bar0.into(),
        ];
        axes_t.push(row);
    }
    let (th_star, _) = best;
    let (ax, vecs) = semiaxes(th_star, &spec)?;
    let mut surf = ResultTable::new("surface", &["theta0", "level", "i", "j", "lam_t1", "lam_t2", "lam_t3"]);
    let (nu, nv) = (24usize, 48usize);
    for level in 1..=2u32 {
        for i in 0..=nu {
            let polar = PI * i as f64 / nu as f64;
            for j in 0..=nv {
                let az = 2.0 * PI * j as f64 / nv as f64;
                let u = [polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos()];
                let local = nalgebra::Vector3::from_fn(|k, _| level as f64 * ax[k] * u[k]);
                let p = vecs * local;
                surf.push(vec![th_star.into(), level.into(), i.into(), j.into(), p[0].into(), p[1].into(), p[2].into()]);
            }
        }
    }
    Ok(vec![axes_t, surf])
}
