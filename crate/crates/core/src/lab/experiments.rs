//! The five experiment kinds. Each fills result tables row by row so that a
//! failure part-way leaves the finished rows available as a partial result.
//!
//! Realization i of noise series k always draws from `substream(seed, k·2³² + i)`,
//! so every Θ₀ of a sweep sees the same noise (common random numbers) and the
//! output does not depend on how rayon schedules the work.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, ExperimentKind};
use super::table::{Cell, ResultTable, CONVERGENCE_COLUMNS, DRMS_BIAS_COLUMNS, DRMS_COLUMNS, LAMBDA_COLUMNS};
use crate::adiabatic::{compare_with_holonomy, leakage_spectrum_scan};
use crate::analytics::{distribution_params, drms_spec, ModeDistribution};
use crate::error::{Error, Result};
use crate::holonomy::{
    dyson_terms, integrate_holonomy, lambda_perturbative, lambda_perturbative_tilded, omega,
    u0, w_dyson_with, NoisyCurve, DYSON_STEPS,
};
use crate::noise::{sample_resolved, substream, ModeSpec, NoiseRealization, NoiseSpec};
use crate::stats::{log_log_slope, rms_from_squares, Running};
use crate::su2::{distance_su2, frame_rotation, log_map, AlgebraVector, Frame};

/// Label used in the `m` column for a multi-mode spectrum.
pub const COMBINED: i64 = -1;

/// Tables and summary produced by a run.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub tables: Vec<ResultTable>,
    pub summary: Value,
}

/// A run that stopped on an error, with whatever it finished.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub partial: RunOutput,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> std::result::Result<RunOutput, RunFailure> {
    cfg.validate().map_err(|error| RunFailure {
        error,
        partial: RunOutput::default(),
    })?;
    let mut out = RunOutput::default();
    let res = match cfg.experiment {
        ExperimentKind::DrmsSweep => drms_sweep(cfg, &mut out),
        ExperimentKind::LambdaDist => lambda_dist(cfg, &mut out),
        ExperimentKind::Convergence => convergence(cfg, &mut out),
        ExperimentKind::Adiabatic => adiabatic(cfg, &mut out),
        ExperimentKind::HolonomySingle => holonomy_single(cfg, &mut out),
    };
    match res {
        Ok(()) => Ok(out),
        Err(error) => Err(RunFailure { error, partial: out }),
    }
}

/// A noise model swept as one unit: a single mode, or the full spectrum.
#[derive(Debug, Clone)]
struct Series {
    label: i64,
    sigma: f64,
    spec: NoiseSpec,
    modes: Vec<ModeSpec>,
}

fn series_list(cfg: &ExperimentConfig) -> Result<Vec<Series>> {
    let mut out = Vec::new();
    for &m in &cfg.modes {
        let spec = NoiseSpec::single(m, cfg.sigma);
        out.push(Series {
            label: m as i64,
            sigma: cfg.sigma,
            modes: spec.resolved()?,
            spec,
        });
    }
    if let Some(spec) = &cfg.noise {
        out.push(Series {
            label: COMBINED,
            sigma: f64::NAN,
            modes: spec.resolved()?,
            spec: spec.clone(),
        });
    }
    Ok(out)
}

fn stream(series: usize, i: usize) -> u64 {
    ((series as u64) << 32) | i as u64
}

fn realization(cfg: &ExperimentConfig, series: usize, modes: &[ModeSpec], i: usize) -> NoiseRealization {
    sample_resolved(modes, &mut substream(cfg.seed, stream(series, i)))
}

/// Also writes a `bias` table with ε·rms‖Λ − Λ_pert‖ per point. By Minkowski's
/// inequality this bounds how far the sample d_rms can sit from the sample rms of
/// the first-order prediction, i.e. the nonlinearity bias on top of sampling error.
fn drms_sweep(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    out.tables.push(ResultTable::new("drms", &DRMS_COLUMNS));
    out.tables.push(ResultTable::new("bias", &DRMS_BIAS_COLUMNS));
    let mut summary = Vec::new();
    for (k, s) in series_list(cfg)?.iter().enumerate() {
        let mut z_scores = Vec::new();
        let mut within_biased = 0;
        for &th in &cfg.theta0.values() {
            let target = u0(th);
            let pairs: Vec<(f64, f64)> = (0..cfg.realizations)
                .into_par_iter()
                .map(|i| -> Result<(f64, f64)> {
                    let r = realization(cfg, k, &s.modes, i);
                    let pert = lambda_perturbative(th, &r);
                    let curve = NoisyCurve::new(th, cfg.eps, r)?;
                    let h = integrate_holonomy(&curve, cfg.middle_steps)?;
                    let resid = h.lambda.try_sub(&pert)?.norm();
                    Ok((distance_su2(&h.u_n, &target)?.powi(2), resid * resid))
                })
                .collect::<Result<_>>()?;
            let est = rms_from_squares(&pairs.iter().map(|p| p.0).collect::<Running>());
            let resid_rms = (pairs.iter().map(|p| p.1).sum::<f64>() / pairs.len().max(1) as f64).sqrt();
            let bias = cfg.eps * resid_rms;
            let analytic = drms_spec(&s.spec, th, cfg.eps)?;
            z_scores.push(est.z_score(analytic));
            if (est.mean - analytic).abs() <= 3.0 * est.stderr + bias {
                within_biased += 1;
            }
            out.tables[0].push(vec![
                th.into(),
                s.label.into(),
                cfg.eps.into(),
                s.sigma.into(),
                analytic.into(),
                est.mean.into(),
                est.stderr.into(),
                est.n.into(),
            ]);
            out.tables[1].push(vec![th.into(), s.label.into(), cfg.eps.into(), resid_rms.into(), bias.into()]);
        }
        let within = z_scores.iter().filter(|z| **z <= 3.0).count();
        summary.push(json!({
            "m": s.label,
            "points": z_scores.len(),
            "within_3se": within,
            "within_3se_plus_bias": within_biased,
            "max_z": z_scores.iter().copied().fold(0.0, f64::max),
        }));
    }
    out.summary = json!({ "series": summary });
    Ok(())
}

fn to_tilded(theta0: f64, v: &AlgebraVector) -> Result<AlgebraVector> {
    frame_rotation(theta0, v.frame, Frame::Tilded)?.apply(v)
}

fn covariance(samples: &[[f64; 3]]) -> ([f64; 3], Matrix3<f64>) {
    let n = samples.len() as f64;
    let mean: [f64; 3] = std::array::from_fn(|k| samples.iter().map(|s| s[k]).sum::<f64>() / n);
    let mut c = Matrix3::zeros();
    for s in samples {
        for i in 0..3 {
            for j in 0..3 {
                c[(i, j)] += (s[i] - mean[i]) * (s[j] - mean[j]);
            }
        }
    }
    (mean, c / (n - 1.0).max(1.0))
}

/// Square roots of the covariance eigenvalues, largest first.
pub fn principal_axes(c: &Matrix3<f64>) -> [f64; 3] {
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().map(|v| v.max(0.0).sqrt()).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    [ev[0], ev[1], ev[2]]
}

fn predicted_axes(s: &Series, theta0: f64) -> Result<[f64; 3]> {
    if let [mode] = s.modes.as_slice() {
        if let ModeDistribution::Plane { semiaxes } = ModeDistribution::for_mode(mode.m, mode.sigma, theta0) {
            let (a, b) = (semiaxes[0].max(semiaxes[1]), semiaxes[0].min(semiaxes[1]));
            return Ok([a, b, 0.0]);
        }
    }
    let c = distribution_params(&s.spec, theta0)?.covariance();
    Ok(principal_axes(&Matrix3::from_fn(|i, j| c[i][j])))
}

const LAMBDA_SUMMARY_COLUMNS: [&str; 15] = [
    "theta0",
    "m",
    "n",
    "mean_t1",
    "mean_t2",
    "mean_t3",
    "axis_1",
    "axis_2",
    "axis_3",
    "pred_axis_1",
    "pred_axis_2",
    "pred_axis_3",
    "max_abs_t3",
    "max_offline",
    "degenerate_logs",
];

fn lambda_dist(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    out.tables.push(ResultTable::new("samples", &LAMBDA_COLUMNS));
    out.tables.push(ResultTable::new("summary", &LAMBDA_SUMMARY_COLUMNS));
    if cfg.exact {
        out.tables.push(ResultTable::new("perturbative", &LAMBDA_COLUMNS));
    }
    let mut degenerate_total = 0usize;
    for (k, s) in series_list(cfg)?.iter().enumerate() {
        for &th in &cfg.theta0.values() {
            // (primary sample, perturbative sample); primary is None on a degenerate log
            let pairs: Vec<(Option<[f64; 3]>, [f64; 3])> = (0..cfg.realizations)
                .into_par_iter()
                .map(|i| -> Result<_> {
                    let r = realization(cfg, k, &s.modes, i);
                    let pert = lambda_perturbative_tilded(th, &r).v;
                    if !cfg.exact {
                        return Ok((Some(pert), pert));
                    }
                    let curve = NoisyCurve::new(th, cfg.eps, r)?;
                    match integrate_holonomy(&curve, cfg.middle_steps) {
                        Ok(h) => Ok((Some(to_tilded(th, &h.lambda)?.v), pert)),
                        Err(Error::DegenerateLog { .. }) => Ok((None, pert)),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<_>>()?;
            let mut primary = Vec::with_capacity(pairs.len());
            for (i, (p, q)) in pairs.iter().enumerate() {
                if let Some(p) = p {
                    out.tables[0].push(row_lambda(th, s.label, i, p));
                    primary.push(*p);
                }
                if cfg.exact {
                    out.tables[2].push(row_lambda(th, s.label, i, q));
                }
            }
            let degenerate = pairs.len() - primary.len();
            degenerate_total += degenerate;
            let (mean, cov) = covariance(&primary);
            let axes = principal_axes(&cov);
            let pred = predicted_axes(s, th)?;
            let max_t3 = primary.iter().map(|p| p[2].abs()).fold(0.0, f64::max);
            // distance from the m = 0 support line (0 for other series)
            let offline = match s.modes.as_slice() {
                [ModeSpec { m: 0, sigma }] => {
                    let line = ModeDistribution::for_mode(0, *sigma, th);
                    primary
                        .iter()
                        .map(|p| line.project(&AlgebraVector::new(*p, Frame::Tilded)).1)
                        .fold(0.0, f64::max)
                }
                _ => 0.0,
            };
            out.tables[1].push(vec![
                th.into(),
                s.label.into(),
                primary.len().into(),
                mean[0].into(),
                mean[1].into(),
                mean[2].into(),
                axes[0].into(),
                axes[1].into(),
                axes[2].into(),
                pred[0].into(),
                pred[1].into(),
                pred[2].into(),
                max_t3.into(),
                offline.into(),
                degenerate.into(),
            ]);
        }
    }
    out.summary = json!({
        "source": if cfg.exact { "exact" } else { "perturbative" },
        "degenerate_logs": degenerate_total,
    });
    Ok(())
}

fn row_lambda(th: f64, label: i64, i: usize, v: &[f64; 3]) -> Vec<Cell> {
    vec![th.into(), label.into(), i.into(), v[0].into(), v[1].into(), v[2].into()]
}

/// Residuals of one realization at the listed ε: `(‖Λ_exact − Λ_pert‖, d(W, W_dyson²))`.
///
/// The reference U₀ and e^{2πiA₀} are taken from the integrator's own
/// unperturbed loop, so its discretization error cancels in both residuals.
pub fn convergence_residuals(
    theta0: f64,
    r: &NoiseRealization,
    eps_list: &[f64],
    steps: usize,
) -> Result<Vec<(f64, f64)>> {
    let pert = lambda_perturbative(theta0, r);
    let terms = dyson_terms(theta0, r, DYSON_STEPS);
    let base = integrate_holonomy(&NoisyCurve::unperturbed(theta0)?, steps)?;
    eps_list
        .iter()
        .map(|&e| {
            let h = integrate_holonomy(&NoisyCurve::new(theta0, e, r.clone())?, steps)?;
            let lam = log_map(&(base.u_n.adjoint() * h.u_n))?.scale(1.0 / e);
            let w = base.u_circle.adjoint() * h.u_circle;
            let w2 = w_dyson_with(&terms, e, 2)?;
            Ok((lam.try_sub(&pert)?.norm(), log_map(&(w.adjoint() * w2))?.norm()))
        })
        .collect()
}

fn convergence(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    out.tables.push(ResultTable::new("convergence", &CONVERGENCE_COLUMNS));
    let modes = cfg.run_noise().resolved()?;
    let grid = cfg.theta0.values();
    let mut slopes1 = Vec::new();
    let mut slopes2 = Vec::new();
    for (b, &th) in grid.iter().enumerate() {
        let res: Vec<Vec<(f64, f64)>> = (0..cfg.realizations)
            .into_par_iter()
            .map(|i| convergence_residuals(th, &realization(cfg, 0, &modes, i), &cfg.eps_list, cfg.middle_steps))
            .collect::<Result<_>>()?;
        for (i, rows) in res.iter().enumerate() {
            let id = b * cfg.realizations + i;
            for (&e, &(r1, r2)) in cfg.eps_list.iter().zip(rows) {
                out.tables[0].push(vec![id.into(), e.into(), r1.into(), 1i64.into()]);
                out.tables[0].push(vec![id.into(), e.into(), r2.into(), 2i64.into()]);
            }
            let (r1, r2): (Vec<f64>, Vec<f64>) = rows.iter().copied().unzip();
            if r1.iter().all(|v| *v > 0.0) {
                slopes1.push(log_log_slope(&cfg.eps_list, &r1));
            }
            if r2.iter().all(|v| *v > 0.0) {
                slopes2.push(log_log_slope(&cfg.eps_list, &r2));
            }
        }
    }
    let stat = |v: &[f64]| {
        json!({
            "mean": v.iter().sum::<f64>() / v.len().max(1) as f64,
            "min": v.iter().copied().fold(f64::INFINITY, f64::min),
            "max": v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            "count": v.len(),
        })
    };
    out.summary = json!({
        "theta0_blocks": grid,
        "realizations_per_theta0": cfg.realizations,
        "slope_lambda": stat(&slopes1),
        "slope_dyson2": stat(&slopes2),
    });
    Ok(())
}

const ADIABATIC_COLUMNS: [&str; 10] = [
    "theta0",
    "eps",
    "t_total",
    "steps",
    "distance",
    "distance_su2",
    "phase_offset",
    "leakage",
    "max_leakage",
    "norm_drift",
];

fn adiabatic(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    out.tables.push(ResultTable::new("adiabatic", &ADIABATIC_COLUMNS));
    let a = &cfg.adiabatic;
    let modes = cfg.run_noise().resolved()?;
    let r = realization(cfg, 0, &modes, 0);
    let mut ratios = Vec::new();
    for &th in &cfg.theta0.values() {
        let curve = NoisyCurve::new(th, cfg.eps, r.clone())?;
        let runs: Vec<_> = a
            .t_total
            .par_iter()
            .map(|&t| compare_with_holonomy(&curve, t, (t / a.dt).ceil() as usize))
            .collect::<Result<_>>()?;
        for c in &runs {
            out.tables[0].push(vec![
                th.into(),
                cfg.eps.into(),
                c.run.t_total.into(),
                c.run.steps.into(),
                c.distance.into(),
                c.distance_su2.into(),
                c.phase_offset.into(),
                c.run.leakage.into(),
                c.run.max_leakage.into(),
                c.run.norm_drift.into(),
            ]);
        }
        for w in runs.windows(2) {
            ratios.push(json!({
                "theta0": th,
                "t": [w[0].run.t_total, w[1].run.t_total],
                "ratio": w[0].distance / w[1].distance,
            }));
        }
    }
    if !a.scan_modes.is_empty() {
        let mut scan = ResultTable::new("leakage_scan", &["theta0", "m", "eps", "t_total", "leakage", "max_leakage"]);
        let t = a.t_total[0];
        for &th in &cfg.theta0.values() {
            let rows = leakage_spectrum_scan(&a.scan_modes, a.scan_sigma, th, cfg.eps, t, (t / a.dt).ceil() as usize)?;
            for row in rows {
                // m = -1 marks the noise-free baseline in this table
                let m = row.m.map_or(-1, |m| m as i64);
                scan.push(vec![
                    th.into(),
                    m.into(),
                    cfg.eps.into(),
                    t.into(),
                    row.leakage.into(),
                    row.max_leakage.into(),
                ]);
            }
        }
        out.tables.push(scan);
    }
    out.summary = json!({ "ratios": ratios, "realization": r });
    Ok(())
}

const SINGLE_COLUMNS: [&str; 17] = [
    "theta0",
    "eps",
    "steps",
    "omega",
    "un_x0",
    "un_x1",
    "un_x2",
    "un_x3",
    "lam_1",
    "lam_2",
    "lam_3",
    "lam_pert_1",
    "lam_pert_2",
    "lam_pert_3",
    "d_u0",
    "residual",
    "unitarity_drift",
];

fn holonomy_single(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    out.tables.push(ResultTable::new("holonomy", &SINGLE_COLUMNS));
    let modes = cfg.run_noise().resolved()?;
    let r = realization(cfg, 0, &modes, 0);
    for &th in &cfg.theta0.values() {
        let curve = NoisyCurve::new(th, cfg.eps, r.clone())?;
        let h = integrate_holonomy(&curve, cfg.middle_steps)?;
        let pert = lambda_perturbative(th, &r);
        let u = h.u_n;
        out.tables[0].push(vec![
            th.into(),
            cfg.eps.into(),
            h.steps.into(),
            omega(th).into(),
            u.x0.into(),
            u.x[0].into(),
            u.x[1].into(),
            u.x[2].into(),
            h.lambda.v[0].into(),
            h.lambda.v[1].into(),
            h.lambda.v[2].into(),
            pert.v[0].into(),
            pert.v[1].into(),
            pert.v[2].into(),
            distance_su2(&u, &u0(th))?.into(),
            h.lambda.try_sub(&pert)?.norm().into(),
            h.unitarity_drift.into(),
        ]);
    }
    out.summary = json!({ "realization": r, "frame": "base", "two_pi": 2.0 * PI });
    Ok(())
}
