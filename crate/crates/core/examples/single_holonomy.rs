//! One noisy loop: exact holonomy against the noise-free U₀ and the first-order Λ.

use std::f64::consts::PI;

use nqr_holonomy::holonomy::{integrate_holonomy, lambda_perturbative, omega, u0, DEFAULT_MIDDLE_STEPS};
use nqr_holonomy::noise::{sample, substream, NoiseSpec};
use nqr_holonomy::su2::distance_su2;
use nqr_holonomy::NoisyCurve;

fn main() -> nqr_holonomy::Result<()> {
    let theta0 = PI / 3.0;
    let eps = 1e-3;
    let spec = NoiseSpec::from_modes([(0, 1.0), (1, 1.0), (2, 1.0), (3, 0.5)]);
    let r = sample(&spec, &mut substream(1, 0))?;

    let clean = integrate_holonomy(&NoisyCurve::unperturbed(theta0)?, DEFAULT_MIDDLE_STEPS)?;
    println!("Omega = {:.6}", omega(theta0));
    println!("noise-free: d(U, U0) = {:.2e}", distance_su2(&clean.u_n, &u0(theta0))?);

    let h = integrate_holonomy(&NoisyCurve::new(theta0, eps, r.clone())?, DEFAULT_MIDDLE_STEPS)?;
    let pert = lambda_perturbative(theta0, &r);
    println!("U_N = {:?}", h.u_n);
    println!("d(U_N, U0)   = {:.6e}", distance_su2(&h.u_n, &u0(theta0))?);
    println!("Lambda exact = {:?}", h.lambda.v);
    println!("Lambda pert  = {:?}", pert.v);
    println!("|difference| = {:.3e} (first order in eps)", h.lambda.try_sub(&pert)?.norm());
    println!("unitarity drift {:.1e}", h.unitarity_drift);
    Ok(())
}
