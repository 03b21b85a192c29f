//! Full Schrödinger evolution of the spin-3/2 system around a slow noisy loop,
//! compared with the holonomy from the connection.
//!
//! `cargo run --release --example adiabatic_oracle`

use std::f64::consts::PI;

use nqr_holonomy::adiabatic::{compare_with_holonomy, default_steps};
use nqr_holonomy::noise::{sample, substream, NoiseSpec};
use nqr_holonomy::NoisyCurve;

fn main() -> nqr_holonomy::Result<()> {
    let spec = NoiseSpec::from_modes((0..=7).map(|m| (m, 1.0)));
    let r = sample(&spec, &mut substream(5, 0))?;
    let curve = NoisyCurve::new(PI / 3.0, 1e-3, r)?;
    let mut last = None;
    for t in [250.0, 500.0, 1000.0, 2000.0] {
        let c = compare_with_holonomy(&curve, t, default_steps(t))?;
        let ratio = last.map_or(String::new(), |d: f64| format!(", ratio {:.3}", d / c.distance));
        println!(
            "T = {t:6}: d(M, U_N) = {:.3e} (SU(2) part {:.2e}), leakage {:.2e}{ratio}",
            c.distance, c.distance_su2, c.run.leakage
        );
        last = Some(c.distance);
    }
    Ok(())
}
