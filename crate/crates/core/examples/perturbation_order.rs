//! Residuals of the first-order Λ and the second-order Dyson series as ε shrinks.

use std::f64::consts::PI;

use nqr_holonomy::lab::experiments::convergence_residuals;
use nqr_holonomy::noise::{sample, substream, NoiseSpec};
use nqr_holonomy::stats::log_log_slope;

fn main() -> nqr_holonomy::Result<()> {
    let spec = NoiseSpec::from_modes([(1, 1.0), (2, 1.0), (3, 1.0)]);
    let eps = [8e-3, 4e-3, 2e-3, 1e-3];
    for seed in 0..4 {
        let r = sample(&spec, &mut substream(3, seed))?;
        let res = convergence_residuals(PI / 3.0, &r, &eps, 2000)?;
        let (r1, r2): (Vec<f64>, Vec<f64>) = res.into_iter().unzip();
        println!(
            "realization {seed}: lambda residual {:?} slope {:.3}; dyson-2 {:?} slope {:.3}",
            r1.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>(),
            log_log_slope(&eps, &r1),
            r2.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>(),
            log_log_slope(&eps, &r2),
        );
    }
    Ok(())
}
