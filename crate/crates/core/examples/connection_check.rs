//! Finite-difference Wilczek-Zee connection of the ±1/2 doublet against the
//! closed forms in the three gauges.

use std::f64::consts::PI;

use nqr_holonomy::nqr::{
    connection_closed_form, connection_numeric, connection_richardson, gauge_transform, FieldDirection, Gauge,
    GaugeFactor, DEFAULT_FD_STEP,
};

fn main() -> nqr_holonomy::Result<()> {
    let dir = FieldDirection::new(PI / 3.0, 0.9)?;
    println!("direction theta = {:.4}, phi = {:.4}", dir.theta, dir.phi);
    for gauge in [Gauge::North, Gauge::South, Gauge::Equator] {
        let exact = connection_closed_form(&dir, gauge)?;
        let central = connection_numeric(&dir, gauge, DEFAULT_FD_STEP)?;
        let rich = connection_richardson(&dir, gauge, 1e-3)?;
        println!(
            "{gauge:?}: A_theta = {:?}, A_phi = {:?}",
            exact.a_theta.v.map(|x| (x * 1e9).round() / 1e9),
            exact.a_phi.v.map(|x| (x * 1e9).round() / 1e9)
        );
        println!(
            "    central diff error {:.2e}, Richardson error {:.2e}, ±3/2 off-diagonal {:.2e}, doublet coupling {:.3}",
            central.max_abs_diff(&exact),
            rich.doublet_value(&dir).max_abs_diff(&exact),
            rich.outer_offdiagonal(),
            rich.interdoublet_coupling()
        );
    }

    let moved = gauge_transform(&connection_closed_form(&dir, Gauge::North)?, GaugeFactor::Rho2)?;
    let target = connection_closed_form(&dir, Gauge::Equator)?;
    println!("rho2 maps A_N to A_E to {:.2e}", moved.max_abs_diff(&target));
    Ok(())
}
