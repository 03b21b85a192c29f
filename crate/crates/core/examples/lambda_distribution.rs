//! Sampled Λ for single modes against the predicted gaussian law.

use std::f64::consts::PI;

use nqr_holonomy::analytics::{distribution_params, sigma_bar, ModeDistribution};
use nqr_holonomy::lab::{run_experiment, ExperimentConfig};
use nqr_holonomy::noise::NoiseSpec;

fn main() {
    let cfg = ExperimentConfig::from_json(
        r#"{"experiment": "lambda-dist", "modes": [0, 1, 2, 5], "realizations": 4000, "seed": 7,
            "theta0": [1.0471975511965976]}"#,
    )
    .expect("config");
    let out = run_experiment(&cfg).map_err(|f| f.error).expect("run");
    let s = &out.tables[1];
    let col = |name: &str| s.column(name).unwrap();
    let (m, a1, a2, p1, p2, t3, off) = (
        col("m"),
        col("axis_1"),
        col("axis_2"),
        col("pred_axis_1"),
        col("pred_axis_2"),
        col("max_abs_t3"),
        col("max_offline"),
    );
    for i in 0..m.len() {
        println!(
            "m = {}: axes {:.4} {:.4} (predicted {:.4} {:.4}), max |L3| {:.1e}, off-line {:.1e}",
            m[i], a1[i], a2[i], p1[i], p2[i], t3[i], off[i]
        );
    }

    let th = PI / 3.0;
    println!("sigma_bar_2 at pi/3 = {:.5}", sigma_bar(2, 1.0, th));
    if let ModeDistribution::Line { direction, std } = ModeDistribution::for_mode(0, 1.0, th) {
        println!("m = 0 support: direction {:?}, std {:.5}", direction.v, std);
    }
    let p = distribution_params(&NoiseSpec::from_modes([(0, 1.0), (1, 1.0), (2, 1.0)]), th).unwrap();
    println!("mixed spectrum: {:?}, second moment {:.5}", p, p.second_moment());
}
