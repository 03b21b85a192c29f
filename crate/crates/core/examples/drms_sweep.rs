//! Monte Carlo d_rms against the closed form for a few single modes.
//!
//! `cargo run --release --example drms_sweep [realizations]`

use nqr_holonomy::lab::{run_experiment, ExperimentConfig};

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(300);
    let cfg = ExperimentConfig::from_json(&format!(
        r#"{{"experiment": "drms-sweep", "modes": [0, 1, 2, 3], "eps": 1e-3, "realizations": {n},
            "seed": 20240601, "theta0": {{"points": 7, "margin": 0.01}}}}"#
    ))
    .expect("config");
    let out = match run_experiment(&cfg) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("run failed: {}", f.error);
            std::process::exit(3);
        }
    };
    let t = &out.tables[0];
    let analytic = t.column("drms_analytic").unwrap();
    let bound = out.tables[1].column("bias_bound").unwrap();
    println!("{:>8} {:>3} {:>12} {:>12} {:>10} {:>10}", "theta0", "m", "analytic", "mc", "stderr", "bias");
    let (th, m, mc, se) = (
        t.column("theta0").unwrap(),
        t.column("m").unwrap(),
        t.column("drms_mc").unwrap(),
        t.column("mc_stderr").unwrap(),
    );
    for i in 0..th.len() {
        println!(
            "{:8.4} {:3} {:12.4e} {:12.4e} {:10.2e} {:10.2e}",
            th[i], m[i], analytic[i], mc[i], se[i], bound[i]
        );
    }
    println!("{}", out.summary);
}
