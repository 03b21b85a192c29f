//! Seeded Fourier synthesis of θ(Φ) and its autocorrelation.

use nqr_holonomy::noise::{autocorrelation_empirical, autocorrelation_theory, sample, substream, DecayLaw, NoiseSpec};

fn main() -> nqr_holonomy::Result<()> {
    let spec = NoiseSpec::from_decay(DecayLaw {
        amplitude: 1.0,
        alpha: 1.0,
        cutoff: 30,
        sigma0: Some(0.5),
    });

    // realization i of a seed is always the same, whatever else was drawn before
    let r = sample(&spec, &mut substream(2024, 0))?;
    println!("theta0 = {:.6}, theta_1 = {:.6}", r.theta0, r.coefficient(1));
    for k in 0..8 {
        let phi = k as f64 * std::f64::consts::PI / 4.0;
        println!("theta({phi:.3}) = {:+.6}", r.evaluate(phi));
    }

    let mut rng = substream(2024, 1);
    for delta in [0.0, 0.5, 1.0, 2.0, 3.0] {
        let est = autocorrelation_empirical(&spec, delta, 4000, &mut rng)?;
        let theory = autocorrelation_theory(&spec, delta)?;
        println!(
            "R({delta:.1}): sampled {:.4} ± {:.4}, theory {:.4}",
            est.mean, est.stderr, theory
        );
    }
    Ok(())
}
