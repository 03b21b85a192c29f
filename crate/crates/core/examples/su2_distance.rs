//! U(2) elements as phased quaternions, and the three distances between them.

use std::f64::consts::PI;

use nqr_holonomy::su2::{distance_geodesic, distance_su2, distance_u2, exp_map, log_map, AlgebraVector, GroupElement2};

fn main() -> nqr_holonomy::Result<()> {
    let axis = [0.0, 0.6, 0.8];
    let u = exp_map(&AlgebraVector::base(axis.map(|c| c * 0.7)));
    let v = exp_map(&AlgebraVector::base([0.3, -0.2, 0.1]));
    println!("u = {:?}", u);
    println!("log u = {:?} (angle {:.6})", log_map(&u)?.v, log_map(&u)?.norm());

    println!("d_su2(u, v)      = {:.12}", distance_su2(&u, &v)?);
    println!("d_geodesic(u, v) = {:.12}", distance_geodesic(&u, &v));

    // bi-invariance: shifting both arguments by the same element changes nothing
    let g = exp_map(&AlgebraVector::base([1.0, 2.0, -0.5]));
    println!("d_su2(gu, gv)    = {:.12}", distance_su2(&(g * u), &(g * v))?);
    println!("d_su2(ug, vg)    = {:.12}", distance_su2(&(u * g), &(v * g))?);

    // the U(2) extension sees the global phase: −1 times a rotation by π is the identity
    for (theta, alpha) in [(PI, PI), (PI / 2.0, 0.0), (PI / 2.0, 1.3), (0.4, 0.4)] {
        let w = exp_map(&AlgebraVector::base(axis.map(|c| c * theta))).with_phase(alpha);
        println!(
            "theta = {theta:.4}, alpha = {alpha:.4}: d_u2 = {:.6}, d_geodesic = {:.6}",
            distance_u2(&w, &GroupElement2::IDENTITY),
            distance_geodesic(&w, &GroupElement2::IDENTITY)
        );
    }
    Ok(())
}
