//! Galerkin index of the oscillator `V'' = -k V` against the Fourier count.
//!
//! `cargo run --release --example oscillator_index`

use std::f64::consts::PI;

use morse_sturm_index::galerkin::{lambda_with_refinement, ConstraintKind};
use morse_sturm_index::{generators, Analysis, CirclePoint, Settings};

fn main() -> morse_sturm_index::Result<()> {
    let ks = [9.0 * PI * PI];
    let a = Analysis::new(generators::oscillator(&ks)?, Settings::default())?;
    println!("{:>6} {:>8} {:>7} {:>9} {}", "theta", "galerkin", "oracle", "nullity", "meshes");
    for j in 0..8 {
        let theta = j as f64 / 8.0;
        let r = lambda_with_refinement(&a, 1, CirclePoint::new(theta), ConstraintKind::Zero, 64)?;
        println!(
            "{theta:>6.3} {:>8} {:>7} {:>9} {:?}",
            r.lambda,
            generators::oracle_lambda_oscillator(&ks, theta),
            r.ode_nullity,
            r.meshes
        );
    }
    Ok(())
}
