//! Poincaré map of a singular oscillator and of a tilted system: unit-circle spectrum and
//! the nullities it predicts.
//!
//! `cargo run --release --example poincare_spectrum`

use std::f64::consts::PI;

use morse_sturm_index::{generators, Analysis, CirclePoint, Settings};

fn main() -> morse_sturm_index::Result<()> {
    for sys in [generators::oscillator(&[9.0 * PI * PI])?, generators::random_tilted(0, 2)?] {
        let a = Analysis::new(sys, Settings::default())?;
        println!("{} (singular: {})", a.system.label(), a.is_singular());
        for z in &a.poincare.eigenvalues {
            println!("  eigenvalue {:+.6} {:+.6}i  |z| = {:.6}", z.re, z.im, z.norm());
        }
        for s in &a.poincare.unit_spectrum {
            let rho = CirclePoint::new(s.theta);
            println!(
                "  theta {:.4}: algebraic {}, geometric {}, nu_0 = {}, nu_* = {}",
                s.theta,
                s.algebraic,
                s.geometric,
                a.nullity_zero(rho, 1)?.dim,
                a.nullity_star(rho, 1)?.dim
            );
        }
        println!("  nu_*(1, N) for N = 1..6: {:?}", (1..=6).map(|n| a.nullity_star(CirclePoint::ONE, n).map(|k| k.dim)).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(())
}
