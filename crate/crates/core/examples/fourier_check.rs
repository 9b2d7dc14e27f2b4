//! Index of an iterate against the sum over roots of unity on the base system.
//!
//! `cargo run --release --example fourier_check`

use std::f64::consts::PI;

use morse_sturm_index::bott::fourier_check;
use morse_sturm_index::{generators, Analysis, Settings};

fn main() -> morse_sturm_index::Result<()> {
    let systems = [generators::oscillator(&[9.0 * PI * PI])?, generators::random_tilted(2, 3)?];
    for sys in systems {
        let a = Analysis::new(sys, Settings::default())?;
        for n in 2..=4 {
            let f = fourier_check(&a, n, 64 * n)?;
            println!("{} N={n}  zero: {}  star: {}", a.system.label(), f.summary_zero(), f.summary_star());
        }
    }
    Ok(())
}
