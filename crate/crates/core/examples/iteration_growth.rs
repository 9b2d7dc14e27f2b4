//! Index of the iterates from the profile, the linear growth rate and the certificate
//! `mu(N + s) - mu(N) >= alpha s + beta`.
//!
//! `cargo run --release --example iteration_growth`

use std::f64::consts::PI;

use morse_sturm_index::bott::{iterate_indices, scan_circle};
use morse_sturm_index::{generators, Analysis, Settings};

fn main() -> morse_sturm_index::Result<()> {
    let a = Analysis::new(generators::oscillator(&[9.0 * PI * PI, 30.0])?, Settings::default())?;
    let p = scan_circle(&a, 64)?;
    let it = iterate_indices(&a, &p, 16, 3, 64)?;
    print!("{}", it.to_csv()?);
    let g = &it.growth;
    println!("mean index {}  alpha {}  beta {}  a = {:?}", g.mean_index, g.alpha, g.beta, g.a);
    println!("epsilon invariant on N <= 3: {}", it.epsilon_invariant);
    println!("certificate violations (s <= 8): {:?}", it.certificate_violations(8));
    Ok(())
}
