//! A boosted system with hyperbolic spatial part: the profile is constant and the index of
//! every iterate is `epsilon + N mu_0`.
//!
//! `cargo run --release --example classify_hyperbolic`

use morse_sturm_index::bott::{classify, scan_circle};
use morse_sturm_index::system::BoostProfile;
use morse_sturm_index::{generators, Analysis, Settings};

fn main() -> morse_sturm_index::Result<()> {
    let profile = BoostProfile { rate: 0.6, a0: 0.0, cos: vec![0.1], sin: vec![0.2] };
    let a = Analysis::new(generators::boosted(profile, &[-2.0])?, Settings::default())?;
    let p = scan_circle(&a, 64)?;
    let c = classify(&a, &p, 4, 64)?;
    println!("{}", c.label);
    println!("  trivial spectrum {}  hyperbolic mod Y {}  strongly {}", c.trivial_spectrum_only, c.hyperbolic_mod_y, c.strongly_hyperbolic_mod_y);
    for h in &c.identity_checks {
        println!("  N={}: mu = {}  epsilon + N mu_0 = {}", h.n, h.mu_direct, h.predicted);
    }
    Ok(())
}
