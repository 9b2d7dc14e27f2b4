//! Builds a tilted system, writes it as a problem file and validates the file.
//!
//! `cargo run --example validate_system`

use morse_sturm_index::system::{validate, ProblemFile};
use morse_sturm_index::{generators, Tolerances};

fn main() -> morse_sturm_index::Result<()> {
    let sys = generators::random_tilted(3, 3)?;
    let json = sys.to_problem().to_json();
    println!("problem file: {} bytes", json.len());

    let problem = ProblemFile::from_json(&json)?;
    let report = validate(&problem, &Tolerances::default())?;
    for c in &report.checks {
        println!("{:<28} {:>10.3e} <= {:.0e}  {}", c.name, c.residual, c.tolerance, if c.passed { "ok" } else { "FAILED" });
    }
    println!("valid: {}", report.passed);
    Ok(())
}
