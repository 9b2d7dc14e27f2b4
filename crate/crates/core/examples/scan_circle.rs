//! Index function on the unit circle for a tilted system, with its jump table.
//!
//! `cargo run --release --example scan_circle -- [seed] [n]`

use morse_sturm_index::bott::{jump_table, scan_circle};
use morse_sturm_index::{generators, Analysis, Settings};

fn main() -> morse_sturm_index::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);

    let a = Analysis::new(generators::random_tilted(seed, n)?, Settings::default())?;
    let p = scan_circle(&a, 64)?;
    println!("{}: epsilon {}, singular {}", p.label, p.epsilon, p.singular);
    for pt in &p.points {
        println!("  point theta {:.6}: Lambda {} nullity {}", pt.theta, pt.lambda, pt.nullity);
    }
    for arc in &p.arcs {
        println!("  arc ({:.6}, {:.6}): Lambda {}", arc.start, arc.end, arc.lambda);
    }
    for j in jump_table(&p)? {
        println!("  jump at {:.6}: {} | {} | {} (nullity {})", j.theta, j.left, j.point, j.right, j.nullity);
    }
    print!("{}", p.to_csv()?);
    Ok(())
}
