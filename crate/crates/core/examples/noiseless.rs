//! State diagrams, simple cycles and noiseless capacity of a few (d,k)
//! constraints.
//!
//! Run with `cargo run --example noiseless`.

use dualcap::constraint::{bits_to_string, decompose_walk, noiseless_capacity, ConstraintSpec, StateDiagram};

fn main() -> dualcap::Result<()> {
    let specs = [
        ConstraintSpec::infinite(0),
        ConstraintSpec::infinite(1),
        ConstraintSpec::infinite(2),
        ConstraintSpec::finite(1, 2)?,
        ConstraintSpec::finite(1, 3)?,
        ConstraintSpec::finite(2, 7)?,
    ];
    println!("{:>8} {:>12} {:>14}", "(d,k)", "capacity", "log2 rho(A)");
    for spec in specs {
        let g = StateDiagram::build(spec, spec.min_memory().max(1))?;
        println!("{:>8} {:>12.9} {:>14.9}", spec.to_string(), noiseless_capacity(&spec), g.spectral_radius().log2());
    }

    let g = StateDiagram::build(ConstraintSpec::finite(1, 2)?, 2)?;
    println!("\n(1,2), memory 2: {} vertices, {} edges", g.vertices().len(), g.edges().len());
    for c in g.cycles() {
        println!("  cycle of length {}: {}", c.len(), bits_to_string(c.word()));
    }

    let word = [0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0];
    let dec = decompose_walk(&word, &g)?;
    println!("\nwalk {} decomposes into:", bits_to_string(&word));
    for (c, m) in &dec.cycles {
        println!("  {m} x {}", bits_to_string(c.word()));
    }
    println!("  residual path of {} vertices", dec.residual_path.len());
    Ok(())
}
