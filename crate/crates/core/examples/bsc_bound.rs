//! The (1,∞)-constrained BSC bound against the unconstrained capacity
//! 1 − H₂(p) and the noiseless constrained capacity.
//!
//! Run with `cargo run --example bsc_bound`.

use dualcap::numeric::h2;
use dualcap::solvers::thm5_bsc;

fn main() -> dualcap::Result<()> {
    println!("{:>6} {:>10} {:>10} {:>8} {:>8}", "p", "bound", "1-H2(p)", "a", "b");
    for i in 0..=10 {
        let p = 0.05 * i as f64;
        let r = thm5_bsc(p)?;
        println!(
            "{p:>6.3} {:>10.6} {:>10.6} {:>8.5} {:>8.5}",
            r.bound,
            1.0 - h2(p),
            r.params.get("a")?,
            r.params.get("b")?
        );
    }
    Ok(())
}
