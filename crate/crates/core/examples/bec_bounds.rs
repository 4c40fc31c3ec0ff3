//! Closed-form upper bounds for the runlength-constrained BEC, with the
//! KKT residual of each solution.
//!
//! Run with `cargo run --release --example bec_bounds`.

use dualcap::solvers::{thm2_part1, thm2_part2, thm3_part1, thm3_part2, thm4_dinfty};

fn main() -> dualcap::Result<()> {
    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>10}   max residual", "eps", "(1,inf)/1", "(1,inf)/2", "(1,2)/2", "(1,2)/3", "(2,inf)/2");
    for i in 0..=20 {
        let e = i as f64 / 20.0;
        let rs = [thm2_part1(e)?, thm2_part2(e)?, thm3_part1(e)?, thm3_part2(e)?, thm4_dinfty(2, e)?];
        let worst = rs.iter().map(|r| r.kkt_residual_max).fold(0.0, f64::max);
        print!("{e:>5.2}");
        for r in &rs {
            print!(" {:>10.6}", r.bound);
        }
        println!("   {worst:.1e}");
    }
    Ok(())
}
