//! Exhaustive finite-length dual bound for the (1,∞) BEC with the solved
//! memory-1 test distribution: the excess over the asymptotic value shrinks
//! like 1/N.
//!
//! Run with `cargo run --release --example brute_oracle`.

use dualcap::channel::DiscreteChannel;
use dualcap::constraint::ConstraintSpec;
use dualcap::family::bec_one_inf_mu1;
use dualcap::oracle::{brute_dual_bound, count_words};
use dualcap::solvers::thm2_part1;

fn main() -> dualcap::Result<()> {
    let eps = 0.2;
    let solved = thm2_part1(eps)?;
    let spec = ConstraintSpec::infinite(1);
    let ch = DiscreteChannel::bec(eps)?;
    println!("t(q) = {:.6}", solved.bound);
    println!("{:>3} {:>6} {:>10} {:>9} {:>7}  argmax", "N", "words", "max D/N", "gap", "N*gap");
    for n in (4..=12).step_by(2) {
        let r = brute_dual_bound(&bec_one_inf_mu1(), &solved.params, &ch, &spec, n)?;
        println!(
            "{n:>3} {:>6} {:>10.6} {:>9.6} {:>7.4}  {}",
            count_words(&spec, n),
            r.max_per_symbol,
            r.gap,
            n as f64 * r.gap,
            r.argmax_string()
        );
    }
    Ok(())
}
