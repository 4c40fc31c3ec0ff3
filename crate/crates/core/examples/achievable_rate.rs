//! Simulated information rates of Markov inputs on the (1,∞) constraint,
//! with the maxentropic input and an optimized one.
//!
//! Run with `cargo run --release --example achievable_rate`.

use dualcap::achievable::{optimize_input, simulate_rate, InputProcess, SimChannel};
use dualcap::channel::{DiscreteChannel, GaussianChannel};
use dualcap::constraint::ConstraintSpec;

fn main() -> dualcap::Result<()> {
    let spec = ConstraintSpec::infinite(1);
    let maxent = InputProcess::maxentropic(spec)?;
    println!("maxentropic P(1 | free state) = {:.6}", maxent.free_probs()[0]);
    let channels = [
        ("BEC(0.5)", SimChannel::Discrete(DiscreteChannel::bec(0.5)?)),
        ("BSC(0.1)", SimChannel::Discrete(DiscreteChannel::bsc(0.1)?)),
        ("BIAWGN 3 dB", SimChannel::Gaussian(GaussianChannel::from_snr_db(3.0)?)),
    ];
    let (n, runs, seed) = (100_000, 10, 2024);
    for (name, ch) in channels {
        let r0 = simulate_rate(&maxent, &ch, n, runs, seed)?;
        let (p, r1) = optimize_input(spec, &ch, n, runs, seed)?;
        println!(
            "{name:>12}: maxentropic {:.5} ± {:.5}, optimized {:.5} ± {:.5} at P(1) = {:.4}",
            r0.estimate,
            r0.stderr,
            r1.estimate,
            r1.stderr,
            p.free_probs()[0]
        );
    }
    Ok(())
}
