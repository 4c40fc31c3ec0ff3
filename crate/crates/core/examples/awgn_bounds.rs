//! BIAWGN: uniform-input capacity, the unconstrained dual bound, and the
//! (1,∞)-constrained bound over the piecewise-Gaussian family at a few SNRs.
//! The constrained optimization takes about a minute per point.
//!
//! Run with `cargo run --release --example awgn_bounds`.

use dualcap::awgn::{biawgn_capacity, constrained_awgn_bound, unconstrained_awgn_bound, AwgnOptions};
use dualcap::channel::GaussianChannel;

fn main() -> dualcap::Result<()> {
    println!("{:>6} {:>10} {:>12} {:>12} {:>10}", "SNR dB", "capacity", "unconstr.", "(1,inf)", "residual");
    let mut warm = Vec::new();
    for db in [-2.0, 2.0, 6.0, 10.0] {
        let sigma = GaussianChannel::from_snr_db(db)?.sigma();
        let c = biawgn_capacity(sigma)?;
        let u = unconstrained_awgn_bound(sigma)?;
        let (r, z) = constrained_awgn_bound(sigma, &AwgnOptions::default(), &warm)?;
        warm = vec![z];
        println!("{db:>6.1} {c:>10.6} {:>12.6} {:>12.6} {:>10.1e}", u.bound, r.bound, r.kkt_residual_max);
    }
    Ok(())
}
