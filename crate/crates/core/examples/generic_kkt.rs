//! The generic KKT-constrained minimizer on a family without a closed form:
//! BEC with a (2,∞) constraint and an independent row for every memory-2
//! history that contains no 1. Compared with the shared-parameter closed
//! form, which is a sub-family.
//!
//! Run with `cargo run --release --example generic_kkt`.

use dualcap::channel::{ChannelKind, DiscreteChannel};
use dualcap::constraint::{ConstraintSpec, StateDiagram};
use dualcap::family::{DiscreteMarkovFamily, RowRule};
use dualcap::solvers::{generic_kkt_bound, thm4_dinfty, GenericOptions};

fn main() -> dualcap::Result<()> {
    let fam = DiscreteMarkovFamily::from_rules("bec-2inf-free", ChannelKind::Bec, 2, |h| {
        if h.contains('1') {
            RowRule::ChannelRow(0)
        } else {
            RowRule::Mix(format!("w_{h}"))
        }
    });
    let g = StateDiagram::build(ConstraintSpec::infinite(2), 2)?;
    println!("{} free parameters, {} cycles", fam.param_names().len(), g.cycles().len());
    println!("{:>5} {:>10} {:>10} {:>10} {:>7}", "eps", "generic", "shared", "residual", "starts");
    for eps in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let ch = DiscreteChannel::bec(eps)?;
        let r = generic_kkt_bound(&fam, &ch, &g, &GenericOptions::default())?;
        let shared = thm4_dinfty(2, eps)?;
        println!(
            "{eps:>5.2} {:>10.6} {:>10.6} {:>10.1e} {:>3}/{}",
            r.bound, shared.bound, r.kkt_residual_max, r.diagnostics.accepted_starts, r.diagnostics.starts
        );
    }
    Ok(())
}
