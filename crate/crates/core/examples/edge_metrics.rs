//! Edge and cycle metrics of a memory-1 test distribution on the (1,∞)
//! constrained BEC, and how far its cycles are from satisfying the KKT
//! equalities at an arbitrary parameter point and at the solved one.
//!
//! Run with `cargo run --example edge_metrics`.

use dualcap::channel::DiscreteChannel;
use dualcap::constraint::{bits_to_string, ConstraintSpec, StateDiagram};
use dualcap::family::{bec_one_inf_mu1, ParamMap};
use dualcap::metric::{cycle_metric, kkt_residuals, EdgeMetricTable};
use dualcap::solvers::thm2_part1;

fn main() -> dualcap::Result<()> {
    let eps = 0.3;
    let ch = DiscreteChannel::bec(eps)?;
    let fam = bec_one_inf_mu1();
    let g = StateDiagram::build(ConstraintSpec::infinite(1), 1)?;

    for (label, params) in [
        ("guess", ParamMap::new().with("alpha", 0.5).with("beta", 0.5)),
        ("solved", thm2_part1(eps)?.params),
    ] {
        let table = EdgeMetricTable::build(&fam, &params, &ch, &g)?;
        println!("{label}: {params}");
        for (w, t) in table.entries() {
            println!("  T({w}) = {t:.6}");
        }
        for c in g.cycles() {
            println!("  cycle {}: {:.6} bits/symbol", bits_to_string(c.word()), cycle_metric(&table, &c) / c.len() as f64);
        }
        let k = kkt_residuals(&table, &g.cycles());
        println!("  max residual {:.2e}, bound {:.6}\n", k.max_abs(), k.max_normalized());
    }
    Ok(())
}
