//! KKT-constrained minimization over an arbitrary discrete family: minimize
//! the reference cycle's normalized metric subject to every other cycle's
//! normalized metric being equal to it.

use rayon::prelude::*;

use crate::channel::DiscreteChannel;
use crate::constraint::StateDiagram;
use crate::error::{Error, Result};
use crate::family::{DiscreteMarkovFamily, ParamMap};
use crate::metric::{kkt_residuals, EdgeMetricTable, KktResidual};
use crate::numeric::optim::{augmented_lagrangian, bfgs, project, AugLagOptions};
use crate::numeric::{halton, logit, sigmoid};

use super::{BoundResult, Diagnostics, SolverKind};

const LO: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct GenericOptions {
    /// Multi-start count (at least 8 are always used).
    pub starts: usize,
    pub residual_tol: f64,
    pub auglag: AugLagOptions,
}

impl Default for GenericOptions {
    fn default() -> Self {
        Self { starts: 8, residual_tol: 1e-8, auglag: AugLagOptions::default() }
    }
}

fn to_unit(z: f64) -> f64 {
    LO + (1.0 - 2.0 * LO) * sigmoid(z)
}

fn from_unit(p: f64) -> f64 {
    logit(((p - LO) / (1.0 - 2.0 * LO)).clamp(1e-300, 1.0 - 1e-16))
}

struct Problem<'a> {
    fam: &'a DiscreteMarkovFamily,
    channel: &'a DiscreteChannel,
    g: &'a StateDiagram,
    cycles: Vec<crate::constraint::Cycle>,
}

impl Problem<'_> {
    fn params(&self, z: &[f64]) -> ParamMap {
        self.fam.param_names().iter().zip(z).map(|(n, &v)| (n.clone(), to_unit(v))).collect()
    }

    fn kkt(&self, z: &[f64]) -> KktResidual {
        let rows = self.fam.rows(&self.params(z), self.channel).expect("interior parameters");
        kkt_residuals(&EdgeMetricTable::from_rows(&rows, self.channel, self.g), &self.cycles)
    }
}

struct Candidate {
    z: Vec<f64>,
    residual: f64,
    bound: f64,
    evaluations: usize,
}

/// Bound for any family/channel/diagram: the returned value
/// is max over cycles of T(c)/l(c) at the best accepted start.
pub fn generic_kkt_bound(
    fam: &DiscreteMarkovFamily,
    channel: &DiscreteChannel,
    g: &StateDiagram,
    opts: &GenericOptions,
) -> Result<BoundResult> {
    if fam.mu() != g.mu() {
        return Err(Error::UnsupportedCombination(format!(
            "family memory {} differs from diagram memory {}",
            fam.mu(),
            g.mu()
        )));
    }
    let n = fam.param_names().len();
    if n == 0 {
        return Err(Error::UnsupportedCombination("family has no free parameters".into()));
    }
    let problem = Problem { fam, channel, g, cycles: g.cycles() };
    let starts = opts.starts.max(8);
    let candidates: Vec<Candidate> = (0..starts)
        .into_par_iter()
        .map(|s| {
            let z0: Vec<f64> = halton(s, n).into_iter().map(from_unit).collect();
            run_start(&problem, &z0, opts)
        })
        .collect();

    let accepted: Vec<&Candidate> =
        candidates.iter().filter(|c| c.residual <= opts.residual_tol && c.bound.is_finite()).collect();
    let evaluations: usize = candidates.iter().map(|c| c.evaluations).sum();
    let Some(best) = accepted.iter().min_by(|a, b| a.bound.total_cmp(&b.bound)) else {
        let residual = candidates.iter().map(|c| c.residual).fold(f64::INFINITY, f64::min);
        return Err(Error::NoFeasiblePoint { residual });
    };
    let hi = accepted.iter().map(|c| c.bound).fold(f64::NEG_INFINITY, f64::max);
    let diagnostics = Diagnostics {
        iterations: evaluations,
        starts,
        accepted_starts: accepted.len(),
        dispersion: hi - best.bound,
        root_count: 0,
        notes: vec![format!("{} cycles, {} parameters", problem.cycles.len(), n)],
    };
    Ok(BoundResult {
        bound: best.bound,
        params: problem.params(&best.z),
        kkt_residual_max: best.residual,
        solver: SolverKind::Generic,
        diagnostics,
    })
}

fn run_start(problem: &Problem<'_>, z0: &[f64], opts: &GenericOptions) -> Candidate {
    let objective = |z: &[f64]| problem.kkt(z).reference();
    let constraints = |z: &[f64]| problem.kkt(z).residuals[1..].to_vec();
    let (z, evaluations) = if problem.cycles.len() == 1 {
        let m = bfgs(objective, z0, &opts.auglag.inner);
        (m.x, m.evaluations)
    } else {
        let m = augmented_lagrangian(objective, constraints, z0, &opts.auglag);
        let (z, _) = project(constraints, &m.x, 1e-13, 50);
        (z, m.evaluations)
    };
    let k = problem.kkt(&z);
    Candidate { residual: k.max_abs(), bound: k.max_normalized(), z, evaluations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ConstraintSpec;
    use crate::family::{bec_one_inf_mu1, bsc_one_inf_mu1};
    use crate::solvers::{thm2_part1, thm5_bsc};

    #[test]
    fn matches_thm21() {
        let g = StateDiagram::build(ConstraintSpec::infinite(1), 1).unwrap();
        let ch = DiscreteChannel::bec(0.2).unwrap();
        let r = generic_kkt_bound(&bec_one_inf_mu1(), &ch, &g, &GenericOptions::default()).unwrap();
        let c = thm2_part1(0.2).unwrap();
        assert!((r.bound - c.bound).abs() < 1e-6, "{} vs {}", r.bound, c.bound);
        assert!(r.kkt_residual_max <= 1e-8);
    }

    #[test]
    fn matches_thm5() {
        let g = StateDiagram::build(ConstraintSpec::infinite(1), 1).unwrap();
        let ch = DiscreteChannel::bsc(0.1).unwrap();
        let r = generic_kkt_bound(&bsc_one_inf_mu1(), &ch, &g, &GenericOptions::default()).unwrap();
        let c = thm5_bsc(0.1).unwrap();
        assert!((r.bound - c.bound).abs() < 1e-6, "{} vs {}", r.bound, c.bound);
    }

    #[test]
    fn unit_map_roundtrip() {
        for &p in &[1e-6, 0.3, 0.999] {
            assert!((to_unit(from_unit(p)) - p).abs() < 1e-12);
        }
    }
}
