//! Invariant suites behind `dualcap validate`.

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::achievable::{optimize_input, run_seed, SimChannel};
use crate::awgn::{biawgn_capacity, d_x_numeric, decode, density_mass, unconstrained_awgn_bound, AwgnBoundProblem};
use crate::channel::{DiscreteChannel, GaussianChannel};
use crate::cli::{fmt9, Format, SCHEMA};
use crate::constraint::{noiseless_capacity, ConstraintSpec};
use crate::family::{bec_one_inf_mu1, bec_one_inf_mu2, bec_one_two_mu3, bsc_one_inf_mu1, DiscreteMarkovFamily, ParamMap};
use crate::metric::{divergence_parts, uniform_init};
use crate::numeric::h2;
use crate::oracle::{brute_dual_bound, count_words, valid_words};
use crate::solvers::{self, BoundResult, ClosedFormSetup};

/// Default simulation length for the sandwich suite.
pub const DEFAULT_N: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Oracle,
    Kkt,
    Sandwich,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = format!("{SCHEMA}\n");
        if format == Format::Csv {
            out.push_str("check,status,detail\n");
        }
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            match format {
                Format::Csv => out.push_str(&format!("{},{status},{}\n", c.name, c.detail.replace(',', ";"))),
                Format::JsonLines => {
                    out.push_str(&format!("{}\n", json!({"check": c.name, "status": status, "detail": c.detail})))
                }
            }
        }
        out
    }
}

pub fn run_suite(suite: Suite, n: usize, runs: usize, seed: u64) -> Report {
    let mut r = Report::default();
    match suite {
        Suite::Oracle => oracle_suite(&mut r),
        Suite::Kkt => kkt_suite(&mut r),
        Suite::Sandwich => sandwich_suite(&mut r, n, runs, seed),
        Suite::Quadrature => quadrature_suite(&mut r, seed),
    }
    r
}

fn unit_grid(points: usize, hi: f64) -> Vec<f64> {
    (0..points).map(|i| if i + 1 == points { hi } else { hi * i as f64 / (points - 1) as f64 }).collect()
}

fn oracle_suite(r: &mut Report) {
    let e = 0.2;
    let params = match solvers::thm2_part1(e) {
        Ok(b) => b.params,
        Err(err) => return r.check("oracle.setup", false, err.to_string()),
    };
    let fam = bec_one_inf_mu1();
    let ch = DiscreteChannel::bec(e).unwrap();
    let spec = ConstraintSpec::infinite(1);
    let mut prev = f64::INFINITY;
    for n in [6, 8, 10, 12] {
        match brute_dual_bound(&fam, &params, &ch, &spec, n) {
            Ok(rep) => {
                let detail = format!("N={n} gap={} argmax={}", fmt9(rep.gap), rep.argmax_string());
                r.check(format!("oracle.gap_positive.N{n}"), rep.gap > 0.0, detail.clone());
                r.check(format!("oracle.gap_decreasing.N{n}"), rep.gap < prev, detail.clone());
                r.check(format!("oracle.gap_within_4_over_N.N{n}"), rep.gap <= 4.0 / n as f64, detail);
                r.check(
                    format!("oracle.decomposition.N{n}"),
                    rep.decomposition_error <= 1e-10,
                    format!("max error {}", fmt9(rep.decomposition_error)),
                );
                prev = rep.gap;
            }
            Err(err) => r.check(format!("oracle.brute.N{n}"), false, err.to_string()),
        }
    }
    let worst = random_decompositions(100, 7);
    r.check("oracle.decomposition.random", worst <= 1e-10, format!("100 instances, max error {}", fmt9(worst)));
    for spec in [ConstraintSpec::infinite(1), ConstraintSpec::infinite(2)] {
        let rate = (count_words(&spec, 64) as f64).log2() / 64.0;
        let c = noiseless_capacity(&spec);
        r.check(format!("oracle.count_rate.{spec}"), (rate - c).abs() < 0.02, format!("{} vs {}", fmt9(rate), fmt9(c)));
    }
}

/// Largest |direct − decomposed| over random (family, parameters, channel,
/// word) instances.
pub fn random_decompositions(instances: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let setups: Vec<(DiscreteMarkovFamily, ConstraintSpec, bool)> = vec![
        (bec_one_inf_mu1(), ConstraintSpec::infinite(1), true),
        (bec_one_inf_mu2(), ConstraintSpec::infinite(1), true),
        (bec_one_two_mu3(), ConstraintSpec::finite(1, 2).unwrap(), true),
        (bsc_one_inf_mu1(), ConstraintSpec::infinite(1), false),
    ];
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let (fam, spec, bec) = &setups[rng.random_range(0..setups.len())];
        let ch = if *bec {
            DiscreteChannel::bec(rng.random_range(0.05..0.95)).unwrap()
        } else {
            DiscreteChannel::bsc(rng.random_range(0.01..0.49)).unwrap()
        };
        let params: ParamMap =
            fam.param_names().iter().map(|n| (n.clone(), rng.random_range(0.05..0.95))).collect();
        let n = rng.random_range(fam.mu().max(4)..=9);
        let words = valid_words(spec, n);
        let word = &words[rng.random_range(0..words.len())];
        let rows = fam.rows(&params, &ch).unwrap();
        let mut init: Vec<f64> = uniform_init(&ch, fam.mu()).iter().map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = init.iter().sum();
        init.iter_mut().for_each(|v| *v /= total);
        let parts = divergence_parts(&rows, &ch, fam.mu(), word, &init).unwrap();
        worst = worst.max((parts.direct - parts.decomposed).abs());
    }
    worst
}

/// The closed forms checked by the kkt suite: (label, selector, d, upper end).
pub const CLOSED_FORMS: [(&str, &str, usize, f64); 8] = [
    ("thm2.1", "thm2.1", 1, 1.0),
    ("thm2.2", "thm2.2", 1, 1.0),
    ("thm3.1", "thm3.1", 1, 1.0),
    ("thm3.2", "thm3.2", 1, 1.0),
    ("thm4.d1", "thm4", 1, 1.0),
    ("thm4.d2", "thm4", 2, 1.0),
    ("thm4.d3", "thm4", 3, 1.0),
    ("thm5", "thm5", 1, 0.5),
];

pub fn solve_closed_form(selector: &str, d: usize, x: f64) -> crate::Result<BoundResult> {
    match selector {
        "thm2.1" => solvers::thm2_part1(x),
        "thm2.2" => solvers::thm2_part2(x),
        "thm3.1" => solvers::thm3_part1(x),
        "thm3.2" => solvers::thm3_part2(x),
        "thm4" => solvers::thm4_dinfty(d, x),
        "thm5" => solvers::thm5_bsc(x),
        other => Err(crate::Error::UnsupportedCombination(other.to_string())),
    }
}

/// Worst residual and worst |bound − common normalized cycle metric| on a
/// 101-point grid.
pub fn kkt_grid(selector: &str, d: usize, hi: f64) -> crate::Result<(f64, f64)> {
    let mut worst = (0.0f64, 0.0f64);
    for x in unit_grid(101, hi) {
        let b = solve_closed_form(selector, d, x)?;
        let setup = ClosedFormSetup::for_selector(selector, x, d)?;
        let k = setup.residuals(&b.params)?;
        worst.0 = worst.0.max(k.max_abs()).max(b.kkt_residual_max);
        worst.1 = worst.1.max((b.bound - k.max_normalized()).abs());
    }
    Ok(worst)
}

fn kkt_suite(r: &mut Report) {
    for (label, sel, d, hi) in CLOSED_FORMS {
        match kkt_grid(sel, d, hi) {
            Ok((res, gap)) => {
                r.check(format!("kkt.residual.{label}"), res <= 1e-8, format!("max residual {}", fmt9(res)));
                r.check(format!("kkt.bound_is_metric.{label}"), gap <= 1e-8, format!("max gap {}", fmt9(gap)));
            }
            Err(e) => r.check(format!("kkt.solve.{label}"), false, e.to_string()),
        }
    }
}

fn sandwich_suite(r: &mut Report, n: usize, runs: usize, seed: u64) {
    let one_inf = ConstraintSpec::infinite(1);
    let one_two = ConstraintSpec::finite(1, 2).unwrap();
    for (i, e) in unit_grid(21, 1.0).into_iter().enumerate() {
        let ch = SimChannel::Discrete(DiscreteChannel::bec(e).unwrap());
        let t21 = solvers::thm2_part1(e).map(|b| b.bound);
        let t22 = solvers::thm2_part2(e).map(|b| b.bound);
        let low = optimize_input(one_inf, &ch, n, runs, run_seed(seed, i)).map(|x| x.1.lower());
        match (t21, t22, low) {
            (Ok(a), Ok(b), Ok(l)) => {
                r.check(format!("sandwich.bec_1inf.eps{e:.2}"), l <= b && b <= a + 1e-9, format!("{} <= {} <= {}", fmt9(l), fmt9(b), fmt9(a)))
            }
            other => r.check(format!("sandwich.bec_1inf.eps{e:.2}"), false, format!("{other:?}")),
        }
        let t31 = solvers::thm3_part1(e).map(|b| b.bound);
        let t32 = solvers::thm3_part2(e).map(|b| b.bound);
        let low = optimize_input(one_two, &ch, n, runs, run_seed(seed, 100 + i)).map(|x| x.1.lower());
        match (t31, t32, low) {
            (Ok(a), Ok(b), Ok(l)) => r.check(
                format!("sandwich.bec_12.eps{e:.2}"),
                l <= a.min(b),
                format!("{} <= min({}, {})", fmt9(l), fmt9(a), fmt9(b)),
            ),
            other => r.check(format!("sandwich.bec_12.eps{e:.2}"), false, format!("{other:?}")),
        }
    }
    for (i, p) in unit_grid(21, 0.5).into_iter().enumerate() {
        let ch = SimChannel::Discrete(DiscreteChannel::bsc(p).unwrap());
        let t5 = solvers::thm5_bsc(p).map(|b| b.bound);
        let low = optimize_input(one_inf, &ch, n, runs, run_seed(seed, 200 + i)).map(|x| x.1.lower());
        let cap = 1.0 - h2(p);
        match (t5, low) {
            (Ok(t), Ok(l)) => r.check(
                format!("sandwich.bsc_1inf.p{p:.3}"),
                l <= t && t <= cap + 1e-9,
                format!("{} <= {} <= {}", fmt9(l), fmt9(t), fmt9(cap)),
            ),
            other => r.check(format!("sandwich.bsc_1inf.p{p:.3}"), false, format!("{other:?}")),
        }
    }
}

/// Worst |closed form − numerical integration| of D_x over random feasible
/// parameter draws.
pub fn random_dx_draws(draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let sigma = rng.random_range(0.3..2.0);
        let z: Vec<f64> = (0..18).map(|_| rng.random_range(-3.0..3.0)).collect();
        let fam = decode(sigma, &z);
        let y1 = rng.random_range(-3.0..3.0);
        let x = rng.random_range(0..2u8);
        let a = AwgnBoundProblem::new(fam).d_x(y1, x);
        let b = d_x_numeric(&fam, y1, x);
        worst = worst.max((a - b).abs());
    }
    worst
}

/// 20 SNR points evenly spaced over −2 … 10 dB.
pub fn snr_grid() -> Vec<f64> {
    (0..20).map(|i| -2.0 + 12.0 * i as f64 / 19.0).collect()
}

fn quadrature_suite(r: &mut Report, seed: u64) {
    let worst = random_dx_draws(100, seed);
    r.check("quadrature.dx_closed_form", worst <= 1e-6, format!("100 draws, max error {}", fmt9(worst)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut worst_mass = 0.0f64;
    for _ in 0..50 {
        let sigma = rng.random_range(0.3..2.0);
        let z: Vec<f64> = (0..18).map(|_| rng.random_range(-3.0..3.0)).collect();
        let m = density_mass(&decode(sigma, &z), rng.random_range(-3.0..3.0));
        worst_mass = worst_mass.max((m - 1.0).abs());
    }
    r.check("quadrature.normalization", worst_mass <= 1e-6, format!("50 draws, max |mass - 1| {}", fmt9(worst_mass)));
    for db in snr_grid() {
        let sigma = GaussianChannel::from_snr_db(db).unwrap().sigma();
        match (unconstrained_awgn_bound(sigma), biawgn_capacity(sigma)) {
            (Ok(u), Ok(c)) => r.check(
                format!("quadrature.unconstrained_above_capacity.{db:.3}dB"),
                u.bound - c >= 0.0,
                format!("{} >= {}", fmt9(u.bound), fmt9(c)),
            ),
            other => r.check(format!("quadrature.unconstrained.{db:.3}dB"), false, format!("{other:?}")),
        }
    }
    let fam = decode(0.8, &crate::awgn::heuristic_seed());
    let prob = AwgnBoundProblem::new(fam);
    match prob.metrics() {
        Ok(m) => r.check(
            "quadrature.edge_metrics_nonnegative",
            m.t00 >= 0.0 && m.t01 >= 0.0 && m.t10 >= 0.0,
            format!("T00={} T01={} T10={}", fmt9(m.t00), fmt9(m.t01), fmt9(m.t10)),
        ),
        Err(e) => r.check("quadrature.edge_metrics", false, e.to_string()),
    }
}
