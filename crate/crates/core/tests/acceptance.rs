//! Acceptance criteria 1–8. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::time::{Duration, Instant};

use dualcap::achievable::{optimize_input, run_seed, SimChannel};
use dualcap::awgn::{biawgn_capacity, constrained_awgn_bound, unconstrained_awgn_bound, AwgnOptions};
use dualcap::channel::{DiscreteChannel, GaussianChannel};
use dualcap::cli;
use dualcap::constraint::{noiseless_capacity, ConstraintSpec, StateDiagram};
use dualcap::family::{bec_one_inf_mu1, bsc_one_inf_mu1};
use dualcap::oracle::brute_dual_bound;
use dualcap::solvers::{self, generic_kkt_bound, GenericOptions};
use dualcap::validate::{kkt_grid, random_decompositions, random_dx_draws, run_suite, snr_grid, Suite, CLOSED_FORMS};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn noiseless_anchors() -> Outcome {
    let c1 = noiseless_capacity(&ConstraintSpec::infinite(1));
    let c0 = noiseless_capacity(&ConstraintSpec::infinite(0));
    let mut worst = 0.0f64;
    for spec in [
        ConstraintSpec::infinite(1),
        ConstraintSpec::infinite(2),
        ConstraintSpec::finite(1, 2).unwrap(),
        ConstraintSpec::finite(1, 3).unwrap(),
    ] {
        let g = StateDiagram::build(spec, spec.min_memory().max(1)).unwrap();
        worst = worst.max((g.spectral_radius().log2() - noiseless_capacity(&spec)).abs());
    }
    let ok = (c1 - 0.6942419).abs() <= 1e-6 && c0 == 1.0 && worst <= 1e-9;
    outcome(ok, format!("C(1,inf)={c1:.9} C(0,inf)={c0} spectral cross-check {worst:.1e}"))
}

fn closed_form_kkt() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, sel, d, hi) in CLOSED_FORMS {
        match kkt_grid(sel, d, hi) {
            Ok((res, gap)) => {
                ok &= res <= 1e-8 && gap <= 1e-8;
                parts.push(format!("{label} {res:.0e}/{gap:.0e}"));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{label} error {e}"));
            }
        }
    }
    outcome(ok, format!("101 points, residual/bound-gap: {}", parts.join(", ")))
}

fn limit_continuity() -> Outcome {
    let c1inf = noiseless_capacity(&ConstraintSpec::infinite(1));
    let c12 = noiseless_capacity(&ConstraintSpec::finite(1, 2).unwrap());
    let cases: Vec<(&str, Box<dyn Fn(f64) -> f64>, f64)> = vec![
        ("thm2.1", Box::new(|e| solvers::thm2_part1(e).unwrap().bound), c1inf),
        ("thm2.2", Box::new(|e| solvers::thm2_part2(e).unwrap().bound), c1inf),
        ("thm3.1", Box::new(|e| solvers::thm3_part1(e).unwrap().bound), c12),
        ("thm3.2", Box::new(|e| solvers::thm3_part2(e).unwrap().bound), c12),
        ("thm4.d1", Box::new(|e| solvers::thm4_dinfty(1, e).unwrap().bound), c1inf),
        ("thm4.d2", Box::new(|e| solvers::thm4_dinfty(2, e).unwrap().bound), noiseless_capacity(&ConstraintSpec::infinite(2))),
        ("thm4.d3", Box::new(|e| solvers::thm4_dinfty(3, e).unwrap().bound), noiseless_capacity(&ConstraintSpec::infinite(3))),
    ];
    let mut ok = true;
    let mut worst_low = 0.0f64;
    let mut worst_one = 0.0f64;
    for (_, f, c) in &cases {
        let low = (f(1e-4) - c).abs();
        let one = f(1.0).abs();
        worst_low = worst_low.max(low);
        worst_one = worst_one.max(one);
        ok &= low <= 1e-4 && one <= 1e-9;
    }
    let p0 = (solvers::thm5_bsc(0.0).unwrap().bound - 0.6942419).abs();
    let p5 = solvers::thm5_bsc(0.5).unwrap().bound.abs();
    ok &= p0 <= 1e-6 && p5 <= 1e-6;
    outcome(ok, format!("BEC gap at 1e-4 {worst_low:.1e}, at 1 {worst_one:.1e}; BSC p=0 {p0:.1e}, p=0.5 {p5:.1e}"))
}

fn generic_oracle() -> Outcome {
    let g = StateDiagram::build(ConstraintSpec::infinite(1), 1).unwrap();
    let opts = GenericOptions::default();
    let mut worst = 0.0f64;
    let mut ok = true;
    for i in 0..=10 {
        let e = i as f64 / 10.0;
        let ch = DiscreteChannel::bec(e).unwrap();
        match generic_kkt_bound(&bec_one_inf_mu1(), &ch, &g, &opts) {
            Ok(r) => worst = worst.max((r.bound - solvers::thm2_part1(e).unwrap().bound).abs()),
            Err(_) => ok = false,
        }
        let p = i as f64 / 20.0;
        let ch = DiscreteChannel::bsc(p).unwrap();
        match generic_kkt_bound(&bsc_one_inf_mu1(), &ch, &g, &opts) {
            Ok(r) => worst = worst.max((r.bound - solvers::thm5_bsc(p).unwrap().bound).abs()),
            Err(_) => ok = false,
        }
    }
    outcome(ok && worst <= 1e-6, format!("22 points, max |generic - closed form| {worst:.1e}"))
}

fn finite_n_oracle() -> Outcome {
    let e = 0.2;
    let params = solvers::thm2_part1(e).unwrap().params;
    let ch = DiscreteChannel::bec(e).unwrap();
    let spec = ConstraintSpec::infinite(1);
    let mut ok = true;
    let mut prev = f64::INFINITY;
    let mut gaps = Vec::new();
    for n in [6, 8, 10, 12] {
        let r = brute_dual_bound(&bec_one_inf_mu1(), &params, &ch, &spec, n).unwrap();
        ok &= r.gap > 0.0 && r.gap < prev && r.gap <= 4.0 / n as f64 && r.decomposition_error <= 1e-10;
        prev = r.gap;
        gaps.push(format!("N={n}: {:.5}", r.gap));
    }
    let worst = random_decompositions(100, 2024);
    ok &= worst <= 1e-10;
    outcome(ok, format!("gaps {}; 100 random decompositions max error {worst:.1e}", gaps.join(" ")))
}

fn sandwich() -> Outcome {
    let report = run_suite(Suite::Sandwich, 100_000, 10, 1);
    let failed: Vec<String> = report.checks.iter().filter(|c| !c.passed).map(|c| format!("{} ({})", c.name, c.detail)).collect();
    let detail = if failed.is_empty() {
        format!("{} grid points, N = 1e5", report.checks.len())
    } else {
        format!("failed: {}", failed.join("; "))
    };
    outcome(failed.is_empty(), detail)
}

fn biawgn() -> Outcome {
    let dx = random_dx_draws(100, 99);
    let mut ok = dx <= 1e-6;
    let mut min_gap = f64::INFINITY;
    for db in snr_grid() {
        let sigma = GaussianChannel::from_snr_db(db).unwrap().sigma();
        let gap = unconstrained_awgn_bound(sigma).unwrap().bound - biawgn_capacity(sigma).unwrap();
        min_gap = min_gap.min(gap);
    }
    ok &= min_gap >= 0.0;
    // The noiseless ceiling is the exact log2 of the golden ratio.
    let ceiling = noiseless_capacity(&ConstraintSpec::infinite(1)) + 1e-9;
    let spec = ConstraintSpec::infinite(1);
    let mut warm = Vec::new();
    let mut rows = Vec::new();
    for (i, db) in [-2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0].into_iter().enumerate() {
        let ch = GaussianChannel::from_snr_db(db).unwrap();
        match constrained_awgn_bound(ch.sigma(), &AwgnOptions::default(), &warm) {
            Ok((r, z)) => {
                warm = vec![z];
                let (_, est) = optimize_input(spec, &SimChannel::Gaussian(ch), 100_000, 10, run_seed(5, i)).unwrap();
                let inside = est.lower() <= r.bound && r.bound <= ceiling && r.kkt_residual_max <= 1e-6;
                ok &= inside;
                rows.push(format!("{db}dB {:.4}<={:.4}", est.lower(), r.bound));
            }
            Err(e) => {
                ok = false;
                rows.push(format!("{db}dB error {e}"));
            }
        }
    }
    outcome(ok, format!("d_x max error {dx:.1e}; min unconstrained gap {min_gap:.2e}; constrained {}", rows.join(" ")))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.join(format!("dualcap-determinism-{}-{i}.csv", std::process::id()));
        let mut args: Vec<String> = [
            "dualcap", "sweep", "--selector", "thm5,achievable", "--start", "0", "--stop", "0.5", "--points", "6",
            "--n", "10000", "--runs", "4", "--seed", "42", "--out",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        args.push(path.display().to_string());
        let code = cli::run(args);
        let bytes = std::fs::read(&path).unwrap_or_default();
        let _ = std::fs::remove_file(&path);
        outputs.push((code, bytes));
    }
    let ok = outputs[0].0 == 0 && outputs[1].0 == 0 && !outputs[0].1.is_empty() && outputs[0].1 == outputs[1].1;
    outcome(ok, format!("two seeded sweeps, {} bytes each, identical: {}", outputs[0].1.len(), outputs[0].1 == outputs[1].1))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("1 noiseless anchors", noiseless_anchors, Duration::from_secs(1)),
        ("2 closed-form KKT consistency", closed_form_kkt, Duration::from_secs(30)),
        ("3 limit continuity", limit_continuity, Duration::from_secs(60)),
        ("4 generic vs closed form", generic_oracle, Duration::from_secs(300)),
        ("5 finite-N oracle", finite_n_oracle, Duration::from_secs(600)),
        ("6 sandwich (BEC, BSC)", sandwich, Duration::from_secs(1200)),
        ("7 BIAWGN", biawgn, Duration::from_secs(3600)),
        ("8 determinism", determinism, Duration::from_secs(600)),
    ];
    let mut all = true;
    for (name, f, limit) in criteria {
        let t = Instant::now();
        let o = f();
        let elapsed = t.elapsed();
        let passed = o.passed && elapsed <= limit;
        all &= passed;
        println!(
            "{} criterion {name}: {} [{:.1} s, limit {} s]",
            if passed { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if !all {
        std::process::exit(1);
    }
}
