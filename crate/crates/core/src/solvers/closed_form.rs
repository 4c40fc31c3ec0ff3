//! Closed-form bounds: each reduces the KKT-constrained minimization of a
//! specific family to scalar (or 2×2) equations, then rebuilds the family's
//! parameters and certifies them with the metric engine.

use crate::channel::DiscreteChannel;
use crate::constraint::{ConstraintSpec, StateDiagram};
use crate::error::{Error, Result};
use crate::family::{family_for, DiscreteMarkovFamily, ParamMap, ALPHA_0, LN_ALPHA_0};
use crate::metric::{kkt_residuals, EdgeMetricTable, KktResidual};
use crate::numeric::linalg::{norm_inf, solve};
use crate::numeric::roots::{bisect, scan_brackets, unit_roots};
use crate::numeric::h2;

use super::{generic_kkt_bound, BoundResult, Diagnostics, GenericOptions, SolverKind};

const ROOT_TOL: f64 = 1e-15;

/// Family, diagram and channel a closed-form bound refers to.
#[derive(Debug, Clone)]
pub struct ClosedFormSetup {
    pub family: DiscreteMarkovFamily,
    pub diagram: StateDiagram,
    pub channel: DiscreteChannel,
}

impl ClosedFormSetup {
    pub fn new(channel: DiscreteChannel, spec: ConstraintSpec, mu: usize) -> Result<Self> {
        Ok(Self {
            family: family_for(channel.kind(), &spec, mu)?,
            diagram: StateDiagram::build(spec, mu)?,
            channel,
        })
    }

    /// Setup for a selector (`thm2.1`, `thm2.2`, `thm3.1`, `thm3.2`, `thm4`
    /// with `d`, `thm5`) at channel parameter `x`.
    pub fn for_selector(selector: &str, x: f64, d: usize) -> Result<Self> {
        let one_inf = ConstraintSpec::infinite(1);
        match selector {
            "thm2.1" => Self::new(DiscreteChannel::bec(x)?, one_inf, 1),
            "thm2.2" => Self::new(DiscreteChannel::bec(x)?, one_inf, 2),
            "thm3.1" => Self::new(DiscreteChannel::bec(x)?, ConstraintSpec::finite(1, 2)?, 2),
            "thm3.2" => Self::new(DiscreteChannel::bec(x)?, ConstraintSpec::finite(1, 2)?, 3),
            "thm4" => Ok(Self {
                family: crate::family::bec_d_inf(d),
                diagram: StateDiagram::build(ConstraintSpec::infinite(d), d)?,
                channel: DiscreteChannel::bec(x)?,
            }),
            "thm5" => Self::new(DiscreteChannel::bsc(x)?, one_inf, 1),
            other => Err(Error::UnsupportedCombination(format!("no closed form `{other}`"))),
        }
    }

    pub fn table(&self, params: &ParamMap) -> Result<EdgeMetricTable> {
        EdgeMetricTable::build(&self.family, params, &self.channel, &self.diagram)
    }

    pub fn residuals(&self, params: &ParamMap) -> Result<KktResidual> {
        Ok(kkt_residuals(&self.table(params)?, &self.diagram.cycles()))
    }
}

fn check_unit(name: &str, v: f64, upper_open: bool) -> Result<()> {
    let ok = if upper_open { (0.0..1.0).contains(&v) } else { (0.0..=1.0).contains(&v) };
    if ok {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name: name.into(), value: v })
    }
}

fn finish(setup: &ClosedFormSetup, bound: f64, params: ParamMap, diagnostics: Diagnostics) -> Result<BoundResult> {
    let kkt = setup.residuals(&params)?;
    Ok(BoundResult {
        bound,
        params,
        kkt_residual_max: kkt.max_abs(),
        solver: SolverKind::ClosedForm,
        diagnostics,
    })
}

/// At ε = 1 every output is erased, all edge metrics vanish and any
/// parameter point attains the bound 0.
fn erased_everything(setup: &ClosedFormSetup) -> Result<BoundResult> {
    let params: ParamMap = setup.family.param_names().iter().map(|n| (n.clone(), 0.5)).collect();
    let diagnostics = Diagnostics {
        notes: vec!["epsilon = 1: every parameter point gives 0".into()],
        ..Default::default()
    };
    finish(setup, 0.0, params, diagnostics)
}

fn single_root<F: Fn(f64) -> f64>(f: F, what: &str) -> Result<(f64, usize)> {
    let roots = unit_roots(&f, ROOT_TOL);
    match roots.first() {
        Some(&r) => Ok((r, roots.len())),
        None => Err(Error::NoConvergence(format!("no root of the {what} equation in (0,1)"))),
    }
}

/// BEC, (1,∞), μ = 1: β solves β^{2(1−ε)} = 1 − β and the bound is
/// (1−ε)² log₂(1/β) + ε(1−ε) log₂(2−β).
pub fn thm2_part1(epsilon: f64) -> Result<BoundResult> {
    check_unit("epsilon", epsilon, false)?;
    let setup = ClosedFormSetup::for_selector("thm2.1", epsilon, 1)?;
    if epsilon == 1.0 {
        return erased_everything(&setup);
    }
    let e = epsilon;
    let beta = bisect(|b: f64| 2.0 * (1.0 - e) * b.ln() - (-b).ln_1p(), f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0, ROOT_TOL)?;
    let bound = (1.0 - e).powi(2) * (1.0 / beta).log2() + e * (1.0 - e) * (2.0 - beta).log2();
    let params = ParamMap::new().with("beta", beta).with("alpha", 1.0 / (2.0 - beta));
    finish(&setup, bound, params, Diagnostics { root_count: 1, ..Default::default() })
}

struct Thm22 {
    e: f64,
}

impl Thm22 {
    fn gammas(a: f64, b: f64) -> (f64, f64) {
        (1.0 - a - b + 2.0 * a * b, 2.0 - 3.0 * a - b + 2.0 * a * b)
    }

    /// The two defining equations E₁ − E₃ and E₂ − E₃ (natural logs);
    /// NaN outside the admissible region.
    fn equations(&self, a: f64, b: f64) -> [f64; 2] {
        let e = self.e;
        let (g1, g2) = Self::gammas(a, b);
        if !(a > 0.5 && a < 1.0 && b > 0.0 && b < 1.0 && g2 > 0.0) {
            return [f64::NAN; 2];
        }
        let ee = (1.0 - e) * (1.0 - e);
        let e1 = ee * (b * b * (1.0 - a) / g2).ln()
            + e * (1.0 - e) * ((2.0 * a - 1.0).powi(2) * g1 / (a * a * g2)).ln();
        let e2 = ee * (b.powi(3) * (1.0 - a) / ((1.0 - b).powi(2) * (2.0 * a - 1.0))).ln()
            + 2.0 * e * (1.0 - e) * (g1 / (a * (1.0 - b))).ln();
        let e3 = e * e * ((1.0 - a) / a).ln();
        [e1 - e3, e2 - e3]
    }

    fn bound(&self, a: f64, b: f64) -> f64 {
        let e = self.e;
        let (g1, _) = Self::gammas(a, b);
        (1.0 - e)
            * ((1.0 - e).powi(2) * (1.0 / b).log2()
                + e * (1.0 - e) * (a * a / (g1 * (2.0 * a - 1.0))).log2()
                + e * e * (1.0 / a).log2())
    }

    fn params(a: f64, b: f64) -> ParamMap {
        let (g1, _) = Self::gammas(a, b);
        let lambda2 = (1.0 - b) * (2.0 * a - 1.0);
        let edge = lambda2 / (1.0 - a);
        ParamMap::new()
            .with("alpha_00", b)
            .with("alpha_??", a)
            .with("alpha_0?", g1 / a)
            .with("alpha_?0", (2.0 * a - 1.0) / a)
            .with("alpha_10", edge)
            .with("alpha_1?", edge)
    }

    /// Damped Newton from (a, b); returns the converged point.
    fn newton(&self, mut a: f64, mut b: f64) -> Option<(f64, f64)> {
        let mut f = self.equations(a, b);
        if !f.iter().all(|v| v.is_finite()) {
            return None;
        }
        for _ in 0..200 {
            let r = norm_inf(&f);
            if r < 1e-14 {
                return Some((a, b));
            }
            let h = 1e-8;
            let fa = [self.equations(a + h, b), self.equations(a - h, b)];
            let fb = [self.equations(a, b + h), self.equations(a, b - h)];
            let jac = vec![
                vec![(fa[0][0] - fa[1][0]) / (2.0 * h), (fb[0][0] - fb[1][0]) / (2.0 * h)],
                vec![(fa[0][1] - fa[1][1]) / (2.0 * h), (fb[0][1] - fb[1][1]) / (2.0 * h)],
            ];
            let step = solve(jac, f.to_vec())?;
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..50 {
                let (an, bn) = (a - t * step[0], b - t * step[1]);
                let fnew = self.equations(an, bn);
                if fnew.iter().all(|v| v.is_finite()) && norm_inf(&fnew) < r {
                    a = an;
                    b = bn;
                    f = fnew;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                return (r < 1e-11).then_some((a, b));
            }
        }
        (norm_inf(&f) < 1e-11).then_some((a, b))
    }
}

/// BEC, (1,∞), μ = 2: solves the 2×2 system in (α, β) with α ∈ (½, 1).
/// When several admissible roots exist the smallest bound is returned and
/// the count is reported in the diagnostics.
pub fn thm2_part2(epsilon: f64) -> Result<BoundResult> {
    check_unit("epsilon", epsilon, false)?;
    let setup = ClosedFormSetup::for_selector("thm2.2", epsilon, 1)?;
    if epsilon == 1.0 {
        return erased_everything(&setup);
    }
    let sys = Thm22 { e: epsilon };
    let mut roots: Vec<(f64, f64)> = Vec::new();
    let grid = 12;
    for i in 0..grid {
        for j in 0..grid {
            let a0 = 0.5 + 0.5 * (i as f64 + 0.5) / grid as f64;
            let b0 = (j as f64 + 0.5) / grid as f64;
            if let Some((a, b)) = sys.newton(a0, b0) {
                let params = Thm22::params(a, b);
                let interior = params.iter().all(|(_, v)| v > 0.0 && v < 1.0);
                if interior && !roots.iter().any(|&(ra, rb)| (ra - a).abs() + (rb - b).abs() < 1e-7) {
                    roots.push((a, b));
                }
            }
        }
    }
    let Some(best) = roots.iter().copied().min_by(|x, y| sys.bound(x.0, x.1).total_cmp(&sys.bound(y.0, y.1)))
    else {
        return boundary_minimum(&setup, epsilon);
    };
    let (a, b) = best;
    let mut diagnostics = Diagnostics { root_count: roots.len(), ..Default::default() };
    let res = sys.equations(a, b);
    diagnostics.notes.push(format!("equation residuals {:e} {:e}", res[0], res[1]));
    if roots.len() > 1 {
        diagnostics.notes.push(format!("{} admissible roots; smallest bound kept", roots.len()));
    }
    finish(&setup, sys.bound(a, b), Thm22::params(a, b), diagnostics)
}

/// Near ε = 1 the minimizer sits on the face α_00 = 0 and the 2x2 system
/// has no interior root; the constrained minimum is then found numerically.
fn boundary_minimum(setup: &ClosedFormSetup, epsilon: f64) -> Result<BoundResult> {
    let opts = GenericOptions { starts: 16, ..Default::default() };
    let mut r = generic_kkt_bound(&setup.family, &setup.channel, &setup.diagram, &opts).map_err(|e| {
        Error::NoConvergence(format!("no admissible root at epsilon = {epsilon} and boundary search failed: {e}"))
    })?;
    r.diagnostics.notes.push("no interior root; boundary minimum from the generic solver".into());
    Ok(r)
}

fn lambda_of(beta: f64) -> f64 {
    (1.0 - beta) / (2.0 * (3.0 - beta))
}

/// BEC, (1,2), μ = 2.
pub fn thm3_part1(epsilon: f64) -> Result<BoundResult> {
    check_unit("epsilon", epsilon, false)?;
    let setup = ClosedFormSetup::for_selector("thm3.1", epsilon, 1)?;
    if epsilon == 1.0 {
        return erased_everything(&setup);
    }
    let e = epsilon;
    let f = |b: f64| {
        3.0 * (1.0 - e) * b.ln() + (2.0 * e - 3.0 * e * e) * (2.0 - b).ln()
            - (2.0 + 2.0 * e - 4.0 * e * e) * (1.0 - b).ln()
    };
    let (beta, count) = single_root(f, "thm3.1")?;
    let l = lambda_of(beta);
    let bound = 0.5
        * (1.0 - e)
        * ((1.0 - e).powi(2) * (1.0 / beta).log2()
            + e * (1.0 - e) * ((2.0 - beta).powi(2) / beta).log2()
            + e * e * ((3.0 - beta).powi(2) / (2.0 - beta)).log2());
    let edge = 4.0 * l / (1.0 - 2.0 * l);
    let params = ParamMap::new()
        .with("alpha_10", edge)
        .with("alpha_1?", edge)
        .with("alpha_0?", (1.0 - 2.0 * l) / (1.0 + 2.0 * l))
        .with("alpha_?0", 4.0 * l / (1.0 + 2.0 * l))
        .with("alpha_??", 0.5 + l);
    finish(&setup, bound, params, Diagnostics { root_count: count, ..Default::default() })
}

/// BEC, (1,2), μ = 3.
pub fn thm3_part2(epsilon: f64) -> Result<BoundResult> {
    check_unit("epsilon", epsilon, false)?;
    let setup = ClosedFormSetup::for_selector("thm3.2", epsilon, 1)?;
    if epsilon == 1.0 {
        return erased_everything(&setup);
    }
    let e = epsilon;
    let f = |b: f64| {
        3.0 * (1.0 + e - 2.0 * e * e) * b.ln() + e * e * (3.0 - 4.0 * e) * (2.0 - b).ln()
            - 2.0 * (1.0 + e + e * e - 3.0 * e.powi(3)) * (1.0 - b).ln()
            - 4.0 * e * e * (1.0 - e) * std::f64::consts::LN_2
    };
    let (beta, count) = single_root(f, "thm3.2")?;
    let l = lambda_of(beta);
    let bound = 0.5
        * (1.0 - e)
        * ((1.0 + e - 2.0 * e * e) * (1.0 / beta).log2()
            + 2.0 * e.powi(3) * (3.0 - beta).log2()
            + e * e * (3.0 - 4.0 * e) * (2.0 - beta).log2());
    let mid = (1.0 - 6.0 * l) / (1.0 - 2.0 * l);
    let params = ParamMap::new()
        .with("alpha_010", 4.0 * l / (1.0 - 2.0 * l))
        .with("alpha_10?", mid)
        .with("alpha_1??", mid)
        .with("alpha_0??", 8.0 * l / (1.0 + 2.0 * l))
        .with("alpha_??0", 4.0 * l / (1.0 + 2.0 * l))
        .with("alpha_?0?", (1.0 - 2.0 * l) / (1.0 + 2.0 * l))
        .with("alpha_???", 0.5 + l);
    finish(&setup, bound, params, Diagnostics { root_count: count, ..Default::default() })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// BEC, (d,∞), μ = d with the shared α_k parameterization.
pub fn thm4_dinfty(d: usize, epsilon: f64) -> Result<BoundResult> {
    if d == 0 {
        return Err(Error::ParameterOutOfRange { name: "d".into(), value: 0.0 });
    }
    check_unit("epsilon", epsilon, false)?;
    let setup = ClosedFormSetup::for_selector("thm4", epsilon, d)?;
    if epsilon == 1.0 {
        return erased_everything(&setup);
    }
    let e = epsilon;
    let weights: Vec<f64> = (0..=d)
        .map(|i| binomial(d, i) * e.powi(i as i32) * (1.0 - e).powi((d - i) as i32))
        .collect();
    // Work in u = ln α₀: near ε = 1 the root falls far below the f64 range.
    let ln_mix = |u: f64, i: usize| -> f64 {
        let bar = -u.exp_m1();
        if i == 0 { u } else { (u.exp() + i as f64 * bar).ln() }
    };
    let f = |u: f64| {
        let bar = -u.exp_m1();
        let s: f64 = weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                w * ((d - i + 1) as f64 * ln_mix(u, i) - (d - i) as f64 * (i as f64 * bar).ln_1p())
            })
            .sum();
        s - bar.ln()
    };
    let mut lo = -1.0;
    while f(lo) > 0.0 {
        lo *= 2.0;
        if !lo.is_finite() {
            return Err(Error::NoConvergence("no root of the thm4 equation".into()));
        }
    }
    let mut hi = lo / 2.0;
    if lo == -1.0 {
        hi = -0.5;
        while f(hi) < 0.0 {
            hi *= 0.5;
        }
        hi = hi.min(-f64::MIN_POSITIVE);
    }
    let u = bisect(f, lo, hi, 0.0)?;
    let grid: Vec<f64> = (0..=2000).map(|j| -(10f64).powf(-12.0 + j as f64 * (14.0 + (-lo).log10()) / 2000.0)).collect();
    let count = scan_brackets(f, &grid).len().max(1);
    let bar = -u.exp_m1();
    let bound = (1.0 - e)
        * weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * ((i as f64 * bar).ln_1p() - ln_mix(u, i)))
            .sum::<f64>()
        / std::f64::consts::LN_2;
    let params = ParamMap::new().with(ALPHA_0, u.exp()).with(LN_ALPHA_0, u);
    finish(&setup, bound, params, Diagnostics { root_count: count, ..Default::default() })
}

/// BSC, (1,∞), μ = 1.
pub fn thm5_bsc(p: f64) -> Result<BoundResult> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::ParameterOutOfRange { name: "p".into(), value: p });
    }
    let setup = ClosedFormSetup::for_selector("thm5", p, 1)?;
    let q = 1.0 - p;
    let xlnx = |c: f64, x: f64| if c == 0.0 { 0.0 } else { c * x.ln() };
    let f = |a: f64| {
        let abar = 1.0 - a;
        let c1 = abar - p * p;
        let c2 = 2.0 * q - a * (2.0 - p);
        if c1 <= 0.0 || c2 < 0.0 {
            return f64::NAN;
        }
        2.0 * q * a.ln() + c1.ln()
            - (2.0 * xlnx(p, p)
                + 2.0 * (1.0 - 2.0 * p) * q.ln()
                + 2.0 * (1.0 - 2.0 * p) * abar.ln()
                + xlnx(2.0 * p, c2))
    };
    let bound_at = |a: f64| {
        let abar = 1.0 - a;
        let c1 = abar - p * p;
        let c2 = 2.0 * q - a * (2.0 - p);
        let last = if p == 0.0 { 0.0 } else { p * p * (c1 / (p * c2)).log2() };
        q * q * (1.0 / a).log2() + p * q * (c1 / (q * q * abar * abar)).log2() + last - h2(p)
    };
    let roots: Vec<f64> = unit_roots(f, ROOT_TOL).into_iter().filter(|a| bound_at(*a).is_finite()).collect();
    let a = roots
        .iter()
        .copied()
        .min_by(|x, y| bound_at(*x).total_cmp(&bound_at(*y)))
        .ok_or_else(|| Error::NoConvergence(format!("no root of the thm5 equation at p = {p}")))?;
    let abar = 1.0 - a;
    let c1 = abar - p * p;
    let b = q * q * abar / c1;
    let mut diagnostics = Diagnostics { root_count: roots.len(), ..Default::default() };
    let identity = (1.0 - 2.0 * p)
        * ((1.0 - 2.0 * p) * (a * (1.0 - b) / (b * (1.0 - a))).log2() - ((1.0 - b) / a).log2());
    if identity.is_finite() {
        diagnostics.notes.push(format!("constraint identity {identity:e}"));
    }
    finish(&setup, bound_at(a), ParamMap::new().with("a", a).with("b", b), diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::noiseless_capacity;

    const GOLDEN_CAP: f64 = 0.694_241_913_630_617_3;

    #[test]
    fn thm21_anchors() {
        let r = thm2_part1(0.0).unwrap();
        assert!((r.bound - GOLDEN_CAP).abs() < 1e-12);
        assert!((r.params.get("beta").unwrap() - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-13);
        assert!(r.kkt_residual_max < 1e-12);
        assert_eq!(thm2_part1(1.0).unwrap().bound, 0.0);
        let r = thm2_part1(0.5).unwrap();
        assert!((r.params.get("beta").unwrap() - 0.5).abs() < 1e-13);
        assert!((r.bound - (0.25 + 0.25 * 1.5f64.log2())).abs() < 1e-12);
    }

    #[test]
    fn thm22_reference_point() {
        let r = thm2_part2(0.1).unwrap();
        assert!((r.params.get("alpha_??").unwrap() - 0.71638).abs() < 1e-5);
        assert!((r.params.get("alpha_00").unwrap() - 0.59710).abs() < 1e-5);
        assert!((r.bound - 0.638169).abs() < 1e-6);
        assert!(r.kkt_residual_max < 1e-10, "{}", r.kkt_residual_max);
        assert!(r.bound <= thm2_part1(0.1).unwrap().bound);
    }

    #[test]
    fn thm3_at_zero_matches_noiseless() {
        let c = noiseless_capacity(&ConstraintSpec::finite(1, 2).unwrap());
        assert!((thm3_part1(0.0).unwrap().bound - c).abs() < 1e-9);
        assert!((thm3_part2(0.0).unwrap().bound - c).abs() < 1e-9);
        assert!((thm3_part1(0.1).unwrap().bound - 0.42302).abs() < 1e-5);
    }

    #[test]
    fn thm4_values() {
        assert!((thm4_dinfty(2, 0.0).unwrap().bound - 0.551463089745595).abs() < 1e-10);
        assert!((thm4_dinfty(3, 0.0).unwrap().bound - 0.464958417216209).abs() < 1e-10);
        for &e in &[0.0, 0.2, 0.7] {
            let a = thm4_dinfty(1, e).unwrap().bound;
            let b = thm2_part1(e).unwrap().bound;
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn thm5_values() {
        let r = thm5_bsc(0.1).unwrap();
        assert!((r.params.get("a").unwrap() - 0.537023).abs() < 1e-6);
        assert!((r.bound - 0.407428370186487).abs() < 1e-10);
        assert!((thm5_bsc(0.01).unwrap().bound - 0.64923250882).abs() < 1e-9);
        assert!((thm5_bsc(0.0).unwrap().bound - GOLDEN_CAP).abs() < 1e-10);
        assert!(thm5_bsc(0.5).unwrap().bound.abs() < 1e-9);
        assert!(thm5_bsc(0.6).is_err());
    }
}
