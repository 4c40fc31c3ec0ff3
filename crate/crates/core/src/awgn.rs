//! BIAWGN: closed-form per-symbol divergences, quadrature edge metrics, the
//! (1,∞)-constrained bound over the piecewise-Gaussian family, the
//! unconstrained dual bound and the exact uniform-input capacity.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;

use crate::channel::{gaussian_pdf, ln_lower_mass, ln_upper_mass, mass_unchecked, GaussianChannel};
use crate::error::{Error, Result};
use crate::family::{ClassF, PiecewiseGaussianFamily, Shape, UnconstrainedAwgnFamily};
use crate::numeric::optim::{augmented_lagrangian, project, AugLagOptions, BfgsOptions};
use crate::numeric::quadrature::{adaptive, doubling, panels, GaussLegendre};
use crate::numeric::roots::golden_section_min;
use crate::numeric::{halton, logit, sigmoid};
use crate::solvers::{BoundResult, Diagnostics, SolverKind};

/// Half-width of the integration window in noise standard deviations.
pub const WINDOW: f64 = 12.0;

fn ln_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        m
    } else {
        m + ((a - m).exp() + (b - m).exp()).ln()
    }
}

/// D(p(·|x) ‖ q) in bits for a three-piece shape at noise level σ.
pub fn d_x_shape(sh: &Shape, x: u8, sigma: f64) -> f64 {
    let s = GaussianChannel::signal(x);
    let s2 = sigma * sigma;
    let inf = f64::INFINITY;
    let w_lo = mass_unchecked(s, sigma, -inf, sh.d2);
    let w_mid = mass_unchecked(s, sigma, sh.d2, sh.d1);
    let w_hi = mass_unchecked(s, sigma, sh.d1, inf);
    let mut v = 0.0;
    if w_lo > 0.0 {
        v += w_lo * ((1.0 + s) / s2 + ln_lower_mass(-1.0, sigma, sh.d2) - sh.a.ln());
    }
    if w_mid > 0.0 {
        v += w_mid * (sh.delta / ((2.0 * PI).sqrt() * sigma * 0.5f64.exp() * sh.b)).ln();
    }
    if w_hi > 0.0 {
        v += w_hi * ((1.0 - s) / s2 + ln_upper_mass(1.0, sigma, sh.d1) - sh.c.ln());
    }
    let xf = x as f64;
    v += ((sh.d1 - 1.0) / 2.0 - xf) * gaussian_pdf(s, sigma, sh.d1)
        - ((sh.d2 + 1.0) / 2.0 + (1.0 - xf)) * gaussian_pdf(s, sigma, sh.d2);
    (v / LN_2).max(0.0)
}

/// D_x(y₁) by adaptive integration of p log(p/q) over y₂, split at the
/// shape's breakpoints. Independent of the closed form; used as its oracle.
pub fn d_x_numeric(fam: &PiecewiseGaussianFamily, y1: f64, x: u8) -> f64 {
    let sigma = fam.sigma();
    let s = GaussianChannel::signal(x);
    let sh = fam.shape(y1);
    let f = |y: f64| {
        let p = gaussian_pdf(s, sigma, y);
        if p == 0.0 {
            0.0
        } else {
            p * (crate::channel::ln_gaussian_pdf(s, sigma, y) - fam.ln_pdf(y1, y)) / LN_2
        }
    };
    let (lo, hi) = (-1.0 - WINDOW * sigma, 1.0 + WINDOW * sigma);
    let mut pts = vec![lo, hi, sh.d1, sh.d2];
    pts.retain(|p| *p >= lo && *p <= hi);
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| adaptive(f, w[0], w[1], 1e-13)).sum()
}

/// ∫ q(y₂|y₁) dy₂ by quadrature (should be 1).
pub fn density_mass(fam: &PiecewiseGaussianFamily, y1: f64) -> f64 {
    let sigma = fam.sigma();
    let sh = fam.shape(y1);
    let (lo, hi) = (-1.0 - WINDOW * sigma, 1.0 + WINDOW * sigma);
    let mut pts = vec![lo.min(sh.d2 - WINDOW * sigma), hi.max(sh.d1 + WINDOW * sigma), sh.d1, sh.d2];
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| adaptive(|y| fam.pdf_value(y1, y), w[0], w[1], 1e-13)).sum()
}

/// An instance of the (1,∞)-constrained problem: a feasible piecewise-Gaussian
/// family at a fixed σ.
#[derive(Debug, Clone, Copy)]
pub struct AwgnBoundProblem {
    pub family: PiecewiseGaussianFamily,
}

/// Edge metrics of the (1,∞) diagram with memory 1 (the word 11 is absent).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnMetrics {
    pub t00: f64,
    pub t01: f64,
    pub t10: f64,
}

impl AwgnMetrics {
    /// T(01) + T(10) − 2T(00).
    pub fn residual(&self) -> f64 {
        self.t01 + self.t10 - 2.0 * self.t00
    }

    /// max(T(00), (T(01) + T(10))/2): the larger normalized cycle metric.
    pub fn bound(&self) -> f64 {
        self.t00.max(0.5 * (self.t01 + self.t10))
    }
}

impl AwgnBoundProblem {
    pub fn new(family: PiecewiseGaussianFamily) -> Self {
        Self { family }
    }

    pub fn sigma(&self) -> f64 {
        self.family.sigma()
    }

    /// D_x(y₁) in bits.
    pub fn d_x(&self, y1: f64, x: u8) -> f64 {
        d_x_shape(&self.family.shape(y1), x, self.sigma())
    }

    fn window(&self, x1: u8) -> (f64, f64) {
        let s = GaussianChannel::signal(x1);
        (s - WINDOW * self.sigma(), s + WINDOW * self.sigma())
    }

    fn integrand(&self, x1x2: [u8; 2]) -> impl Fn(f64) -> f64 + '_ {
        let s = GaussianChannel::signal(x1x2[0]);
        let sigma = self.sigma();
        move |y| self.d_x(y, x1x2[1]) * gaussian_pdf(s, sigma, y)
    }

    fn breaks(&self, x1: u8) -> Vec<f64> {
        let s = GaussianChannel::signal(x1);
        let sg = self.sigma();
        vec![s - 3.0 * sg, s - sg, s, s + sg, s + 3.0 * sg, 0.0]
    }

    /// T(x₁x₂) to relative accuracy 1e-7 by panel doubling.
    pub fn edge_metric(&self, x1x2: [u8; 2]) -> Result<f64> {
        let (a, b) = self.window(x1x2[0]);
        doubling(self.integrand(x1x2), a, b, &self.breaks(x1x2[0]), 1e-7)
    }

    pub fn metrics(&self) -> Result<AwgnMetrics> {
        Ok(AwgnMetrics {
            t00: self.edge_metric([0, 0])?,
            t01: self.edge_metric([0, 1])?,
            t10: self.edge_metric([1, 0])?,
        })
    }

    /// Fixed composite rule used inside the optimizer.
    fn fast_metrics(&self, rule: &GaussLegendre, per_segment: usize) -> AwgnMetrics {
        let mut t = [0.0; 3];
        for (slot, x1x2) in t.iter_mut().zip([[0, 0], [0, 1], [1, 0]]) {
            let (a, b) = self.window(x1x2[0]);
            let edges = panels(a, b, &self.breaks(x1x2[0]), per_segment);
            *slot = crate::numeric::quadrature::composite(rule, self.integrand(x1x2), &edges);
        }
        AwgnMetrics { t00: t[0], t01: t[1], t10: t[2] }
    }
}

/// awgn_edge_metric for a 2-bit edge word.
pub fn awgn_edge_metric(x1x2: [u8; 2], prob: &AwgnBoundProblem) -> Result<f64> {
    prob.edge_metric(x1x2)
}

/// Number of unconstrained coordinates used by the optimizer.
const DIM: usize = 18;

/// Map unconstrained coordinates onto a feasible family: sigmoids for the
/// unit-interval parameters, tanh for δ₂, and mass shares m_a + m_b < 1
/// times ratios in (0,1) for the numerators of a and b. Coordinates are
/// clamped to ±50 (NaN to 0), so every input decodes.
pub fn decode(sigma: f64, z: &[f64]) -> PiecewiseGaussianFamily {
    let z: Vec<f64> = z.iter().map(|&v| if v.is_nan() { 0.0 } else { v.clamp(-50.0, 50.0) }).collect();
    let s = |i: usize| sigmoid(z[i]);
    let d1 = ClassF([s(0), z[1].tanh(), s(2).max(1e-12), s(3).max(1e-12)]);
    let delta = ClassF([s(4).max(1e-12), s(5).max(1e-12), s(6).max(1e-12), s(7).max(1e-12)]);
    let (a3, a4, b3, b4) = (s(8).max(1e-12), s(9).max(1e-12), s(10).max(1e-12), s(11).max(1e-12));
    let m = z[12].max(z[13]).max(0.0);
    let (ea, eb, e0) = ((z[12] - m).exp(), (z[13] - m).exp(), (-m).exp());
    let tot = ea + eb + e0;
    let (ma, mb) = (ea / tot, eb / tot);
    let a = ClassF([ma * s(14) * a3, ma * s(15) * a4, a3, a4]);
    let b = ClassF([mb * s(16) * b3, mb * s(17) * b4, b3, b4]);
    PiecewiseGaussianFamily::new(sigma, d1, delta, a, b).expect("decoded parameters are feasible")
}

/// A starting point for the shape heuristic: for y₁ ≪ 0 the density tracks
/// N(+1,σ²) (a, b ≈ 0, d₁ ≈ −1); for y₁ ≫ 0 it splits mass between both
/// signal points around d₁ ≈ 0.
pub fn heuristic_seed() -> Vec<f64> {
    let mut z = vec![0.0; DIM];
    z[0] = logit(0.02);
    z[1] = (-0.9f64).atanh();
    z[2] = 0.0;
    z[3] = 0.0;
    z[4] = logit(0.4);
    z[5] = logit(0.05);
    z[6] = 0.0;
    z[7] = 0.0;
    z[8] = 0.0;
    z[9] = 0.0;
    z[10] = 0.0;
    z[11] = 0.0;
    z[12] = 0.0;
    z[13] = -2.0;
    z[14] = logit(0.9);
    z[15] = logit(0.01);
    z[16] = logit(0.5);
    z[17] = logit(0.05);
    z
}

#[derive(Debug, Clone, Copy)]
pub struct AwgnOptions {
    /// Multi-start count including the heuristic seed (at least 16).
    pub starts: usize,
    pub residual_tol: f64,
    pub inner_iterations: usize,
    /// Panels per segment of the optimizer's fixed quadrature rule.
    pub panels: usize,
}

impl Default for AwgnOptions {
    fn default() -> Self {
        Self { starts: 16, residual_tol: 1e-6, inner_iterations: 150, panels: 1 }
    }
}

struct Found {
    z: Vec<f64>,
    fast_bound: f64,
}

/// Minimize T(00) subject to T(01) + T(10) = 2T(00) over the class-F family
/// at noise level σ. Extra starting points (e.g. the optimum at a nearby σ)
/// may be passed in `warm`.
pub fn constrained_awgn_bound(sigma: f64, opts: &AwgnOptions, warm: &[Vec<f64>]) -> Result<(BoundResult, Vec<f64>)> {
    GaussianChannel::new(sigma)?;
    let rule = GaussLegendre::new(24);
    let per = opts.panels;
    let fast = |z: &[f64]| AwgnBoundProblem::new(decode(sigma, z)).fast_metrics(&rule, per);
    let al = AugLagOptions {
        penalty_start: 1e2,
        penalty_max: 1e8,
        penalty_growth: 10.0,
        feas_tol: 1e-9,
        inner: BfgsOptions { max_iter: opts.inner_iterations, grad_tol: 1e-9, f_tol: 1e-12, fd_step: 1e-6 },
    };
    let mut seeds: Vec<Vec<f64>> = warm.to_vec();
    seeds.push(heuristic_seed());
    let mut i = 0;
    while seeds.len() < opts.starts.max(16) {
        seeds.push(halton(i, DIM).into_iter().map(|u| 2.0 * logit(u)).collect());
        i += 1;
    }
    let found: Vec<Found> = seeds
        .par_iter()
        .map(|z0| {
            let m = augmented_lagrangian(|z| fast(z).t00, |z| vec![fast(z).residual()], z0, &al);
            let (z, _) = project(|z| vec![fast(z).residual()], &m.x, 1e-12, 30);
            let t = fast(&z);
            Found { fast_bound: if t.residual().abs() < 1e-6 { t.bound() } else { f64::INFINITY }, z }
        })
        .collect();
    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by(|&a, &b| found[a].fast_bound.total_cmp(&found[b].fast_bound));

    let accurate = |z: &[f64]| AwgnBoundProblem::new(decode(sigma, z)).metrics();
    let mut best_residual = f64::INFINITY;
    for &k in order.iter().take(4) {
        if !found[k].fast_bound.is_finite() {
            break;
        }
        let resid = |z: &[f64]| vec![accurate(z).map(|m| m.residual()).unwrap_or(f64::NAN)];
        let (z, res) = project(resid, &found[k].z, 1e-9, 20);
        best_residual = best_residual.min(res);
        if res > opts.residual_tol {
            continue;
        }
        let m = accurate(&z)?;
        let fam = decode(sigma, &z);
        let accepted = found.iter().filter(|f| f.fast_bound.is_finite()).count();
        let finite: Vec<f64> = found.iter().map(|f| f.fast_bound).filter(|b| b.is_finite()).collect();
        let dispersion = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - finite.iter().copied().fold(f64::INFINITY, f64::min);
        let result = BoundResult {
            bound: m.bound(),
            params: fam.to_params(),
            kkt_residual_max: m.residual().abs(),
            solver: SolverKind::Generic,
            diagnostics: Diagnostics {
                iterations: 0,
                starts: seeds.len(),
                accepted_starts: accepted,
                dispersion,
                root_count: 0,
                notes: vec![format!("T00={} T01={} T10={}", m.t00, m.t01, m.t10)],
            },
        };
        return Ok((result, z));
    }
    Err(Error::NoFeasiblePoint { residual: best_residual })
}

/// The divergence of the memoryless symmetric density in bits (identical
/// for both inputs), with a = Ψ_{1,σ}(−Δ, Δ).
pub fn unconstrained_objective(sigma: f64, delta: f64) -> f64 {
    let p = mass_unchecked(1.0, sigma, -delta, delta);
    let lo = ln_lower_mass(1.0, sigma, -delta);
    let hi = ln_upper_mass(1.0, sigma, delta);
    let ln_rest = ln_add_exp(lo, hi);
    let rest = ln_rest.exp();
    let mut v = 0.0;
    if rest > 0.0 {
        v += rest * (LN_2 + hi - ln_rest);
    }
    if p > 0.0 {
        v += p * (2.0 * delta / (p * (2.0 * PI).sqrt() * sigma)).ln();
    }
    v += 2.0 / (sigma * sigma) * lo.exp() - 2.0 * gaussian_pdf(1.0, sigma, -delta)
        + 0.5
            * ((delta - 1.0) * gaussian_pdf(1.0, sigma, delta)
                + (delta + 1.0) * gaussian_pdf(1.0, sigma, -delta)
                - p);
    v / LN_2
}

/// Unconstrained BIAWGN dual bound: golden-section over Δ > 0 with
/// a(σ) = Ψ_{1,σ}(−Δ, Δ).
pub fn unconstrained_awgn_bound(sigma: f64) -> Result<BoundResult> {
    GaussianChannel::new(sigma)?;
    let hi = 1.0 + WINDOW * sigma;
    let (delta, bound) = golden_section_min(|d| unconstrained_objective(sigma, d), 1e-9, hi, 1e-9);
    let a = mass_unchecked(1.0, sigma, -delta, delta);
    let fam = UnconstrainedAwgnFamily::new(sigma, delta, a)?;
    let sym = symmetric_shape(&fam);
    let d0 = d_x_shape(&sym, 0, sigma);
    let d1 = d_x_shape(&sym, 1, sigma);
    let mut params = crate::family::ParamMap::new();
    params.insert("Delta", delta).insert("a", a);
    Ok(BoundResult {
        bound: bound.max(0.0),
        params,
        kkt_residual_max: (d0 - d1).abs(),
        solver: SolverKind::ClosedForm,
        diagnostics: Diagnostics { notes: vec![format!("D0={d0} D1={d1}")], ..Default::default() },
    })
}

/// The unconstrained density written as a three-piece shape.
pub fn symmetric_shape(f: &UnconstrainedAwgnFamily) -> Shape {
    Shape {
        d1: f.delta,
        d2: -f.delta,
        delta: 2.0 * f.delta,
        a: 0.5 * (1.0 - f.a),
        b: f.a,
        c: 0.5 * (1.0 - f.a),
    }
}

/// Uniform-input BIAWGN capacity 1 − E[log₂(1 + e^{−2Y/σ²})], Y ~ N(1, σ²).
pub fn biawgn_capacity(sigma: f64) -> Result<f64> {
    GaussianChannel::new(sigma)?;
    let s2 = sigma * sigma;
    let f = |y: f64| {
        let t = -2.0 * y / s2;
        let softplus = if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
        gaussian_pdf(1.0, sigma, y) * softplus / LN_2
    };
    let lo = 1.0 - WINDOW * sigma;
    let hi = 1.0 + WINDOW * sigma;
    let loss = doubling(f, lo, hi, &[0.0, 1.0 - sigma, 1.0, 1.0 + sigma], 1e-12)?;
    Ok((1.0 - loss).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    
    #[test]
    fn closed_form_matches_integration() {
        let z: Vec<f64> = (0..DIM).map(|i| ((i * 7 + 3) % 11) as f64 / 5.0 - 1.0).collect();
        for sigma in [0.4, 0.8, 1.5] {
            let fam = decode(sigma, &z);
            let prob = AwgnBoundProblem::new(fam);
            for &y1 in &[-2.0, -0.3, 0.0, 0.7, 2.5] {
                for x in 0..2 {
                    let a = prob.d_x(y1, x);
                    let b = d_x_numeric(&fam, y1, x);
                    assert!((a - b).abs() < 1e-6, "sigma={sigma} y1={y1} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn small_sigma_limit() {
        let sigma = 0.05;
        let fam = PiecewiseGaussianFamily::new(
            sigma,
            ClassF::constant(0.2),
            ClassF::constant(0.5),
            ClassF::constant(0.3),
            ClassF::constant(0.1),
        )
        .unwrap();
        let d = AwgnBoundProblem::new(fam).d_x(0.0, 0);
        assert!((d - (-(0.6f64).log2())).abs() < 1e-3, "{d}");
    }

    #[test]
    fn unconstrained_matches_shape_divergence() {
        for (sigma, delta) in [(0.8, 0.5), (1.5, 1.0), (0.5, 0.2)] {
            let a = mass_unchecked(1.0, sigma, -delta, delta);
            let fam = UnconstrainedAwgnFamily::new(sigma, delta, a).unwrap();
            let sh = symmetric_shape(&fam);
            let v = unconstrained_objective(sigma, delta);
            assert!((d_x_shape(&sh, 0, sigma) - v).abs() < 1e-12);
            assert!((d_x_shape(&sh, 1, sigma) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn unconstrained_above_capacity() {
        for db in [-2.0, 0.0, 4.0, 8.0] {
            let sigma = GaussianChannel::from_snr_db(db).unwrap().sigma();
            let u = unconstrained_awgn_bound(sigma).unwrap();
            let c = biawgn_capacity(sigma).unwrap();
            assert!(u.bound >= c, "{db} dB: {} < {c}", u.bound);
            assert!(u.kkt_residual_max < 1e-12);
        }
        assert!(unconstrained_awgn_bound(100.0).unwrap().bound < 1e-3);
    }

    #[test]
    fn capacity_reference_value() {
        // 0 dB: C ≈ 0.4859 bits
        let c = biawgn_capacity(1.0).unwrap();
        assert!((c - 0.4859).abs() < 1e-3, "{c}");
    }
}
