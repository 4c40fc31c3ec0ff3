//! Gauss–Legendre quadrature: fixed rules, composite panels with
//! breakpoints, and an adaptive integrator used as an independent oracle.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// An n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on P_n from the Chebyshev-like initial
    /// guesses; weights from the derivative of P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 64-point rule.
    pub fn standard() -> &'static Self {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(64))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

/// Panel boundaries: the sorted, deduplicated breakpoints inside `[a, b]`,
/// each segment split into `per_segment` equal panels.
pub fn panels(a: f64, b: f64, breaks: &[f64], per_segment: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = vec![pts[0]];
    for w in pts.windows(2) {
        for j in 1..=per_segment {
            out.push(w[0] + (w[1] - w[0]) * j as f64 / per_segment as f64);
        }
    }
    out
}

/// Composite Gauss–Legendre over the given panel boundaries.
pub fn composite<F: Fn(f64) -> f64>(rule: &GaussLegendre, f: F, edges: &[f64]) -> f64 {
    edges.windows(2).map(|w| rule.integrate(&f, w[0], w[1])).sum()
}

/// Composite rule with panel doubling until two successive results agree to
/// `rel_tol` (relative, with an absolute floor of `rel_tol * 1e-3`).
pub fn doubling<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
) -> Result<f64> {
    let rule = GaussLegendre::standard();
    let mut per = 1;
    let mut prev = composite(rule, &f, &panels(a, b, breaks, per));
    let mut change = f64::INFINITY;
    for _ in 0..8 {
        per *= 2;
        let next = composite(rule, &f, &panels(a, b, breaks, per));
        change = (next - prev).abs();
        if change <= rel_tol * next.abs().max(1e-3) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged(change / prev.abs().max(1e-300)))
}

/// Recursive bisection with a 15-point rule compared against its two halves.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    let rule = RULE.get_or_init(|| GaussLegendre::new(15));
    fn rec<F: Fn(f64) -> f64>(
        rule: &GaussLegendre,
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = rule.integrate(f, a, m);
        let right = rule.integrate(f, m, b);
        let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
        if depth == 0 || (left + right - whole).abs() <= tol.max(floor) || m <= a || m >= b {
            return left + right;
        }
        rec(rule, f, a, m, left, 0.5 * tol, depth - 1)
            + rec(rule, f, m, b, right, 0.5 * tol, depth - 1)
    }
    let whole = rule.integrate(&f, a, b);
    rec(rule, &f, a, b, whole, tol, 30)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_positive_and_sum_to_two() {
        for n in [1, 2, 5, 15, 64] {
            let g = GaussLegendre::new(n);
            assert!(g.weights().iter().all(|&w| w > 0.0));
            assert!((g.weights().iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_on_polynomials() {
        let g = GaussLegendre::new(8);
        for deg in 0..16 {
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            let got = g.integrate(|x| x.powi(deg), -1.0, 1.0);
            assert!((got - exact).abs() < 1e-13, "degree {deg}: {got}");
        }
    }

    #[test]
    fn sixty_four_point_nodes_sorted() {
        let g = GaussLegendre::standard();
        assert_eq!(g.order(), 64);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn gaussian_integral() {
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = doubling(f, -12.0, 12.0, &[0.0], 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
        assert!((adaptive(f, -12.0, 12.0, 1e-14) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn panels_include_breaks() {
        let p = panels(0.0, 1.0, &[0.25, 2.0, 0.25], 2);
        assert_eq!(p, vec![0.0, 0.125, 0.25, 0.625, 1.0]);
    }
}
