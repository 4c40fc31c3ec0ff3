//! Scalar root finding and one-dimensional minimization.

use crate::error::{Error, Result};

/// Bisection on a sign-changing bracket.
///
/// Stops when the bracket is narrower than `tol` or an exact zero is hit.
pub fn bisect<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() || f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoConvergence(format!(
            "no sign change on [{lo}, {hi}]: f = ({f_lo}, {f_hi})"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sign-change brackets of `f` between consecutive grid points.
///
/// Non-finite values are skipped, so functions with singular endpoints can
/// be scanned directly.
pub fn scan_brackets<F>(f: F, grid: &[f64]) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in grid {
        let fx = f(x);
        if !fx.is_finite() {
            prev = None;
            continue;
        }
        if let Some((px, pf)) = prev {
            if pf == 0.0 {
                // already reported as the right end of the previous bracket
            } else if fx == 0.0 || pf.signum() != fx.signum() {
                out.push((px, x));
            }
        }
        prev = Some((x, fx));
    }
    out
}

/// A grid over the open unit interval: `n` uniform points plus a geometric
/// tail toward both endpoints, so roots close to 0 or 1 are bracketed too.
pub fn unit_grid(n: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (1..n).map(|i| i as f64 / n as f64).collect();
    let mut t = 1.0 / n as f64;
    while t > 1e-300 {
        t *= 0.1;
        g.push(t);
        if 1.0 - t < 1.0 {
            g.push(1.0 - t);
        }
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// All roots of `f` in (0, 1) found by a sign scan over [`unit_grid`]
/// followed by bisection to `tol`.
pub fn unit_roots<F>(f: F, tol: f64) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    let grid = unit_grid(10_000);
    scan_brackets(&f, &grid)
        .into_iter()
        .filter_map(|(a, b)| bisect(&f, a, b, tol).ok())
        .collect()
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_section_min<F>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_missing_sign_change() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn unit_roots_sees_tiny_roots() {
        let roots = unit_roots(|x| (x / 1e-7).ln(), 1e-20);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 1e-7).abs() < 1e-15);
    }

    #[test]
    fn golden_section_quadratic() {
        let (x, fx) = golden_section_min(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx < 1e-16);
    }
}
