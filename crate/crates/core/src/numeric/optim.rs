//! Derivative-free-gradient local optimizers: BFGS on finite-difference
//! gradients, an augmented Lagrangian wrapper for equality constraints and a
//! Gauss–Newton projection onto the constraint manifold.

use super::linalg::{dot, norm_inf, solve};

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub f_tol: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { max_iter: 500, grad_tol: 1e-10, f_tol: 1e-15, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Central-difference gradient.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], rel: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = rel * (1.0 + x[i].abs());
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            let g = (fp - fm) / (2.0 * h);
            if g.is_finite() {
                g
            } else {
                0.0
            }
        })
        .collect()
}

/// Forward-difference Jacobian of a vector function (rows = outputs).
pub fn fd_jacobian<C: Fn(&[f64]) -> Vec<f64>>(c: &C, x: &[f64], c0: &[f64], rel: f64) -> Vec<Vec<f64>> {
    let m = c0.len();
    let mut jac = vec![vec![0.0; x.len()]; m];
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let h = rel * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let cp = c(&xp);
        xp[j] = x[j] - h;
        let cm = c(&xp);
        xp[j] = x[j];
        for i in 0..m {
            jac[i][j] = (cp[i] - cm[i]) / (2.0 * h);
        }
    }
    jac
}

/// BFGS with an Armijo backtracking line search. Non-finite objective values
/// are treated as infeasible and shrink the step.
pub fn bfgs<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: &BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut evals = 1;
    if n == 0 {
        return Minimum { x, fx, iterations: 0, evaluations: evals };
    }
    let mut g = fd_gradient(&f, &x, opts.fd_step);
    evals += 2 * n;
    let mut h: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();
    let mut iterations = 0;
    let mut stalls = 0;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        if norm_inf(&g) < opts.grad_tol {
            break;
        }
        let mut p: Vec<f64> = h.iter().map(|row| -dot(row, &g)).collect();
        let mut slope = dot(&p, &g);
        if slope >= 0.0 {
            // lost positive definiteness: restart from steepest descent
            for (i, row) in h.iter_mut().enumerate() {
                row.iter_mut().enumerate().for_each(|(j, v)| *v = (i == j) as u8 as f64);
            }
            p = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + t * b).collect();
            let fnew = f(&xn);
            evals += 1;
            if fnew.is_finite() && fnew <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fnew));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else { break };
        let gn = fd_gradient(&f, &xn, opts.fd_step);
        evals += 2 * n;
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let hy: Vec<f64> = h.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let decrease = fx - fnew;
        x = xn;
        g = gn;
        fx = fnew;
        if decrease <= opts.f_tol * (1.0 + fx.abs()) {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Minimum { x, fx, iterations, evaluations: evals }
}

#[derive(Debug, Clone, Copy)]
pub struct AugLagOptions {
    pub penalty_start: f64,
    pub penalty_max: f64,
    pub penalty_growth: f64,
    pub feas_tol: f64,
    pub inner: BfgsOptions,
}

impl Default for AugLagOptions {
    fn default() -> Self {
        Self {
            penalty_start: 1e2,
            penalty_max: 1e8,
            penalty_growth: 10.0,
            feas_tol: 1e-10,
            inner: BfgsOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConstrainedMinimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub residual: f64,
    pub outer_iterations: usize,
    pub evaluations: usize,
}

/// Minimize `f` subject to `c(x) = 0` by augmented-Lagrangian continuation
/// with geometric penalty growth.
pub fn augmented_lagrangian<F, C>(f: F, c: C, x0: &[f64], opts: &AugLagOptions) -> ConstrainedMinimum
where
    F: Fn(&[f64]) -> f64,
    C: Fn(&[f64]) -> Vec<f64>,
{
    let m = c(x0).len();
    let mut x = x0.to_vec();
    let mut lambda = vec![0.0; m];
    let mut rho = opts.penalty_start;
    let mut evals = 0;
    let mut outer = 0;
    loop {
        outer += 1;
        let lag = |z: &[f64]| {
            let fz = f(z);
            let cz = c(z);
            fz + dot(&lambda, &cz) + 0.5 * rho * dot(&cz, &cz)
        };
        let inner = bfgs(lag, &x, &opts.inner);
        evals += inner.evaluations;
        x = inner.x;
        let cx = c(&x);
        let res = norm_inf(&cx);
        for (l, ci) in lambda.iter_mut().zip(&cx) {
            *l += rho * ci;
        }
        if res <= opts.feas_tol || rho >= opts.penalty_max || outer >= 40 {
            break;
        }
        rho = (rho * opts.penalty_growth).min(opts.penalty_max);
    }
    let cx = c(&x);
    ConstrainedMinimum { fx: f(&x), residual: norm_inf(&cx), x, outer_iterations: outer, evaluations: evals }
}

/// Minimum-norm Gauss–Newton steps toward `c(x) = 0`, halving the step while
/// the residual does not decrease.
pub fn project<C: Fn(&[f64]) -> Vec<f64>>(c: C, x0: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    let mut cx = c(&x);
    let mut res = norm_inf(&cx);
    if cx.is_empty() {
        return (x, 0.0);
    }
    for _ in 0..max_iter {
        if res <= tol || !res.is_finite() {
            break;
        }
        let jac = fd_jacobian(&c, &x, &cx, 1e-7);
        let m = cx.len();
        let jjt: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| dot(&jac[i], &jac[j]) + if i == j { 1e-14 } else { 0.0 }).collect())
            .collect();
        let Some(u) = solve(jjt, cx.clone()) else { break };
        let step: Vec<f64> = (0..x.len()).map(|k| (0..m).map(|i| jac[i][k] * u[i]).sum()).collect();
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let xn: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a - t * b).collect();
            let cn = c(&xn);
            let rn = norm_inf(&cn);
            if rn.is_finite() && rn < res {
                x = xn;
                cx = cn;
                res = rn;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, res)
}

/// Coordinate-wise golden-section search, cycling until no coordinate moves
/// by more than `tol`. Each coordinate is confined to `bounds[i]`.
pub fn coordinate_golden<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    tol: f64,
    sweeps: usize,
) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    for _ in 0..sweeps {
        let mut moved: f64 = 0.0;
        for i in 0..x.len() {
            let (lo, hi) = bounds[i];
            let trial = std::cell::RefCell::new(x.clone());
            let (xi, _) = super::roots::golden_section_min(
                |v| {
                    trial.borrow_mut()[i] = v;
                    f(&trial.borrow())
                },
                lo,
                hi,
                tol,
            );
            moved = moved.max((xi - x[i]).abs());
            x[i] = xi;
        }
        if moved <= tol {
            break;
        }
    }
    let fx = f(&x);
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bfgs_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = bfgs(f, &[-1.2, 1.0], &BfgsOptions { max_iter: 2000, ..Default::default() });
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{:?}", m.x);
    }

    #[test]
    fn auglag_circle() {
        // min x + y on the unit circle -> (-1/√2, -1/√2)
        let f = |x: &[f64]| x[0] + x[1];
        let c = |x: &[f64]| vec![x[0] * x[0] + x[1] * x[1] - 1.0];
        let r = augmented_lagrangian(f, c, &[0.5, 0.1], &AugLagOptions::default());
        let (x, res) = project(c, &r.x, 1e-14, 20);
        let s = -std::f64::consts::FRAC_1_SQRT_2;
        assert!(res < 1e-13);
        assert!((x[0] - s).abs() < 1e-6 && (x[1] - s).abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn coordinate_golden_separable() {
        let f = |x: &[f64]| (x[0] - 0.2).powi(2) + (x[1] - 0.7).powi(2);
        let (x, fx) = coordinate_golden(f, &[0.5, 0.5], &[(0.0, 1.0), (0.0, 1.0)], 1e-9, 10);
        assert!((x[0] - 0.2).abs() < 1e-7 && (x[1] - 0.7).abs() < 1e-7 && fx < 1e-12);
    }
}
