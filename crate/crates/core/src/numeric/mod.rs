//! Small numerical kernels shared by the solvers.

pub mod linalg;
pub mod optim;
pub mod quadrature;
pub mod roots;

/// log2 with the conventions used throughout: `log2(0) = -inf`.
#[inline]
pub fn log2(x: f64) -> f64 {
    x.log2()
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Logistic map onto the open unit interval.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Element `index` (0-based, skipping the origin) of the Halton sequence in
/// `dim` dimensions, using the first `dim` primes as bases.
pub fn halton(index: usize, dim: usize) -> Vec<f64> {
    const PRIMES: [u64; 24] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83,
        89,
    ];
    assert!(dim <= PRIMES.len(), "Halton sequence supports up to 24 dimensions");
    PRIMES[..dim]
        .iter()
        .map(|&base| {
            let mut i = index as u64 + 1;
            let mut f = 1.0;
            let mut r = 0.0;
            while i > 0 {
                f /= base as f64;
                r += f * (i % base) as f64;
                i /= base;
            }
            r
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(h2(0.5), 1.0);
        assert_eq!(h2(0.0), 0.0);
        assert!((h2(0.11) - 0.499915958).abs() < 1e-8);
    }

    #[test]
    fn halton_first_points() {
        assert_eq!(halton(0, 2), vec![0.5, 1.0 / 3.0]);
        assert_eq!(halton(1, 2), vec![0.25, 2.0 / 3.0]);
        for i in 0..100 {
            assert!(halton(i, 5).iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn sigmoid_logit_roundtrip() {
        for &p in &[1e-9, 0.1, 0.5, 0.73, 1.0 - 1e-9] {
            assert!((sigmoid(logit(p)) - p).abs() < 1e-15);
        }
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }
}
