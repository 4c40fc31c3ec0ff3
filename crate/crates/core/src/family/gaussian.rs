//! Piecewise-Gaussian test densities for the BIAWGN channel.

use crate::channel::{ln_gaussian_pdf, ln_lower_mass, ln_upper_mass};
use crate::error::{Error, Result};
use crate::family::ParamMap;

/// F(y₁) = (c₁e^t + c₂e^{−t}) / (c₃e^t + c₄e^{−t}) with t = y₁/σ².
///
/// Monotone in y₁, moving from c₂/c₄ (y₁ → −∞) to c₁/c₃ (y₁ → +∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassF(pub [f64; 4]);

impl ClassF {
    /// A member that is constant in y₁.
    pub fn constant(v: f64) -> Self {
        Self([v, v, 1.0, 1.0])
    }

    pub fn value(&self, y1: f64, sigma: f64) -> f64 {
        let [c1, c2, c3, c4] = self.0;
        let t = y1 / (sigma * sigma);
        if t >= 0.0 {
            let e = (-2.0 * t).exp();
            (c1 + c2 * e) / (c3 + c4 * e)
        } else {
            let e = (2.0 * t).exp();
            (c1 * e + c2) / (c3 * e + c4)
        }
    }

    /// Limits at −∞ and +∞.
    pub fn limits(&self) -> (f64, f64) {
        let [c1, c2, c3, c4] = self.0;
        (c2 / c4, c1 / c3)
    }

    fn sup(&self) -> f64 {
        let (a, b) = self.limits();
        a.max(b)
    }
}

/// The test density's shape at one value of y₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub d1: f64,
    pub d2: f64,
    pub delta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// q(y₂|y₁): weight `a` on a N(−1,σ²) piece truncated to (−∞, d₂), weight
/// `b` uniform on [d₂, d₁], weight `c = 1 − a − b` on a N(+1,σ²) piece
/// truncated to (d₁, ∞); d₁, Δ = d₁ − d₂, a and b are class-F functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseGaussianFamily {
    sigma: f64,
    d1: ClassF,
    delta: ClassF,
    a: ClassF,
    b: ClassF,
}

const GROUPS: [&str; 4] = ["delta", "Delta", "alpha", "beta"];

impl PiecewiseGaussianFamily {
    pub fn new(sigma: f64, d1: ClassF, delta: ClassF, a: ClassF, b: ClassF) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidShapeParameters(m.to_string()));
        if !(sigma > 0.0) {
            return bad("sigma must be positive");
        }
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        let [p1, p2, p3, p4] = d1.0;
        if !(in_unit(p1) && (-1.0..=1.0).contains(&p2) && in_unit(p3) && in_unit(p4)) {
            return bad("d1 parameters: delta2 in [-1,1], others in [0,1]");
        }
        for (name, f) in [("Delta", &delta), ("alpha", &a), ("beta", &b)] {
            if !f.0.iter().all(|&v| in_unit(v)) {
                return bad(&format!("{name} parameters must lie in [0,1]"));
            }
        }
        for (name, f) in [("delta", &d1), ("Delta", &delta), ("alpha", &a), ("beta", &b)] {
            if !(f.0[2] > 0.0 && f.0[3] > 0.0) {
                return bad(&format!("{name}3 and {name}4 must be positive"));
            }
        }
        if !(delta.0[0] > 0.0 && delta.0[1] > 0.0) {
            return bad("Delta must stay positive");
        }
        if a.sup() + b.sup() > 1.0 + 1e-12 {
            return bad("max(alpha1/alpha3, alpha2/alpha4) + max(beta1/beta3, beta2/beta4) > 1");
        }
        Ok(Self { sigma, d1, delta, a, b })
    }

    /// Read `delta1..4`, `Delta1..4`, `alpha1..4`, `beta1..4`.
    pub fn from_params(sigma: f64, p: &ParamMap) -> Result<Self> {
        let get = |g: &str| -> Result<ClassF> {
            let mut c = [0.0; 4];
            for (i, slot) in c.iter_mut().enumerate() {
                *slot = p.get(&format!("{g}{}", i + 1))?;
            }
            Ok(ClassF(c))
        };
        Self::new(sigma, get(GROUPS[0])?, get(GROUPS[1])?, get(GROUPS[2])?, get(GROUPS[3])?)
    }

    pub fn to_params(&self) -> ParamMap {
        let mut p = ParamMap::new();
        for (g, f) in GROUPS.iter().zip([self.d1, self.delta, self.a, self.b]) {
            for (i, v) in f.0.iter().enumerate() {
                p.insert(format!("{g}{}", i + 1), *v);
            }
        }
        p
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn shape(&self, y1: f64) -> Shape {
        let s = self.sigma;
        let d1 = self.d1.value(y1, s);
        let delta = self.delta.value(y1, s);
        let a = self.a.value(y1, s);
        let b = self.b.value(y1, s);
        Shape { d1, d2: d1 - delta, delta, a, b, c: (1.0 - a - b).max(0.0) }
    }

    /// ln q(y₂|y₁); `-inf` where the density vanishes.
    pub fn ln_pdf(&self, y1: f64, y2: f64) -> f64 {
        shape_ln_pdf(&self.shape(y1), self.sigma, y2)
    }

    pub fn pdf_value(&self, y1: f64, y2: f64) -> f64 {
        self.ln_pdf(y1, y2).exp()
    }
}

pub(crate) fn shape_ln_pdf(sh: &Shape, sigma: f64, y2: f64) -> f64 {
    if y2 < sh.d2 {
        sh.a.ln() + ln_gaussian_pdf(-1.0, sigma, y2) - ln_lower_mass(-1.0, sigma, sh.d2)
    } else if y2 <= sh.d1 {
        (sh.b / sh.delta).ln()
    } else {
        sh.c.ln() + ln_gaussian_pdf(1.0, sigma, y2) - ln_upper_mass(1.0, sigma, sh.d1)
    }
}

/// Memoryless symmetric density: mass a uniform on [−Δ, Δ], the rest split
/// evenly between the N(−1,σ²) tail below −Δ and the N(+1,σ²) tail above Δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnconstrainedAwgnFamily {
    pub sigma: f64,
    pub delta: f64,
    pub a: f64,
}

impl UnconstrainedAwgnFamily {
    pub fn new(sigma: f64, delta: f64, a: f64) -> Result<Self> {
        if !(sigma > 0.0 && delta > 0.0 && (0.0..=1.0).contains(&a)) {
            return Err(Error::InvalidShapeParameters(format!(
                "sigma={sigma}, Delta={delta}, a={a}"
            )));
        }
        Ok(Self { sigma, delta, a })
    }

    pub fn ln_pdf(&self, y: f64) -> f64 {
        let sh = Shape {
            d1: self.delta,
            d2: -self.delta,
            delta: 2.0 * self.delta,
            a: 0.5 * (1.0 - self.a),
            b: self.a,
            c: 0.5 * (1.0 - self.a),
        };
        shape_ln_pdf(&sh, self.sigma, y)
    }

    pub fn pdf_value(&self, y: f64) -> f64 {
        self.ln_pdf(y).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::gaussian_pdf;
    use crate::numeric::quadrature::adaptive;

    fn sample() -> PiecewiseGaussianFamily {
        PiecewiseGaussianFamily::new(
            0.7,
            ClassF([0.3, -0.4, 0.8, 0.6]),
            ClassF([0.9, 0.5, 0.7, 0.8]),
            ClassF([0.1, 0.5, 0.9, 0.8]),
            ClassF([0.2, 0.2, 0.6, 0.9]),
        )
        .unwrap()
    }

    fn total_mass(f: impl Fn(f64) -> f64, sigma: f64, breaks: &[f64]) -> f64 {
        let mut pts = vec![-1.0 - 12.0 * sigma];
        pts.extend(breaks.iter().copied());
        pts.push(1.0 + 12.0 * sigma);
        pts.sort_by(f64::total_cmp);
        pts.windows(2).map(|w| adaptive(&f, w[0], w[1], 1e-12)).sum()
    }

    #[test]
    fn normalized_for_every_y1() {
        let fam = sample();
        for &y1 in &[-5.0, -1.0, 0.0, 0.4, 3.0] {
            let sh = fam.shape(y1);
            let m = total_mass(|y| fam.pdf_value(y1, y), fam.sigma(), &[sh.d2, sh.d1]);
            assert!((m - 1.0).abs() < 1e-6, "y1={y1}: {m}");
        }
    }

    #[test]
    fn degenerate_weights_give_truncated_gaussian() {
        let sigma = 0.5;
        let fam = PiecewiseGaussianFamily::new(
            sigma,
            ClassF::constant(0.2),
            ClassF::constant(0.5),
            ClassF::constant(0.0),
            ClassF::constant(0.0),
        )
        .unwrap();
        let z = crate::channel::gaussian_mass(1.0, sigma, 0.2, f64::INFINITY).unwrap();
        assert!((fam.pdf_value(0.0, 0.9) - gaussian_pdf(1.0, sigma, 0.9) / z).abs() < 1e-12);
        assert_eq!(fam.pdf_value(0.0, 0.1), 0.0);
        // constant members: no dependence on y1
        assert_eq!(fam.pdf_value(-3.0, 0.9), fam.pdf_value(4.0, 0.9));
    }

    #[test]
    fn rejects_bad_shapes() {
        let ok = ClassF::constant(0.3);
        assert!(PiecewiseGaussianFamily::new(1.0, ok, ok, ClassF::constant(0.6), ClassF::constant(0.5))
            .is_err());
        assert!(PiecewiseGaussianFamily::new(1.0, ok, ClassF([0.0, 0.2, 1.0, 1.0]), ok, ok).is_err());
        assert!(PiecewiseGaussianFamily::new(1.0, ClassF([0.3, -0.5, 1.0, 1.0]), ok, ok, ok).is_ok());
        assert!(PiecewiseGaussianFamily::new(1.0, ClassF([-0.3, 0.5, 1.0, 1.0]), ok, ok, ok).is_err());
    }

    #[test]
    fn params_roundtrip() {
        let fam = sample();
        let back = PiecewiseGaussianFamily::from_params(0.7, &fam.to_params()).unwrap();
        assert_eq!(back, fam);
    }

    #[test]
    fn unconstrained_normalized() {
        let f = UnconstrainedAwgnFamily::new(0.8, 0.6, 0.3).unwrap();
        let m = total_mass(|y| f.pdf_value(y), 0.8, &[-0.6, 0.6]);
        assert!((m - 1.0).abs() < 1e-9);
    }
}
