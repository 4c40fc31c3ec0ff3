//! Binary-input memoryless channels and relative-entropy primitives.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use crate::error::{Error, Result};

/// Which channel a family, bound or simulation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Bec,
    Bsc,
    Biawgn,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Bec => "bec",
            ChannelKind::Bsc => "bsc",
            ChannelKind::Biawgn => "biawgn",
        })
    }
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bec" => Ok(ChannelKind::Bec),
            "bsc" => Ok(ChannelKind::Bsc),
            "biawgn" | "awgn" => Ok(ChannelKind::Biawgn),
            _ => Err(Error::Parse(format!("unknown channel `{s}`"))),
        }
    }
}

/// A probability mass function over a fixed ordered alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf(Vec<f64>);

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidShapeParameters(format!("{probs:?} is not a pmf")));
        }
        Ok(Self(probs))
    }

    /// Construct without validation; callers guarantee the row is stochastic.
    pub(crate) fn from_vec_unchecked(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for Pmf {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// D(p1 ‖ p2) in bits; `+inf` when p1 is not absolutely continuous w.r.t. p2.
pub fn relative_entropy(p1: &[f64], p2: &[f64]) -> f64 {
    debug_assert_eq!(p1.len(), p2.len());
    let mut s = 0.0;
    for (&a, &b) in p1.iter().zip(p2) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            s += a * (a / b).log2();
        }
    }
    s.max(0.0)
}

/// Discrete binary-input channel. The BEC alphabet is `[0, ?, 1]` with the
/// erasure at index 1; the BSC alphabet is `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteChannel {
    kind: ChannelKind,
    param: f64,
    rows: [Vec<f64>; 2],
}

impl DiscreteChannel {
    pub fn bec(epsilon: f64) -> Result<Self> {
        check_unit("epsilon", epsilon)?;
        let e = epsilon;
        Ok(Self {
            kind: ChannelKind::Bec,
            param: e,
            rows: [vec![1.0 - e, e, 0.0], vec![0.0, e, 1.0 - e]],
        })
    }

    pub fn bsc(p: f64) -> Result<Self> {
        check_unit("p", p)?;
        Ok(Self { kind: ChannelKind::Bsc, param: p, rows: [vec![1.0 - p, p], vec![p, 1.0 - p]] })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// ε for the BEC, p for the BSC.
    pub fn param(&self) -> f64 {
        self.param
    }

    pub fn alphabet(&self) -> &'static [char] {
        match self.kind {
            ChannelKind::Bec => &['0', '?', '1'],
            _ => &['0', '1'],
        }
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    /// p(·|x).
    pub fn row(&self, x: u8) -> &[f64] {
        &self.rows[x as usize]
    }

    pub fn prob(&self, y: usize, x: u8) -> f64 {
        self.rows[x as usize][y]
    }

    /// Capacity without input constraint.
    pub fn unconstrained_capacity(&self) -> f64 {
        match self.kind {
            ChannelKind::Bec => 1.0 - self.param,
            _ => 1.0 - crate::numeric::h2(self.param),
        }
    }

    /// H(Y|X) per symbol in bits (identical for both inputs).
    pub fn conditional_entropy(&self) -> f64 {
        let row = &self.rows[0];
        -row.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name: name.into(), value: v })
    }
}

/// BIAWGN channel: Y = (−1)^X + N(0, σ²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChannel {
    sigma: f64,
}

impl GaussianChannel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::ParameterOutOfRange { name: "sigma".into(), value: sigma });
        }
        Ok(Self { sigma })
    }

    /// From Es/N0 = 1/σ² expressed in dB.
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        Self::new(10f64.powf(-snr_db / 20.0))
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn snr_db(&self) -> f64 {
        -20.0 * self.sigma.log10()
    }

    /// Signal point s(x) = (−1)^x.
    pub fn signal(x: u8) -> f64 {
        if x == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn density(&self, y: f64, x: u8) -> f64 {
        gaussian_pdf(Self::signal(x), self.sigma, y)
    }

    /// h(Y|X) = ½ log2(2πeσ²).
    pub fn conditional_entropy(&self) -> f64 {
        0.5 * (2.0 * PI * std::f64::consts::E * self.sigma * self.sigma).log2()
    }
}

/// ψ_{μ,σ}(x).
pub fn gaussian_pdf(mu: f64, sigma: f64, x: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// ln ψ_{μ,σ}(x).
pub fn ln_gaussian_pdf(mu: f64, sigma: f64, x: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - ((2.0 * PI).sqrt() * sigma).ln()
}

/// Ψ_{μ,σ}(a, b) = ∫_a^b ψ_{μ,σ}. Either end may be infinite.
pub fn gaussian_mass(mu: f64, sigma: f64, a: f64, b: f64) -> Result<f64> {
    if !(a <= b) || a == f64::INFINITY || b == f64::NEG_INFINITY {
        return Err(Error::InvalidInterval { a, b });
    }
    Ok(mass_unchecked(mu, sigma, a, b))
}

pub(crate) fn mass_unchecked(mu: f64, sigma: f64, a: f64, b: f64) -> f64 {
    let za = (a - mu) / (sigma * SQRT_2);
    let zb = (b - mu) / (sigma * SQRT_2);
    let v = if za >= 0.0 {
        0.5 * (libm::erfc(za) - libm::erfc(zb))
    } else if zb <= 0.0 {
        0.5 * (libm::erfc(-zb) - libm::erfc(-za))
    } else {
        1.0 - 0.5 * (libm::erfc(-za) + libm::erfc(zb))
    };
    v.max(0.0)
}

/// ln erfc(x), accurate where erfc underflows.
pub fn ln_erfc(x: f64) -> f64 {
    if x < 25.0 {
        libm::erfc(x).ln()
    } else {
        let x2 = x * x;
        let inv = 1.0 / (2.0 * x2);
        let series = 1.0 - inv + 3.0 * inv * inv - 15.0 * inv * inv * inv;
        -x2 - (x * PI.sqrt()).ln() + series.ln()
    }
}

/// ln Ψ_{μ,σ}(a, ∞).
pub fn ln_upper_mass(mu: f64, sigma: f64, a: f64) -> f64 {
    let z = (a - mu) / (sigma * SQRT_2);
    if z > 0.0 {
        ln_erfc(z) - std::f64::consts::LN_2
    } else {
        (1.0 - 0.5 * libm::erfc(-z)).ln()
    }
}

/// ln Ψ_{μ,σ}(−∞, b).
pub fn ln_lower_mass(mu: f64, sigma: f64, b: f64) -> f64 {
    ln_upper_mass(-mu, sigma, -b)
}
