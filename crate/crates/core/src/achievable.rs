//! Simulated achievable rates: a Markov input on the run-length graph, sent
//! through the channel, with the output entropy rate estimated by a scaled
//! forward recursion over the input chain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{DiscreteChannel, GaussianChannel};
use crate::constraint::{ConstraintSpec, RunLimit};
use crate::error::{Error, Result};
use crate::numeric::linalg::solve;
use crate::numeric::optim::coordinate_golden;

/// A channel the simulator can drive.
#[derive(Debug, Clone, PartialEq)]
pub enum SimChannel {
    Discrete(DiscreteChannel),
    Gaussian(GaussianChannel),
}

impl SimChannel {
    /// h(Y|X) per symbol in bits (differential for the Gaussian case).
    pub fn conditional_entropy(&self) -> f64 {
        match self {
            SimChannel::Discrete(c) => c.conditional_entropy(),
            SimChannel::Gaussian(c) => c.conditional_entropy(),
        }
    }
}

impl From<DiscreteChannel> for SimChannel {
    fn from(c: DiscreteChannel) -> Self {
        SimChannel::Discrete(c)
    }
}

impl From<GaussianChannel> for SimChannel {
    fn from(c: GaussianChannel) -> Self {
        SimChannel::Gaussian(c)
    }
}

/// Markov input on the run-length states 0, 1, … (zeros since the last 1).
///
/// States below d must emit 0, state k (if finite) must emit 1, and in the
/// remaining states a 1 is emitted with the given probability. For k = ∞ the
/// state d absorbs further zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct InputProcess {
    spec: ConstraintSpec,
    one_prob: Vec<f64>,
    stationary: Vec<f64>,
}

impl InputProcess {
    /// `free` holds P(emit 1) for each free state d, d+1, …
    pub fn new(spec: ConstraintSpec, free: &[f64]) -> Result<Self> {
        let n_free = Self::free_count(spec);
        if free.len() != n_free {
            return Err(Error::UnsupportedCombination(format!(
                "constraint {spec} has {n_free} free states, got {} probabilities",
                free.len()
            )));
        }
        for (i, &p) in free.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::ParameterOutOfRange { name: format!("p{}", spec.d() + i), value: p });
            }
        }
        let d = spec.d();
        let states = Self::state_count(spec);
        let mut one_prob = vec![0.0; states];
        one_prob[d..d + n_free].copy_from_slice(free);
        if let RunLimit::Finite(k) = spec.k() {
            one_prob[k] = 1.0;
        }
        let mut proc = Self { spec, one_prob, stationary: Vec::new() };
        proc.stationary = proc.solve_stationary()?;
        Ok(proc)
    }

    /// The maxentropic chain: P(i → j) = A_ij v_j / (λ v_i) with v the
    /// Perron vector of the run-length graph.
    pub fn maxentropic(spec: ConstraintSpec) -> Result<Self> {
        let lambda = crate::constraint::noiseless_capacity(&spec).exp2();
        let d = spec.d();
        let states = Self::state_count(spec);
        let mut v = vec![0.0; states];
        match spec.k() {
            RunLimit::Finite(k) => {
                v[k] = 1.0 / lambda;
                for j in (0..k).rev() {
                    v[j] = (v[j + 1] + if j >= d { 1.0 } else { 0.0 }) / lambda;
                }
            }
            RunLimit::Infinite => {
                v[d] = 1.0 / (lambda - 1.0);
                for j in (0..d).rev() {
                    v[j] = v[j + 1] / lambda;
                }
            }
        }
        let free: Vec<f64> = (d..d + Self::free_count(spec)).map(|j| 1.0 / (lambda * v[j])).collect();
        Self::new(spec, &free)
    }

    pub fn free_count(spec: ConstraintSpec) -> usize {
        match spec.k() {
            RunLimit::Finite(k) => k - spec.d(),
            RunLimit::Infinite => 1,
        }
    }

    fn state_count(spec: ConstraintSpec) -> usize {
        match spec.k() {
            RunLimit::Finite(k) => k + 1,
            RunLimit::Infinite => spec.d() + 1,
        }
    }

    pub fn spec(&self) -> ConstraintSpec {
        self.spec
    }

    pub fn num_states(&self) -> usize {
        self.one_prob.len()
    }

    /// P(emit 1 | state) for every state.
    pub fn one_probs(&self) -> &[f64] {
        &self.one_prob
    }

    pub fn free_probs(&self) -> Vec<f64> {
        let d = self.spec.d();
        self.one_prob[d..d + Self::free_count(self.spec)].to_vec()
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// (next state, probability) for emitting `x` from `state`.
    pub fn step(&self, state: usize, x: u8) -> (usize, f64) {
        if x == 1 {
            (0, self.one_prob[state])
        } else {
            let next = match self.spec.k() {
                RunLimit::Infinite => (state + 1).min(self.spec.d()),
                RunLimit::Finite(_) => state + 1,
            };
            (next, 1.0 - self.one_prob[state])
        }
    }

    fn solve_stationary(&self) -> Result<Vec<f64>> {
        let n = self.num_states();
        // (Pᵀ − I)π = 0 with the last equation replaced by Σπ = 1.
        let mut a = vec![vec![0.0; n]; n];
        for s in 0..n {
            for x in 0..2 {
                let (t, p) = self.step(s, x);
                if p > 0.0 {
                    a[t][s] += p;
                }
            }
            a[s][s] -= 1.0;
        }
        a[n - 1] = vec![1.0; n];
        let mut b = vec![0.0; n];
        b[n - 1] = 1.0;
        let pi = solve(a, b).ok_or_else(|| Error::NoConvergence("input chain is not irreducible".into()))?;
        Ok(pi.into_iter().map(|p| p.max(0.0)).collect())
    }

    /// Entropy rate of the input chain in bits.
    pub fn entropy_rate(&self) -> f64 {
        self.stationary.iter().zip(&self.one_prob).map(|(pi, &p)| pi * crate::numeric::h2(p)).sum()
    }

    fn sample_start<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (s, &p) in self.stationary.iter().enumerate() {
            acc += p;
            if u < acc {
                return s;
            }
        }
        self.num_states() - 1
    }
}

/// Information-rate estimate from independent runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    /// Mean over runs, bits per channel use.
    pub estimate: f64,
    /// Standard error of the mean (floored at 1e-12).
    pub stderr: f64,
    pub n: usize,
    pub runs: usize,
    /// Smallest and largest per-step normalizer of the forward recursion.
    pub scale_range: (f64, f64),
}

impl RateEstimate {
    /// estimate − 3·stderr, floored at 0.
    pub fn lower(&self) -> f64 {
        (self.estimate - 3.0 * self.stderr).max(0.0)
    }
}

/// Minimum sequence length accepted by [`simulate_rate`].
pub const MIN_N: usize = 10_000;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `r`: SplitMix64 applied to `master + r·0x9E3779B97F4A7C15`.
pub fn run_seed(master: u64, run: usize) -> u64 {
    splitmix64(master.wrapping_add((run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

struct RunOutput {
    h_y: f64,
    min_scale: f64,
    max_scale: f64,
}

fn one_run(proc: &InputProcess, channel: &SimChannel, n: usize, seed: u64) -> Result<RunOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = proc.num_states();
    let mut state = proc.sample_start(&mut rng);
    let mut alpha = proc.stationary().to_vec();
    let mut next = vec![0.0; ns];
    let mut log_lik = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..n {
        let x = u8::from(rng.random::<f64>() < proc.one_probs()[state]);
        state = proc.step(state, x).0;
        let like: [f64; 2] = match channel {
            SimChannel::Discrete(c) => {
                let u: f64 = rng.random();
                let row = c.row(x);
                let mut y = row.len() - 1;
                let mut acc = 0.0;
                for (j, &p) in row.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        y = j;
                        break;
                    }
                }
                [c.prob(y, 0), c.prob(y, 1)]
            }
            SimChannel::Gaussian(c) => {
                let z: f64 = rng.sample(StandardNormal);
                let y = GaussianChannel::signal(x) + c.sigma() * z;
                [c.density(y, 0), c.density(y, 1)]
            }
        };
        next.iter_mut().for_each(|v| *v = 0.0);
        for (s, &a) in alpha.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for b in 0..2u8 {
                let (t, p) = proc.step(s, b);
                if p > 0.0 {
                    next[t] += a * p * like[b as usize];
                }
            }
        }
        let scale: f64 = next.iter().sum();
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::NumericalUnderflow(format!("forward recursion scale {scale}")));
        }
        lo = lo.min(scale);
        hi = hi.max(scale);
        log_lik += scale.ln();
        for (a, v) in alpha.iter_mut().zip(&next) {
            *a = v / scale;
        }
    }
    Ok(RunOutput { h_y: -log_lik / (n as f64 * std::f64::consts::LN_2), min_scale: lo, max_scale: hi })
}

/// Estimate (1/N)·I(X^N;Y^N) = ĥ(Y) − h(Y|X) from `runs` independent runs of
/// length `n`. Bit-identical for identical arguments.
pub fn simulate_rate(
    proc: &InputProcess,
    channel: &SimChannel,
    n: usize,
    runs: usize,
    seed: u64,
) -> Result<RateEstimate> {
    if n < MIN_N {
        return Err(Error::ParameterOutOfRange { name: "N".into(), value: n as f64 });
    }
    if runs == 0 {
        return Err(Error::ParameterOutOfRange { name: "runs".into(), value: 0.0 });
    }
    let outs: Vec<RunOutput> =
        (0..runs).into_par_iter().map(|r| one_run(proc, channel, n, run_seed(seed, r))).collect::<Result<_>>()?;
    let h_yx = channel.conditional_entropy();
    let rates: Vec<f64> = outs.iter().map(|o| o.h_y - h_yx).collect();
    let mean = rates.iter().sum::<f64>() / runs as f64;
    let var = if runs > 1 {
        rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (runs - 1) as f64
    } else {
        0.0
    };
    let stderr = (var / runs as f64).sqrt().max(1e-12);
    let min_scale = outs.iter().map(|o| o.min_scale).fold(f64::INFINITY, f64::min);
    let max_scale = outs.iter().map(|o| o.max_scale).fold(0.0, f64::max);
    Ok(RateEstimate { estimate: mean, stderr, n, runs, scale_range: (min_scale, max_scale) })
}

/// Maximize the point estimate over the free transition probabilities
/// (at most three), starting from the maxentropic chain.
pub fn optimize_input(
    spec: ConstraintSpec,
    channel: &SimChannel,
    n: usize,
    runs: usize,
    seed: u64,
) -> Result<(InputProcess, RateEstimate)> {
    let free = InputProcess::free_count(spec);
    if free > 3 {
        return Err(Error::UnsupportedCombination(format!("{free} free transition probabilities (at most 3)")));
    }
    let start = InputProcess::maxentropic(spec)?;
    let objective = |p: &[f64]| match InputProcess::new(spec, p).and_then(|q| simulate_rate(&q, channel, n, runs, seed)) {
        Ok(r) => -r.estimate,
        Err(_) => f64::INFINITY,
    };
    let bounds = vec![(0.01, 0.99); free];
    let (best, _) = coordinate_golden(objective, &start.free_probs(), &bounds, 2e-3, 2);
    let proc = InputProcess::new(spec, &best)?;
    let est = simulate_rate(&proc, channel, n, runs, seed)?;
    let base = simulate_rate(&start, channel, n, runs, seed)?;
    if base.estimate > est.estimate {
        Ok((start, base))
    } else {
        Ok((proc, est))
    }
}
