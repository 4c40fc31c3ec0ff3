//! Exhaustive finite-length ground truth: the maximum of the normalized
//! block divergence over every valid input word, and exact word counts.

use rayon::prelude::*;

use crate::channel::DiscreteChannel;
use crate::constraint::{bits_to_string, ConstraintSpec, RunLimit, StateDiagram};
use crate::error::{Error, Result};
use crate::family::{DiscreteMarkovFamily, ParamMap};
use crate::metric::{divergence_parts, kkt_residuals, uniform_init, EdgeMetricTable};

/// Upper limit on |𝒴|^N for [`brute_dual_bound`].
pub const ENUMERATION_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub n: usize,
    /// max over valid words of D(p_{Y^N|X^N} ‖ q_{Y^N}) / N, in bits.
    pub max_per_symbol: f64,
    pub argmax: Vec<u8>,
    /// max_per_symbol − t(q), with t(q) the largest normalized cycle metric.
    pub gap: f64,
    pub t_q: f64,
    /// Number of words enumerated.
    pub words: usize,
    /// Largest |direct − decomposed| divergence difference seen.
    pub decomposition_error: f64,
}

/// All valid words of length `n`, in lexicographic order.
pub fn valid_words(spec: &ConstraintSpec, n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(n);
    extend(spec, n, &mut word, &mut out);
    out
}

fn extend(spec: &ConstraintSpec, n: usize, word: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if word.len() == n {
        out.push(word.clone());
        return;
    }
    for b in 0..2u8 {
        word.push(b);
        if spec.is_valid_word(word) {
            extend(spec, n, word, out);
        }
        word.pop();
    }
}

/// Brute-force finite-N dual bound with a uniform law on the first μ outputs.
pub fn brute_dual_bound(
    fam: &DiscreteMarkovFamily,
    params: &ParamMap,
    channel: &DiscreteChannel,
    spec: &ConstraintSpec,
    n: usize,
) -> Result<OracleReport> {
    let mu = fam.mu();
    let needed = (channel.output_size() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded { needed, budget: ENUMERATION_BUDGET });
    }
    if n < mu {
        return Err(Error::TooLarge(format!("N = {n} is shorter than the memory {mu}")));
    }
    let g = StateDiagram::build(*spec, mu)?;
    let table = EdgeMetricTable::build(fam, params, channel, &g)?;
    let t_q = kkt_residuals(&table, &g.cycles()).max_normalized();
    let rows = fam.rows(params, channel)?;
    let init = uniform_init(channel, mu);
    let words = valid_words(spec, n);
    if words.len() as u128 != count_words(spec, n) {
        return Err(Error::NoConvergence(format!(
            "enumerated {} words but the transfer count is {}",
            words.len(),
            count_words(spec, n)
        )));
    }
    let scored: Vec<(f64, f64)> = words
        .par_iter()
        .map(|w| {
            let parts = divergence_parts(&rows, channel, mu, w, &init)?;
            let err = if parts.direct.is_finite() && parts.decomposed.is_finite() {
                (parts.direct - parts.decomposed).abs()
            } else if parts.direct.is_infinite() && parts.decomposed.is_infinite() {
                0.0
            } else {
                f64::INFINITY
            };
            Ok((parts.direct, err))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, s) in scored.iter().enumerate() {
        if s.0 > scored[best].0 {
            best = i;
        }
    }
    let max_per_symbol = scored[best].0 / n as f64;
    Ok(OracleReport {
        n,
        max_per_symbol,
        argmax: words[best].clone(),
        gap: max_per_symbol - t_q,
        t_q,
        words: words.len(),
        decomposition_error: scored.iter().map(|s| s.1).fold(0.0, f64::max),
    })
}

impl OracleReport {
    pub fn argmax_string(&self) -> String {
        bits_to_string(&self.argmax)
    }
}

/// |𝒳^N_{d,k}| by dynamic programming over run-length states, separating
/// the leading zero run (bounded only by k) from runs after a 1.
pub fn count_words(spec: &ConstraintSpec, n: usize) -> u128 {
    let d = spec.d();
    // zero counts beyond `cap` behave identically
    let cap = match spec.k() {
        RunLimit::Finite(k) => k,
        RunLimit::Infinite => d,
    };
    let fits = |j: usize| match spec.k() {
        RunLimit::Finite(k) => j <= k,
        RunLimit::Infinite => true,
    };
    let mut lead = vec![0u128; cap + 1];
    let mut after = vec![0u128; cap + 1];
    lead[0] = 1;
    for _ in 0..n {
        let mut nl = vec![0u128; cap + 1];
        let mut na = vec![0u128; cap + 1];
        for j in 0..=cap {
            if fits(j + 1) {
                let t = (j + 1).min(cap);
                nl[t] += lead[j];
                na[t] += after[j];
            }
            na[0] += lead[j];
            if j >= d {
                na[0] += after[j];
            }
        }
        lead = nl;
        after = na;
    }
    lead.iter().chain(&after).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_counts() {
        let s = ConstraintSpec::infinite(1);
        let got: Vec<u128> = (1..=6).map(|n| count_words(&s, n)).collect();
        assert_eq!(got, vec![2, 3, 5, 8, 13, 21]);
    }

    #[test]
    fn unconstrained_counts() {
        let s = ConstraintSpec::infinite(0);
        for n in 0..=64 {
            assert_eq!(count_words(&s, n), 1u128 << n);
        }
    }

    #[test]
    fn counts_match_filter() {
        for s in [
            ConstraintSpec::finite(1, 2).unwrap(),
            ConstraintSpec::finite(1, 3).unwrap(),
            ConstraintSpec::finite(2, 4).unwrap(),
            ConstraintSpec::infinite(2),
        ] {
            for n in 1..=12 {
                let direct = (0u32..1 << n)
                    .filter(|m| {
                        let w: Vec<u8> = (0..n).map(|i| ((m >> (n - 1 - i)) & 1) as u8).collect();
                        s.is_valid_word(&w)
                    })
                    .count();
                assert_eq!(count_words(&s, n), direct as u128, "{s} n={n}");
                assert_eq!(valid_words(&s, n).len(), direct);
            }
        }
        assert_eq!(count_words(&ConstraintSpec::finite(1, 2).unwrap(), 3), 4);
    }

    #[test]
    fn budget() {
        let fam = crate::family::bec_one_inf_mu1();
        let p = ParamMap::new().with("alpha", 0.5).with("beta", 0.5);
        let ch = DiscreteChannel::bec(0.2).unwrap();
        let s = ConstraintSpec::infinite(1);
        assert!(matches!(brute_dual_bound(&fam, &p, &ch, &s, 15), Err(Error::BudgetExceeded { .. })));
        let r = brute_dual_bound(&fam, &p, &ch, &s, 1).unwrap();
        assert_eq!(r.words, 2);
    }
}
