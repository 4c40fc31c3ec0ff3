//! Parameterized Markov test distributions on channel outputs.
//!
//! Discrete families assign every length-μ output history a row rule: either
//! a fixed channel row or a template with named parameters. Histories are
//! encoded as base-|𝒴| integers with the oldest symbol most significant.

mod gaussian;
mod params;

pub use gaussian::{ClassF, PiecewiseGaussianFamily, Shape, UnconstrainedAwgnFamily};
pub use params::ParamMap;

use std::collections::BTreeSet;

use crate::channel::{ChannelKind, DiscreteChannel, Pmf};
use crate::constraint::{ConstraintSpec, RunLimit};
use crate::error::{Error, Result};

/// How one conditional row q(·|y^μ) is formed.
#[derive(Debug, Clone, PartialEq)]
pub enum RowRule {
    /// q(·|y^μ) = p(·|x) for the given input bit.
    ChannelRow(u8),
    /// BEC row [w(1−ε), ε, (1−w)(1−ε)] with w the named parameter.
    Mix(String),
    /// BSC row [w, 1−w] with w the named parameter.
    FreeBinary(String),
    /// BEC row with w = α_k, ᾱ_k = ᾱ₀/(1 + k ᾱ₀), driven by `alpha_0`.
    DkShared { k: usize },
}

impl RowRule {
    pub fn is_fixed(&self) -> bool {
        matches!(self, RowRule::ChannelRow(_))
    }
}

/// Name of the single parameter of the (d,∞) family.
pub const ALPHA_0: &str = "alpha_0";
/// Optional ln α₀; takes precedence over [`ALPHA_0`] when α₀ underflows.
pub const LN_ALPHA_0: &str = "ln_alpha_0";

/// A memory-μ Markov test distribution family over a discrete alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMarkovFamily {
    name: String,
    kind: ChannelKind,
    mu: usize,
    alphabet: &'static [char],
    rules: Vec<RowRule>,
    params: Vec<String>,
}

impl DiscreteMarkovFamily {
    /// Build from a rule for each history (given as a symbol string).
    pub fn from_rules<F>(name: &str, kind: ChannelKind, mu: usize, rule: F) -> Self
    where
        F: Fn(&str) -> RowRule,
    {
        let alphabet = alphabet_of(kind);
        let q = alphabet.len();
        let rules: Vec<RowRule> =
            (0..q.pow(mu as u32)).map(|h| rule(&history_string(alphabet, mu, h))).collect();
        let mut seen = BTreeSet::new();
        let mut params = Vec::new();
        for r in &rules {
            let name = match r {
                RowRule::Mix(n) | RowRule::FreeBinary(n) => n.clone(),
                RowRule::DkShared { .. } => ALPHA_0.to_string(),
                RowRule::ChannelRow(_) => continue,
            };
            if seen.insert(name.clone()) {
                params.push(name);
            }
        }
        Self { name: name.to_string(), kind, mu, alphabet, rules, params }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn alphabet(&self) -> &'static [char] {
        self.alphabet
    }

    /// Free parameter names in first-use order over histories.
    pub fn param_names(&self) -> &[String] {
        &self.params
    }

    pub fn num_histories(&self) -> usize {
        self.rules.len()
    }

    pub fn rule(&self, history: usize) -> &RowRule {
        &self.rules[history]
    }

    pub fn history_index(&self, history: &str) -> Result<usize> {
        let chars: Vec<char> = history.chars().collect();
        if chars.len() != self.mu {
            return Err(Error::Parse(format!("history `{history}` must have length {}", self.mu)));
        }
        chars.iter().try_fold(0usize, |acc, c| {
            let i = self
                .alphabet
                .iter()
                .position(|a| a == c)
                .ok_or_else(|| Error::Parse(format!("`{c}` is not an output symbol")))?;
            Ok(acc * self.alphabet.len() + i)
        })
    }

    pub fn history_label(&self, history: usize) -> String {
        history_string(self.alphabet, self.mu, history)
    }

    /// Histories grouped by rule, in first-appearance order.
    pub fn classes(&self) -> Vec<(RowRule, Vec<String>)> {
        let mut out: Vec<(RowRule, Vec<String>)> = Vec::new();
        for (h, r) in self.rules.iter().enumerate() {
            let label = self.history_label(h);
            match out.iter_mut().find(|(rr, _)| rr == r) {
                Some((_, v)) => v.push(label),
                None => out.push((r.clone(), vec![label])),
            }
        }
        out
    }

    fn check_channel(&self, channel: &DiscreteChannel) -> Result<()> {
        if channel.kind() != self.kind {
            return Err(Error::UnsupportedCombination(format!(
                "family {} expects a {} channel",
                self.name, self.kind
            )));
        }
        Ok(())
    }

    /// q(·|history) under the given parameters.
    pub fn conditional_row(&self, params: &ParamMap, channel: &DiscreteChannel, history: &str) -> Result<Pmf> {
        self.check_channel(channel)?;
        let h = self.history_index(history)?;
        row_for(&self.rules[h], params, channel).map(Pmf::from_vec_unchecked)
    }

    /// All conditional rows, indexed by history.
    pub fn rows(&self, params: &ParamMap, channel: &DiscreteChannel) -> Result<Vec<Vec<f64>>> {
        self.check_channel(channel)?;
        for name in &self.params {
            params.get_unit(name)?;
        }
        self.rules.iter().map(|r| row_for(r, params, channel)).collect()
    }

    /// All conditional rows as natural-log probabilities.
    pub fn ln_rows(&self, params: &ParamMap, channel: &DiscreteChannel) -> Result<Vec<Vec<f64>>> {
        self.check_channel(channel)?;
        for name in &self.params {
            if !(name == ALPHA_0 && params.get(LN_ALPHA_0).is_ok()) {
                params.get_unit(name)?;
            }
        }
        self.rules.iter().map(|r| ln_row_for(r, params, channel)).collect()
    }
}

fn ln_alpha_0(params: &ParamMap) -> Result<f64> {
    match params.get(LN_ALPHA_0) {
        Ok(u) if u <= 0.0 => Ok(u),
        Ok(u) => Err(Error::ParameterOutOfRange { name: LN_ALPHA_0.into(), value: u }),
        Err(_) => Ok(params.get_unit(ALPHA_0)?.ln()),
    }
}

fn ln_row_for(rule: &RowRule, params: &ParamMap, channel: &DiscreteChannel) -> Result<Vec<f64>> {
    if let RowRule::DkShared { k } = rule {
        let e = channel.param();
        let u = ln_alpha_0(params)?;
        let bar = -u.exp_m1();
        let kb = *k as f64 * bar;
        let ln_a = if *k == 0 { u } else { (u.exp() + kb).ln() - kb.ln_1p() };
        let ln_abar = bar.ln() - kb.ln_1p();
        let ln_pass = (-e).ln_1p();
        return Ok(vec![ln_a + ln_pass, e.ln(), ln_abar + ln_pass]);
    }
    Ok(row_for(rule, params, channel)?.into_iter().map(f64::ln).collect())
}

fn row_for(rule: &RowRule, params: &ParamMap, channel: &DiscreteChannel) -> Result<Vec<f64>> {
    let e = channel.param();
    let mix = |w: f64| vec![w * (1.0 - e), e, (1.0 - w) * (1.0 - e)];
    Ok(match rule {
        RowRule::ChannelRow(x) => channel.row(*x).to_vec(),
        RowRule::Mix(n) => mix(params.get_unit(n)?),
        RowRule::FreeBinary(n) => {
            let w = params.get_unit(n)?;
            vec![w, 1.0 - w]
        }
        RowRule::DkShared { k } => mix(alpha_k(params.get_unit(ALPHA_0)?, *k)),
    })
}

/// α_k from α₀ via ᾱ_k = ᾱ₀/(1 + k ᾱ₀).
pub fn alpha_k(alpha0: f64, k: usize) -> f64 {
    let bar = 1.0 - alpha0;
    (alpha0 + k as f64 * bar) / (1.0 + k as f64 * bar)
}

fn alphabet_of(kind: ChannelKind) -> &'static [char] {
    match kind {
        ChannelKind::Bec => &['0', '?', '1'],
        _ => &['0', '1'],
    }
}

fn history_string(alphabet: &[char], mu: usize, mut h: usize) -> String {
    let q = alphabet.len();
    let mut out = vec![' '; mu];
    for slot in out.iter_mut().rev() {
        *slot = alphabet[h % q];
        h /= q;
    }
    out.into_iter().collect()
}

fn mix(name: &str) -> RowRule {
    RowRule::Mix(name.to_string())
}

/// The family used for a (channel, constraint, memory) combination.
///
/// Covered: BEC (1,∞) μ ∈ {1,2}; BEC (1,2) μ ∈ {2,3}; BEC (d,∞) μ = d;
/// BSC (1,∞) μ = 1.
pub fn family_for(kind: ChannelKind, spec: &ConstraintSpec, mu: usize) -> Result<DiscreteMarkovFamily> {
    let unsupported =
        || Error::UnsupportedCombination(format!("{kind} channel, {spec} constraint, memory {mu}"));
    match (kind, spec.d(), spec.k(), mu) {
        (ChannelKind::Bec, 1, RunLimit::Infinite, 1) => Ok(bec_one_inf_mu1()),
        (ChannelKind::Bec, 1, RunLimit::Infinite, 2) => Ok(bec_one_inf_mu2()),
        (ChannelKind::Bec, 1, RunLimit::Finite(2), 2) => Ok(bec_one_two_mu2()),
        (ChannelKind::Bec, 1, RunLimit::Finite(2), 3) => Ok(bec_one_two_mu3()),
        (ChannelKind::Bec, d, RunLimit::Infinite, m) if d >= 1 && m == d => Ok(bec_d_inf(d)),
        (ChannelKind::Bsc, 1, RunLimit::Infinite, 1) => Ok(bsc_one_inf_mu1()),
        _ => Err(unsupported()),
    }
}

/// BEC (1,∞), μ = 1: y₁ = 0 → β, y₁ = ? → α, y₁ = 1 → p(·|0).
pub fn bec_one_inf_mu1() -> DiscreteMarkovFamily {
    DiscreteMarkovFamily::from_rules("bec-1inf-mu1", ChannelKind::Bec, 1, |h| match h {
        "0" => mix("beta"),
        "?" => mix("alpha"),
        _ => RowRule::ChannelRow(0),
    })
}

/// BEC (1,∞), μ = 2: one parameter per history not ending in 1.
pub fn bec_one_inf_mu2() -> DiscreteMarkovFamily {
    DiscreteMarkovFamily::from_rules("bec-1inf-mu2", ChannelKind::Bec, 2, |h| {
        if h.ends_with('1') {
            RowRule::ChannelRow(0)
        } else {
            mix(&format!("alpha_{h}"))
        }
    })
}

/// BEC (1,2), μ = 2: after 00 the next input must be 1.
pub fn bec_one_two_mu2() -> DiscreteMarkovFamily {
    DiscreteMarkovFamily::from_rules("bec-12-mu2", ChannelKind::Bec, 2, |h| {
        if h == "00" {
            RowRule::ChannelRow(1)
        } else if h.ends_with('1') {
            RowRule::ChannelRow(0)
        } else {
            mix(&format!("alpha_{h}"))
        }
    })
}

/// BEC (1,2), μ = 3.
pub fn bec_one_two_mu3() -> DiscreteMarkovFamily {
    DiscreteMarkovFamily::from_rules("bec-12-mu3", ChannelKind::Bec, 3, |h| match h {
        "1?0" | "?00" | "100" | "000" => RowRule::ChannelRow(1),
        "?10" | "01?" | "0?0" | "?1?" | "010" => mix("alpha_010"),
        "10?" | "0??" | "?0?" | "??0" | "1??" | "???" => mix(&format!("alpha_{h}")),
        _ => RowRule::ChannelRow(0),
    })
}

/// BEC (d,∞), μ = d: any 1 in the history pins p(·|0), otherwise the row is
/// driven by α_k with k the number of erasures.
pub fn bec_d_inf(d: usize) -> DiscreteMarkovFamily {
    DiscreteMarkovFamily::from_rules(&format!("bec-{d}inf-mu{d}"), ChannelKind::Bec, d, |h| {
        if h.contains('1') {
            RowRule::ChannelRow(0)
        } else {
            RowRule::DkShared { k: h.chars().filter(|&c| c == '?').count() }
        }
    })
}

/// BSC (1,∞), μ = 1: rows [a, 1−a] after 0 and [b, 1−b] after 1.
pub fn bsc_one_inf_mu1() -> DiscreteMarkovFamily {
    DiscreteMarkovFamily::from_rules("bsc-1inf-mu1", ChannelKind::Bsc, 1, |h| match h {
        "0" => RowRule::FreeBinary("a".into()),
        _ => RowRule::FreeBinary("b".into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kv: &[(&str, f64)]) -> ParamMap {
        kv.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn one_inf_family_rows() {
        let fam = family_for(ChannelKind::Bec, &ConstraintSpec::infinite(1), 1).unwrap();
        assert_eq!(fam.num_histories(), 3);
        assert_eq!(fam.param_names(), ["beta", "alpha"]);
        let ch = DiscreteChannel::bec(0.2).unwrap();
        let p = params(&[("alpha", 0.5), ("beta", 0.3)]);
        let row = fam.conditional_row(&p, &ch, "?").unwrap();
        for (a, b) in row.probs().iter().zip([0.4, 0.2, 0.4]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(fam.conditional_row(&p, &ch, "1").unwrap().probs(), &[0.8, 0.2, 0.0]);
    }

    #[test]
    fn table_three_shared_class() {
        let fam = family_for(ChannelKind::Bec, &ConstraintSpec::finite(1, 2).unwrap(), 3).unwrap();
        let classes = fam.classes();
        let shared = classes.iter().find(|(r, _)| *r == mix("alpha_010")).unwrap();
        let mut got = shared.1.clone();
        got.sort();
        let mut want = vec!["?10", "01?", "0?0", "?1?", "010"];
        want.sort();
        assert_eq!(got, want);
        assert_eq!(fam.param_names().len(), 7);
    }

    #[test]
    fn table_two_fixed_rows() {
        let fam = family_for(ChannelKind::Bec, &ConstraintSpec::finite(1, 2).unwrap(), 2).unwrap();
        assert_eq!(*fam.rule(fam.history_index("00").unwrap()), RowRule::ChannelRow(1));
        assert_eq!(*fam.rule(fam.history_index("?1").unwrap()), RowRule::ChannelRow(0));
        assert_eq!(fam.param_names().len(), 5);
    }

    #[test]
    fn dk_shared_row() {
        let fam = family_for(ChannelKind::Bec, &ConstraintSpec::infinite(2), 2).unwrap();
        let e = 0.3;
        let ch = DiscreteChannel::bec(e).unwrap();
        let row = fam.conditional_row(&params(&[(ALPHA_0, 0.5)]), &ch, "??").unwrap();
        let want = [0.75 * (1.0 - e), e, 0.25 * (1.0 - e)];
        for (a, b) in row.probs().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn bsc_family() {
        let fam = family_for(ChannelKind::Bsc, &ConstraintSpec::infinite(1), 1).unwrap();
        assert_eq!(fam.param_names(), ["a", "b"]);
        let ch = DiscreteChannel::bsc(0.1).unwrap();
        let row = fam.conditional_row(&params(&[("a", 0.6), ("b", 0.9)]), &ch, "1").unwrap();
        assert_eq!(row.probs(), &[0.9, 0.09999999999999998]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            family_for(ChannelKind::Bsc, &ConstraintSpec::finite(1, 2).unwrap(), 2),
            Err(Error::UnsupportedCombination(_))
        ));
        let fam = bec_one_inf_mu1();
        let ch = DiscreteChannel::bec(0.2).unwrap();
        assert!(matches!(
            fam.conditional_row(&params(&[("alpha", 0.5)]), &ch, "0"),
            Err(Error::MissingParameter(_))
        ));
        assert!(matches!(
            fam.conditional_row(&params(&[("alpha", 1.5), ("beta", 0.5)]), &ch, "?"),
            Err(Error::ParameterOutOfRange { .. })
        ));
    }
}
