//! Edge, walk and cycle metrics of a discrete test distribution, KKT
//! residuals, and the exact finite-length divergence used as an oracle.

use crate::channel::{relative_entropy, DiscreteChannel};
use crate::constraint::{bits_to_string, decompose_walk, Cycle, StateDiagram};
use crate::error::{Error, Result};
use crate::family::{DiscreteMarkovFamily, ParamMap};

/// T(x₁…x_{μ+1}) for already-instantiated rows (indexed by history).
pub fn edge_metric_rows(rows: &[Vec<f64>], channel: &DiscreteChannel, word: &[u8]) -> f64 {
    history_average(channel, word, |target, h| relative_entropy(target, &rows[h]))
}

/// As [`edge_metric_rows`] with rows given as natural-log probabilities, so
/// that conditional probabilities below the `f64` range stay usable.
pub fn edge_metric_ln_rows(ln_rows: &[Vec<f64>], channel: &DiscreteChannel, word: &[u8]) -> f64 {
    history_average(channel, word, |target, h| relative_entropy_ln(target, &ln_rows[h]))
}

fn relative_entropy_ln(p: &[f64], ln_q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &lb) in p.iter().zip(ln_q) {
        if a > 0.0 {
            if lb == f64::NEG_INFINITY {
                return f64::INFINITY;
            }
            d += a * (a.ln() - lb);
        }
    }
    (d / std::f64::consts::LN_2).max(0.0)
}

fn history_average<F: Fn(&[f64], usize) -> f64>(channel: &DiscreteChannel, word: &[u8], div: F) -> f64 {
    let mu = word.len() - 1;
    let q = channel.output_size();
    let target = channel.row(word[mu]);
    let mut total = 0.0;
    for h in 0..q.pow(mu as u32) {
        let mut weight = 1.0;
        let mut rest = h;
        for i in (0..mu).rev() {
            weight *= channel.prob(rest % q, word[i]);
            rest /= q;
        }
        if weight > 0.0 {
            total += weight * div(target, h);
        }
    }
    total
}

/// T(x₁…x_{μ+1}) in bits.
pub fn edge_metric(
    fam: &DiscreteMarkovFamily,
    params: &ParamMap,
    channel: &DiscreteChannel,
    word: &[u8],
) -> Result<f64> {
    if word.len() != fam.mu() + 1 {
        return Err(Error::InvalidWord(bits_to_string(word)));
    }
    Ok(edge_metric_ln_rows(&fam.ln_rows(params, channel)?, channel, word))
}

fn word_code(word: &[u8]) -> usize {
    word.iter().fold(0, |acc, &b| 2 * acc + b as usize)
}

/// Edge metrics for every edge of a state diagram.
#[derive(Debug, Clone)]
pub struct EdgeMetricTable {
    mu: usize,
    values: Vec<Option<f64>>,
}

impl EdgeMetricTable {
    pub fn build(
        fam: &DiscreteMarkovFamily,
        params: &ParamMap,
        channel: &DiscreteChannel,
        g: &StateDiagram,
    ) -> Result<Self> {
        if fam.mu() != g.mu() {
            return Err(Error::UnsupportedCombination(format!(
                "family memory {} differs from diagram memory {}",
                fam.mu(),
                g.mu()
            )));
        }
        let ln_rows = fam.ln_rows(params, channel)?;
        Ok(Self::from_fn(g, |w| edge_metric_ln_rows(&ln_rows, channel, w)))
    }

    pub fn from_rows(rows: &[Vec<f64>], channel: &DiscreteChannel, g: &StateDiagram) -> Self {
        Self::from_fn(g, |w| edge_metric_rows(rows, channel, w))
    }

    /// Table with values supplied by `f` for each edge word.
    pub fn from_fn<F: FnMut(&[u8]) -> f64>(g: &StateDiagram, mut f: F) -> Self {
        let mut values = vec![None; 1 << (g.mu() + 1)];
        for e in g.edges() {
            let w = g.edge_word(e.from, e.to);
            values[word_code(&w)] = Some(f(&w));
        }
        Self { mu: g.mu(), values }
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn get(&self, word: &[u8]) -> Option<f64> {
        if word.len() != self.mu + 1 {
            return None;
        }
        self.values[word_code(word)]
    }

    /// (edge word, metric) pairs in edge-word order.
    pub fn entries(&self) -> Vec<(String, f64)> {
        let n = self.mu + 1;
        self.values
            .iter()
            .enumerate()
            .filter_map(|(code, v)| {
                v.map(|v| {
                    let w: Vec<u8> = (0..n).rev().map(|i| ((code >> i) & 1) as u8).collect();
                    (bits_to_string(&w), v)
                })
            })
            .collect()
    }
}

/// Sum of edge metrics along the walk traced by `word`; 0 for walks with no
/// edges.
pub fn walk_metric(table: &EdgeMetricTable, word: &[u8]) -> Result<f64> {
    if word.len() <= table.mu {
        return Ok(0.0);
    }
    word.windows(table.mu + 1)
        .map(|w| table.get(w).ok_or_else(|| Error::InvalidWord(bits_to_string(word))))
        .sum()
}

/// T(c): the metrics of the l(c) edges of x(c).
pub fn cycle_metric(table: &EdgeMetricTable, c: &Cycle) -> f64 {
    walk_metric(table, c.word()).expect("cycle words consist of diagram edges")
}

/// Normalized cycle metrics t_c = T(c)/l(c) and residuals t_c − t_{c₀}
/// against the first cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct KktResidual {
    pub normalized: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl KktResidual {
    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// t_{c₀}, the common value when all residuals vanish.
    pub fn reference(&self) -> f64 {
        self.normalized[0]
    }

    /// max_c t_c.
    pub fn max_normalized(&self) -> f64 {
        self.normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn kkt_residuals(table: &EdgeMetricTable, cycles: &[Cycle]) -> KktResidual {
    assert!(!cycles.is_empty(), "at least one cycle is required");
    let normalized: Vec<f64> =
        cycles.iter().map(|c| cycle_metric(table, c) / c.len() as f64).collect();
    let residuals = normalized.iter().map(|t| t - normalized[0]).collect();
    KktResidual { normalized, residuals }
}

/// Both evaluations of D(p_{Y^N|X^N}(·|x^N) ‖ q_{Y^N}).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceParts {
    /// Exhaustive sum over 𝒴^N.
    pub direct: f64,
    /// Initial-block divergence plus the walk's edge metrics.
    pub decomposed: f64,
    /// The initial-block divergence alone.
    pub initial: f64,
}

/// Uniform distribution over 𝒴^μ.
pub fn uniform_init(channel: &DiscreteChannel, mu: usize) -> Vec<f64> {
    let n = channel.output_size().pow(mu as u32);
    vec![1.0 / n as f64; n]
}

fn check_oracle_size(channel: &DiscreteChannel, n: usize) -> Result<()> {
    if n > 14 || channel.output_size() > 3 {
        return Err(Error::TooLarge(format!(
            "exhaustive divergence needs N <= 14 and |Y| <= 3 (N = {n}, |Y| = {})",
            channel.output_size()
        )));
    }
    Ok(())
}

/// Compute the finite-length divergence directly and through the chain-rule
/// decomposition. `init` is the law of the first μ outputs.
pub fn divergence_parts(
    rows: &[Vec<f64>],
    channel: &DiscreteChannel,
    mu: usize,
    word: &[u8],
    init: &[f64],
) -> Result<DivergenceParts> {
    let n = word.len();
    if n < mu {
        return Err(Error::InvalidWord(bits_to_string(word)));
    }
    check_oracle_size(channel, n)?;
    let q = channel.output_size();

    let initial = relative_entropy(&block_law(channel, &word[..mu]), init);
    let mut edges = 0.0;
    for w in word.windows(mu + 1) {
        edges += edge_metric_rows(rows, channel, w);
    }
    let decomposed = initial + edges;

    // odometer over outputs with nonzero channel probability
    let support: Vec<Vec<usize>> =
        word.iter().map(|&x| (0..q).filter(|&y| channel.prob(y, x) > 0.0).collect()).collect();
    let mut digits = vec![0usize; n];
    let mut direct = 0.0;
    let pow = q.pow(mu.saturating_sub(1) as u32);
    'outer: loop {
        let ys: Vec<usize> = digits.iter().zip(&support).map(|(&d, s)| s[d]).collect();
        let mut p = 1.0;
        for (&y, &x) in ys.iter().zip(word) {
            p *= channel.prob(y, x);
        }
        let mut h = ys[..mu].iter().fold(0, |acc, &y| acc * q + y);
        let mut ln_q = init[h].ln();
        for &y in &ys[mu..] {
            ln_q += rows[h][y].ln();
            h = if mu == 0 { 0 } else { (h % pow) * q + y };
        }
        if p > 0.0 {
            direct += p * (p.ln() - ln_q) / std::f64::consts::LN_2;
        }
        if direct == f64::INFINITY {
            break;
        }
        for i in (0..n).rev() {
            digits[i] += 1;
            if digits[i] < support[i].len() {
                continue 'outer;
            }
            digits[i] = 0;
        }
        break;
    }
    Ok(DivergenceParts { direct, decomposed, initial })
}

/// Law of the outputs of a block of inputs, indexed like histories.
fn block_law(channel: &DiscreteChannel, xs: &[u8]) -> Vec<f64> {
    let q = channel.output_size();
    let mut law = vec![1.0];
    for &x in xs {
        law = law.iter().flat_map(|&p| (0..q).map(move |y| p * channel.prob(y, x))).collect();
    }
    law
}

/// D(p_{Y^N|X^N}(·|x^N) ‖ q_{Y^N}) in bits, evaluated both directly and via
/// the decomposition; panics if the two disagree by more than 1e-10.
pub fn finite_n_divergence(
    fam: &DiscreteMarkovFamily,
    params: &ParamMap,
    channel: &DiscreteChannel,
    word: &[u8],
    init: &[f64],
) -> Result<f64> {
    check_oracle_size(channel, word.len())?;
    let rows = fam.rows(params, channel)?;
    let parts = divergence_parts(&rows, channel, fam.mu(), word, init)?;
    if parts.direct.is_infinite() || parts.decomposed.is_infinite() {
        assert!(parts.direct.is_infinite() && parts.decomposed.is_infinite());
        return Ok(f64::INFINITY);
    }
    assert!(
        (parts.direct - parts.decomposed).abs() <= 1e-10 * (1.0 + parts.direct.abs()),
        "direct {} vs decomposed {}",
        parts.direct,
        parts.decomposed
    );
    Ok(parts.direct)
}

/// walk_metric(word) split as Σ cycle metrics + residual path metric.
pub fn decomposed_walk_metric(table: &EdgeMetricTable, g: &StateDiagram, word: &[u8]) -> Result<f64> {
    let dec = decompose_walk(word, g)?;
    let cycles: f64 = dec.cycles.iter().map(|(c, m)| *m as f64 * cycle_metric(table, c)).sum();
    let path: f64 = dec
        .residual_path
        .windows(2)
        .map(|p| table.get(&g.edge_word(p[0], p[1])).expect("residual path uses diagram edges"))
        .sum();
    Ok(cycles + path)
}
