//! (d,k) runlength constraints, memory-μ state diagrams and their cycles.
//!
//! Words are bit vectors (`0`/`1` bytes) stored in reading order. Zero runs
//! between two ones must have length in `[d, k]`; a partial run at either end
//! of a word is only bounded above by `k`, so a word may start or end in the
//! middle of a run. The same convention is used by word counting and by the
//! state diagrams.
//!
//! Diagrams are supported up to memory 8 (at most 256 vertices), which keeps
//! exhaustive cycle enumeration cheap.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::roots::bisect;

/// Largest supported diagram memory.
pub const MAX_MEMORY: usize = 8;

/// Upper limit on a zero run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunLimit {
    Finite(usize),
    Infinite,
}

impl fmt::Display for RunLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunLimit::Finite(k) => write!(f, "{k}"),
            RunLimit::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for RunLimit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(RunLimit::Infinite),
            other => other
                .parse::<usize>()
                .map(RunLimit::Finite)
                .map_err(|_| Error::Parse(format!("bad run limit `{s}`"))),
        }
    }
}

/// The pair (d, k) defining the legal input sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConstraintSpec {
    d: usize,
    k: RunLimit,
}

impl ConstraintSpec {
    pub fn new(d: usize, k: RunLimit) -> Result<Self> {
        if let RunLimit::Finite(k) = k {
            if k <= d {
                return Err(Error::InvalidConstraint { d, k: k.to_string() });
            }
        }
        Ok(Self { d, k })
    }

    pub fn finite(d: usize, k: usize) -> Result<Self> {
        Self::new(d, RunLimit::Finite(k))
    }

    pub fn infinite(d: usize) -> Self {
        Self { d, k: RunLimit::Infinite }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> RunLimit {
        self.k
    }

    /// Smallest memory for which the state diagram is defined.
    pub fn min_memory(&self) -> usize {
        let m = match self.k {
            RunLimit::Finite(k) => k,
            RunLimit::Infinite => self.d,
        };
        m.max(1)
    }

    pub fn is_valid_word(&self, word: &[u8]) -> bool {
        is_valid_word(word, self)
    }
}

impl fmt::Display for ConstraintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.d, self.k)
    }
}

/// Parse a string of `0`/`1` characters.
pub fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Parse(format!("`{s}` is not a bit string"))),
        })
        .collect()
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

/// True iff every zero run between two ones has length in `[d, k]` and no
/// run (including partial runs at the ends) exceeds `k`.
pub fn is_valid_word(word: &[u8], spec: &ConstraintSpec) -> bool {
    let mut run = 0usize;
    let mut seen_one = false;
    for &b in word {
        if b == 0 {
            run += 1;
            if let RunLimit::Finite(k) = spec.k {
                if run > k {
                    return false;
                }
            }
        } else {
            if seen_one && run < spec.d {
                return false;
            }
            seen_one = true;
            run = 0;
        }
    }
    true
}

/// A labeled edge `from --label--> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub label: u8,
    pub to: usize,
}

/// The memory-μ state diagram: vertices are the valid length-μ words in
/// lexicographic order, edges append one bit and drop the oldest.
#[derive(Debug, Clone)]
pub struct StateDiagram {
    spec: ConstraintSpec,
    mu: usize,
    vertices: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    edges: Vec<Edge>,
    successors: Vec<Vec<usize>>,
}

impl StateDiagram {
    pub fn build(spec: ConstraintSpec, mu: usize) -> Result<Self> {
        let min = spec.min_memory();
        if mu < min {
            return Err(Error::MemoryTooSmall { mu, min });
        }
        if mu > MAX_MEMORY {
            return Err(Error::MemoryTooLarge(mu));
        }
        let vertices: Vec<Vec<u8>> = (0u32..1 << mu)
            .map(|n| (0..mu).rev().map(|i| ((n >> i) & 1) as u8).collect::<Vec<u8>>())
            .filter(|w| spec.is_valid_word(w))
            .collect();
        let index: HashMap<Vec<u8>, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let mut edges = Vec::new();
        let mut successors = vec![Vec::new(); vertices.len()];
        let mut ext = vec![0u8; mu + 1];
        for (from, v) in vertices.iter().enumerate() {
            ext[..mu].copy_from_slice(v);
            for label in 0..=1u8 {
                ext[mu] = label;
                if spec.is_valid_word(&ext) {
                    let to = index[&ext[1..]];
                    edges.push(Edge { from, label, to });
                    successors[from].push(to);
                }
            }
        }
        Ok(Self { spec, mu, vertices, index, edges, successors })
    }

    pub fn spec(&self) -> &ConstraintSpec {
        &self.spec
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn vertices(&self) -> &[Vec<u8>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_index(&self, word: &[u8]) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.successors[v]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.successors[from].contains(&to)
    }

    /// The (μ+1)-bit word carried by the edge `from -> to`.
    pub fn edge_word(&self, from: usize, to: usize) -> Vec<u8> {
        let mut w = self.vertices[from].clone();
        w.push(*self.vertices[to].last().expect("μ ≥ 1"));
        w
    }

    /// Vertex sequence of the walk traced by a word of length ≥ μ.
    pub fn walk_of(&self, word: &[u8]) -> Result<Vec<usize>> {
        if word.len() < self.mu || !self.spec.is_valid_word(word) {
            return Err(Error::InvalidWord(bits_to_string(word)));
        }
        word.windows(self.mu)
            .map(|w| self.vertex_index(w).ok_or_else(|| Error::InvalidWord(bits_to_string(word))))
            .collect()
    }

    /// Every simple directed cycle once, in canonical rotation, sorted by
    /// length and then by vertex labels.
    pub fn cycles(&self) -> Vec<Cycle> {
        enumerate_cycles(self)
    }

    /// Spectral radius of the vertex adjacency matrix by power iteration.
    pub fn spectral_radius(&self) -> f64 {
        let n = self.vertices.len();
        // (A + I) shares the Perron vector of A and is aperiodic
        let mut x = vec![1.0 / n as f64; n];
        let mut rho = 0.0;
        for _ in 0..200_000 {
            let mut y = x.clone();
            for e in &self.edges {
                y[e.to] += x[e.from];
            }
            let norm: f64 = y.iter().sum();
            y.iter_mut().for_each(|v| *v /= norm);
            let delta: f64 = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
            x = y;
            let next = norm - 1.0;
            if delta < 1e-15 && (next - rho).abs() < 1e-15 {
                return next;
            }
            rho = next;
        }
        rho
    }
}

/// A simple cycle in canonical (rotation-minimal) form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cycle {
    vertices: Vec<usize>,
    word: Vec<u8>,
}

impl Cycle {
    /// Canonicalize a closed vertex sequence (without repeating the first
    /// vertex at the end).
    pub fn from_vertices(g: &StateDiagram, seq: &[usize]) -> Result<Self> {
        let l = seq.len();
        if l == 0 {
            return Err(Error::InvalidWord("empty cycle".into()));
        }
        for i in 0..l {
            if !g.has_edge(seq[i], seq[(i + 1) % l]) {
                return Err(Error::InvalidWord(format!("{seq:?} is not a cycle")));
            }
        }
        let start = (0..l).min_by_key(|&i| seq[i]).expect("non-empty");
        let vertices: Vec<usize> = (0..l).map(|i| seq[(start + i) % l]).collect();
        let mut word = g.vertices()[vertices[0]].clone();
        for i in 1..=l {
            word.push(*g.vertices()[vertices[i % l]].last().expect("μ ≥ 1"));
        }
        Ok(Self { vertices, word })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// The associated word x(c) of length μ + l(c).
    pub fn word(&self) -> &[u8] {
        &self.word
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", bits_to_string(&self.word))
    }
}

fn enumerate_cycles(g: &StateDiagram) -> Vec<Cycle> {
    let n = g.vertices.len();
    let mut found = Vec::new();
    let mut on_path = vec![false; n];
    let mut path = Vec::new();

    // cycles whose smallest vertex is `start`, extended only through larger vertices
    fn extend(
        g: &StateDiagram,
        start: usize,
        v: usize,
        on_path: &mut [bool],
        path: &mut Vec<usize>,
        found: &mut Vec<Vec<usize>>,
    ) {
        for &w in g.successors(v) {
            if w == start {
                found.push(path.clone());
            } else if w > start && !on_path[w] {
                on_path[w] = true;
                path.push(w);
                extend(g, start, w, on_path, path, found);
                path.pop();
                on_path[w] = false;
            }
        }
    }

    let mut raw = Vec::new();
    for start in 0..n {
        on_path[start] = true;
        path.push(start);
        extend(g, start, start, &mut on_path, &mut path, &mut raw);
        path.pop();
        on_path[start] = false;
    }
    for seq in raw {
        found.push(Cycle::from_vertices(g, &seq).expect("enumerated cycles are closed"));
    }
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.vertices.cmp(&b.vertices)));
    found
}

/// A walk split into simple cycles and a residual path.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkDecomposition {
    /// Distinct cycles with multiplicities, in canonical order.
    pub cycles: Vec<(Cycle, usize)>,
    /// Cycles in the order they were excised.
    pub excised: Vec<Cycle>,
    /// Vertex sequence of the residual path (no repeated vertex).
    pub residual_path: Vec<usize>,
    /// Length of the source word.
    pub source_len: usize,
}

impl WalkDecomposition {
    pub fn residual_edges(&self) -> usize {
        self.residual_path.len().saturating_sub(1)
    }

    pub fn cycle_edges(&self) -> usize {
        self.cycles.iter().map(|(c, m)| c.len() * m).sum()
    }
}

/// Repeatedly excise the first closed cycle of the walk traced by `word`
/// until the remaining walk visits no vertex twice.
pub fn decompose_walk(word: &[u8], g: &StateDiagram) -> Result<WalkDecomposition> {
    if word.len() <= g.mu() {
        return Err(Error::InvalidWord(bits_to_string(word)));
    }
    let mut walk = g.walk_of(word)?;
    let mut excised = Vec::new();
    loop {
        let mut first_seen: HashMap<usize, usize> = HashMap::new();
        let mut closing = None;
        for (j, &v) in walk.iter().enumerate() {
            if let Some(&i) = first_seen.get(&v) {
                closing = Some((i, j));
                break;
            }
            first_seen.insert(v, j);
        }
        let Some((i, j)) = closing else { break };
        excised.push(Cycle::from_vertices(g, &walk[i..j])?);
        walk.drain(i + 1..=j);
    }
    let mut cycles: Vec<(Cycle, usize)> = Vec::new();
    let mut sorted = excised.clone();
    sorted.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.vertices.cmp(&b.vertices)));
    for c in sorted {
        match cycles.last_mut() {
            Some((last, m)) if *last == c => *m += 1,
            _ => cycles.push((c, 1)),
        }
    }
    Ok(WalkDecomposition { cycles, excised, residual_path: walk, source_len: word.len() })
}

/// Noiseless capacity log2(1/λ), λ the root in (0,1) of
/// z^(k+2) − z^(d+1) − z + 1 (the z^(k+2) term dropped for k = ∞).
pub fn noiseless_capacity(spec: &ConstraintSpec) -> f64 {
    let d = spec.d() as i32;
    let poly = |z: f64| {
        let lead = match spec.k() {
            RunLimit::Finite(k) => z.powi(k as i32 + 2),
            RunLimit::Infinite => 0.0,
        };
        lead - z.powi(d + 1) - z + 1.0
    };
    let lambda = bisect(poly, 1e-12, 1.0 - 1e-12, 1e-13)
        .expect("the characteristic polynomial changes sign on (0,1)");
    -lambda.log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Vec<u8> {
        parse_bits(s).unwrap()
    }

    #[test]
    fn validity_examples() {
        let one_inf = ConstraintSpec::infinite(1);
        let one_two = ConstraintSpec::finite(1, 2).unwrap();
        assert!(one_inf.is_valid_word(&w("0100")));
        assert!(!one_inf.is_valid_word(&w("011")));
        assert!(one_two.is_valid_word(&w("1001001")));
        assert!(!one_two.is_valid_word(&w("10001")));
        // partial runs are only bounded above
        assert!(one_two.is_valid_word(&w("001")));
        assert!(!one_two.is_valid_word(&w("000")));
        assert!(ConstraintSpec::finite(2, 2).is_err());
    }

    #[test]
    fn diagram_sizes() {
        let g = StateDiagram::build(ConstraintSpec::infinite(1), 1).unwrap();
        assert_eq!((g.vertices().len(), g.edges().len()), (2, 3));
        let g = StateDiagram::build(ConstraintSpec::infinite(1), 2).unwrap();
        assert_eq!((g.vertices().len(), g.edges().len()), (3, 5));
        let g = StateDiagram::build(ConstraintSpec::finite(1, 2).unwrap(), 2).unwrap();
        assert_eq!((g.vertices().len(), g.edges().len()), (3, 4));
        let g = StateDiagram::build(ConstraintSpec::finite(1, 2).unwrap(), 3).unwrap();
        assert_eq!((g.vertices().len(), g.edges().len()), (4, 5));
        let labels: Vec<String> = g.vertices().iter().map(|v| bits_to_string(v)).collect();
        assert_eq!(labels, ["001", "010", "100", "101"]);
        for d in 1..=6 {
            let g = StateDiagram::build(ConstraintSpec::infinite(d), d).unwrap();
            assert_eq!((g.vertices().len(), g.edges().len()), (d + 1, d + 2));
        }
    }

    #[test]
    fn memory_bounds() {
        let spec = ConstraintSpec::finite(1, 3).unwrap();
        assert_eq!(
            StateDiagram::build(spec, 2).unwrap_err(),
            Error::MemoryTooSmall { mu: 2, min: 3 }
        );
        assert!(StateDiagram::build(ConstraintSpec::infinite(0), 0).is_err());
        assert!(StateDiagram::build(ConstraintSpec::infinite(1), 9).is_err());
    }

    #[test]
    fn edge_shift_rule() {
        let g = StateDiagram::build(ConstraintSpec::finite(2, 5).unwrap(), 6).unwrap();
        for e in g.edges() {
            let from = &g.vertices()[e.from];
            let to = &g.vertices()[e.to];
            assert_eq!(&from[1..], &to[..g.mu() - 1]);
            assert_eq!(*to.last().unwrap(), e.label);
            assert!(g.spec().is_valid_word(&g.edge_word(e.from, e.to)));
        }
    }

    fn cycle_words(g: &StateDiagram) -> Vec<String> {
        g.cycles().iter().map(|c| bits_to_string(c.word())).collect()
    }

    #[test]
    fn cycle_examples() {
        let g = StateDiagram::build(ConstraintSpec::infinite(1), 1).unwrap();
        assert_eq!(cycle_words(&g), ["00", "010"]);
        let g = StateDiagram::build(ConstraintSpec::infinite(1), 2).unwrap();
        assert_eq!(cycle_words(&g), ["000", "0101", "00100"]);
        let g = StateDiagram::build(ConstraintSpec::finite(1, 2).unwrap(), 2).unwrap();
        assert_eq!(cycle_words(&g), ["0101", "00100"]);
        let g = StateDiagram::build(ConstraintSpec::finite(1, 2).unwrap(), 3).unwrap();
        assert_eq!(cycle_words(&g), ["01010", "001001"]);
        let g = StateDiagram::build(ConstraintSpec::infinite(3), 3).unwrap();
        assert_eq!(cycle_words(&g), ["0000", "0001000"]);
    }

    #[test]
    fn cycles_are_rotation_minimal() {
        let g = StateDiagram::build(ConstraintSpec::finite(1, 3).unwrap(), 5).unwrap();
        for c in g.cycles() {
            let v = c.vertices();
            for r in 1..v.len() {
                let rot: Vec<usize> = v[r..].iter().chain(&v[..r]).copied().collect();
                assert!(v < rot.as_slice());
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let g = StateDiagram::build(ConstraintSpec::infinite(1), 1).unwrap();
        let dec = decompose_walk(&w("00000"), &g).unwrap();
        assert_eq!(dec.cycles.len(), 1);
        assert_eq!(bits_to_string(dec.cycles[0].0.word()), "00");
        assert_eq!(dec.cycles[0].1, 4);
        assert_eq!(dec.residual_edges(), 0);

        let dec = decompose_walk(&w("0101010"), &g).unwrap();
        assert_eq!(dec.cycles.len(), 1);
        assert_eq!(bits_to_string(dec.cycles[0].0.word()), "010");
        assert_eq!(dec.cycles[0].1, 3);
        assert_eq!(dec.residual_edges(), 0);

        assert!(matches!(decompose_walk(&w("0110"), &g), Err(Error::InvalidWord(_))));
        assert!(decompose_walk(&w("0"), &g).is_err());
    }

    #[test]
    fn excised_cycles_are_simple_even_for_nested_revisits() {
        // walk 00 -> 01 -> 10 -> 01 -> 10 -> 00 revisits 01 before 00 closes
        let g = StateDiagram::build(ConstraintSpec::infinite(1), 2).unwrap();
        let dec = decompose_walk(&w("0010100"), &g).unwrap();
        let words: Vec<String> = dec.excised.iter().map(|c| bits_to_string(c.word())).collect();
        assert_eq!(words, ["0101", "00100"]);
        assert_eq!(dec.residual_edges(), 0);
    }

    #[test]
    fn noiseless_examples() {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let c = noiseless_capacity(&ConstraintSpec::infinite(1));
        assert!((c - (-golden.log2())).abs() < 1e-12);
        assert!((c - 0.6942419).abs() < 1e-6);
        assert_eq!(noiseless_capacity(&ConstraintSpec::infinite(0)), 1.0);
    }
}
