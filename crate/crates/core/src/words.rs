//! Words over `{0,1}` and their circular word graphs, realised as graphings
//! and promoted into representations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphings::{rename_dialect, Edge, Graphing};
use crate::microcosm::{perm_apply, Descriptor};
use crate::rational::{frac, Q};
use crate::space::{Interval, MSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Symbol {
    #[serde(rename = "*")]
    Star,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
}

impl Symbol {
    pub const ALL: [Symbol; 3] = [Symbol::Star, Symbol::Zero, Symbol::One];

    pub fn from_char(c: char) -> Result<Symbol> {
        match c {
            '*' | '⋆' => Ok(Symbol::Star),
            '0' => Ok(Symbol::Zero),
            '1' => Ok(Symbol::One),
            _ => Err(Error::BadAlphabet(c)),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::Star => '*',
            Symbol::Zero => '0',
            Symbol::One => '1',
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    In,
    Out,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::In => Dir::Out,
            Dir::Out => Dir::In,
        }
    }
}

/// Elements of `Σ_ext`: a letter with a direction, plus the result vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Letter(Symbol, Dir),
    Accept,
    Reject,
}

impl Vertex {
    pub const LETTERS: [Vertex; 6] = [
        Vertex::Letter(Symbol::Star, Dir::In),
        Vertex::Letter(Symbol::Star, Dir::Out),
        Vertex::Letter(Symbol::Zero, Dir::In),
        Vertex::Letter(Symbol::Zero, Dir::Out),
        Vertex::Letter(Symbol::One, Dir::In),
        Vertex::Letter(Symbol::One, Dir::Out),
    ];
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Letter(s, d) => write!(f, "({s},{d:?})"),
            Vertex::Accept => write!(f, "a"),
            Vertex::Reject => write!(f, "r"),
        }
    }
}

/// Injection of the vertices into unit blocks `[k, k+1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Psi {
    name: String,
    blocks: BTreeMap<Vertex, i64>,
}

impl Default for Psi {
    fn default() -> Self {
        let mut blocks: BTreeMap<Vertex, i64> = Vertex::LETTERS.iter().zip(0..).map(|(&v, k)| (v, k)).collect();
        blocks.insert(Vertex::Accept, 6);
        blocks.insert(Vertex::Reject, 7);
        Psi { name: "default".into(), blocks }
    }
}

impl Psi {
    /// A second packaged table with the result blocks first and gaps.
    pub fn alternative() -> Self {
        let ks = [10, 3, 12, 5, 4, 11];
        let mut blocks: BTreeMap<Vertex, i64> = Vertex::LETTERS.iter().copied().zip(ks).collect();
        blocks.insert(Vertex::Accept, 0);
        blocks.insert(Vertex::Reject, 1);
        Psi { name: "alt".into(), blocks }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn block(&self, v: Vertex) -> i64 {
        self.blocks[&v]
    }

    pub fn letter(&self, s: Symbol, d: Dir) -> i64 {
        self.block(Vertex::Letter(s, d))
    }

    pub fn accept(&self) -> i64 {
        self.block(Vertex::Accept)
    }

    pub fn reject(&self) -> i64 {
        self.block(Vertex::Reject)
    }

    pub fn vertex_at(&self, block: i64) -> Option<Vertex> {
        self.blocks.iter().find(|&(_, &k)| k == block).map(|(&v, _)| v)
    }

    /// `⟨Σ_ext⟩`, the six letter blocks.
    pub fn letters(&self) -> MSet {
        MSet::blocks(Vertex::LETTERS.iter().map(|&v| self.block(v)))
    }

    /// `⟨a, r⟩`.
    pub fn results(&self) -> MSet {
        MSet::blocks([self.accept(), self.reject()])
    }
}

impl FromStr for Psi {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "default" => Ok(Psi::default()),
            "alt" => Ok(Psi::alternative()),
            _ => Err(format!("unknown vertex table {s:?} (expected default or alt)")),
        }
    }
}

/// A word `⋆a₁…a_k`, stored with the leading `⋆` at position 0.
/// Words are ordered shortest first, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Symbol>,
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.letters.len(), &self.letters).cmp(&(other.letters.len(), &other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Word {
    pub fn new(body: &[Symbol]) -> Result<Word> {
        let mut letters = vec![Symbol::Star];
        for &s in body {
            if s == Symbol::Star {
                return Err(Error::BadAlphabet('*'));
            }
            letters.push(s);
        }
        Ok(Word { letters })
    }

    /// Number of letters after the `⋆`.
    pub fn len(&self) -> usize {
        self.letters.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Symbol at position `i mod (k+1)`.
    pub fn at(&self, i: usize) -> Symbol {
        self.letters[i % self.letters.len()]
    }

    pub fn body(&self) -> String {
        self.letters[1..].iter().map(|s| s.as_char()).collect()
    }

    /// All words of length at most `max_len`, shortest first.
    pub fn all_up_to(max_len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        for len in 0..=max_len {
            for bits in 0..(1u64 << len) {
                let body: Vec<Symbol> = (0..len)
                    .map(|i| if bits >> (len - 1 - i) & 1 == 1 { Symbol::One } else { Symbol::Zero })
                    .collect();
                out.push(Word::new(&body).expect("binary"));
            }
        }
        out
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Word> {
        let s = s.strip_prefix('*').or_else(|| s.strip_prefix('⋆')).unwrap_or(s);
        let body = s.chars().map(|c| if c == '*' || c == '⋆' { Err(Error::BadAlphabet(c)) } else { Symbol::from_char(c) });
        Word::new(&body.collect::<Result<Vec<_>>>()?)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "ε")
        } else {
            write!(f, "{}", self.body())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    R,
    L,
}

/// Edge `(kind, i)` of the discrete representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WordEdge {
    pub kind: Kind,
    pub index: usize,
    pub source: (Symbol, Dir),
    pub input: usize,
    pub target: (Symbol, Dir),
    pub output: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordGraph {
    pub word: Word,
    pub edges: Vec<WordEdge>,
}

impl WordGraph {
    pub fn dialect_size(&self) -> usize {
        self.word.len() + 1
    }
}

/// `(r,i): (a_i,Out,i) → (a_{i+1},In,i+1)` and `(l,i): (a_i,In,i) → (a_{i−1},Out,i−1)`, indices mod `k+1`.
pub fn word_graph(w: &Word) -> WordGraph {
    let n = w.len() + 1;
    let mut edges = Vec::with_capacity(2 * n);
    for i in 0..n {
        let j = (i + 1) % n;
        edges.push(WordEdge { kind: Kind::R, index: i, source: (w.at(i), Dir::Out), input: i, target: (w.at(j), Dir::In), output: j });
    }
    for i in 0..n {
        let j = (i + n - 1) % n;
        edges.push(WordEdge { kind: Kind::L, index: i, source: (w.at(i), Dir::In), input: i, target: (w.at(j), Dir::Out), output: j });
    }
    WordGraph { word: w.clone(), edges }
}

/// Realise each word-graph edge as a block translation over `⟨Σ_ext⟩`.
pub fn word_graphing(w: &Word, psi: &Psi) -> Graphing {
    let wg = word_graph(w);
    let edges = wg
        .edges
        .iter()
        .map(|e| {
            let (s, t) = (psi.letter(e.source.0, e.source.1), psi.letter(e.target.0, e.target.1));
            let label = format!("{}{}", if e.kind == Kind::R { 'r' } else { 'l' }, e.index);
            Edge::new(MSet::blocks([s]), e.input, e.output, Descriptor::translation(Q::from_integer(t - s))).labelled(label)
        })
        .collect();
    Graphing::new(psi.letters(), wg.dialect_size(), edges)
}

/// Fold the dialect into coordinate 1: state `i` becomes `[i/n, (i+1)/n)`.
pub fn promote(g: &Graphing) -> Result<Graphing> {
    let n = g.dialect_size as i64;
    let mut edges = Vec::with_capacity(g.edges.len());
    for (idx, e) in g.edges.iter().enumerate() {
        let m = &e.map;
        if perm_apply(m.perm(), 1) != 1 || !m.shift_at(1).is_zero() {
            return Err(Error::PairingRequired(idx));
        }
        let i = e.input as i64;
        let band = Interval::of(Q::new(i, n), Q::new(i + 1, n));
        let source = MSet::from_boxes(e.source.boxes().iter().map(|b| b.clone().with(1, b.coord(1).intersect(&band))));
        let mut shifts = m.shifts().clone();
        let s = frac(Q::new(e.output as i64 - i, n));
        if !s.is_zero() {
            shifts.insert(1, s);
        }
        let map = Descriptor::new(m.slope(), m.offset(), m.perm().clone(), shifts)?;
        let mut ne = Edge::new(source, 0, 0, map).weighted(e.weight);
        ne.label = e.label.clone();
        edges.push(ne);
    }
    Ok(Graphing::new(g.support.clone(), 1, edges))
}

/// `!L` for `L` the word graphing with its dialect renamed by `renaming` into `[new_size]`.
pub fn representation(w: &Word, renaming: &[usize], new_size: usize, psi: &Psi) -> Result<Graphing> {
    promote(&rename_dialect(&word_graphing(w, psi), renaming, new_size)?)
}

/// The canonical representation: identity renaming.
pub fn canonical_representation(w: &Word, psi: &Psi) -> Graphing {
    let ids: Vec<usize> = (0..=w.len()).collect();
    representation(w, &ids, w.len() + 1, psi).expect("word graphings act only on the line")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphings::validate;
    use crate::microcosm::MicrocosmSpec;
    use crate::rational::{q, qi};

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn word_graph_shapes() {
        let e = word_graph(&w(""));
        assert_eq!(e.edges.len(), 2);
        assert!(e.edges.iter().all(|x| x.source.0 == Symbol::Star && x.input == 0 && x.output == 0));
        assert_eq!(word_graph(&w("0")).edges.len(), 4);
        let g = word_graph(&w("01"));
        assert_eq!(g.edges.len(), 6);
        let r1 = g.edges.iter().find(|x| x.kind == Kind::R && x.index == 1).unwrap();
        assert_eq!((r1.source, r1.input), ((Symbol::Zero, Dir::Out), 1));
        assert_eq!((r1.target, r1.output), ((Symbol::One, Dir::In), 2));
        assert!(matches!("0a1".parse::<Word>(), Err(Error::BadAlphabet('a'))));
    }

    #[test]
    fn word_graphing_translates_blocks() {
        let psi = Psi::default();
        let g = word_graphing(&w("0"), &psi);
        assert_eq!(g.edges.len(), 4);
        assert!(validate(&g, MicrocosmSpec::Macrocosm).is_empty());
        assert!(g.is_deterministic());
        for (e, we) in g.edges.iter().zip(&word_graph(&w("0")).edges) {
            assert!(e.image().equal_ae(&MSet::blocks([psi.letter(we.target.0, we.target.1)])));
            assert_eq!(e.weight, crate::graphings::Weight::ONE);
        }
    }

    #[test]
    fn promotion_grid() {
        let p = promote(&word_graphing(&w("0"), &Psi::default())).unwrap();
        assert_eq!(p.dialect_size, 1);
        assert_eq!(p.edges.len(), 4);
        for e in &p.edges {
            assert_eq!(e.source.measure(), q(1, 2));
        }
        let r = representation(&w("0"), &[2, 3], 4, &Psi::default()).unwrap();
        let iv = r.edges[0].source.boxes()[0].coord(1);
        assert_eq!((iv.lo(), iv.hi()), (q(1, 2), q(3, 4)));
        let one = Graphing::new(MSet::blocks([0]), 3, vec![Edge::new(MSet::blocks([0]), 0, 1, Descriptor::identity())]);
        assert_eq!(promote(&one).unwrap().edges[0].map.shift_at(1), q(1, 3));
        let flat = Graphing::new(MSet::blocks([0]), 1, vec![Edge::new(MSet::blocks([0]), 0, 0, Descriptor::translation(qi(0)))]);
        assert!(promote(&flat).unwrap().edges[0].source.equal_ae(&MSet::blocks([0])));
        let bad = Graphing::new(MSet::blocks([0]), 1, vec![Edge::new(MSet::blocks([0]), 0, 0, Descriptor::shift(1, q(1, 2)))]);
        assert!(matches!(promote(&bad), Err(Error::PairingRequired(0))));
    }

    #[test]
    fn tables_are_injective() {
        for psi in [Psi::default(), Psi::alternative()] {
            let mut ks: Vec<i64> = psi.blocks.values().copied().collect();
            ks.sort_unstable();
            ks.dedup();
            assert_eq!(ks.len(), 8);
        }
        assert_eq!(Word::all_up_to(3).len(), 15);
    }
}
