//! Graphing representatives: weighted, dialected edge sets over measurable
//! sets, together with projects and the operations relating them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::microcosm::{classify, Descriptor, MicrocosmSpec};
use crate::rational::{serde_q, Q};
use crate::space::{combine, MSet};

/// Element of the weight monoid `[0,1] × {0,1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight {
    #[serde(with = "serde_q", default = "unit_a")]
    pub a: Q,
    #[serde(default)]
    pub flag: u8,
}

fn unit_a() -> Q {
    Q::one()
}

impl Default for Weight {
    fn default() -> Self {
        Weight::ONE
    }
}

impl Weight {
    pub const ONE: Weight = Weight { a: Q::new_raw(1, 1), flag: 0 };
    pub const TEST: Weight = Weight { a: Q::new_raw(1, 1), flag: 1 };

    pub fn new(a: Q, flag: u8) -> Self {
        Weight { a, flag: flag.min(1) }
    }

    /// Monoid product: multiply the scalars, OR the flags.
    pub fn times(self, other: Weight) -> Weight {
        Weight { a: self.a * other.a, flag: self.flag.max(other.flag) }
    }

    /// The parameter map `m(a, f) = a·f`.
    pub fn param(self) -> Q {
        self.a * Q::from_integer(self.flag as i64)
    }

    fn is_default(&self) -> bool {
        *self == Weight::ONE
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.flag)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub source: MSet,
    #[serde(rename = "in")]
    pub input: usize,
    #[serde(rename = "out")]
    pub output: usize,
    #[serde(default)]
    pub map: Descriptor,
    #[serde(default, skip_serializing_if = "Weight::is_default")]
    pub weight: Weight,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Edge {
    pub fn new(source: MSet, input: usize, output: usize, map: Descriptor) -> Self {
        Edge { source, input, output, map, weight: Weight::ONE, label: None }
    }

    pub fn weighted(mut self, w: Weight) -> Self {
        self.weight = w;
        self
    }

    pub fn labelled(mut self, l: impl Into<String>) -> Self {
        self.label = Some(l.into());
        self
    }

    /// The target `φ_e(S_e)`.
    pub fn image(&self) -> MSet {
        self.map.apply_mset(&self.source)
    }

    pub fn name(&self, idx: usize) -> String {
        self.label.clone().unwrap_or_else(|| format!("#{idx}"))
    }

    fn key(&self) -> (usize, usize, &Descriptor, Weight) {
        (self.input, self.output, &self.map, self.weight)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraphing", into = "RawGraphing")]
pub struct Graphing {
    pub support: MSet,
    pub dialect_size: usize,
    pub edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct RawGraphing {
    support: MSet,
    /// Largest dialect index: the dialect is `{0..dialect}`.
    #[serde(default)]
    dialect: usize,
    #[serde(default)]
    edges: Vec<Edge>,
}

impl TryFrom<RawGraphing> for Graphing {
    type Error = Error;
    fn try_from(r: RawGraphing) -> Result<Self> {
        let g = Graphing { support: r.support, dialect_size: r.dialect + 1, edges: r.edges };
        if let Some((i, e)) = g.edges.iter().enumerate().find(|(_, e)| e.input >= g.dialect_size || e.output >= g.dialect_size) {
            return Err(Error::InvalidMachine(format!(
                "edge {} uses dialect state {} outside [0, {}]",
                e.name(i),
                e.input.max(e.output),
                r.dialect
            )));
        }
        Ok(g)
    }
}

impl From<Graphing> for RawGraphing {
    fn from(g: Graphing) -> Self {
        RawGraphing { support: g.support, dialect: g.dialect_size.saturating_sub(1), edges: g.edges }
    }
}

impl Graphing {
    pub fn new(support: MSet, dialect_size: usize, edges: Vec<Edge>) -> Self {
        Graphing { support, dialect_size: dialect_size.max(1), edges }
    }

    pub fn empty(support: MSet) -> Self {
        Graphing::new(support, 1, Vec::new())
    }

    /// Identity on `support` with the given weight and trivial dialect.
    pub fn identity_on(support: MSet, weight: Weight) -> Self {
        let e = Edge::new(support.clone(), 0, 0, Descriptor::identity()).weighted(weight);
        Graphing::new(support, 1, vec![e])
    }

    /// Largest coordinate mentioned by any source, support or map.
    pub fn max_coord(&self) -> usize {
        self.edges
            .iter()
            .map(|e| e.source.max_coord().max(e.map.max_coord()))
            .chain([self.support.max_coord()])
            .max()
            .unwrap_or(0)
    }

    /// True when a.e. every point lies in at most one source per dialect state.
    pub fn is_deterministic(&self) -> bool {
        for (i, e) in self.edges.iter().enumerate() {
            for f in &self.edges[i + 1..] {
                if e.input == f.input && !e.source.disjoint_ae(&f.source) {
                    return false;
                }
            }
        }
        true
    }
}

/// Diagnostics for `g` as a graphing in the microcosm `spec`; empty when valid.
pub fn validate(g: &Graphing, spec: MicrocosmSpec) -> Vec<String> {
    let mut out = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        let name = e.name(i);
        if e.input >= g.dialect_size || e.output >= g.dialect_size {
            out.push(format!("edge {name}: dialect state outside [0, {})", g.dialect_size));
        }
        if !classify(&e.map).member(spec) {
            out.push(format!("edge {name}: map {} is not in {spec}", e.map));
        }
        if !e.source.subset_ae(&g.support) {
            out.push(format!("edge {name}: source leaves the support"));
        }
        if !e.image().subset_ae(&g.support) {
            out.push(format!("edge {name}: image leaves the support"));
        }
    }
    out
}

fn comparable(f: &Graphing, g: &Graphing) -> Result<()> {
    if !f.support.equal_ae(&g.support) {
        return Err(Error::NonComparable("supports differ".into()));
    }
    if f.dialect_size != g.dialect_size {
        return Err(Error::NonComparable("dialect sizes differ".into()));
    }
    Ok(())
}

/// Whether `f` refines `g`: its edges partition into groups, one per edge of
/// `g`, with equal maps and weights and a.e. disjoint sources covering it.
pub fn refines(f: &Graphing, g: &Graphing) -> bool {
    if comparable(f, g).is_err() {
        return false;
    }
    let live: Vec<&Edge> = f.edges.iter().filter(|e| !e.source.is_null()).collect();
    let candidates: Vec<Vec<usize>> = live
        .iter()
        .map(|e| {
            g.edges
                .iter()
                .enumerate()
                .filter(|(_, h)| h.key() == e.key() && e.source.subset_ae(&h.source))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut assign = vec![usize::MAX; live.len()];
    search_assignment(&live, g, &candidates, &mut assign, 0)
}

fn search_assignment(live: &[&Edge], g: &Graphing, cand: &[Vec<usize>], assign: &mut [usize], i: usize) -> bool {
    if i == live.len() {
        return assignment_covers(live, g, assign);
    }
    for &j in &cand[i] {
        // Sources grouped under the same edge must be pairwise a.e. disjoint.
        if (0..i).any(|k| assign[k] == j && !live[k].source.disjoint_ae(&live[i].source)) {
            continue;
        }
        assign[i] = j;
        if search_assignment(live, g, cand, assign, i + 1) {
            return true;
        }
    }
    assign[i] = usize::MAX;
    false
}

fn assignment_covers(live: &[&Edge], g: &Graphing, assign: &[usize]) -> bool {
    g.edges.iter().enumerate().all(|(j, h)| {
        let union = live
            .iter()
            .zip(assign)
            .filter(|(_, &a)| a == j)
            .fold(MSet::empty(), |acc, (e, _)| acc.union(&e.source));
        union.equal_ae(&h.source)
    })
}

/// Whether `f` and `g` have a common refinement. For every combination of
/// dialect pair, map and weight, the number of edges covering each point must
/// agree almost everywhere.
type Sources<'a> = (Vec<&'a MSet>, Vec<&'a MSet>);

pub fn equivalent(f: &Graphing, g: &Graphing) -> Result<bool> {
    comparable(f, g)?;
    let mut groups: BTreeMap<(usize, usize, &Descriptor, Weight), Sources> = BTreeMap::new();
    for e in &f.edges {
        groups.entry(e.key()).or_default().0.push(&e.source);
    }
    for e in &g.edges {
        groups.entry(e.key()).or_default().1.push(&e.source);
    }
    for (fs, gs) in groups.values() {
        let nf = fs.len();
        let all: Vec<&MSet> = fs.iter().chain(gs.iter()).copied().collect();
        for k in 1..=nf.max(gs.len()) {
            let a = combine(&all, |m| m[..nf].iter().filter(|&&b| b).count() >= k);
            let b = combine(&all, |m| m[nf..].iter().filter(|&&b| b).count() >= k);
            if a != b {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Rename dialect state `i` to `injection[i]` in a dialect of size `new_size`.
pub fn rename_dialect(g: &Graphing, injection: &[usize], new_size: usize) -> Result<Graphing> {
    if injection.len() != g.dialect_size || injection.iter().any(|&j| j >= new_size) {
        return Err(Error::NotInjective);
    }
    let mut seen = vec![false; new_size];
    for &j in injection {
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::NotInjective);
        }
    }
    let edges = g
        .edges
        .iter()
        .map(|e| Edge { input: injection[e.input], output: injection[e.output], ..e.clone() })
        .collect();
    Ok(Graphing::new(g.support.clone(), new_size, edges))
}

/// Disjoint juxtaposition over the product dialect `f·|D_G| + g`.
pub fn juxtapose(f: &Graphing, g: &Graphing) -> Graphing {
    let (nf, ng) = (f.dialect_size, g.dialect_size);
    let mut edges = Vec::with_capacity(f.edges.len() * ng + g.edges.len() * nf);
    for e in &f.edges {
        for s in 0..ng {
            edges.push(Edge { input: e.input * ng + s, output: e.output * ng + s, ..e.clone() });
        }
    }
    for e in &g.edges {
        for s in 0..nf {
            edges.push(Edge { input: s * ng + e.input, output: s * ng + e.output, ..e.clone() });
        }
    }
    Graphing::new(f.support.union(&g.support), nf * ng, edges)
}

/// A scalar `re + zeta·ζ` where `ζ` stands for an arbitrary nonzero test
/// parameter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scalar {
    #[serde(with = "serde_q", default)]
    pub re: Q,
    #[serde(with = "serde_q", default)]
    pub zeta: Q,
}

impl Scalar {
    pub fn real(re: Q) -> Self {
        Scalar { re, zeta: Q::zero() }
    }

    pub fn zeta() -> Self {
        Scalar { re: Q::zero(), zeta: Q::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.zeta.is_zero()
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        Scalar { re: self.re + o.re, zeta: self.zeta + o.zeta }
    }
}

impl Mul<Q> for Scalar {
    type Output = Scalar;
    fn mul(self, k: Q) -> Scalar {
        Scalar { re: self.re * k, zeta: self.zeta * k }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.zeta.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}ζ", self.zeta),
            (false, false) => write!(f, "{} + {}ζ", self.re, self.zeta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "serde_q")]
    pub coef: Q,
    pub graphing: Graphing,
}

/// A scalar wrapper plus a finite formal sum of graphings of equal support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Project {
    #[serde(default)]
    pub wrapper: Scalar,
    pub terms: Vec<Term>,
}

impl Project {
    pub fn new(wrapper: Scalar, terms: Vec<(Q, Graphing)>) -> Self {
        Project { wrapper, terms: terms.into_iter().map(|(coef, graphing)| Term { coef, graphing }).collect() }
    }

    /// `(0, g)` with a single unit term.
    pub fn of(g: Graphing) -> Self {
        Project::new(Scalar::default(), vec![(Q::one(), g)])
    }

    pub fn support(&self) -> MSet {
        self.terms.iter().fold(MSet::empty(), |acc, t| acc.union(&t.graphing.support))
    }

    pub fn coef_sum(&self) -> Q {
        self.terms.iter().map(|t| t.coef).sum()
    }
}

/// Tensor of projects with a.e. disjoint supports.
pub fn tensor(p: &Project, q: &Project) -> Result<Project> {
    for a in &p.terms {
        for b in &q.terms {
            if !a.graphing.support.disjoint_ae(&b.graphing.support) {
                return Err(Error::OverlappingSupports);
            }
        }
    }
    let wrapper = p.wrapper * q.coef_sum() + q.wrapper * p.coef_sum();
    let mut terms = Vec::new();
    for a in &p.terms {
        for b in &q.terms {
            terms.push((a.coef * b.coef, juxtapose(&a.graphing, &b.graphing)));
        }
    }
    Ok(Project::new(wrapper, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use crate::space::{Cuboid, Interval};

    fn line(a: Q, b: Q) -> MSet {
        MSet::from_box(Cuboid::new(Interval::of(a, b)))
    }

    fn two_edges(first: Descriptor, second: Descriptor) -> Graphing {
        Graphing::new(
            line(qi(0), qi(2)),
            1,
            vec![Edge::new(line(qi(0), qi(1)), 0, 0, first), Edge::new(line(qi(1), qi(2)), 0, 0, second)],
        )
    }

    fn example_f() -> Graphing {
        two_edges(Descriptor::translation(qi(1)), Descriptor::translation(qi(-1)))
    }

    fn example_g() -> Graphing {
        two_edges(Descriptor::translation(qi(1)), Descriptor::affine(qi(-1), qi(2)))
    }

    fn example_h() -> Graphing {
        let mut h = example_f();
        h.edges[0].source = line(qi(0), q(1, 2));
        h.edges.push(Edge::new(line(q(1, 2), qi(1)), 0, 0, Descriptor::translation(qi(1))));
        h
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&example_f(), MicrocosmSpec::Z).is_empty());
        assert!(!validate(&example_g(), MicrocosmSpec::Z).is_empty());
        assert!(validate(&example_g(), MicrocosmSpec::Aff).is_empty());
        let mut bad = example_f();
        bad.edges[0].map = Descriptor::translation(qi(2));
        assert!(!validate(&bad, MicrocosmSpec::Z).is_empty());
    }

    #[test]
    fn refinement_examples() {
        let f = example_f();
        assert!(refines(&f, &f));
        assert!(refines(&example_h(), &f));
        assert!(!refines(&f, &example_h()));
        assert!(!refines(&example_g(), &f));
    }

    #[test]
    fn equivalence_examples() {
        assert!(equivalent(&example_f(), &example_h()).unwrap());
        assert!(!equivalent(&example_f(), &example_g()).unwrap());
        let f = example_f();
        let renamed = rename_dialect(&f, &[0], 1).unwrap();
        assert!(equivalent(&f, &renamed).unwrap());
    }

    #[test]
    fn renaming() {
        let g = Graphing::new(
            line(qi(0), qi(2)),
            2,
            vec![Edge::new(line(qi(0), qi(1)), 0, 1, Descriptor::translation(qi(1)))],
        );
        let r = rename_dialect(&g, &[2, 3], 4).unwrap();
        assert_eq!(r.dialect_size, 4);
        assert_eq!(r.edges.len(), 1);
        assert_eq!((r.edges[0].input, r.edges[0].output), (2, 3));
        assert!(matches!(rename_dialect(&g, &[1, 1], 4), Err(Error::NotInjective)));
    }

    #[test]
    fn tensor_examples() {
        let w = Project::of(Graphing::empty(MSet::blocks([0])));
        let t = Project::new(Scalar::zeta(), vec![(qi(1), Graphing::identity_on(MSet::blocks([7]), Weight::TEST))]);
        let wt = tensor(&w, &t).unwrap();
        assert_eq!(wt.wrapper, Scalar::zeta());
        assert_eq!(wt.terms.len(), 1);
        assert_eq!(wt.terms[0].graphing.edges.len(), 1);
        let ab = tensor(&w, &Project::of(Graphing::empty(MSet::blocks([1])))).unwrap();
        assert!(ab.wrapper.is_zero());
        assert!(matches!(tensor(&w, &w), Err(Error::OverlappingSupports)));
    }

    #[test]
    fn json_defaults() {
        let s = r#"{"support":[{"line":["0","2"]}],"dialect":0,"edges":[{"source":[{"line":["0","1"]}],"in":0,"out":0,"map":{"slope":"1/1","offset":"1/1"}}]}"#;
        let g: Graphing = serde_json::from_str(s).unwrap();
        assert_eq!(g.edges[0].weight, Weight::ONE);
        assert_eq!(g.dialect_size, 1);
        let back: Graphing = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
