//! Measurement between graphings, projects and tests.
//!
//! With unit scalar weights the measurement only takes the values 0 and +∞:
//! it is infinite exactly when some alternating circuit carries the flag,
//! because then every iterate of the circuit contributes the same positive
//! amount. Series mode handles scalars below 1 by summing primitive circuits
//! and their powers in closed form, with a certified bound on the remainder.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::cells::{CellId, CellIndex, CellSpace};
use crate::error::{Error, Result};
use crate::execution::Side;
use crate::graphings::{Graphing, Project, Scalar, Weight};
use crate::microcosm::{perm_compose, perm_order, Perm};
use crate::rational::Q;
use crate::space::MSet;
use crate::words::Psi;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureValue {
    Finite(Q),
    Infinite,
}

impl fmt::Display for MeasureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureValue::Finite(q) => write!(f, "{q}"),
            MeasureValue::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectMeasure {
    Finite(Scalar),
    Infinite,
}

impl fmt::Display for ProjectMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectMeasure::Finite(s) => write!(f, "{s}"),
            ProjectMeasure::Infinite => write!(f, "inf"),
        }
    }
}

fn has_flag(g: &Graphing) -> bool {
    g.edges.iter().any(|e| e.weight.flag == 1)
}

fn check_exact(f: &Graphing, g: &Graphing) -> Result<CellSpace> {
    for gr in [f, g] {
        for (i, e) in gr.edges.iter().enumerate() {
            if e.map.slope().abs() != Q::one() {
                return Err(Error::NotMeasurePreserving { edge: e.name(i) });
            }
        }
    }
    for gr in [f, g] {
        if gr.edges.iter().any(|e| e.weight.a != Q::one()) {
            return Err(Error::NonUnitWeight);
        }
    }
    CellSpace::build(&[f, g], &[], None)
}

/// Nodes `(cell, F state, G state, side to move)` of the alternating product.
struct Product<'a> {
    f: &'a Graphing,
    g: &'a Graphing,
    fi: CellIndex,
    gi: CellIndex,
}

type PNode = (CellId, usize, usize, Side);

impl<'a> Product<'a> {
    fn new(space: &CellSpace, f: &'a Graphing, g: &'a Graphing) -> Self {
        Product { f, g, fi: CellIndex::new(space, f), gi: CellIndex::new(space, g) }
    }

    /// Every arrow with its flag.
    fn arrows(&self) -> Vec<(PNode, PNode, bool)> {
        let mut out = Vec::new();
        for (&(c, s), list) in &self.fi.out {
            for &(_, t, o, w) in list {
                for gs in 0..self.g.dialect_size {
                    out.push(((c, s, gs, Side::F), (t, o, gs, Side::G), w.flag == 1));
                }
            }
        }
        for (&(c, s), list) in &self.gi.out {
            for &(_, t, o, w) in list {
                for fs in 0..self.f.dialect_size {
                    out.push(((c, fs, s, Side::G), (t, fs, o, Side::F), w.flag == 1));
                }
            }
        }
        out.sort();
        out
    }

    fn successors(&self, n: PNode) -> Vec<(PNode, bool)> {
        let (c, fs, gs, side) = n;
        match side {
            Side::F => self.fi.from(c, fs).iter().map(|&(_, t, o, w)| ((t, o, gs, Side::G), w.flag == 1)).collect(),
            Side::G => self.gi.from(c, gs).iter().map(|&(_, t, o, w)| ((t, fs, o, Side::F), w.flag == 1)).collect(),
        }
    }
}

/// Exact measurement for unit scalar weights: 0 or +∞.
pub fn measure_graphings(f: &Graphing, g: &Graphing) -> Result<MeasureValue> {
    if !has_flag(f) && !has_flag(g) {
        return Ok(MeasureValue::Finite(Q::zero()));
    }
    let space = check_exact(f, g)?;
    let prod = Product::new(&space, f, g);
    let arrows = prod.arrows();
    let mut graph: DiGraph<(), ()> = DiGraph::new();
    let mut ids: HashMap<PNode, NodeIndex> = HashMap::new();
    let mut id = |n: PNode, graph: &mut DiGraph<(), ()>| *ids.entry(n).or_insert_with(|| graph.add_node(()));
    let mut flagged = Vec::new();
    for &(a, b, flag) in &arrows {
        let (x, y) = (id(a, &mut graph), id(b, &mut graph));
        graph.add_edge(x, y, ());
        if flag {
            flagged.push((x, y));
        }
    }
    let mut comp = vec![usize::MAX; graph.node_count()];
    for (ci, scc) in tarjan_scc(&graph).into_iter().enumerate() {
        for n in scc {
            comp[n.index()] = ci;
        }
    }
    let cyclic = flagged.iter().any(|&(x, y)| x == y || comp[x.index()] == comp[y.index()]);
    Ok(if cyclic { MeasureValue::Infinite } else { MeasureValue::Finite(Q::zero()) })
}

/// Independent cycle search: is there an alternating cycle carrying the flag?
/// For each flagged arrow `u → v`, search depth-first from `v` for `u`.
pub fn flagged_cycle_exists(f: &Graphing, g: &Graphing) -> Result<bool> {
    if !has_flag(f) && !has_flag(g) {
        return Ok(false);
    }
    let space = check_exact(f, g)?;
    let prod = Product::new(&space, f, g);
    let mut flagged: Vec<(PNode, PNode)> = prod.arrows().into_iter().filter(|a| a.2).map(|(a, b, _)| (a, b)).collect();
    flagged.dedup();
    for (u, v) in flagged {
        let mut seen: HashSet<PNode> = HashSet::new();
        let mut stack = vec![v];
        while let Some(n) = stack.pop() {
            if n == u {
                return Ok(true);
            }
            if !seen.insert(n) {
                continue;
            }
            for (m, _) in prod.successors(n) {
                if !seen.contains(&m) {
                    stack.push(m);
                }
            }
        }
    }
    Ok(false)
}

/// Cells returning to themselves under the circuit map, with their period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub cells: Vec<CellId>,
    pub measure: Q,
    /// Period `ρ` of a generic point of the orbit under the circuit map.
    pub period: u64,
}

/// A primitive alternating circuit, given by its rotation-canonical edge
/// sequence (starting on the F side).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub steps: Vec<(Side, usize)>,
    pub weight: Weight,
    pub perm: Perm,
    pub orbits: Vec<Orbit>,
}

fn is_primitive(seq: &[(Side, usize)]) -> bool {
    let n = seq.len();
    (1..n).filter(|&d| n.is_multiple_of(d)).all(|d| (0..n).any(|i| seq[i] != seq[(i + d) % n]))
}

fn is_canonical(seq: &[(Side, usize)]) -> bool {
    let n = seq.len();
    (2..n).step_by(2).all(|r| {
        let rot = seq[r..].iter().chain(&seq[..r]);
        seq.iter().le(rot)
    })
}

/// Enumerate primitive circuits of length at most `max_len`.
pub fn circuits(f: &Graphing, g: &Graphing, max_len: usize, cap: usize) -> Result<Vec<Circuit>> {
    let space = CellSpace::build(&[f, g], &[], None)?;
    let (fi, gi) = (CellIndex::new(&space, f), CellIndex::new(&space, g));
    let side = |s: Side| if s == Side::F { (f, &fi) } else { (g, &gi) };
    let mut out = Vec::new();
    let mut expansions = 0usize;
    for (e0, edge) in f.edges.iter().enumerate() {
        let starts = space.cells_of(&edge.source);
        let mut stack = vec![vec![(Side::F, e0)]];
        while let Some(steps) = stack.pop() {
            expansions += 1;
            if expansions > cap {
                return Err(Error::IterationCapExceeded { cap });
            }
            // Replay the sequence from every start cell.
            let (mut fs, mut g_first, mut gs) = (edge.input, None, None);
            let mut perm = Perm::new();
            let mut weight = Weight::ONE;
            let mut pairs: Vec<(CellId, CellId)> = starts.iter().map(|&c| (c, c)).collect();
            for &(s, i) in &steps {
                let (gr, index) = side(s);
                let e = &gr.edges[i];
                perm = perm_compose(e.map.perm(), &perm);
                weight = weight.times(e.weight);
                if s == Side::F {
                    fs = e.output;
                } else {
                    g_first.get_or_insert(e.input);
                    gs = Some(e.output);
                }
                pairs = pairs
                    .into_iter()
                    .filter_map(|(c0, c)| index.from(c, e.input).iter().find(|a| a.0 == i).map(|a| (c0, a.1)))
                    .collect();
            }
            if pairs.is_empty() {
                continue;
            }
            let len = steps.len();
            if len % 2 == 0 && fs == edge.input && gs == g_first && is_primitive(&steps) && is_canonical(&steps) {
                let orbits = orbits_of(&space, &fi, e0, edge.input, &pairs, &perm);
                if !orbits.is_empty() {
                    out.push(Circuit { steps: steps.clone(), weight, perm, orbits });
                }
            }
            if len >= max_len {
                continue;
            }
            let next = if len % 2 == 1 { Side::G } else { Side::F };
            let state = if next == Side::F { Some(fs) } else { gs };
            let (gr, index) = side(next);
            let mut cand: BTreeSet<usize> = BTreeSet::new();
            for &(_, c) in &pairs {
                for (si, e) in gr.edges.iter().enumerate() {
                    if state.is_none_or(|s| s == e.input) && index.from(c, e.input).iter().any(|a| a.0 == si) {
                        cand.insert(si);
                    }
                }
            }
            for si in cand.into_iter().rev() {
                let mut s2 = steps.clone();
                s2.push((next, si));
                stack.push(s2);
            }
        }
    }
    Ok(out)
}

fn orbits_of(space: &CellSpace, fi: &CellIndex, e0: usize, s0: usize, pairs: &[(CellId, CellId)], perm: &Perm) -> Vec<Orbit> {
    let start_ok = |c: CellId| fi.from(c, s0).iter().any(|a| a.0 == e0);
    let map: BTreeMap<CellId, CellId> = pairs.iter().copied().filter(|&(_, c)| start_ok(c)).collect();
    let mut done: HashSet<CellId> = HashSet::new();
    let mut out = Vec::new();
    for &c in map.keys() {
        if done.contains(&c) {
            continue;
        }
        let mut path = vec![c];
        let mut x = c;
        let cyc = loop {
            match map.get(&x) {
                Some(&y) if y == c => break true,
                Some(&y) if !path.contains(&y) && !done.contains(&y) => {
                    path.push(y);
                    x = y;
                }
                _ => break false,
            }
        };
        if cyc {
            done.extend(path.iter().copied());
            let j = path.len() as u64;
            let mut pj = Perm::new();
            for _ in 0..j {
                pj = perm_compose(perm, &pj);
            }
            out.push(Orbit {
                measure: space.cell_measure() * Q::from_integer(j as i64),
                period: j * perm_order(&pj),
                cells: path,
            });
        }
    }
    out
}

/// Result of a series-mode measurement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesMeasure {
    /// Exact contribution of all primitive circuits up to `depth` and their powers.
    pub value: BigRational,
    /// Certified upper bound on everything omitted.
    pub tail_bound: BigRational,
    pub depth: usize,
}

fn big(q: Q) -> BigRational {
    BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
}

fn pow(a: &BigRational, e: u64) -> BigRational {
    num_traits::pow::pow(a.clone(), e as usize)
}

/// `Σ_{k≥1} (gcd(k,ρ)/ρ) · a^{kρ/gcd(k,ρ)}` in closed form, for `0 ≤ a < 1`.
pub fn power_sum(a: &BigRational, rho: u64) -> BigRational {
    let mut total = BigRational::zero();
    let rho_b = BigRational::from_integer(BigInt::from(rho));
    for r in 1..=rho {
        let g = r.gcd(&rho);
        let num = pow(a, r * rho / g);
        let den = BigRational::one() - pow(a, rho * rho / g);
        total += BigRational::from_integer(BigInt::from(g)) / &rho_b * num / den;
    }
    total
}

/// Series-mode measurement with remainder below `tol`.
pub fn measure_series(f: &Graphing, g: &Graphing, tol: Q, cap: usize) -> Result<SeriesMeasure> {
    if !has_flag(f) && !has_flag(g) {
        return Ok(SeriesMeasure { value: BigRational::zero(), tail_bound: BigRational::zero(), depth: 0 });
    }
    for gr in [f, g] {
        for (i, e) in gr.edges.iter().enumerate() {
            if e.map.slope().abs() != Q::one() {
                return Err(Error::NotMeasurePreserving { edge: e.name(i) });
            }
        }
    }
    let space = CellSpace::build(&[f, g], &[], None)?;
    let amax = |gr: &Graphing| gr.edges.iter().map(|e| e.weight.a).max().unwrap_or_else(Q::zero);
    let a = big(amax(f) * amax(g));
    let degree = [f, g]
        .iter()
        .map(|gr| CellIndex::new(&space, gr).out.values().map(Vec::len).max().unwrap_or(0))
        .max()
        .unwrap_or(0);
    let d2a = BigRational::from_integer(BigInt::from(degree * degree)) * &a;
    if d2a >= BigRational::one() {
        return Err(Error::SeriesNotCertifiable(format!(
            "branching {degree} with scalar product {a} gives ratio {d2a} ≥ 1"
        )));
    }
    let edges = BigRational::from_integer(BigInt::from(f.edges.len() + g.edges.len()));
    let mu = big(f.edges.iter().chain(&g.edges).fold(MSet::empty(), |acc, e| acc.union(&e.source)).measure());
    let factor = edges * mu / ((BigRational::one() - &d2a) * (BigRational::one() - &a));
    let tol = big(tol);
    let mut half = 1u64;
    let tail = loop {
        let t = &factor * pow(&d2a, half);
        if t <= tol || d2a.is_zero() {
            break t;
        }
        half += 1;
    };
    let depth = (2 * (half - 1)) as usize;
    let mut value = BigRational::zero();
    for c in circuits(f, g, depth, cap)? {
        if c.weight.flag == 0 {
            continue;
        }
        let w = big(c.weight.a);
        for o in &c.orbits {
            value += big(o.measure) * power_sum(&w, o.period);
        }
    }
    Ok(SeriesMeasure { value, tail_bound: tail, depth })
}

pub fn measure_projects(p: &Project, q: &Project) -> Result<ProjectMeasure> {
    if !p.support().equal_ae(&q.support()) {
        return Err(Error::SupportMismatch);
    }
    measure_projects_unchecked(p, q)
}

/// `a·Σβ + b·Σα + Σ αβ⟦A_i, B_j⟧` without the equal-support check.
pub fn measure_projects_unchecked(p: &Project, q: &Project) -> Result<ProjectMeasure> {
    let mut total = p.wrapper * q.coef_sum() + q.wrapper * p.coef_sum();
    for a in &p.terms {
        for b in &q.terms {
            let k = a.coef * b.coef;
            if k.is_zero() {
                continue;
            }
            match measure_graphings(&a.graphing, &b.graphing)? {
                MeasureValue::Infinite => return Ok(ProjectMeasure::Infinite),
                MeasureValue::Finite(v) => total = total + Scalar::real(k * v),
            }
        }
    }
    Ok(ProjectMeasure::Finite(total))
}

/// Orthogonality reading `ζ` as an arbitrary nonzero parameter.
pub fn orthogonal_value(m: ProjectMeasure) -> bool {
    match m {
        ProjectMeasure::Infinite => false,
        ProjectMeasure::Finite(s) if !s.zeta.is_zero() => s.re.is_zero(),
        ProjectMeasure::Finite(s) => !s.re.is_zero(),
    }
}

pub fn orthogonal(p: &Project, q: &Project) -> Result<bool> {
    Ok(orthogonal_value(measure_projects(p, q)?))
}

/// The family `{(ζ, T) : ζ ≠ 0}` for a fixed graphing `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestFamily {
    pub graphing: Graphing,
}

impl TestFamily {
    /// The reject test: identity on the reject block with the flag set,
    /// over the support of both result blocks.
    pub fn reject(psi: &Psi) -> Self {
        let r = MSet::blocks([psi.reject()]);
        let mut t = Graphing::identity_on(r, Weight::TEST);
        t.support = MSet::blocks([psi.accept(), psi.reject()]);
        TestFamily { graphing: t }
    }

    pub fn project(&self) -> Project {
        Project::new(Scalar::zeta(), vec![(Q::one(), self.graphing.clone())])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// Decide `p` against every member of the family, by measurement and by an
/// independent cycle search; the two must agree.
pub fn decide_against_test(p: &Project, t: &TestFamily) -> Result<Verdict> {
    let tp = t.project();
    let by_measure = orthogonal(p, &tp)?;
    let mut infinite = false;
    for term in &p.terms {
        if !term.coef.is_zero() && flagged_cycle_exists(&term.graphing, &t.graphing)? {
            infinite = true;
        }
    }
    let by_cycles = if infinite {
        false
    } else {
        let s = p.wrapper * tp.coef_sum() + tp.wrapper * p.coef_sum();
        orthogonal_value(ProjectMeasure::Finite(s))
    };
    if by_measure != by_cycles {
        return Err(Error::RouteDisagreement(format!(
            "measurement says {by_measure}, cycle search says {by_cycles}"
        )));
    }
    Ok(if by_measure { Verdict::Pass } else { Verdict::Fail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphings::Edge;
    use crate::microcosm::Descriptor;
    use crate::rational::{q, qi};

    fn psi() -> Psi {
        Psi::default()
    }

    fn rr_result(with_loop: bool) -> Graphing {
        let p = psi();
        let support = MSet::blocks([p.accept(), p.reject()]);
        let edges = if with_loop { vec![Edge::new(MSet::blocks([p.reject()]), 0, 0, Descriptor::identity())] } else { vec![] };
        Graphing::new(support, 1, edges)
    }

    #[test]
    fn flag_free_is_zero() {
        let a = rr_result(true);
        assert_eq!(measure_graphings(&a, &a).unwrap(), MeasureValue::Finite(qi(0)));
        let e = Graphing::empty(MSet::empty());
        assert_eq!(measure_graphings(&e, &e).unwrap(), MeasureValue::Finite(qi(0)));
    }

    #[test]
    fn loop_against_test_is_infinite() {
        let t = TestFamily::reject(&psi());
        let r = rr_result(true);
        assert_eq!(measure_graphings(&r, &t.graphing).unwrap(), MeasureValue::Infinite);
        assert_eq!(measure_graphings(&t.graphing, &r).unwrap(), MeasureValue::Infinite);
        let cs = circuits(&r, &t.graphing, 6, 10_000).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].steps.len(), 2);
    }

    #[test]
    fn three_cell_rotation_has_period_three() {
        let f = Graphing::new(MSet::blocks([0]), 1, vec![Edge::new(MSet::blocks([0]), 0, 0, Descriptor::shift(1, q(1, 3)))]);
        let g = Graphing::identity_on(MSet::blocks([0]), Weight::TEST);
        let cs = circuits(&f, &g, 2, 1000).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].orbits.len(), 1);
        assert_eq!(cs[0].orbits[0].period, 3);
        assert_eq!(cs[0].orbits[0].measure, qi(1));
    }

    #[test]
    fn project_measurement_examples() {
        let t = TestFamily::reject(&psi());
        let clean = Project::of(rr_result(false));
        assert_eq!(measure_projects(&clean, &t.project()).unwrap(), ProjectMeasure::Finite(Scalar::zeta()));
        assert!(orthogonal(&clean, &t.project()).unwrap());
        let dirty = Project::of(rr_result(true));
        assert_eq!(measure_projects(&dirty, &t.project()).unwrap(), ProjectMeasure::Infinite);
        assert!(!orthogonal(&dirty, &t.project()).unwrap());
        assert!(!orthogonal(&clean, &clean).unwrap());
        assert_eq!(decide_against_test(&clean, &t).unwrap(), Verdict::Pass);
        assert_eq!(decide_against_test(&dirty, &t).unwrap(), Verdict::Fail);
        let other = Project::of(Graphing::empty(MSet::blocks([0])));
        assert!(matches!(measure_projects(&clean, &other), Err(Error::SupportMismatch)));
    }

    #[test]
    fn series_single_loop_matches_closed_form() {
        // Circuit weight 1/4 with period 1: Σ_k (1/4)^k = 1/3.
        let f = Graphing::new(
            MSet::blocks([0]),
            1,
            vec![Edge::new(MSet::blocks([0]), 0, 0, Descriptor::identity()).weighted(Weight::new(q(1, 2), 0))],
        );
        let g = Graphing::identity_on(MSet::blocks([0]), Weight::new(q(1, 2), 1));
        let s = measure_series(&f, &g, q(1, 1 << 20), 1_000_000).unwrap();
        assert_eq!(s.value, big(q(1, 3)));
        assert!(s.tail_bound <= big(q(1, 1 << 20)));
    }

    #[test]
    fn non_measure_preserving_is_rejected() {
        let f = Graphing::new(
            MSet::blocks([0, 1]),
            1,
            vec![Edge::new(MSet::blocks([0]), 0, 0, Descriptor::affine(qi(2), qi(0))).weighted(Weight::TEST)],
        );
        assert!(matches!(measure_graphings(&f, &f), Err(Error::NotMeasurePreserving { .. })));
    }
}
