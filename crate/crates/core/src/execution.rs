//! Alternating paths and execution (the plug `F ⊙ G` over a cut).
//!
//! Cell-rigid inputs are executed on their cell decomposition, which always
//! terminates and coalesces paths with identical realisations. Other inputs go
//! through a general enumerator over measurable prefixes, bounded by a length
//! limit or an iteration cap.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::cells::{CellId, CellIndex, CellSpace};
use crate::error::{Error, Result};
use crate::graphings::{Edge, Graphing, Project, Weight};
use crate::measurement::{measure_projects_unchecked, ProjectMeasure};
use crate::microcosm::{perm_compose, Descriptor, Perm};
use crate::rational::Q;
use crate::space::MSet;

/// Default cap on expansions, overridable through `GM_MAX_PATH_LEN`.
pub const DEFAULT_CAP: usize = 10_000;

pub fn default_cap() -> usize {
    std::env::var("GM_MAX_PATH_LEN").ok().and_then(|v| v.parse().ok()).filter(|&c| c > 0).unwrap_or(DEFAULT_CAP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    F,
    G,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::F => Side::G,
            Side::G => Side::F,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if *self == Side::F { "F" } else { "G" })
    }
}

/// Dialect states of the two graphings; `None` means the path never used
/// that graphing and leaves its state free.
pub type StatePair = (Option<usize>, Option<usize>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlternatingPath {
    pub steps: Vec<(Side, usize)>,
    pub map: Descriptor,
    /// The set `S_π` of points along which the whole path is defined.
    pub source: MSet,
    pub input: StatePair,
    pub output: StatePair,
    pub weight: Weight,
}

impl AlternatingPath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn image(&self) -> MSet {
        self.map.apply_mset(&self.source)
    }

    pub fn label(&self, f: &Graphing, g: &Graphing) -> String {
        self.steps
            .iter()
            .map(|&(s, i)| match s {
                Side::F => f.edges[i].name(i),
                Side::G => g.edges[i].name(i),
            })
            .collect::<Vec<_>>()
            .join("·")
    }
}

fn side_edges<'a>(f: &'a Graphing, g: &'a Graphing, s: Side) -> &'a [Edge] {
    match s {
        Side::F => &f.edges,
        Side::G => &g.edges,
    }
}

struct Prefix {
    path: AlternatingPath,
    image: MSet,
}

/// Breadth-first enumeration of alternating prefixes. With a cut, starts are
/// restricted outside it and only the part of each image inside it is
/// extended. Returns whether some prefix could still be extended at `max_len`.
fn enumerate(
    f: &Graphing,
    g: &Graphing,
    cut: Option<&MSet>,
    max_len: Option<usize>,
    cap: usize,
    mut visit: impl FnMut(&AlternatingPath, &MSet),
) -> Result<bool> {
    let mut queue = VecDeque::new();
    for side in [Side::F, Side::G] {
        for (i, e) in side_edges(f, g, side).iter().enumerate() {
            let source = match cut {
                Some(c) => e.source.difference(c),
                None => e.source.clone(),
            };
            if source.is_null() {
                continue;
            }
            let image = e.map.apply_mset(&source);
            let mut input: StatePair = (None, None);
            let mut output: StatePair = (None, None);
            match side {
                Side::F => (input.0, output.0) = (Some(e.input), Some(e.output)),
                Side::G => (input.1, output.1) = (Some(e.input), Some(e.output)),
            }
            let path = AlternatingPath { steps: vec![(side, i)], map: e.map.clone(), source, input, output, weight: e.weight };
            queue.push_back(Prefix { path, image });
        }
    }
    let mut expanded = 0usize;
    let mut truncated = false;
    while let Some(p) = queue.pop_front() {
        expanded += 1;
        if max_len.is_none() && expanded > cap {
            return Err(Error::IterationCapExceeded { cap });
        }
        visit(&p.path, &p.image);
        let live = match cut {
            Some(c) => p.image.intersect(c),
            None => p.image.clone(),
        };
        if live.is_null() {
            continue;
        }
        let next = p.path.steps.last().expect("nonempty").0.other();
        let extendable = side_edges(f, g, next).iter().enumerate().filter_map(|(i, e)| {
            let state = match next {
                Side::F => p.path.output.0,
                Side::G => p.path.output.1,
            };
            if state.is_some_and(|s| s != e.input) {
                return None;
            }
            let avail = live.intersect(&e.source);
            (!avail.is_null()).then_some((i, e, avail))
        });
        let extendable: Vec<_> = extendable.collect();
        if max_len.is_some_and(|m| p.path.len() >= m) {
            truncated |= !extendable.is_empty();
            continue;
        }
        for (i, e, avail) in extendable {
            if magnitude(&p.path.map) + magnitude(&e.map) > MAX_BITS {
                return Err(Error::ArithmeticOverflow(format!("composing paths of length {}", p.path.len() + 1)));
            }
            let mut path = p.path.clone();
            path.steps.push((next, i));
            path.source = p.path.map.preimage(&avail);
            path.map = e.map.compose(&p.path.map);
            path.weight = p.path.weight.times(e.weight);
            match next {
                Side::F => {
                    path.input.0.get_or_insert(e.input);
                    path.output.0 = Some(e.output);
                }
                Side::G => {
                    path.input.1.get_or_insert(e.input);
                    path.output.1 = Some(e.output);
                }
            }
            let image = e.map.apply_mset(&avail);
            queue.push_back(Prefix { path, image });
        }
    }
    Ok(truncated)
}

/// Bound on the combined bit size of two composed maps.
const MAX_BITS: u32 = 56;

fn bits(x: &Q) -> u32 {
    let width = |v: u64| u64::BITS - v.leading_zeros();
    width(x.numer().unsigned_abs()) + width(x.denom().unsigned_abs())
}

fn magnitude(d: &Descriptor) -> u32 {
    bits(&d.slope()).max(bits(&d.offset()))
}

/// All alternating paths between `f` and `g` of length at most `max_len`.
pub fn alternating_paths(f: &Graphing, g: &Graphing, max_len: Option<usize>, cap: usize) -> Result<Vec<AlternatingPath>> {
    let mut out = Vec::new();
    enumerate(f, g, None, max_len, cap, |p, _| out.push(p.clone()))?;
    Ok(out)
}

/// A path restricted to the points entering and leaving outside a cut.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathEdge {
    pub source: MSet,
    pub map: Descriptor,
    pub weight: Weight,
    pub input: StatePair,
    pub output: StatePair,
}

pub fn restrict_path(path: &AlternatingPath, cut: &MSet) -> Option<PathEdge> {
    let source = path.source.difference(cut).difference(&path.map.preimage(cut));
    (!source.is_null()).then(|| PathEdge {
        source,
        map: path.map.clone(),
        weight: path.weight,
        input: path.input,
        output: path.output,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct PlugOptions {
    /// Longest path considered by the general route (none: run to the cap).
    pub max_len: Option<usize>,
    pub cap: usize,
}

impl Default for PlugOptions {
    fn default() -> Self {
        PlugOptions { max_len: None, cap: default_cap() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub graphing: Graphing,
    /// Whether the general route stopped at `max_len` with live prefixes.
    pub truncated: bool,
    /// Whether the cell route was used.
    pub cellular: bool,
}

type EdgeKey = (usize, usize, Descriptor, Weight);

fn expand_states(pair: StatePair, f: &Graphing, g: &Graphing) -> Vec<(usize, usize)> {
    let fs: Vec<usize> = pair.0.map(|s| vec![s]).unwrap_or_else(|| (0..f.dialect_size).collect());
    let gs: Vec<usize> = pair.1.map(|s| vec![s]).unwrap_or_else(|| (0..g.dialect_size).collect());
    fs.iter().flat_map(|&a| gs.iter().map(move |&b| (a, b))).collect()
}

fn finish(groups: BTreeMap<EdgeKey, MSet>, support: MSet, size: usize) -> Graphing {
    let edges = groups
        .into_iter()
        .filter(|(_, s)| !s.is_null())
        .map(|((i, o, map, w), source)| Edge::new(source, i, o, map).weighted(w))
        .collect();
    Graphing::new(support, size, edges)
}

/// The execution `F ⊙ G` over `cut`, with product dialect `f·|D_G| + g`.
pub fn plug(f: &Graphing, g: &Graphing, cut: &MSet, opts: PlugOptions) -> Result<Execution> {
    let support = f.support.union(&g.support).difference(cut);
    match CellSpace::build(&[f, g], &[cut], None) {
        Ok(space) => plug_cells(f, g, cut, &space, support, opts.cap),
        Err(Error::NotCellRigid { .. }) => plug_general(f, g, cut, support, opts),
        Err(e) => Err(e),
    }
}

fn plug_general(f: &Graphing, g: &Graphing, cut: &MSet, support: MSet, opts: PlugOptions) -> Result<Execution> {
    let ng = g.dialect_size;
    let mut groups: BTreeMap<EdgeKey, MSet> = BTreeMap::new();
    let truncated = enumerate(f, g, Some(cut), opts.max_len, opts.cap, |p, image| {
        let out = image.difference(cut);
        if out.is_null() {
            return;
        }
        let source = p.map.preimage(&out);
        for (a, b) in expand_states(p.input, f, g) {
            let (c, d) = (p.output.0.unwrap_or(a), p.output.1.unwrap_or(b));
            let key = (a * ng + b, c * ng + d, p.map.clone(), p.weight);
            let slot = groups.entry(key).or_default();
            *slot = slot.union(&source);
        }
    })
    .map_err(|e| match e {
        Error::IterationCapExceeded { cap } => Error::NonTerminating { cap },
        e => e,
    })?;
    let graphing = finish(groups, support, f.dialect_size * ng);
    Ok(Execution { graphing, truncated, cellular: false })
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Node {
    cell: CellId,
    fs: usize,
    gs: usize,
    next: Side,
    perm: Perm,
    weight: Weight,
}

fn plug_cells(f: &Graphing, g: &Graphing, cut: &MSet, space: &CellSpace, support: MSet, cap: usize) -> Result<Execution> {
    let (fi, gi) = (CellIndex::new(space, f), CellIndex::new(space, g));
    let inside: HashSet<CellId> = space.cells_of(cut).into_iter().collect();
    let ng = g.dialect_size;
    let mut starts: BTreeSet<(CellId, usize, usize, Side)> = BTreeSet::new();
    for (side, gr, other) in [(Side::F, f, g.dialect_size), (Side::G, g, f.dialect_size)] {
        for e in &gr.edges {
            for c in space.cells_of(&e.source) {
                if inside.contains(&c) {
                    continue;
                }
                for o in 0..other {
                    let (fs, gs) = if side == Side::F { (e.input, o) } else { (o, e.input) };
                    starts.insert((c, fs, gs, side));
                }
            }
        }
    }
    let mut groups: BTreeMap<EdgeKey, Vec<CellId>> = BTreeMap::new();
    for &(start, fs0, gs0, side0) in &starts {
        let first = Node { cell: start, fs: fs0, gs: gs0, next: side0, perm: Perm::new(), weight: Weight::ONE };
        let mut seen: HashSet<Node> = HashSet::new();
        let mut queue = VecDeque::from([first]);
        let mut expansions = 0usize;
        while let Some(node) = queue.pop_front() {
            if !seen.insert(node.clone()) {
                continue;
            }
            expansions += 1;
            if expansions > cap {
                return Err(Error::NonTerminating { cap });
            }
            let (index, gr, state) = match node.next {
                Side::F => (&fi, f, node.fs),
                Side::G => (&gi, g, node.gs),
            };
            for &(ei, to, out_state, w) in index.from(node.cell, state) {
                let perm = perm_compose(gr.edges[ei].map.perm(), &node.perm);
                let weight = node.weight.times(w);
                let (fs, gs) = match node.next {
                    Side::F => (out_state, node.gs),
                    Side::G => (node.fs, out_state),
                };
                if inside.contains(&to) {
                    queue.push_back(Node { cell: to, fs, gs, next: node.next.other(), perm, weight });
                } else {
                    let d = space.descriptor_between(start, to, &perm);
                    groups.entry((fs0 * ng + gs0, fs * ng + gs, d, weight)).or_default().push(start);
                }
            }
        }
    }
    let groups = groups.into_iter().map(|(k, cells)| (k, space.to_mset(&cells))).collect();
    let graphing = finish(groups, support, f.dialect_size * ng);
    Ok(Execution { graphing, truncated: false, cellular: true })
}

/// Project-level execution: the wrapper is the project measurement, the terms
/// are the pairwise plugs.
pub fn plug_projects(p: &Project, q: &Project, cut: &MSet, opts: PlugOptions) -> Result<Project> {
    let wrapper = match measure_projects_unchecked(p, q)? {
        ProjectMeasure::Infinite => return Err(Error::InfiniteWrapper),
        ProjectMeasure::Finite(s) => s,
    };
    let mut terms = Vec::new();
    for a in &p.terms {
        for b in &q.terms {
            terms.push((a.coef * b.coef, plug(&a.graphing, &b.graphing, cut, opts)?.graphing));
        }
    }
    Ok(Project::new(wrapper, terms))
}
