//! Translations between multihead automata and machines, and the check that
//! automaton traces match alternating paths.
//!
//! Conventions shared by both directions:
//! - a permutation `σ` over heads is stored as image vectors;
//! - automaton `In` moves a head rightwards, which the word realises through
//!   an r-edge, so the machine aims at the `Out` block of the symbol read;
//! - after a machine edge, coordinate 1 holds the head that just moved.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_traits::One;

use crate::automata::{traces, Automaton, Builder, ACCEPT, INIT, REJECT};
use crate::cells::{CellIndex, CellSpace};
use crate::error::{Error, Result};
use crate::execution::Side;
use crate::graphings::{Edge, Graphing, Weight};
use crate::machines::{validate_machine, Machine};
use crate::microcosm::{perm_from_images, perm_inverse, star, Descriptor, Perm};
use crate::rational::Q;
use crate::space::MSet;
use crate::words::{canonical_representation, Dir, Psi, Symbol, Vertex, Word};

/// Dialect element `(state, σ, memory)` of an encoded automaton.
/// `sigma[h-1]` is the coordinate holding head `h`; the memory entry of the
/// head on coordinate 1 is a `⋆` placeholder, its symbol being given by the
/// block the word returns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag {
    pub state: String,
    pub sigma: Vec<usize>,
    pub memory: Vec<Symbol>,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.sigma.iter().map(|c| c.to_string()).collect();
        let m: String = self.memory.iter().map(|x| x.as_char()).collect();
        write!(f, "({},{s},{m})", self.state)
    }
}

/// Key of an edge family member: transition index, direction, `σ`.
pub type FamilyKey = (usize, Dir, Vec<usize>);

#[derive(Clone, Debug)]
pub struct Autograph {
    pub machine: Machine,
    /// Dialect state `i` carries `tags[i]`; `tags[0]` is `(init, id, ⋆⃗)`.
    pub tags: Vec<Tag>,
    pub index: HashMap<FamilyKey, usize>,
    /// Size of the full family `→ × {⋆,0,1} × {In,Out} × S_k` before pruning.
    pub families: usize,
}

fn factorial(k: usize) -> usize {
    (1..=k).product()
}

fn swap_one(sigma: &[usize], c: usize) -> Vec<usize> {
    sigma.iter().map(|&x| if x == 1 { c } else if x == c { 1 } else { x }).collect()
}

/// Encode an automaton as a machine.
///
/// An edge for transition `t = ((s⃗,q),(i,d',q'))` at `(d, σ)` leaves the block
/// `(a, d)` of the symbol just read by the in-flight head in state
/// `(q, σ, s⃗ with ⋆ at that head)`, exchanges coordinates 1 and `σ(i)` and
/// targets `(s_i, flip d')` in state `(q', τ(1,σ(i))∘σ, s⃗[i:=⋆])`. Halting
/// transitions target the result block with the reset tag and undo `σ`.
/// Only families reachable from the initial ones are kept.
pub fn automaton_to_machine(a: &Automaton, psi: &Psi) -> Result<Autograph> {
    a.validate()?;
    if a.transitions.iter().any(|t| t.next == INIT) {
        return Err(Error::InvalidAutomaton("transitions may not re-enter init".into()));
    }
    let k = a.heads;
    let id: Vec<usize> = (1..=k).collect();
    let stars = vec![Symbol::Star; k];
    let reset = Tag { state: INIT.into(), sigma: id.clone(), memory: stars.clone() };
    let mut tags = vec![reset.clone()];
    let mut tag_ids: HashMap<Tag, usize> = HashMap::from([(reset, 0)]);
    let mut intern = |t: Tag, tags: &mut Vec<Tag>| -> usize {
        *tag_ids.entry(t.clone()).or_insert_with(|| {
            tags.push(t);
            tags.len() - 1
        })
    };
    let mut edges = Vec::new();
    let mut index = HashMap::new();
    let mut seen: BTreeSet<(usize, Dir)> = BTreeSet::new();
    let mut queue: VecDeque<(usize, Dir)> = VecDeque::new();
    let mut emit = |ti: usize, d: Dir, src: usize, sigma: &[usize], src_block: i64, edges: &mut Vec<Edge>, tags: &mut Vec<Tag>| -> Option<(usize, Dir)> {
        let t = &a.transitions[ti];
        let label = format!("t{ti}/{d:?}/{}", sigma.iter().map(|c| c.to_string()).collect::<String>());
        let key = (ti, d, sigma.to_vec());
        if t.halts() {
            let block = if t.next == ACCEPT { psi.accept() } else { psi.reject() };
            let undo: Perm = perm_inverse(&perm_from_images(sigma));
            let map = Descriptor::new(Q::from_integer(1), Q::from_integer(block - src_block), undo, BTreeMap::new()).expect("valid");
            index.insert(key, edges.len());
            edges.push(Edge::new(MSet::blocks([src_block]), src, 0, map).labelled(label));
            return None;
        }
        let i = t.head.expect("validated");
        let dir = t.dir.expect("validated");
        let c = sigma[i - 1];
        let block = psi.letter(t.read[i - 1], dir.flip());
        let mut memory = t.read.clone();
        memory[i - 1] = Symbol::Star;
        let next = Tag { state: t.next.clone(), sigma: swap_one(sigma, c), memory };
        let out = intern(next, tags);
        let map = Descriptor::new(Q::from_integer(1), Q::from_integer(block - src_block), star(c), BTreeMap::new()).expect("valid");
        index.insert(key, edges.len());
        edges.push(Edge::new(MSet::blocks([src_block]), src, out, map).labelled(label));
        Some((out, dir))
    };
    for (ti, t) in a.transitions.iter().enumerate() {
        if t.state != INIT || t.read != stars {
            continue;
        }
        for (d, block) in [(Dir::In, psi.accept()), (Dir::Out, psi.reject())] {
            if let Some(r) = emit(ti, d, 0, &id, block, &mut edges, &mut tags) {
                if seen.insert(r) {
                    queue.push_back(r);
                }
            }
        }
    }
    while let Some((src, d)) = queue.pop_front() {
        let tag = tags[src].clone();
        let flying = tag.sigma.iter().position(|&c| c == 1).expect("σ is a permutation");
        for (ti, t) in a.transitions.iter().enumerate() {
            if t.state != tag.state {
                continue;
            }
            let agrees = (0..k).all(|h| h == flying || t.read[h] == tag.memory[h]);
            if !agrees {
                continue;
            }
            let block = psi.letter(t.read[flying], d);
            if let Some(r) = emit(ti, d, src, &tag.sigma, block, &mut edges, &mut tags) {
                if seen.insert(r) {
                    queue.push_back(r);
                }
            }
        }
    }
    let g = Graphing::new(psi.letters().union(&psi.results()), tags.len(), edges);
    let machine = validate_machine(g, psi).map_err(|d| Error::InvalidMachine(d.join("; ")))?;
    Ok(Autograph { machine, tags, index, families: a.transitions.len() * 3 * 2 * factorial(k) })
}

/// Outcome of comparing traces with alternating paths on one word.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Correspondence {
    /// `(trace length m, traces, paths of length 2m−1 from a, from r)`.
    pub per_length: Vec<(usize, usize, usize, usize)>,
    pub mismatches: Vec<String>,
}

impl Correspondence {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

type Steps = Vec<(Side, usize)>;

/// Every alternating path between the machine and the representation that
/// starts on the machine side in `start` with the reset tag, by odd length.
fn enumerate_paths(mi: &CellIndex, wi: &CellIndex, start: usize, max_len: usize) -> BTreeSet<Steps> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<(Steps, usize, usize)> = vec![(vec![], start, 0)];
    while let Some((steps, cell, state)) = stack.pop() {
        if steps.len() % 2 == 1 {
            out.insert(steps.clone());
        }
        if steps.len() == max_len {
            continue;
        }
        let (side, index, st) = if steps.len() % 2 == 0 { (Side::F, mi, state) } else { (Side::G, wi, 0) };
        for &(e, to, o, _) in index.from(cell, st) {
            let mut s = steps.clone();
            s.push((side, e));
            stack.push((s, to, if side == Side::F { o } else { state }));
        }
    }
    out
}

/// Map each trace to the path replaying it, check injectivity and that the
/// image is exactly the set of odd paths from the `Y` cells of `a` and `r`.
pub fn trace_path_correspondence(a: &Automaton, w: &Word, max_steps: usize, psi: &Psi) -> Result<Correspondence> {
    let ag = automaton_to_machine(a, psi)?;
    let m = &ag.machine.graphing;
    let rep = canonical_representation(w, psi);
    let space = CellSpace::build(&[m, &rep], &[], None)?;
    let (mi, wi) = (CellIndex::new(&space, m), CellIndex::new(&space, &rep));
    let origin = vec![0i64; space.dims()];
    let n = w.len() + 1;
    let trs = traces(a, w, max_steps)?;
    let mut report = Correspondence::default();
    let max_len = 2 * max_steps.max(1) - 1;
    let mut found: [BTreeMap<usize, usize>; 2] = Default::default();
    for (slot, (block, first_dir)) in [(psi.accept(), Dir::In), (psi.reject(), Dir::Out)].into_iter().enumerate() {
        let y = space.cell(block, &origin).expect("result block is in the cell space");
        let paths = if max_steps == 0 { BTreeSet::new() } else { enumerate_paths(&mi, &wi, y, max_len) };
        for p in &paths {
            *found[slot].entry(p.len().div_ceil(2)).or_default() += 1;
        }
        let mut image: BTreeSet<Steps> = BTreeSet::new();
        for tr in &trs {
            let mut steps: Steps = Vec::new();
            let mut sigma: Vec<usize> = (1..=a.heads).collect();
            let mut d = first_dir;
            for (s, &ti) in tr.transitions.iter().enumerate() {
                let key = (ti, d, sigma.clone());
                let Some(&e) = ag.index.get(&key) else {
                    report.mismatches.push(format!("{w}: no edge for transition {ti} at {d:?}/{sigma:?}"));
                    break;
                };
                if s == 0 && !space.cells_of(&m.edges[e].source).contains(&y) {
                    report.mismatches.push(format!("{w}: first edge {e} does not start in the Y cell"));
                }
                steps.push((Side::F, e));
                let t = &a.transitions[ti];
                if t.halts() || s + 1 == tr.transitions.len() {
                    continue;
                }
                let h = t.head.expect("moving transition");
                let dir = t.dir.expect("moving transition");
                let p = tr.configurations[s].positions[h - 1];
                steps.push((Side::G, if dir == Dir::In { p } else { n + p }));
                sigma = swap_one(&sigma, sigma[h - 1]);
                d = dir;
            }
            if !image.insert(steps.clone()) {
                report.mismatches.push(format!("{w}: two traces map to the path {steps:?}"));
            }
        }
        for p in paths.difference(&image) {
            report.mismatches.push(format!("{w}: path {p:?} from block {block} has no trace"));
        }
        for p in image.difference(&paths) {
            report.mismatches.push(format!("{w}: trace path {p:?} from block {block} is not an alternating path"));
        }
    }
    for len in 1..=max_steps {
        let traces_here = trs.iter().filter(|t| t.len() == len).count();
        report.per_length.push((len, traces_here, *found[0].get(&len).unwrap_or(&0), *found[1].get(&len).unwrap_or(&0)));
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtractMode {
    /// The transitions as stated: anchor with all heads on `⋆`, direction ignored.
    Verbatim,
    /// Walk the heads to arbitrary positions before anchoring; track direction.
    Preamble,
}

impl std::str::FromStr for ExtractMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "verbatim" => Ok(ExtractMode::Verbatim),
            "preamble" => Ok(ExtractMode::Preamble),
            _ => Err(format!("unknown mode {s:?} (expected verbatim or preamble)")),
        }
    }
}

/// One machine edge restricted to one source block.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Arc {
    input: usize,
    source: Vertex,
    j: usize,
    target: Vertex,
    output: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Sim {
    Init,
    Walk(usize),
    /// At a letter block: dialect state, `σ` (coordinate to head), anchor, anchored symbols, arrival direction.
    Blk(usize, Vec<usize>, usize, Vec<Symbol>, Option<Dir>),
    Bounce(usize, Vec<usize>, usize, Vec<Symbol>),
    AtR(usize, Vec<usize>, usize, Vec<Symbol>),
    Rewind,
}

impl fmt::Display for Sim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let perm = |s: &[usize]| s.iter().map(|c| c.to_string()).collect::<String>();
        let word = |s: &[Symbol]| s.iter().map(|c| c.as_char()).collect::<String>();
        match self {
            Sim::Init => write!(f, "{INIT}"),
            Sim::Walk(h) => write!(f, "walk{h}"),
            Sim::Blk(q, s, i, m, d) => {
                write!(f, "at.{q}.{}.{i}.{}", perm(s), word(m))?;
                match d {
                    Some(d) => write!(f, ".{d:?}"),
                    None => Ok(()),
                }
            }
            Sim::Bounce(q, s, i, m) => write!(f, "bounce.{q}.{}.{i}.{}", perm(s), word(m)),
            Sim::AtR(q, s, i, m) => write!(f, "r.{q}.{}.{i}.{}", perm(s), word(m)),
            Sim::Rewind => write!(f, "rewind"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Graphauto {
    pub automaton: Automaton,
    pub mode: ExtractMode,
    /// Dialect states `q` with `(⟨r⟩, q)` both a source and a target.
    pub anchors: Vec<usize>,
    /// `|Q|·N!·|𝔦|·3^N`, doubled when the direction is tracked.
    pub state_space: u128,
    pub reachable: usize,
    pub notes: Vec<String>,
}

fn arcs_of(m: &Machine, psi: &Psi) -> Result<Vec<Arc>> {
    let mut arcs = Vec::new();
    for (idx, e) in m.graphing.edges.iter().enumerate() {
        let name = e.name(idx);
        let map = &e.map;
        if e.weight != Weight::ONE || !map.slope().is_one() || !map.offset().is_integer() || !map.shifts().is_empty() {
            return Err(Error::NotEssential(format!("{name} is not a translation with a transposition")));
        }
        let j = match map.perm().keys().copied().collect::<Vec<_>>().as_slice() {
            [] => 1,
            [1, j] if *map.perm() == star(*j) => *j,
            _ => return Err(Error::NotEssential(format!("{name} permutes more than a star transposition"))),
        };
        let offset = map.offset().to_integer();
        let blocks: BTreeSet<i64> = e.source.boxes().iter().flat_map(|b| b.line.lo().floor().to_integer()..b.line.hi().ceil().to_integer()).collect();
        if !e.source.equal_ae(&MSet::blocks(blocks.iter().copied())) {
            return Err(Error::NotEssential(format!("{name} has a source that is not a union of blocks")));
        }
        for k in blocks {
            let (Some(source), Some(target)) = (psi.vertex_at(k), psi.vertex_at(k + offset)) else {
                return Err(Error::NotEssential(format!("{name} leaves the vertex blocks")));
            };
            arcs.push(Arc { input: e.input, source, j, target, output: e.output });
        }
    }
    Ok(arcs)
}

fn all_reads(n: usize) -> Vec<Vec<Symbol>> {
    (0..n).fold(vec![vec![]], |acc, _| acc.into_iter().flat_map(|p| Symbol::ALL.map(|s| [p.clone(), vec![s]].concat())).collect())
}

/// Extract an automaton that rejects exactly when some alternating cycle
/// through the reject block exists between the machine and the word.
pub fn machine_to_automaton(m: &Machine, mode: ExtractMode, psi: &Psi) -> Result<Graphauto> {
    let arcs = arcs_of(m, psi)?;
    let n = m.head_bound.max(1);
    let from_r: BTreeSet<usize> = arcs.iter().filter(|a| a.source == Vertex::Reject).map(|a| a.input).collect();
    let into_r: BTreeSet<usize> = arcs.iter().filter(|a| a.target == Vertex::Reject).map(|a| a.output).collect();
    let anchors: Vec<usize> = from_r.intersection(&into_r).copied().collect();
    let preamble = mode == ExtractMode::Preamble;
    let mut by_input: HashMap<usize, Vec<&Arc>> = HashMap::new();
    for a in &arcs {
        by_input.entry(a.input).or_default().push(a);
    }
    let mut notes = vec![
        "the position-set component in the transition leaving the reject block is dropped".to_string(),
        "the emitted automaton is nondeterministic".to_string(),
    ];
    if anchors.is_empty() {
        notes.push("no vertex of the reject block is both a source and a target: nothing is rejected".into());
    }
    let reads = all_reads(n);
    let stars = vec![Symbol::Star; n];
    // Fire an arc from coordinates `sigma`; `check` is the symbol the source block demands of coordinate 1.
    let fire = |a: &Arc, sigma: &[usize], read: &[Symbol], anchor: usize, mem: &[Symbol], check: Option<Symbol>| -> Option<(usize, Dir, Sim)> {
        if check.is_some_and(|s| read[sigma[0] - 1] != s) {
            return None;
        }
        let mut next = sigma.to_vec();
        next.swap(0, a.j - 1);
        match a.target {
            Vertex::Letter(s, d) => {
                let head = sigma[a.j - 1];
                (read[head - 1] == s).then(|| (head, d.flip(), Sim::Blk(a.output, next, anchor, mem.to_vec(), preamble.then_some(d.flip()))))
            }
            Vertex::Reject => Some((1, Dir::In, Sim::Bounce(a.output, next, anchor, mem.to_vec()))),
            Vertex::Accept => None,
        }
    };
    let mut b = Builder::new(n);
    let mut seen: BTreeSet<Sim> = BTreeSet::from([Sim::Init]);
    let mut queue = VecDeque::from([Sim::Init]);
    let mut step = |b: &mut Builder, from: &Sim, read: &[Symbol], head: usize, dir: Dir, to: Sim, queue: &mut VecDeque<Sim>| {
        b.raw(&from.to_string(), read, Some(head), Some(dir), &to.to_string());
        if seen.insert(to.clone()) {
            queue.push_back(to);
        }
    };
    let id: Vec<usize> = (1..=n).collect();
    while let Some(state) = queue.pop_front() {
        match &state {
            Sim::Init if !preamble => {
                for &i in &anchors {
                    for a in by_input.get(&i).into_iter().flatten().filter(|a| a.source == Vertex::Reject) {
                        if let Some((h, d, to)) = fire(a, &id, &stars, i, &stars, None) {
                            step(&mut b, &state, &stars, h, d, to, &mut queue);
                        }
                    }
                }
            }
            Sim::Init => step(&mut b, &state, &stars, 1, Dir::In, Sim::Walk(1), &mut queue),
            Sim::Walk(h) => {
                for read in &reads {
                    step(&mut b, &state, read, *h, Dir::In, Sim::Walk(*h), &mut queue);
                    if *h < n {
                        step(&mut b, &state, read, h + 1, Dir::In, Sim::Walk(h + 1), &mut queue);
                        continue;
                    }
                    for &i in &anchors {
                        for a in by_input.get(&i).into_iter().flatten().filter(|a| a.source == Vertex::Reject) {
                            if let Some((hd, d, to)) = fire(a, &id, read, i, read, None) {
                                step(&mut b, &state, read, hd, d, to, &mut queue);
                            }
                        }
                    }
                }
            }
            Sim::Blk(q, sigma, i, mem, dir) => {
                for read in &reads {
                    for a in by_input.get(q).into_iter().flatten() {
                        let Vertex::Letter(s, d) = a.source else { continue };
                        if dir.is_some_and(|x| x != d) {
                            continue;
                        }
                        if let Some((h, d2, to)) = fire(a, sigma, read, *i, mem, Some(s)) {
                            step(&mut b, &state, read, h, d2, to, &mut queue);
                        }
                    }
                }
            }
            Sim::Bounce(q, sigma, i, mem) => {
                for read in &reads {
                    step(&mut b, &state, read, 1, Dir::Out, Sim::AtR(*q, sigma.clone(), *i, mem.clone()), &mut queue);
                }
            }
            Sim::AtR(q, sigma, i, mem) => {
                for read in &reads {
                    let closed = q == i
                        && if preamble { (0..n).all(|c| read[sigma[c] - 1] == mem[c]) } else { read == mem };
                    if closed {
                        match read.iter().position(|&s| s != Symbol::Star) {
                            None => {
                                b.raw(&state.to_string(), read, None, None, REJECT);
                            }
                            Some(h) => step(&mut b, &state, read, h + 1, Dir::Out, Sim::Rewind, &mut queue),
                        }
                    }
                    for a in by_input.get(q).into_iter().flatten().filter(|a| a.source == Vertex::Reject) {
                        if let Some((h, d, to)) = fire(a, sigma, read, *i, mem, None) {
                            step(&mut b, &state, read, h, d, to, &mut queue);
                        }
                    }
                }
            }
            Sim::Rewind => {
                b.rewind(&state.to_string(), REJECT);
            }
        }
    }
    let automaton = b.build();
    let q = m.graphing.dialect_size as u128;
    let mut state_space = q * factorial(n) as u128 * anchors.len() as u128 * 3u128.pow(n as u32);
    if preamble {
        state_space *= 2;
    }
    let reachable = automaton.states.len();
    Ok(Graphauto { automaton, mode, anchors, state_space, reachable, notes })
}
