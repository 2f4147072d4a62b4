#![allow(dead_code)]

use std::collections::BTreeMap;

use ig_core::graphings::{Edge, Graphing, Weight};
use ig_core::microcosm::{perm_from_images, Descriptor};
use ig_core::rational::{q, qi, Q};
use ig_core::space::{Cuboid, Interval, MSet};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

pub use rand::{Rng, SeedableRng};
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape shared by a pair of random graphings.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub dims: usize,
    pub grid: i64,
    pub states: usize,
}

pub fn random_shape(r: &mut TestRng) -> Shape {
    Shape { dims: r.gen_range(0..=2), grid: r.gen_range(1..=2), states: r.gen_range(1..=2) }
}

fn random_cell_box(r: &mut TestRng, block: i64, s: Shape) -> Cuboid {
    let mut b = Cuboid::block(block);
    for c in 1..=s.dims {
        if s.grid > 1 && r.gen_bool(0.5) {
            let i = r.gen_range(0..s.grid);
            b = b.with(c, Interval::of(q(i, s.grid), q(i + 1, s.grid)));
        }
    }
    b
}

fn random_map(r: &mut TestRng, from: i64, to: i64, s: Shape) -> Descriptor {
    let perm = if s.dims == 2 && r.gen_bool(0.5) { perm_from_images(&[2, 1]) } else { BTreeMap::new() };
    let shifts: BTreeMap<usize, Q> = (1..=s.dims).map(|c| (c, q(r.gen_range(0..s.grid), s.grid))).collect();
    Descriptor::new(qi(1), qi(to - from), perm, shifts).expect("valid descriptor")
}

/// A cell-rigid graphing on the blocks `{0, 1}` with unit weights.
pub fn random_graphing(r: &mut TestRng, s: Shape, flag_rate: f64) -> Graphing {
    let n_edges = r.gen_range(1..=4);
    let edges = (0..n_edges)
        .map(|_| {
            let (from, to) = (r.gen_range(0..2), r.gen_range(0..2));
            let source = MSet::from_box(random_cell_box(r, from, s));
            let map = random_map(r, from, to, s);
            let flag = u8::from(r.gen_bool(flag_rate));
            let (i, o) = (r.gen_range(0..s.states), r.gen_range(0..s.states));
            Edge::new(source, i, o, map).weighted(Weight::new(qi(1), flag))
        })
        .collect();
    Graphing::new(MSet::blocks([0, 1]), s.states, edges)
}

/// Split every source box in half along coordinate `c`.
pub fn split_along(g: &Graphing, c: usize) -> Graphing {
    let mut edges = Vec::new();
    for e in &g.edges {
        for b in e.source.boxes() {
            let iv = b.coord(c);
            let mid = (iv.lo() + iv.hi()) / qi(2);
            for half in [Interval::of(iv.lo(), mid), Interval::of(mid, iv.hi())] {
                edges.push(Edge { source: MSet::from_box(b.clone().with(c, half)), ..e.clone() });
            }
        }
    }
    Graphing::new(g.support.clone(), g.dialect_size, edges)
}

/// Another representative: split along two coordinates and shuffle the edges.
pub fn other_representative(r: &mut TestRng, g: &Graphing) -> Graphing {
    let mut h = split_along(&split_along(g, 2), 1);
    h.edges.shuffle(r);
    h
}

/// A random injection of `[n]` into `[size]`.
pub fn random_injection(r: &mut TestRng, n: usize, size: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..size).collect();
    all.shuffle(r);
    all.truncate(n);
    all
}

fn line(a: Q, b: Q) -> MSet {
    MSet::from_box(Cuboid::new(Interval::of(a, b)))
}

fn labelled(name: &str, a: Q, b: Q, slope: i64, offset: i64) -> Edge {
    Edge::new(line(a, b), 0, 0, Descriptor::affine(qi(slope), qi(offset))).labelled(name)
}

/// The two-graphing execution example with its cut.
pub fn plug_example() -> (Graphing, Graphing, MSet) {
    let f = Graphing::new(
        line(qi(0), qi(5)),
        1,
        vec![
            labelled("a", qi(0), qi(1), 1, 1),
            labelled("b", qi(2), qi(3), 1, -1),
            labelled("c", qi(3), qi(4), 1, 1),
        ],
    );
    let g = Graphing::new(
        line(qi(1), qi(4)),
        1,
        vec![labelled("d", q(3, 2), qi(2), 2, -1), labelled("e", qi(1), q(3, 2), 2, 1)],
    );
    (f, g, line(qi(1), qi(4)))
}

/// Follow a single point through alternating edges until it leaves the cut.
/// Returns the edge labels and the exit point.
pub fn follow_point(f: &Graphing, g: &Graphing, cut: &MSet, x: Q, max_steps: usize) -> Option<(String, Q)> {
    let inside = |set: &MSet, p: Q| set.boxes().iter().any(|b| b.line.contains_point(p));
    let find = |h: &Graphing, p: Q| h.edges.iter().find(|e| inside(&e.source, p)).cloned();
    let (mut word, mut p) = (String::new(), x);
    let mut side = if find(f, p).is_some() { 0 } else { 1 };
    for _ in 0..max_steps {
        let e = find(if side == 0 { f } else { g }, p)?;
        word.push_str(e.label.as_deref().unwrap_or("?"));
        p = e.map.apply_line(p);
        if !inside(cut, p) {
            return Some((word, p));
        }
        side = 1 - side;
    }
    None
}
