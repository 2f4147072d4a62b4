//! Finite cell decomposition of cell-rigid graphings.
//!
//! When every map is a unit-slope integer translation of the line composed
//! with a coordinate permutation and shifts that are multiples of `1/n`, and
//! every set is aligned to unit blocks and to the `1/n` grid, each edge maps
//! grid cells onto grid cells. Paths and circuits then reduce to a finite
//! graph on cells.

use std::collections::{BTreeSet, HashMap};

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graphings::{Graphing, Weight};
use crate::microcosm::{perm_apply, Descriptor, Perm};
use crate::rational::{denom_lcm, to_i64, Q};
use crate::space::{Cuboid, Interval, MSet};

pub type CellId = usize;

/// The cells `[k, k+1) × Π [i_c/n, (i_c+1)/n)` over the coordinates `1..=dims`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSpace {
    blocks: Vec<i64>,
    n: i64,
    dims: usize,
    per_block: usize,
}

impl CellSpace {
    /// Build the coarsest cell space fitting the given graphings and sets.
    /// With `grid` set, the grid is fixed and must be compatible.
    pub fn build(gs: &[&Graphing], sets: &[&MSet], grid: Option<i64>) -> Result<CellSpace> {
        let mut dims = 0usize;
        let mut denoms: Vec<Q> = Vec::new();
        let mut blocks = BTreeSet::new();
        let mut note_set = |set: &MSet, who: &dyn Fn() -> String, dims: &mut usize, denoms: &mut Vec<Q>| -> Result<()> {
            for b in set.boxes() {
                let (lo, hi) = (to_i64(&b.line.lo()), to_i64(&b.line.hi()));
                let (Some(lo), Some(hi)) = (lo, hi) else {
                    return Err(Error::NotCellRigid { edge: who(), reason: format!("line interval {} is not a union of unit blocks", b.line) });
                };
                blocks.extend(lo..hi);
                for (&c, iv) in &b.coords {
                    *dims = (*dims).max(c);
                    denoms.push(iv.lo());
                    denoms.push(iv.hi());
                }
            }
            Ok(())
        };
        for (gi, g) in gs.iter().enumerate() {
            note_set(&g.support, &|| format!("support of graphing {gi}"), &mut dims, &mut denoms)?;
            for (ei, e) in g.edges.iter().enumerate() {
                let name = || format!("{} of graphing {gi}", e.name(ei));
                let m = &e.map;
                if !m.slope().is_one() {
                    return Err(Error::NotCellRigid { edge: name(), reason: format!("slope {} is not 1", m.slope()) });
                }
                if !m.offset().is_integer() {
                    return Err(Error::NotCellRigid { edge: name(), reason: format!("offset {} is not an integer", m.offset()) });
                }
                dims = dims.max(m.max_coord());
                denoms.extend(m.shifts().values().copied());
                note_set(&e.source, &name, &mut dims, &mut denoms)?;
                note_set(&e.image(), &name, &mut dims, &mut denoms)?;
            }
        }
        for (si, s) in sets.iter().enumerate() {
            note_set(s, &|| format!("set {si}"), &mut dims, &mut denoms)?;
        }
        let need = denom_lcm(&denoms);
        let n = match grid {
            Some(n) if n >= 1 && n % need == 0 => n,
            Some(n) => {
                return Err(Error::NotCellRigid { edge: "grid".into(), reason: format!("denominators require a multiple of {need}, got {n}") })
            }
            None => need,
        };
        let per_block = (n as usize).checked_pow(dims as u32).expect("cell count overflow");
        Ok(CellSpace { blocks: blocks.into_iter().collect(), n, dims, per_block })
    }

    pub fn grid(&self) -> i64 {
        self.n
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn blocks(&self) -> &[i64] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len() * self.per_block
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Measure of a single cell.
    pub fn cell_measure(&self) -> Q {
        Q::new(1, self.per_block as i64)
    }

    pub fn cell(&self, block: i64, idx: &[i64]) -> Option<CellId> {
        let bpos = self.blocks.binary_search(&block).ok()?;
        let mut flat = 0usize;
        for c in (0..self.dims).rev() {
            flat = flat * self.n as usize + idx.get(c).copied().unwrap_or(0) as usize;
        }
        Some(bpos * self.per_block + flat)
    }

    pub fn block_of(&self, cell: CellId) -> i64 {
        self.blocks[cell / self.per_block]
    }

    /// Grid index of each coordinate `1..=dims` (position `c-1`).
    pub fn index_of(&self, cell: CellId) -> Vec<i64> {
        let mut flat = cell % self.per_block;
        (0..self.dims)
            .map(|_| {
                let v = (flat % self.n as usize) as i64;
                flat /= self.n as usize;
                v
            })
            .collect()
    }

    pub fn cell_box(&self, cell: CellId) -> Cuboid {
        let idx = self.index_of(cell);
        let mut b = Cuboid::block(self.block_of(cell));
        for (c, &i) in idx.iter().enumerate() {
            b = b.with(c + 1, Interval::of(Q::new(i, self.n), Q::new(i + 1, self.n)));
        }
        b
    }

    pub fn to_mset(&self, cells: &[CellId]) -> MSet {
        MSet::from_boxes(cells.iter().map(|&c| self.cell_box(c)))
    }

    /// All cells contained in `set`, in increasing order.
    pub fn cells_of(&self, set: &MSet) -> Vec<CellId> {
        let mut out = BTreeSet::new();
        for b in set.boxes() {
            let lo = b.line.lo().to_integer();
            let hi = b.line.hi().to_integer();
            let ranges: Vec<(i64, i64)> = (1..=self.dims)
                .map(|c| {
                    let iv = b.coord(c);
                    ((iv.lo() * self.n).to_integer(), (iv.hi() * self.n).to_integer())
                })
                .collect();
            for k in lo..hi {
                let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
                if ranges.iter().any(|r| r.0 >= r.1) {
                    continue;
                }
                loop {
                    if let Some(id) = self.cell(k, &idx) {
                        out.insert(id);
                    }
                    let mut d = 0;
                    loop {
                        if d == self.dims {
                            break;
                        }
                        idx[d] += 1;
                        if idx[d] < ranges[d].1 {
                            break;
                        }
                        idx[d] = ranges[d].0;
                        d += 1;
                    }
                    if d == self.dims {
                        break;
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Image of a cell under a cell-rigid map.
    pub fn image(&self, cell: CellId, map: &Descriptor) -> Option<CellId> {
        let idx = self.index_of(cell);
        let mut out = vec![0i64; self.dims];
        for (i, &v) in idx.iter().enumerate() {
            let t = perm_apply(map.perm(), i + 1);
            out[t - 1] = v;
        }
        for (&k, &s) in map.shifts() {
            let steps = (s * self.n).to_integer();
            out[k - 1] = (out[k - 1] + steps).mod_floor(&self.n);
        }
        self.cell(self.block_of(cell) + map.offset().to_integer(), &out)
    }

    /// The unique cell-rigid map sending `from` onto `to` with permutation `perm`.
    pub fn descriptor_between(&self, from: CellId, to: CellId, perm: &Perm) -> Descriptor {
        let (a, b) = (self.index_of(from), self.index_of(to));
        let shifts = (1..=self.dims)
            .map(|i| {
                let t = perm_apply(perm, i);
                (t, Q::new((b[t - 1] - a[i - 1]).mod_floor(&self.n), self.n))
            })
            .filter(|(_, s)| !s.is_zero())
            .collect();
        let offset = Q::from_integer(self.block_of(to) - self.block_of(from));
        Descriptor::new(Q::one(), offset, perm.clone(), shifts).expect("cell map is valid")
    }
}

/// One edge restricted to one cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrow {
    pub graphing: usize,
    pub edge: usize,
    pub from: CellId,
    pub input: usize,
    pub to: CellId,
    pub output: usize,
}

/// `(edge, target cell, target state, weight)`.
pub type OutArrow = (usize, CellId, usize, Weight);

/// Outgoing arrows of one graphing, keyed by `(cell, dialect state)`.
#[derive(Clone, Debug, Default)]
pub struct CellIndex {
    pub out: HashMap<(CellId, usize), Vec<OutArrow>>,
}

impl CellIndex {
    pub fn new(space: &CellSpace, g: &Graphing) -> Self {
        let mut out: HashMap<(CellId, usize), Vec<OutArrow>> = HashMap::new();
        for (ei, e) in g.edges.iter().enumerate() {
            for c in space.cells_of(&e.source) {
                if let Some(t) = space.image(c, &e.map) {
                    out.entry((c, e.input)).or_default().push((ei, t, e.output, e.weight));
                }
            }
        }
        CellIndex { out }
    }

    pub fn from(&self, cell: CellId, state: usize) -> &[OutArrow] {
        self.out.get(&(cell, state)).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// The finite graph realising a family of cell-rigid graphings.
#[derive(Clone, Debug)]
pub struct CellGraph {
    pub space: CellSpace,
    pub arrows: Vec<Arrow>,
}

pub fn cell_decompose(gs: &[&Graphing], grid: Option<i64>) -> Result<CellGraph> {
    let space = CellSpace::build(gs, &[], grid)?;
    let mut arrows = Vec::new();
    for (gi, g) in gs.iter().enumerate() {
        for (ei, e) in g.edges.iter().enumerate() {
            for c in space.cells_of(&e.source) {
                let to = space.image(c, &e.map).expect("image block is part of the space");
                arrows.push(Arrow { graphing: gi, edge: ei, from: c, input: e.input, to, output: e.output });
            }
        }
    }
    Ok(CellGraph { space, arrows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphings::Edge;
    use crate::microcosm::star;
    use crate::rational::{q, qi};

    #[test]
    fn identity_gives_self_arrows() {
        let t = Graphing::identity_on(MSet::blocks([7]), Weight::TEST);
        let cg = cell_decompose(&[&t], None).unwrap();
        assert_eq!(cg.arrows.len(), 1);
        assert_eq!(cg.arrows[0].from, cg.arrows[0].to);
    }

    #[test]
    fn permuting_edge_moves_grid_indices() {
        let src = MSet::from_box(Cuboid::block(0).with(1, Interval::of(qi(0), q(1, 2))));
        let e = Edge::new(src, 0, 0, Descriptor::permutation(star(2)));
        let g = Graphing::new(MSet::blocks([0]), 1, vec![e]);
        let cg = cell_decompose(&[&g], None).unwrap();
        assert_eq!(cg.space.grid(), 2);
        assert_eq!(cg.space.dims(), 2);
        assert_eq!(cg.arrows.len(), 2);
        for a in &cg.arrows {
            let (i, j) = (cg.space.index_of(a.from), cg.space.index_of(a.to));
            assert_eq!((i[0], i[1]), (j[1], j[0]));
        }
    }

    #[test]
    fn descriptor_between_reproduces_image() {
        let src = MSet::from_box(Cuboid::block(0).with(1, Interval::of(qi(0), q(1, 3))));
        let map = Descriptor::new(qi(1), qi(2), star(2), [(1, q(2, 3))].into_iter().collect()).unwrap();
        let e = Edge::new(src, 0, 0, map.clone());
        let g = Graphing::new(MSet::blocks([0, 2]), 1, vec![e]);
        let space = CellSpace::build(&[&g], &[], None).unwrap();
        for c in space.cells_of(&g.edges[0].source) {
            let t = space.image(c, &map).unwrap();
            let d = space.descriptor_between(c, t, map.perm());
            assert_eq!(d.apply_box(&space.cell_box(c)).unwrap(), space.cell_box(t));
        }
    }

    #[test]
    fn non_rigid_edge_is_named() {
        let e = Edge::new(MSet::blocks([0]), 0, 0, Descriptor::affine(qi(2), qi(0))).labelled("h");
        let g = Graphing::new(MSet::blocks([0, 1]), 1, vec![e]);
        match CellSpace::build(&[&g], &[], None) {
            Err(Error::NotCellRigid { edge, .. }) => assert!(edge.contains('h')),
            other => panic!("{other:?}"),
        }
    }
}
