//! Geometry of `Z × [0,1]^N`: rational boxes and their finite unions, kept
//! in a canonical disjoint normal form.
//!
//! Boundary points are null sets, so every operation here is exact up to
//! almost-everywhere equality, which is the only equality the model cares
//! about. Coordinates are indexed from 1; a coordinate that a box does not
//! mention ranges over the whole of `[0,1)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_q, parse_q, Q};

/// Half-open interval `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    lo: Q,
    hi: Q,
}

impl Interval {
    pub fn new(lo: Q, hi: Q) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidInterval { lo: format_q(&lo), hi: format_q(&hi) });
        }
        Ok(Interval { lo, hi })
    }

    /// Panicking constructor for literals known to be ordered.
    pub fn of(lo: Q, hi: Q) -> Self {
        Self::new(lo, hi).expect("interval endpoints out of order")
    }

    pub fn unit() -> Self {
        Interval { lo: Q::zero(), hi: Q::one() }
    }

    /// The unit block `[k, k+1)`.
    pub fn block(k: i64) -> Self {
        Interval { lo: Q::from_integer(k), hi: Q::from_integer(k + 1) }
    }

    pub fn lo(&self) -> Q {
        self.lo
    }

    pub fn hi(&self) -> Q {
        self.hi
    }

    pub fn len(&self) -> Q {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn is_unit(&self) -> bool {
        self.lo.is_zero() && self.hi.is_one()
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi).max(lo);
        Interval { lo, hi }
    }

    pub fn contains(&self, other: &Interval) -> bool {
        other.is_empty() || (self.lo <= other.lo && other.hi <= self.hi)
    }

    pub fn contains_point(&self, x: Q) -> bool {
        self.lo <= x && x < self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&format_q(&self.lo))?;
        t.serialize_element(&format_q(&self.hi))?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = <[String; 2]>::deserialize(d)?;
        let lo = parse_q(&lo).ok_or_else(|| de::Error::custom(format!("bad rational {lo:?}")))?;
        let hi = parse_q(&hi).ok_or_else(|| de::Error::custom(format!("bad rational {hi:?}")))?;
        Interval::new(lo, hi).map_err(de::Error::custom)
    }
}

/// A rational box: an interval on the line times finitely many constrained
/// coordinate intervals (all other coordinates are full).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cuboid {
    pub line: Interval,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub coords: BTreeMap<usize, Interval>,
}

impl Cuboid {
    pub fn new(line: Interval) -> Self {
        Cuboid { line, coords: BTreeMap::new() }
    }

    /// The unit block `[k, k+1) × [0,1)^N`.
    pub fn block(k: i64) -> Self {
        Cuboid::new(Interval::block(k))
    }

    /// Constrain coordinate `c` (1-based). Full intervals are not stored.
    pub fn with(mut self, c: usize, iv: Interval) -> Self {
        assert!(c >= 1, "coordinates are 1-based");
        if iv.is_unit() {
            self.coords.remove(&c);
        } else {
            self.coords.insert(c, iv);
        }
        self
    }

    pub fn coord(&self, c: usize) -> Interval {
        self.coords.get(&c).copied().unwrap_or_else(Interval::unit)
    }

    pub fn is_empty(&self) -> bool {
        self.line.is_empty() || self.coords.values().any(Interval::is_empty)
    }

    pub fn measure(&self) -> Q {
        if self.is_empty() {
            return Q::zero();
        }
        self.coords.values().fold(self.line.len(), |acc, iv| acc * iv.len())
    }

    pub fn intersect(&self, other: &Cuboid) -> Cuboid {
        let mut out = Cuboid::new(self.line.intersect(&other.line));
        let keys: BTreeSet<usize> = self.coords.keys().chain(other.coords.keys()).copied().collect();
        for c in keys {
            out = out.with(c, self.coord(c).intersect(&other.coord(c)));
        }
        out
    }

    fn valid_coords(&self) -> bool {
        self.coords
            .values()
            .all(|iv| iv.lo >= Q::zero() && iv.hi <= Q::one())
    }
}

impl fmt::Display for Cuboid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.line)?;
        for (c, iv) in &self.coords {
            write!(f, "×c{c}∈{iv}")?;
        }
        Ok(())
    }
}

/// Finite union of boxes in canonical normal form.
///
/// The normal form is computed on the coarsest product grid that represents
/// the set, then cells are merged along each dimension in a fixed order, so
/// two sets are equal almost everywhere iff their normal forms are identical.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MSet {
    boxes: Vec<Cuboid>,
}

impl MSet {
    pub fn empty() -> Self {
        MSet { boxes: Vec::new() }
    }

    pub fn from_boxes(boxes: impl IntoIterator<Item = Cuboid>) -> Self {
        let boxes: Vec<Cuboid> = boxes.into_iter().filter(|b| !b.is_empty()).collect();
        combine(&[&MSet { boxes }], |m| m[0])
    }

    pub fn from_box(b: Cuboid) -> Self {
        Self::from_boxes([b])
    }

    /// Union of unit blocks `[k, k+1)`.
    pub fn blocks(ks: impl IntoIterator<Item = i64>) -> Self {
        Self::from_boxes(ks.into_iter().map(Cuboid::block))
    }

    pub fn boxes(&self) -> &[Cuboid] {
        &self.boxes
    }

    pub fn is_null(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn measure(&self) -> Q {
        self.boxes.iter().map(Cuboid::measure).sum()
    }

    pub fn union(&self, other: &MSet) -> MSet {
        combine(&[self, other], |m| m[0] || m[1])
    }

    pub fn intersect(&self, other: &MSet) -> MSet {
        if self.is_null() || other.is_null() {
            return MSet::empty();
        }
        combine(&[self, other], |m| m[0] && m[1])
    }

    pub fn difference(&self, other: &MSet) -> MSet {
        if other.is_null() {
            return self.clone();
        }
        combine(&[self, other], |m| m[0] && !m[1])
    }

    pub fn symmetric_difference(&self, other: &MSet) -> MSet {
        combine(&[self, other], |m| m[0] != m[1])
    }

    pub fn equal_ae(&self, other: &MSet) -> bool {
        // Normal forms are canonical.
        self == other
    }

    pub fn subset_ae(&self, other: &MSet) -> bool {
        self.difference(other).is_null()
    }

    pub fn disjoint_ae(&self, other: &MSet) -> bool {
        self.intersect(other).is_null()
    }

    /// Largest coordinate index constrained by any box (0 if none).
    pub fn max_coord(&self) -> usize {
        self.boxes
            .iter()
            .filter_map(|b| b.coords.keys().next_back().copied())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for MSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.boxes.is_empty() {
            return write!(f, "∅");
        }
        for (i, b) in self.boxes.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl Serialize for MSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.boxes.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let boxes = Vec::<Cuboid>::deserialize(d)?;
        if let Some(b) = boxes.iter().find(|b| !b.valid_coords()) {
            return Err(de::Error::custom(format!("coordinate interval outside [0,1) in {b}")));
        }
        if boxes.iter().any(|b| b.coords.contains_key(&0)) {
            return Err(de::Error::custom("coordinates are 1-based"));
        }
        Ok(MSet::from_boxes(boxes))
    }
}

pub fn intersect(a: &MSet, b: &MSet) -> MSet {
    a.intersect(b)
}

pub fn difference(a: &MSet, b: &MSet) -> MSet {
    a.difference(b)
}

pub fn measure(a: &MSet) -> Q {
    a.measure()
}

pub fn equal_ae(a: &MSet, b: &MSet) -> bool {
    a.equal_ae(b)
}

// ---------------------------------------------------------------------------
// Grid machinery behind every set operation.

struct Grid {
    /// `dims[0]` is the line; the rest are coordinate indices.
    coords: Vec<usize>,
    breaks: Vec<Vec<Q>>,
}

impl Grid {
    fn sizes(&self) -> Vec<usize> {
        self.breaks.iter().map(|b| b.len() - 1).collect()
    }

    fn interval_of(b: &Cuboid, dim: usize, coords: &[usize]) -> Interval {
        if dim == 0 {
            b.line
        } else {
            b.coord(coords[dim - 1])
        }
    }
}

fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut st = vec![1; sizes.len()];
    for d in (0..sizes.len().saturating_sub(1)).rev() {
        st[d] = st[d + 1] * sizes[d + 1];
    }
    st
}

/// Evaluate a pointwise Boolean combination of several sets, returning the
/// canonical normal form of the result. `pred` receives one membership flag
/// per input set.
pub fn combine(sets: &[&MSet], pred: impl Fn(&[bool]) -> bool) -> MSet {
    let all: Vec<&Cuboid> = sets.iter().flat_map(|s| s.boxes.iter()).collect();
    if all.is_empty() {
        return MSet::empty();
    }
    let coords: Vec<usize> = all
        .iter()
        .flat_map(|b| b.coords.keys().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut breaks = Vec::with_capacity(coords.len() + 1);
    let line: BTreeSet<Q> = all.iter().flat_map(|b| [b.line.lo, b.line.hi]).collect();
    breaks.push(line.into_iter().collect::<Vec<_>>());
    for &c in &coords {
        let mut pts: BTreeSet<Q> = [Q::zero(), Q::one()].into_iter().collect();
        for b in &all {
            if let Some(iv) = b.coords.get(&c) {
                pts.insert(iv.lo);
                pts.insert(iv.hi);
            }
        }
        breaks.push(pts.into_iter().collect());
    }
    let grid = Grid { coords, breaks };
    let sizes = grid.sizes();
    if sizes.contains(&0) {
        return MSet::empty();
    }
    let total: usize = sizes.iter().product();
    let st = strides(&sizes);

    let mut member = vec![vec![false; total]; sets.len()];
    for (si, set) in sets.iter().enumerate() {
        for b in &set.boxes {
            let ranges: Vec<(usize, usize)> = (0..sizes.len())
                .map(|d| {
                    let iv = Grid::interval_of(b, d, &grid.coords);
                    let lo = grid.breaks[d].binary_search(&iv.lo).expect("breakpoint");
                    let hi = grid.breaks[d].binary_search(&iv.hi).expect("breakpoint");
                    (lo, hi)
                })
                .collect();
            for_each_index(&ranges, |idx| {
                let flat: usize = idx.iter().zip(&st).map(|(i, s)| i * s).sum();
                member[si][flat] = true;
            });
        }
    }
    let mut row = vec![false; sets.len()];
    let covered: Vec<bool> = (0..total)
        .map(|i| {
            for (si, m) in member.iter().enumerate() {
                row[si] = m[i];
            }
            pred(&row)
        })
        .collect();
    canonical(grid, covered)
}

fn for_each_index(ranges: &[(usize, usize)], mut f: impl FnMut(&[usize])) {
    if ranges.iter().any(|(lo, hi)| lo >= hi) {
        return;
    }
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&idx);
        let mut d = ranges.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < ranges[d].1 {
                break;
            }
            idx[d] = ranges[d].0;
        }
    }
}

/// Coarsen the grid to its intrinsic breakpoints and emit merged boxes.
fn canonical(mut grid: Grid, mut covered: Vec<bool>) -> MSet {
    if !covered.iter().any(|&c| c) {
        return MSet::empty();
    }
    loop {
        let mut changed = false;
        for d in 0..grid.breaks.len() {
            // Trim uncovered slabs at both ends of the line.
            if d == 0 {
                while grid.breaks[0].len() > 2 && slab_empty(&grid, &covered, 0, 0) {
                    covered = drop_slab(&grid, &covered, 0, 0);
                    grid.breaks[0].remove(0);
                    changed = true;
                }
                while grid.breaks[0].len() > 2 {
                    let last = grid.breaks[0].len() - 2;
                    if !slab_empty(&grid, &covered, 0, last) {
                        break;
                    }
                    covered = drop_slab(&grid, &covered, 0, last);
                    grid.breaks[0].pop();
                    changed = true;
                }
            }
            let mut j = 1;
            while j + 1 < grid.breaks[d].len() {
                if slabs_equal(&grid, &covered, d, j - 1, j) {
                    covered = drop_slab(&grid, &covered, d, j);
                    grid.breaks[d].remove(j);
                    changed = true;
                } else {
                    j += 1;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let sizes = grid.sizes();
    let st = strides(&sizes);
    let mut boxes: Vec<Vec<(Q, Q)>> = Vec::new();
    let ranges: Vec<(usize, usize)> = sizes.iter().map(|&s| (0, s)).collect();
    for_each_index(&ranges, |idx| {
        let flat: usize = idx.iter().zip(&st).map(|(i, s)| i * s).sum();
        if covered[flat] {
            boxes.push(
                idx.iter()
                    .enumerate()
                    .map(|(d, &i)| (grid.breaks[d][i], grid.breaks[d][i + 1]))
                    .collect(),
            );
        }
    });
    for d in 0..sizes.len() {
        boxes = merge_along(boxes, d);
    }
    let mut out: Vec<Cuboid> = boxes
        .into_iter()
        .map(|b| {
            let mut c = Cuboid::new(Interval::of(b[0].0, b[0].1));
            for (k, &coord) in grid.coords.iter().enumerate() {
                c = c.with(coord, Interval::of(b[k + 1].0, b[k + 1].1));
            }
            c
        })
        .collect();
    out.sort();
    MSet { boxes: out }
}

fn slab_cells(grid: &Grid, d: usize, j: usize) -> Vec<usize> {
    let sizes = grid.sizes();
    let st = strides(&sizes);
    let mut ranges: Vec<(usize, usize)> = sizes.iter().map(|&s| (0, s)).collect();
    ranges[d] = (j, j + 1);
    let mut out = Vec::new();
    for_each_index(&ranges, |idx| out.push(idx.iter().zip(&st).map(|(i, s)| i * s).sum()));
    out
}

fn slab_empty(grid: &Grid, covered: &[bool], d: usize, j: usize) -> bool {
    slab_cells(grid, d, j).into_iter().all(|i| !covered[i])
}

fn slabs_equal(grid: &Grid, covered: &[bool], d: usize, a: usize, b: usize) -> bool {
    let sa = slab_cells(grid, d, a);
    let sb = slab_cells(grid, d, b);
    sa.iter().zip(&sb).all(|(&x, &y)| covered[x] == covered[y])
}

/// Remove slab `j` of dimension `d` (merging it into its left neighbour when
/// called for an interior breakpoint; cell contents are identical there).
fn drop_slab(grid: &Grid, covered: &[bool], d: usize, j: usize) -> Vec<bool> {
    let sizes = grid.sizes();
    let st = strides(&sizes);
    let mut out = Vec::with_capacity(covered.len());
    let ranges: Vec<(usize, usize)> = sizes.iter().map(|&s| (0, s)).collect();
    for_each_index(&ranges, |idx| {
        if idx[d] != j {
            out.push(covered[idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>()]);
        }
    });
    out
}

fn merge_along(mut boxes: Vec<Vec<(Q, Q)>>, d: usize) -> Vec<Vec<(Q, Q)>> {
    boxes.sort_by(|a, b| {
        let ka: Vec<_> = a.iter().enumerate().filter(|(i, _)| *i != d).map(|(_, v)| v).collect();
        let kb: Vec<_> = b.iter().enumerate().filter(|(i, _)| *i != d).map(|(_, v)| v).collect();
        ka.cmp(&kb).then(a[d].cmp(&b[d]))
    });
    let mut out: Vec<Vec<(Q, Q)>> = Vec::with_capacity(boxes.len());
    for b in boxes {
        if let Some(last) = out.last_mut() {
            let same_rest = last.iter().zip(&b).enumerate().all(|(i, (x, y))| i == d || x == y);
            if same_rest && last[d].1 == b[d].0 {
                last[d].1 = b[d].1;
                continue;
            }
        }
        out.push(b);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn iv(a: Q, b: Q) -> Interval {
        Interval::of(a, b)
    }

    #[test]
    fn disjoint_lines_intersect_empty() {
        let a = MSet::from_box(Cuboid::new(iv(qi(0), qi(1))));
        let b = MSet::from_box(Cuboid::new(iv(qi(1), qi(2))));
        assert!(a.intersect(&b).is_null());
        assert_eq!(a.intersect(&a), a);
    }

    #[test]
    fn intersection_matches_endpoint_oracle() {
        let a = MSet::from_box(Cuboid::new(iv(qi(0), qi(2))).with(1, iv(qi(0), q(1, 2))));
        let b = MSet::from_box(Cuboid::new(iv(qi(1), qi(3))).with(1, iv(q(1, 4), q(3, 4))));
        // Endpoint oracle: max of lows, min of highs per dimension.
        let expect = MSet::from_box(Cuboid::new(iv(qi(1), qi(2))).with(1, iv(q(1, 4), q(1, 2))));
        assert_eq!(a.intersect(&b), expect);
        assert_eq!(a.intersect(&b).measure(), q(1, 4));
    }

    #[test]
    fn difference_cases() {
        let a = MSet::from_box(Cuboid::new(iv(qi(0), qi(2))));
        assert_eq!(a.difference(&MSet::empty()), a);
        assert!(a.difference(&a).is_null());
        let b = MSet::from_box(Cuboid::new(iv(qi(1), qi(3))));
        assert_eq!(a.difference(&b), MSet::from_box(Cuboid::new(iv(qi(0), qi(1)))));
    }

    #[test]
    fn measures() {
        assert_eq!(MSet::empty().measure(), qi(0));
        assert_eq!(MSet::blocks([6]).measure(), qi(1));
        let b = Cuboid::new(iv(qi(0), qi(1)))
            .with(1, iv(qi(0), q(1, 3)))
            .with(2, iv(q(1, 3), q(2, 3)));
        assert_eq!(MSet::from_box(b).measure(), q(1, 9));
    }

    #[test]
    fn equal_ae_cases() {
        let unit = MSet::from_box(Cuboid::new(iv(qi(0), qi(1))));
        assert!(unit.equal_ae(&unit.clone()));
        let split = MSet::from_boxes([
            Cuboid::new(iv(qi(0), q(1, 2))),
            Cuboid::new(iv(q(1, 2), qi(1))),
        ]);
        assert!(unit.equal_ae(&split));
        let half = MSet::from_box(Cuboid::new(iv(qi(0), qi(1))).with(1, iv(qi(0), q(1, 2))));
        assert!(!unit.equal_ae(&half));
    }

    #[test]
    fn normal_form_drops_redundant_coordinate_cuts() {
        let a = MSet::from_boxes([
            Cuboid::new(iv(qi(0), qi(1))).with(1, iv(qi(0), q(1, 3))),
            Cuboid::new(iv(qi(0), qi(1))).with(1, iv(q(1, 3), qi(1))),
        ]);
        assert_eq!(a, MSet::blocks([0]));
        assert_eq!(a.boxes().len(), 1);
        assert!(a.boxes()[0].coords.is_empty());
    }

    #[test]
    fn json_shape() {
        let a = MSet::from_box(Cuboid::new(iv(qi(0), qi(1))).with(1, iv(qi(0), q(1, 2))));
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"[{"line":["0/1","1/1"],"coords":{"1":["0/1","1/2"]}}]"#);
        let back: MSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
    }
}
