//! Rigid transformations of `Z × [0,1]^N` and the monoids they generate.
//!
//! A [`Descriptor`] acts on a point `(x, s)` by first moving the value of
//! coordinate `i` to coordinate `perm(i)`, then adding the fractional shift of
//! each target coordinate modulo 1, and mapping the line by `slope·x + offset`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_q, frac, serde_q, serde_q_map, Q};
use crate::space::{Cuboid, Interval, MSet};

/// Finite-support permutation of the coordinates, stored without fixed points.
pub type Perm = BTreeMap<usize, usize>;

pub fn perm_apply(p: &Perm, i: usize) -> usize {
    p.get(&i).copied().unwrap_or(i)
}

pub fn perm_inverse(p: &Perm) -> Perm {
    p.iter().map(|(&a, &b)| (b, a)).collect()
}

/// `f ∘ g`: apply `g` first.
pub fn perm_compose(f: &Perm, g: &Perm) -> Perm {
    let keys: BTreeSet<usize> = f.keys().chain(g.keys()).copied().collect();
    keys.into_iter()
        .filter_map(|i| {
            let j = perm_apply(f, perm_apply(g, i));
            (j != i).then_some((i, j))
        })
        .collect()
}

/// The transposition exchanging coordinates 1 and `j` (identity when `j == 1`).
pub fn star(j: usize) -> Perm {
    if j == 1 {
        Perm::new()
    } else {
        [(1, j), (j, 1)].into_iter().collect()
    }
}

pub fn perm_from_images(images: &[usize]) -> Perm {
    images
        .iter()
        .enumerate()
        .filter_map(|(i, &j)| (i + 1 != j).then_some((i + 1, j)))
        .collect()
}

/// Every permutation of `1..=k` as an image vector, in lexicographic order.
pub fn all_images(k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for p in &out {
            for x in 1..=k {
                if !p.contains(&x) {
                    let mut q = p.clone();
                    q.push(x);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

/// Order of a permutation in the symmetric group.
pub fn perm_order(p: &Perm) -> u64 {
    let mut seen = BTreeSet::new();
    let mut order = 1u64;
    for &start in p.keys() {
        if seen.contains(&start) {
            continue;
        }
        let mut len = 0u64;
        let mut i = start;
        loop {
            seen.insert(i);
            len += 1;
            i = perm_apply(p, i);
            if i == start {
                break;
            }
        }
        order = num_integer::lcm(order, len);
    }
    order
}

fn validate_perm(p: &Perm) -> Result<()> {
    let keys: BTreeSet<usize> = p.keys().copied().collect();
    let vals: BTreeSet<usize> = p.values().copied().collect();
    if keys != vals || vals.len() != p.len() || keys.contains(&0) {
        return Err(Error::InvalidDescriptor(format!("{p:?} is not a permutation of coordinates ≥ 1")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawDescriptor", into = "RawDescriptor")]
pub struct Descriptor {
    slope: Q,
    offset: Q,
    perm: Perm,
    shifts: BTreeMap<usize, Q>,
}

#[derive(Serialize, Deserialize)]
struct RawDescriptor {
    #[serde(with = "serde_q", default = "one_q")]
    slope: Q,
    #[serde(with = "serde_q", default)]
    offset: Q,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    perm: BTreeMap<usize, usize>,
    #[serde(with = "serde_q_map", default, skip_serializing_if = "BTreeMap::is_empty")]
    shifts: BTreeMap<usize, Q>,
}

fn one_q() -> Q {
    Q::one()
}

impl TryFrom<RawDescriptor> for Descriptor {
    type Error = Error;
    fn try_from(r: RawDescriptor) -> Result<Self> {
        Descriptor::new(r.slope, r.offset, r.perm, r.shifts)
    }
}

impl From<Descriptor> for RawDescriptor {
    fn from(d: Descriptor) -> Self {
        RawDescriptor { slope: d.slope, offset: d.offset, perm: d.perm, shifts: d.shifts }
    }
}

impl Default for Descriptor {
    fn default() -> Self {
        Self::identity()
    }
}

impl Descriptor {
    pub fn new(slope: Q, offset: Q, perm: Perm, shifts: BTreeMap<usize, Q>) -> Result<Self> {
        if slope.is_zero() {
            return Err(Error::InvalidDescriptor("slope must be nonzero".into()));
        }
        let perm: Perm = perm.into_iter().filter(|(a, b)| a != b).collect();
        validate_perm(&perm)?;
        if shifts.contains_key(&0) {
            return Err(Error::InvalidDescriptor("coordinates are 1-based".into()));
        }
        let shifts = shifts
            .into_iter()
            .map(|(k, v)| (k, frac(v)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        Ok(Descriptor { slope, offset, perm, shifts })
    }

    pub fn identity() -> Self {
        Descriptor { slope: Q::one(), offset: Q::zero(), perm: Perm::new(), shifts: BTreeMap::new() }
    }

    pub fn affine(slope: Q, offset: Q) -> Self {
        Self::new(slope, offset, Perm::new(), BTreeMap::new()).expect("nonzero slope")
    }

    pub fn translation(t: Q) -> Self {
        Self::affine(Q::one(), t)
    }

    pub fn permutation(p: Perm) -> Self {
        Self::new(Q::one(), Q::zero(), p, BTreeMap::new()).expect("valid permutation")
    }

    pub fn shift(coord: usize, s: Q) -> Self {
        Self::new(Q::one(), Q::zero(), Perm::new(), [(coord, s)].into_iter().collect()).expect("valid shift")
    }

    pub fn slope(&self) -> Q {
        self.slope
    }

    pub fn offset(&self) -> Q {
        self.offset
    }

    pub fn perm(&self) -> &Perm {
        &self.perm
    }

    pub fn shifts(&self) -> &BTreeMap<usize, Q> {
        &self.shifts
    }

    pub fn shift_at(&self, k: usize) -> Q {
        self.shifts.get(&k).copied().unwrap_or_else(Q::zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// Largest coordinate moved or shifted (0 if none).
    pub fn max_coord(&self) -> usize {
        self.perm.keys().chain(self.shifts.keys()).copied().max().unwrap_or(0)
    }

    pub fn apply_line(&self, x: Q) -> Q {
        self.slope * x + self.offset
    }

    /// Image of a point; `coords[i]` is coordinate `i + 1`.
    pub fn apply_point(&self, x: Q, coords: &[Q]) -> (Q, Vec<Q>) {
        let n = coords.len().max(self.max_coord());
        let mut out = vec![Q::zero(); n];
        for i in 1..=n {
            let v = coords.get(i - 1).copied().unwrap_or_else(Q::zero);
            out[perm_apply(&self.perm, i) - 1] = v;
        }
        for (&k, &s) in &self.shifts {
            out[k - 1] = frac(out[k - 1] + s);
        }
        (self.apply_line(x), out)
    }

    /// `self ∘ g`: apply `g` first.
    pub fn compose(&self, g: &Descriptor) -> Descriptor {
        let perm = perm_compose(&self.perm, &g.perm);
        let finv = perm_inverse(&self.perm);
        let keys: BTreeSet<usize> = g
            .shifts
            .keys()
            .map(|&k| perm_apply(&self.perm, k))
            .chain(self.shifts.keys().copied())
            .collect();
        let shifts = keys
            .into_iter()
            .map(|m| (m, g.shift_at(perm_apply(&finv, m)) + self.shift_at(m)))
            .collect();
        Descriptor::new(self.slope * g.slope, self.slope * g.offset + self.offset, perm, shifts)
            .expect("composition of valid descriptors")
    }

    pub fn inverse(&self) -> Descriptor {
        let perm = perm_inverse(&self.perm);
        let shifts = self
            .shifts
            .iter()
            .map(|(&k, &s)| (perm_apply(&perm, k), -s))
            .collect();
        Descriptor::new(Q::one() / self.slope, -self.offset / self.slope, perm, shifts)
            .expect("inverse of a valid descriptor")
    }

    /// Image of a box. Fails when a shift wraps a proper coordinate interval
    /// across 1; use [`Descriptor::apply_mset`] to split automatically.
    pub fn apply_box(&self, b: &Cuboid) -> Result<Cuboid> {
        let (a, c) = (self.apply_line(b.line.lo()), self.apply_line(b.line.hi()));
        let line = if self.slope.is_positive() { Interval::of(a, c) } else { Interval::of(c, a) };
        let mut out = Cuboid::new(line);
        let moved: BTreeSet<usize> = b.coords.keys().chain(self.perm.keys()).copied().collect();
        let mut placed: BTreeMap<usize, Interval> = BTreeMap::new();
        for i in moved {
            placed.insert(perm_apply(&self.perm, i), b.coord(i));
        }
        for (&k, &s) in &self.shifts {
            let iv = placed.get(&k).copied().unwrap_or_else(Interval::unit);
            if iv.is_unit() {
                continue;
            }
            let (lo, hi) = (iv.lo() + s, iv.hi() + s);
            let shifted = if hi <= Q::one() {
                Interval::of(lo, hi)
            } else if lo >= Q::one() {
                Interval::of(lo - 1, hi - 1)
            } else {
                return Err(Error::WrapSplitRequired { coord: k, shift: format_q(&s) });
            };
            placed.insert(k, shifted);
        }
        for (k, iv) in placed {
            out = out.with(k, iv);
        }
        Ok(out)
    }

    /// Image of a set, splitting boxes where shifts wrap.
    pub fn apply_mset(&self, set: &MSet) -> MSet {
        let inv = perm_inverse(&self.perm);
        let mut pieces = Vec::new();
        for b in set.boxes() {
            let mut parts = vec![b.clone()];
            for (&k, &s) in &self.shifts {
                let src = perm_apply(&inv, k);
                let cut = Q::one() - s;
                parts = parts
                    .into_iter()
                    .flat_map(|p| {
                        let iv = p.coord(src);
                        if !iv.is_unit() && iv.lo() < cut && cut < iv.hi() {
                            vec![
                                p.clone().with(src, Interval::of(iv.lo(), cut)),
                                p.with(src, Interval::of(cut, iv.hi())),
                            ]
                        } else {
                            vec![p]
                        }
                    })
                    .collect();
            }
            for p in parts {
                pieces.push(self.apply_box(&p).expect("pre-split box cannot wrap"));
            }
        }
        MSet::from_boxes(pieces)
    }

    /// Preimage of a set.
    pub fn preimage(&self, set: &MSet) -> MSet {
        self.inverse().apply_mset(set)
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x↦{}x{:+}", self.slope, self.offset)?;
        if !self.perm.is_empty() {
            write!(f, " perm{:?}", self.perm)?;
        }
        for (k, s) in &self.shifts {
            write!(f, " c{k}+{s}")?;
        }
        Ok(())
    }
}

pub fn compose(f: &Descriptor, g: &Descriptor) -> Descriptor {
    f.compose(g)
}

pub fn apply(f: &Descriptor, b: &Cuboid) -> Result<Cuboid> {
    f.apply_box(b)
}

/// The monoids a graphing may draw its maps from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MicrocosmSpec {
    Z,
    H,
    Aff,
    M(usize),
    MBar(usize),
    MInf,
    MBarInf,
    Macrocosm,
}

impl FromStr for MicrocosmSpec {
    type Err = Error;
    /// Accepts `z`, `h`, `aff`, `m1`, `mbar3`, `m`, `mbar`, `macrocosm`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDescriptor(format!("unknown microcosm {s:?}"));
        match s {
            "z" => Ok(Self::Z),
            "h" => Ok(Self::H),
            "aff" => Ok(Self::Aff),
            "m" => Ok(Self::MInf),
            "mbar" => Ok(Self::MBarInf),
            "macrocosm" => Ok(Self::Macrocosm),
            _ => {
                if let Some(i) = s.strip_prefix("mbar") {
                    i.parse().map(Self::MBar).map_err(|_| bad())
                } else if let Some(i) = s.strip_prefix('m') {
                    i.parse().map(Self::M).map_err(|_| bad())
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl fmt::Display for MicrocosmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Z => write!(f, "z"),
            Self::H => write!(f, "h"),
            Self::Aff => write!(f, "aff"),
            Self::M(i) => write!(f, "m{i}"),
            Self::MBar(i) => write!(f, "mbar{i}"),
            Self::MInf => write!(f, "m"),
            Self::MBarInf => write!(f, "mbar"),
            Self::Macrocosm => write!(f, "macrocosm"),
        }
    }
}

/// Memberships of a descriptor. `m` and `mbar` hold the least index when the
/// map lies in some `m(i)` (resp. `m̄(i)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub z: bool,
    pub h: bool,
    pub aff: bool,
    pub m: Option<usize>,
    pub mbar: Option<usize>,
}

impl Classification {
    pub fn member(&self, spec: MicrocosmSpec) -> bool {
        match spec {
            MicrocosmSpec::Z => self.z,
            MicrocosmSpec::H => self.h,
            MicrocosmSpec::Aff => self.aff,
            MicrocosmSpec::M(i) => self.m.is_some_and(|m| m <= i),
            MicrocosmSpec::MBar(i) => self.mbar.is_some_and(|m| m <= i),
            MicrocosmSpec::MInf => self.m.is_some(),
            MicrocosmSpec::MBarInf => self.mbar.is_some(),
            MicrocosmSpec::Macrocosm => true,
        }
    }
}

pub fn classify(f: &Descriptor) -> Classification {
    let int_slope = f.slope.is_integer();
    let int_offset = f.offset.is_integer();
    let rigid = f.perm.is_empty() && f.shifts.is_empty();
    let unit = f.slope.is_one() && int_offset;
    let perm_max = f.perm.keys().copied().max().unwrap_or(0);
    let shift_max = f.shifts.keys().copied().max().unwrap_or(0);
    Classification {
        z: rigid && unit,
        h: rigid && int_slope && f.offset.is_zero(),
        aff: rigid && int_slope && int_offset,
        m: (unit && f.shifts.is_empty()).then(|| perm_max.max(1)),
        mbar: unit.then(|| perm_max.max(shift_max).max(1)),
    }
}

/// Write `perm` as a product of transpositions `τ(1,j)`, returned as the list
/// of `j`s in application order (first element applied first).
pub fn decompose_star(perm: &Perm) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in perm.keys() {
        if seen.contains(&start) {
            continue;
        }
        let mut cycle = vec![start];
        seen.insert(start);
        let mut i = perm_apply(perm, start);
        while i != start {
            seen.insert(i);
            cycle.push(i);
            i = perm_apply(perm, i);
        }
        if let Some(pos) = cycle.iter().position(|&c| c == 1) {
            cycle.rotate_left(pos);
            out.extend(&cycle[1..]);
        } else {
            out.push(cycle[0]);
            out.extend(&cycle[1..]);
            out.push(cycle[0]);
        }
    }
    out
}

/// Compose a star sequence back into a permutation.
pub fn compose_stars(seq: &[usize]) -> Perm {
    seq.iter().fold(Perm::new(), |acc, &j| perm_compose(&star(j), &acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn translations_cancel() {
        let t1 = Descriptor::translation(qi(1));
        let tm1 = Descriptor::translation(qi(-1));
        assert!(t1.compose(&tm1).is_identity());
    }

    #[test]
    fn transposition_is_involution() {
        let p = Descriptor::permutation(star(2));
        assert!(p.compose(&p).is_identity());
    }

    #[test]
    fn affine_composition() {
        let f = Descriptor::affine(qi(2), qi(0));
        let g = Descriptor::translation(qi(3));
        assert_eq!(f.compose(&g), Descriptor::affine(qi(2), qi(6)));
    }

    #[test]
    fn apply_examples() {
        let b = Cuboid::block(1);
        assert_eq!(Descriptor::identity().apply_box(&b).unwrap(), b);
        assert_eq!(Descriptor::translation(qi(1)).apply_box(&b).unwrap(), Cuboid::block(2));
        let src = Cuboid::block(0).with(1, Interval::of(q(3, 4), qi(1)));
        let img = Descriptor::shift(1, q(1, 2)).apply_box(&src).unwrap();
        assert_eq!(img, Cuboid::block(0).with(1, Interval::of(q(1, 4), q(1, 2))));
    }

    #[test]
    fn wrap_requires_split() {
        let src = Cuboid::block(0).with(1, Interval::of(q(1, 4), q(3, 4)));
        let d = Descriptor::shift(1, q(1, 2));
        assert!(matches!(d.apply_box(&src), Err(Error::WrapSplitRequired { coord: 1, .. })));
        let img = d.apply_mset(&MSet::from_box(src.clone()));
        assert_eq!(img.measure(), q(1, 2));
        assert_eq!(d.preimage(&img), MSet::from_box(src));
    }

    #[test]
    fn classification_examples() {
        let c = classify(&Descriptor::translation(qi(5)));
        assert!(c.z && c.aff && !c.h);
        assert_eq!(c.m, Some(1));
        assert_eq!(c.mbar, Some(1));
        let c = classify(&Descriptor::affine(qi(2), qi(0)));
        assert!(c.h && c.aff && !c.z);
        assert_eq!(c.m, None);
        let p: Perm = [(1, 3), (3, 1)].into_iter().collect();
        let d = Descriptor::new(qi(1), qi(2), p, BTreeMap::new()).unwrap();
        assert_eq!(classify(&d).m, Some(3));
        assert!(classify(&d).member(MicrocosmSpec::M(3)));
        assert!(!classify(&d).member(MicrocosmSpec::M(2)));
    }

    #[test]
    fn star_decomposition_brute_force() {
        assert!(decompose_star(&Perm::new()).is_empty());
        assert_eq!(decompose_star(&star(2)), vec![2]);
        let perms = all_images(4);
        for images in perms {
            let p = perm_from_images(&images);
            let seq = decompose_star(&p);
            let support = p.len();
            assert!(seq.len() <= 2 * support);
            let back = compose_stars(&seq);
            for i in 1..=4 {
                assert_eq!(perm_apply(&back, i), perm_apply(&p, i), "{images:?} via {seq:?}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"slope":"1/1","offset":"1/1","perm":{"1":2,"2":1},"shifts":{"1":"1/2"}}"#;
        let d: Descriptor = serde_json::from_str(s).unwrap();
        assert_eq!(d.perm().len(), 2);
        let back: Descriptor = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
    }
}
