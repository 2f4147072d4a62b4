//! Machines: finite graphings over the letter and result blocks, run
//! against word representations and decided by the reject test.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::execution::{plug, PlugOptions};
use crate::graphings::{juxtapose, tensor, validate, Edge, Graphing, Project, Scalar, Weight};
use crate::microcosm::{classify, compose_stars, decompose_star, star, Descriptor, MicrocosmSpec};
use crate::measurement::{decide_against_test, flagged_cycle_exists, orthogonal, TestFamily};
use crate::rational::Q;
use crate::space::{Cuboid, MSet};
use crate::words::{canonical_representation, Dir, Psi, Symbol, Word};

/// JSON form: the graphing object with an extra `headBound` field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine {
    pub graphing: Graphing,
    pub head_bound: usize,
}

impl Machine {
    pub fn from_json(s: &str, psi: &Psi) -> Result<Machine> {
        let mut value: serde_json::Value = serde_json::from_str(s)?;
        let declared = value
            .as_object_mut()
            .and_then(|o| o.remove("headBound"))
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::InvalidMachine("missing headBound".into()))? as usize;
        let graphing: Graphing = serde_json::from_value(value)?;
        let m = Machine { graphing, head_bound: declared };
        let mut checked = validate_machine(m.graphing, psi).map_err(|d| Error::InvalidMachine(d.join("; ")))?;
        if checked.head_bound > m.head_bound {
            return Err(Error::InvalidMachine(format!("declared headBound {} is below {}", m.head_bound, checked.head_bound)));
        }
        checked.head_bound = m.head_bound;
        Ok(checked)
    }

    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(&self.graphing).expect("serializable");
        value["headBound"] = self.head_bound.into();
        serde_json::to_string_pretty(&value).expect("serializable")
    }
}

/// Check the machine rules and compute the head bound.
pub fn validate_machine(g: Graphing, psi: &Psi) -> std::result::Result<Machine, Vec<String>> {
    let mut diags = Vec::new();
    if !g.support.equal_ae(&psi.letters().union(&psi.results())) {
        diags.push("support is not the letter and result blocks".to_string());
    }
    let mut bound = 1;
    for (i, e) in g.edges.iter().enumerate() {
        if e.weight != Weight::ONE {
            diags.push(format!("{} has weight {:?}, expected (1,0)", e.name(i), e.weight));
        }
        match classify(&e.map).m {
            Some(k) => bound = bound.max(k),
            None => diags.push(format!("{} has map {} outside every m(i)", e.name(i), e.map)),
        }
    }
    diags.extend(validate(&g, MicrocosmSpec::Macrocosm));
    if diags.is_empty() {
        Ok(Machine { graphing: g, head_bound: bound })
    } else {
        Err(diags)
    }
}

/// The computation `M ⊙ !L` as a project of the result support.
pub fn compute(m: &Machine, rep: &Graphing, psi: &Psi) -> Result<Project> {
    let exec = plug(&m.graphing, rep, &psi.letters(), PlugOptions::default())?;
    Ok(Project::new(Scalar::real(Q::from_integer(0)), vec![(Q::one(), exec.graphing)]))
}

/// Decide against the reject test on the given representation.
pub fn accepts_rep(m: &Machine, rep: &Graphing, psi: &Psi) -> Result<bool> {
    let result = compute(m, rep, psi)?;
    Ok(decide_against_test(&result, &TestFamily::reject(psi))?.passed())
}

pub fn accepts(m: &Machine, w: &Word, psi: &Psi) -> Result<bool> {
    accepts_rep(m, &canonical_representation(w, psi), psi)
}

/// Decide by measuring `M` against `!L ⊗ T` without executing first.
pub fn accepts_trefoil(m: &Machine, rep: &Graphing, psi: &Psi) -> Result<bool> {
    let zero = Scalar::real(Q::from_integer(0));
    let p = Project::new(zero, vec![(Q::one(), m.graphing.clone())]);
    let q = tensor(&Project::new(zero, vec![(Q::one(), rep.clone())]), &TestFamily::reject(psi).project())?;
    orthogonal(&p, &q)
}

/// The same decision by a cycle search on `M` against `!L ⊎ T`.
pub fn accepts_trefoil_cycles(m: &Machine, rep: &Graphing, psi: &Psi) -> Result<bool> {
    let t = TestFamily::reject(psi).graphing;
    Ok(!flagged_cycle_exists(&m.graphing, &juxtapose(rep, &t))?)
}

/// Accepted words of length at most `max_len`.
pub fn language(m: &Machine, max_len: usize, psi: &Psi) -> Result<BTreeSet<Word>> {
    let verdicts: Vec<(Word, bool)> = Word::all_up_to(max_len)
        .into_par_iter()
        .map(|w| accepts(m, &w, psi).map(|ok| (w, ok)))
        .collect::<Result<_>>()?;
    Ok(verdicts.into_iter().filter(|(_, ok)| *ok).map(|(w, _)| w).collect())
}

fn blocks_of(set: &MSet) -> Vec<i64> {
    let ks: BTreeSet<i64> = set
        .boxes()
        .iter()
        .flat_map(|b| b.line.lo().floor().to_integer()..b.line.hi().ceil().to_integer())
        .collect();
    ks.into_iter().collect()
}

fn moved(offset: i64, perm: usize) -> Descriptor {
    Descriptor::new(Q::one(), Q::from_integer(offset), star(perm), BTreeMap::new()).expect("star transposition")
}

/// Rewrite every map as a single star transposition with a block
/// translation. A map `τ_r ∘ … ∘ τ_1` with `r ≥ 2` becomes a chain through
/// fresh states; between two transpositions the new coordinate 1 is sent
/// out to the word under a guessed symbol and bounced back, so that paths
/// keep alternating and wrong guesses find no word edge.
pub fn essentialize(m: &Machine, psi: &Psi) -> Machine {
    let g = &m.graphing;
    let mut edges = Vec::new();
    let mut size = g.dialect_size;
    let out_block = |x: Symbol| psi.letter(x, Dir::Out);
    let in_blocks = MSet::blocks(Symbol::ALL.iter().map(|&y| psi.letter(y, Dir::In)));
    for e in &g.edges {
        let seq = decompose_star(e.map.perm());
        if seq.len() <= 1 {
            edges.push(e.clone());
            continue;
        }
        debug_assert_eq!(compose_stars(&seq), *e.map.perm());
        let r = seq.len();
        let name = e.label.clone().unwrap_or_default();
        for k in blocks_of(&e.source) {
            let source = e.source.intersect(&MSet::from_box(Cuboid::block(k)));
            if source.is_null() {
                continue;
            }
            let target = k + e.map.offset().to_integer();
            // Fresh states U_t = size + 2(t-1), V_t = size + 2(t-1) + 1.
            let u = |t: usize| size + 2 * (t - 1);
            let v = |t: usize| size + 2 * (t - 1) + 1;
            for x in Symbol::ALL {
                edges.push(Edge::new(source.clone(), e.input, u(1), moved(out_block(x) - k, seq[0])).labelled(format!("{name}~1{x}")));
            }
            for t in 1..r {
                edges.push(Edge::new(in_blocks.clone(), u(t), v(t), Descriptor::identity()).labelled(format!("{name}~b{t}")));
            }
            for t in 2..r {
                for x in Symbol::ALL {
                    for z in Symbol::ALL {
                        let d = moved(out_block(z) - out_block(x), seq[t - 1]);
                        edges.push(Edge::new(MSet::blocks([out_block(x)]), v(t - 1), u(t), d).labelled(format!("{name}~{t}{x}{z}")));
                    }
                }
            }
            for x in Symbol::ALL {
                let d = moved(target - out_block(x), seq[r - 1]);
                edges.push(Edge::new(MSet::blocks([out_block(x)]), v(r - 1), e.output, d).labelled(format!("{name}~{r}{x}")));
            }
            size += 2 * (r - 1);
        }
    }
    Machine { graphing: Graphing::new(g.support.clone(), size, edges), head_bound: m.head_bound }
}

/// True when every map is a star transposition (or none) with a translation.
pub fn is_essential(m: &Machine) -> bool {
    m.graphing.edges.iter().all(|e| decompose_star(e.map.perm()).len() <= 1 && e.map.shifts().is_empty())
}
