//! Two-way multihead automata on the circular tape `⋆a₁…a_k`, with
//! co-nondeterministic acceptance: a word is accepted when no run reaches
//! the reject state.
//!
//! `In` moves a head to the next position, `Out` to the previous one, both
//! modulo `k+1`. Position 0 holds the only `⋆`.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Dir, Symbol, Word};

pub const INIT: &str = "init";
pub const ACCEPT: &str = "accept";
pub const REJECT: &str = "reject";

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub read: Vec<Symbol>,
    pub state: String,
    /// Moved head, 1-based. Absent on halting transitions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<Dir>,
    pub next: String,
}

impl Transition {
    pub fn halts(&self) -> bool {
        self.next == ACCEPT || self.next == REJECT
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Automaton {
    pub heads: usize,
    pub states: Vec<String>,
    pub transitions: Vec<Transition>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: String,
    pub positions: Vec<usize>,
}

impl Configuration {
    pub fn initial(a: &Automaton) -> Self {
        Configuration { state: INIT.into(), positions: vec![0; a.heads] }
    }

    pub fn read(&self, w: &Word) -> Vec<Symbol> {
        self.positions.iter().map(|&p| w.at(p)).collect()
    }
}

impl Automaton {
    pub fn from_json(s: &str) -> Result<Automaton> {
        let a: Automaton = serde_json::from_str(s)?;
        a.validate()?;
        Ok(a)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidAutomaton(m));
        if self.heads == 0 {
            return bad("at least one head is required".into());
        }
        for r in [INIT, ACCEPT, REJECT] {
            if !self.states.iter().any(|s| s == r) {
                return bad(format!("missing reserved state {r}"));
            }
        }
        let known: HashSet<&str> = self.states.iter().map(String::as_str).collect();
        if known.len() != self.states.len() {
            return bad("duplicate state names".into());
        }
        for (i, t) in self.transitions.iter().enumerate() {
            if !known.contains(t.state.as_str()) || !known.contains(t.next.as_str()) {
                return bad(format!("transition {i} uses an undeclared state"));
            }
            if t.state == ACCEPT || t.state == REJECT {
                return bad(format!("transition {i} leaves a halting state"));
            }
            if t.read.len() != self.heads {
                return bad(format!("transition {i} reads {} symbols for {} heads", t.read.len(), self.heads));
            }
            match (t.halts(), t.head, t.dir) {
                (true, _, _) => {}
                (false, Some(h), Some(_)) if (1..=self.heads).contains(&h) => {}
                _ => return bad(format!("transition {i} needs a head in 1..={} and a direction", self.heads)),
            }
        }
        Ok(())
    }

    pub fn is_deterministic(&self) -> bool {
        let keys: HashSet<(&str, &[Symbol])> = self.transitions.iter().map(|t| (t.state.as_str(), t.read.as_slice())).collect();
        keys.len() == self.transitions.len()
    }

    pub fn state_index(&self, s: &str) -> Option<usize> {
        self.states.iter().position(|x| x == s)
    }
}

/// One step: every matching transition with the resulting configuration.
pub fn successors(a: &Automaton, w: &Word, c: &Configuration) -> Result<Vec<(usize, Configuration)>> {
    let n = w.len() + 1;
    let read = c.read(w);
    let mut out = Vec::new();
    for (i, t) in a.transitions.iter().enumerate() {
        if t.state != c.state || t.read != read {
            continue;
        }
        let mut positions = c.positions.clone();
        if t.halts() {
            if positions.iter().any(|&p| p != 0) {
                return Err(Error::MalformedHalt { state: t.state.clone(), positions });
            }
        } else {
            let h = t.head.expect("validated") - 1;
            positions[h] = match t.dir.expect("validated") {
                Dir::In => (positions[h] + 1) % n,
                Dir::Out => (positions[h] + n - 1) % n,
            };
        }
        out.push((i, Configuration { state: t.next.clone(), positions }));
    }
    Ok(out)
}

/// True iff no run from the initial configuration reaches `reject`.
pub fn co_accepts(a: &Automaton, w: &Word) -> Result<bool> {
    let start = Configuration::initial(a);
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        if c.state == REJECT {
            return Ok(false);
        }
        for (_, d) in successors(a, w, &c)? {
            if seen.insert(d.clone()) {
                queue.push_back(d);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub transitions: Vec<usize>,
    /// Configurations visited, starting with the initial one.
    pub configurations: Vec<Configuration>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn halting(&self) -> bool {
        self.configurations.last().is_some_and(|c| c.state == ACCEPT || c.state == REJECT)
    }
}

/// All non-empty traces with at most `max_steps` transitions.
pub fn traces(a: &Automaton, w: &Word, max_steps: usize) -> Result<Vec<Trace>> {
    let mut out = Vec::new();
    let mut frontier = vec![Trace { transitions: vec![], configurations: vec![Configuration::initial(a)] }];
    for _ in 0..max_steps {
        let mut next = Vec::new();
        for t in &frontier {
            for (i, c) in successors(a, w, t.configurations.last().expect("non-empty"))? {
                let mut u = t.clone();
                u.transitions.push(i);
                u.configurations.push(c);
                next.push(u);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(out)
}

pub fn language_a(a: &Automaton, max_len: usize) -> Result<BTreeSet<Word>> {
    let mut out = BTreeSet::new();
    for w in Word::all_up_to(max_len) {
        if co_accepts(a, &w)? {
            out.insert(w);
        }
    }
    Ok(out)
}

/// Builds automata from read patterns. In a pattern `?` matches any symbol
/// and `x` any non-`⋆` symbol. The first rule covering a read tuple wins.
#[derive(Clone, Debug)]
pub struct Builder {
    heads: usize,
    states: Vec<String>,
    transitions: Vec<Transition>,
    covered: HashSet<(String, Vec<Symbol>)>,
}

impl Builder {
    pub fn new(heads: usize) -> Self {
        Builder { heads, states: vec![INIT.into(), ACCEPT.into(), REJECT.into()], transitions: vec![], covered: HashSet::new() }
    }

    fn expand(&self, pattern: &str) -> Vec<Vec<Symbol>> {
        let cs: Vec<char> = pattern.chars().collect();
        assert_eq!(cs.len(), self.heads, "pattern {pattern:?} has the wrong width");
        let mut out = vec![vec![]];
        for c in cs {
            let options: Vec<Symbol> = match c {
                '?' => Symbol::ALL.to_vec(),
                'x' => vec![Symbol::Zero, Symbol::One],
                c => vec![Symbol::from_char(c).expect("pattern symbol")],
            };
            out = out.into_iter().flat_map(|p: Vec<Symbol>| options.iter().map(move |&s| [p.clone(), vec![s]].concat())).collect();
        }
        out
    }

    fn note(&mut self, s: &str) {
        if !self.states.iter().any(|x| x == s) {
            self.states.push(s.into());
        }
    }

    fn add(&mut self, state: &str, pattern: &str, head: Option<usize>, dir: Option<Dir>, next: &str) -> &mut Self {
        self.note(state);
        self.note(next);
        for read in self.expand(pattern) {
            if self.covered.insert((state.into(), read.clone())) {
                self.transitions.push(Transition { read, state: state.into(), head, dir, next: next.into() });
            }
        }
        self
    }

    /// Add one concrete transition alongside any others on the same read.
    pub fn raw(&mut self, state: &str, read: &[Symbol], head: Option<usize>, dir: Option<Dir>, next: &str) -> &mut Self {
        self.note(state);
        self.note(next);
        let t = Transition { read: read.to_vec(), state: state.into(), head, dir, next: next.into() };
        if !self.transitions.contains(&t) {
            self.covered.insert((state.into(), t.read.clone()));
            self.transitions.push(t);
        }
        self
    }

    pub fn step(&mut self, state: &str, pattern: &str, head: usize, dir: Dir, next: &str) -> &mut Self {
        self.add(state, pattern, Some(head), Some(dir), next)
    }

    /// Halting rule; only the all-`⋆` tuple is kept.
    pub fn halt(&mut self, state: &str, next: &str) -> &mut Self {
        let stars = "*".repeat(self.heads);
        self.add(state, &stars, None, None, next)
    }

    /// Move the first head not on `⋆` leftwards until all rest on `⋆`, then halt.
    pub fn rewind(&mut self, state: &str, result: &str) -> &mut Self {
        for g in 1..=self.heads {
            let pattern: String = (1..=self.heads).map(|h| if h < g { '*' } else if h == g { 'x' } else { '?' }).collect();
            self.step(state, &pattern, g, Dir::Out, state);
        }
        self.halt(state, result)
    }

    /// Move each head in and back out in turn, starting from `init` and
    /// ending in `end`.
    pub fn check_start(&mut self, end: &str) -> &mut Self {
        let stars = "*".repeat(self.heads);
        let mut cur = INIT.to_string();
        for h in 1..=self.heads {
            let mid = format!("start{h}");
            let after = if h == self.heads { end.to_string() } else { format!("back{h}") };
            self.step(&cur, &stars, h, Dir::In, &mid);
            let pattern: String = (1..=self.heads).map(|g| if g == h { '?' } else { '*' }).collect();
            self.step(&mid, &pattern, h, Dir::Out, &after);
            cur = after;
        }
        self
    }

    pub fn build(&self) -> Automaton {
        let a = Automaton { heads: self.heads, states: self.states.clone(), transitions: self.transitions.clone() };
        a.validate().expect("builder output is valid");
        a
    }
}

/// One head; accepts words with an even number of 1s.
pub fn parity() -> Automaton {
    let mut b = Builder::new(1);
    b.step(INIT, "*", 1, Dir::In, "even")
        .step("even", "0", 1, Dir::In, "even")
        .step("even", "1", 1, Dir::In, "odd")
        .step("odd", "0", 1, Dir::In, "odd")
        .step("odd", "1", 1, Dir::In, "even")
        .halt("even", ACCEPT)
        .halt("odd", REJECT);
    b.build()
}

/// Two heads; accepts `0ⁿ1ⁿ`.
pub fn zeros_ones() -> Automaton {
    let mut b = Builder::new(2);
    b.check_start("shape");
    // Check the shape 0*1* with head 1.
    b.step("shape", "**", 1, Dir::In, "zeros")
        .step("zeros", "0*", 1, Dir::In, "zeros")
        .step("zeros", "1*", 1, Dir::In, "ones")
        .step("zeros", "**", 2, Dir::In, "skip")
        .step("ones", "1*", 1, Dir::In, "ones")
        .step("ones", "0*", 1, Dir::Out, "fail")
        .step("ones", "**", 2, Dir::In, "skip");
    // Move head 2 past the zeros, then advance both heads together.
    b.step("skip", "?0", 2, Dir::In, "skip")
        .step("skip", "??", 1, Dir::In, "pair")
        .step("pair", "01", 1, Dir::In, "pair2")
        .step("pair2", "??", 2, Dir::In, "pair")
        .step("pair", "1*", 1, Dir::Out, "pass")
        .halt("pair", ACCEPT)
        .step("pair", "x?", 1, Dir::Out, "fail")
        .step("pair", "*x", 2, Dir::Out, "fail");
    b.rewind("pass", ACCEPT).rewind("fail", REJECT);
    b.build()
}

/// Three heads; accepts words not starting with 1.
pub fn not_leading_one() -> Automaton {
    let mut b = Builder::new(3);
    b.check_start("look");
    b.step("look", "***", 3, Dir::In, "seen")
        .step("seen", "**1", 3, Dir::Out, "fail")
        .step("seen", "**?", 3, Dir::Out, "pass");
    b.rewind("pass", ACCEPT).rewind("fail", REJECT);
    b.build()
}

/// Packaged automata by name.
pub fn packaged(name: &str) -> Option<Automaton> {
    match name {
        "parity" => Some(parity()),
        "zeros-ones" => Some(zeros_ones()),
        "not-leading-one" => Some(not_leading_one()),
        _ => None,
    }
}

pub const PACKAGED: [&str; 3] = ["parity", "zeros-ones", "not-leading-one"];
