//! Reading and writing files, words and cuts.

use std::fs;
use std::path::Path;

use ig_core::automata::{packaged, Automaton, PACKAGED};
use ig_core::graphings::Graphing;
use ig_core::machines::Machine;
use ig_core::rational::parse_q;
use ig_core::space::{Cuboid, Interval, MSet};
use ig_core::words::{Psi, Word};

pub type CliResult<T> = Result<T, String>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// An automaton from a JSON file, or a packaged automaton by name.
pub fn automaton(spec: &str) -> CliResult<Automaton> {
    let path = Path::new(spec);
    if path.exists() {
        return Automaton::from_json(&read(path)?).map_err(|e| format!("{spec}: {e}"));
    }
    packaged(spec).ok_or_else(|| format!("{spec}: no such file or packaged automaton ({})", PACKAGED.join(", ")))
}

pub fn machine(path: &Path, psi: &Psi) -> CliResult<Machine> {
    Machine::from_json(&read(path)?, psi).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn graphing(path: &Path) -> CliResult<Graphing> {
    serde_json::from_str(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn word(s: &str) -> CliResult<Word> {
    s.parse().map_err(|e: ig_core::Error| e.to_string())
}

/// Comma-separated unit blocks `k` and line intervals `a..b`.
pub fn cut(s: &str) -> CliResult<MSet> {
    let mut set = MSet::empty();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let part = match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (parse_q(a.trim()), parse_q(b.trim()));
                let (Some(a), Some(b)) = (a, b) else {
                    return Err(format!("bad interval {item:?}"));
                };
                let iv = Interval::new(a, b).map_err(|e| e.to_string())?;
                MSet::from_box(Cuboid::new(iv))
            }
            None => MSet::blocks([item.parse::<i64>().map_err(|_| format!("bad block {item:?}"))?]),
        };
        set = set.union(&part);
    }
    Ok(set)
}

/// Write to the file when given, to standard output otherwise.
pub fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
