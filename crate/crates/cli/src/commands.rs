use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use ig_core::automata::co_accepts;
use ig_core::encodings::{automaton_to_machine, machine_to_automaton, trace_path_correspondence, ExtractMode};
use ig_core::execution::{alternating_paths, default_cap, plug, PlugOptions, Side};
use ig_core::machines::{accepts, accepts_rep, essentialize};
use ig_core::measurement::{measure_graphings, measure_series};
use ig_core::rational::parse_q;
use ig_core::words::{representation, Word};

use crate::input::{self, CliResult};
use crate::{Command, Format, MeasureMode, RunConfig};

fn core<T>(r: ig_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| e.to_string())
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn yes(b: bool) -> &'static str {
    if b {
        "accept"
    } else {
        "reject"
    }
}

/// Run one subcommand; `Ok(false)` means a negative verdict or a disagreement.
pub fn run(cfg: &RunConfig, cmd: Command) -> CliResult<bool> {
    let psi = &cfg.psi;
    match cmd {
        Command::Decide { machine, word, renamings } => {
            let m = input::machine(&machine, psi)?;
            let w = input::word(&word)?;
            let verdict = core(accepts(&m, &w, psi))?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let n = w.len() + 1;
            let mut stable = true;
            for _ in 0..renamings {
                let size = n + rng.gen_range(1..=3);
                let mut inj: Vec<usize> = (0..size).collect();
                inj.shuffle(&mut rng);
                inj.truncate(n);
                let rep = core(representation(&w, &inj, size, psi))?;
                stable &= core(accepts_rep(&m, &rep, psi))? == verdict;
            }
            if !stable {
                return Err("verdict changed under a dialect renaming".into());
            }
            match cfg.format {
                Format::Json => println!("{}", json!({"word": w.body(), "verdict": yes(verdict), "renamings": renamings})),
                Format::Table => println!("{}\t{}", w, yes(verdict)),
            }
            Ok(verdict)
        }
        Command::Compare { automaton, max_len } => {
            let a = input::automaton(&automaton)?;
            let m = core(automaton_to_machine(&a, psi))?.machine;
            let rows: Vec<(Word, bool, bool)> = Word::all_up_to(max_len)
                .into_par_iter()
                .map(|w| Ok((w.clone(), core(co_accepts(&a, &w))?, core(accepts(&m, &w, psi))?)))
                .collect::<CliResult<_>>()?;
            let agree = rows.iter().all(|r| r.1 == r.2);
            match cfg.format {
                Format::Json => {
                    let rows: Vec<Value> =
                        rows.iter().map(|(w, a, m)| json!({"word": w.body(), "automaton": yes(*a), "machine": yes(*m), "agree": a == m})).collect();
                    println!("{}", pretty(&json!({"rows": rows, "agree": agree})));
                }
                Format::Table => {
                    println!("word\tautomaton\tmachine\tagree");
                    for (w, a, m) in &rows {
                        println!("{w}\t{}\t{}\t{}", yes(*a), yes(*m), a == m);
                    }
                    println!("{} words, {}", rows.len(), if agree { "all agree" } else { "DISAGREEMENT" });
                }
            }
            Ok(agree)
        }
        Command::Roundtrip { automaton, max_len, mode } => {
            let a = input::automaton(&automaton)?;
            let m = essentialize(&core(automaton_to_machine(&a, psi))?.machine, psi);
            let g = core(machine_to_automaton(&m, ExtractMode::from(mode), psi))?;
            for note in &g.notes {
                eprintln!("note: {note}");
            }
            let rows: Vec<(Word, bool, bool)> = Word::all_up_to(max_len)
                .into_par_iter()
                .map(|w| Ok((w.clone(), core(co_accepts(&a, &w))?, core(co_accepts(&g.automaton, &w))?)))
                .collect::<CliResult<_>>()?;
            let agree = rows.iter().all(|r| r.1 == r.2);
            match cfg.format {
                Format::Json => {
                    let rows: Vec<Value> =
                        rows.iter().map(|(w, a, b)| json!({"word": w.body(), "original": yes(*a), "extracted": yes(*b), "agree": a == b})).collect();
                    println!("{}", pretty(&json!({"mode": format!("{mode:?}"), "states": g.reachable, "rows": rows, "agree": agree})));
                }
                Format::Table => {
                    println!("word\toriginal\textracted\tagree");
                    for (w, x, y) in &rows {
                        println!("{w}\t{}\t{}\t{}", yes(*x), yes(*y), x == y);
                    }
                    let n_agree = rows.iter().filter(|r| r.1 == r.2).count();
                    println!("{mode:?}: {n_agree}/{} agree, {} reachable states", rows.len(), g.reachable);
                }
            }
            Ok(agree)
        }
        Command::EncodeAutomaton { automaton, output } => {
            let a = input::automaton(&automaton)?;
            let ag = core(automaton_to_machine(&a, psi))?;
            input::emit(output.as_deref(), &ag.machine.to_json())?;
            Ok(true)
        }
        Command::ExtractAutomaton { machine, mode, output } => {
            let m = input::machine(&machine, psi)?;
            let g = core(machine_to_automaton(&m, ExtractMode::from(mode), psi))?;
            for note in &g.notes {
                eprintln!("note: {note}");
            }
            eprintln!("{} reachable states of at most {}", g.reachable, g.state_space);
            input::emit(output.as_deref(), &g.automaton.to_json())?;
            Ok(true)
        }
        Command::Essentialize { machine, output } => {
            let m = input::machine(&machine, psi)?;
            input::emit(output.as_deref(), &essentialize(&m, psi).to_json())?;
            Ok(true)
        }
        Command::Exec { f, g, cut, max_len, output } => {
            let (f, g, cut) = (input::graphing(&f)?, input::graphing(&g)?, input::cut(&cut)?);
            let exec = core(plug(&f, &g, &cut, PlugOptions { max_len, cap: default_cap() }))?;
            if exec.truncated {
                eprintln!("warning: truncated at path length {}", max_len.unwrap_or_default());
            }
            let text = serde_json::to_string_pretty(&exec.graphing).map_err(|e| e.to_string())?;
            input::emit(output.as_deref(), &text)?;
            Ok(true)
        }
        Command::Paths { f, g, max_len } => {
            let (f, g) = (input::graphing(&f)?, input::graphing(&g)?);
            let paths = core(alternating_paths(&f, &g, Some(max_len), default_cap()))?;
            let list: Vec<Value> = paths
                .iter()
                .map(|p| {
                    let steps: Vec<String> = p.steps.iter().map(|(s, i)| format!("{}{i}", if *s == Side::F { 'F' } else { 'G' })).collect();
                    json!({"steps": steps, "source": p.source, "map": p.map, "weight": p.weight})
                })
                .collect();
            println!("{}", pretty(&Value::Array(list)));
            Ok(true)
        }
        Command::Measure { f, g, mode, tol } => {
            let (f, g) = (input::graphing(&f)?, input::graphing(&g)?);
            match mode {
                MeasureMode::Exact => println!("{}", core(measure_graphings(&f, &g))?),
                MeasureMode::Series => {
                    let tol = parse_q(&tol).ok_or_else(|| format!("bad tolerance {tol:?}"))?;
                    let s = core(measure_series(&f, &g, tol, default_cap()))?;
                    println!("{}", s.value);
                    eprintln!("tail bound {} at depth {}", s.tail_bound, s.depth);
                }
            }
            Ok(true)
        }
        Command::Correspond { automaton, word, max_steps } => {
            let a = input::automaton(&automaton)?;
            let w = input::word(&word)?;
            let c = core(trace_path_correspondence(&a, &w, max_steps, psi))?;
            match cfg.format {
                Format::Json => {
                    let rows: Vec<Value> = c.per_length.iter().map(|&(m, t, pa, pr)| json!({"steps": m, "traces": t, "pathsA": pa, "pathsR": pr})).collect();
                    println!("{}", pretty(&json!({"rows": rows, "mismatches": c.mismatches, "ok": c.ok()})));
                }
                Format::Table => {
                    println!("steps\ttraces\tpaths(a)\tpaths(r)");
                    for &(m, t, pa, pr) in &c.per_length {
                        println!("{m}\t{t}\t{pa}\t{pr}");
                    }
                    for mm in &c.mismatches {
                        println!("mismatch: {mm}");
                    }
                }
            }
            Ok(c.ok())
        }
    }
}
