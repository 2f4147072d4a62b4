use std::collections::BTreeSet;

use ig_core::automata::{co_accepts, language_a, not_leading_one, parity, zeros_ones, Automaton};
use ig_core::encodings::{automaton_to_machine, machine_to_automaton, trace_path_correspondence, ExtractMode};
use ig_core::graphings::validate;
use ig_core::machines::{accepts, essentialize, is_essential, language};
use ig_core::microcosm::MicrocosmSpec;
use ig_core::words::{Psi, Word};

fn words(s: &[&str]) -> BTreeSet<Word> {
    s.iter().map(|w| w.parse().unwrap()).collect()
}

#[test]
fn parity_encoding_is_a_one_head_machine() {
    let psi = Psi::default();
    let ag = automaton_to_machine(&parity(), &psi).unwrap();
    assert_eq!(ag.machine.head_bound, 1);
    assert!(validate(&ag.machine.graphing, MicrocosmSpec::M(1)).is_empty());
    assert_eq!(ag.families, parity().transitions.len() * 3 * 2);
    assert!(ag.machine.graphing.edges.len() <= ag.families);
}

#[test]
fn parity_language_matches() {
    let psi = Psi::default();
    let m = automaton_to_machine(&parity(), &psi).unwrap().machine;
    let expect = words(&["", "0", "00", "11", "000", "011", "101", "110"]);
    assert_eq!(language(&m, 3, &psi).unwrap(), expect);
    assert_eq!(language_a(&parity(), 3).unwrap(), expect);
    assert!(accepts(&m, &"11".parse().unwrap(), &psi).unwrap());
    assert!(!accepts(&m, &"1".parse().unwrap(), &psi).unwrap());
}

#[test]
fn zeros_ones_language_matches() {
    let psi = Psi::default();
    let m = automaton_to_machine(&zeros_ones(), &psi).unwrap().machine;
    assert_eq!(language(&m, 4, &psi).unwrap(), words(&["", "01", "0011"]));
}

#[test]
fn three_heads_match_and_essentialize() {
    let psi = Psi::default();
    let a = not_leading_one();
    let m = automaton_to_machine(&a, &psi).unwrap().machine;
    assert_eq!(m.head_bound, 3);
    let e = essentialize(&m, &psi);
    assert!(!is_essential(&m));
    assert!(is_essential(&e));
    let expect = language_a(&a, 3).unwrap();
    assert_eq!(language(&m, 3, &psi).unwrap(), expect);
    assert_eq!(language(&e, 3, &psi).unwrap(), expect);
}

#[test]
fn parity_traces_match_paths() {
    let psi = Psi::default();
    let r = trace_path_correspondence(&parity(), &"1".parse().unwrap(), 6, &psi).unwrap();
    assert!(r.ok(), "{:?}", r.mismatches);
    for &(_, t, pa, pr) in &r.per_length {
        assert_eq!((t, t), (pa, pr));
    }
}

#[test]
fn zeros_ones_traces_match_paths() {
    let psi = Psi::default();
    let r = trace_path_correspondence(&zeros_ones(), &"01".parse().unwrap(), 12, &psi).unwrap();
    assert!(r.ok(), "{:?}", r.mismatches);
}

fn round_trip(a: &Automaton, mode: ExtractMode, max_len: usize) {
    let psi = Psi::default();
    let m = essentialize(&automaton_to_machine(a, &psi).unwrap().machine, &psi);
    let g = machine_to_automaton(&m, mode, &psi).unwrap();
    for w in Word::all_up_to(max_len) {
        assert_eq!(co_accepts(&g.automaton, &w).unwrap(), co_accepts(a, &w).unwrap(), "{mode:?} on {w}");
    }
}

#[test]
fn parity_round_trip() {
    round_trip(&parity(), ExtractMode::Verbatim, 5);
    round_trip(&parity(), ExtractMode::Preamble, 5);
}

#[test]
fn zeros_ones_round_trip() {
    round_trip(&zeros_ones(), ExtractMode::Verbatim, 4);
    round_trip(&zeros_ones(), ExtractMode::Preamble, 4);
}
