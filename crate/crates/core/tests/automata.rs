use std::collections::BTreeSet;

use ig_core::automata::{co_accepts, language_a, packaged, parity, traces, zeros_ones, Automaton, Builder, ACCEPT, INIT, PACKAGED, REJECT};
use ig_core::words::{Dir, Word};
use ig_core::Error;

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

fn brute(pred: impl Fn(&str) -> bool, max_len: usize) -> BTreeSet<Word> {
    Word::all_up_to(max_len).into_iter().filter(|x| pred(&x.body())).collect()
}

#[test]
fn packaged_languages_match_brute_force() {
    let even = |s: &str| s.chars().filter(|&c| c == '1').count() % 2 == 0;
    assert_eq!(language_a(&parity(), 6).unwrap(), brute(even, 6));
    let zo = |s: &str| {
        let k = s.len() / 2;
        s.len().is_multiple_of(2) && s == format!("{}{}", "0".repeat(k), "1".repeat(k))
    };
    assert_eq!(language_a(&zeros_ones(), 6).unwrap(), brute(zo, 6));
    let nlo = |s: &str| !s.starts_with('1');
    assert_eq!(language_a(&packaged("not-leading-one").unwrap(), 5).unwrap(), brute(nlo, 5));
}

#[test]
fn packaged_automata_round_trip_through_json() {
    for name in PACKAGED {
        let a = packaged(name).unwrap();
        assert!(a.is_deterministic(), "{name}");
        assert_eq!(Automaton::from_json(&a.to_json()).unwrap(), a);
    }
    assert!(packaged("nope").is_none());
}

#[test]
fn traces_end_in_halting_states() {
    let ts = traces(&parity(), &w("101"), 20).unwrap();
    let last: Vec<&str> = ts.iter().filter(|t| t.halting()).map(|t| t.configurations.last().unwrap().state.as_str()).collect();
    assert_eq!(last, vec![ACCEPT]);
    assert!(co_accepts(&parity(), &w("101")).unwrap());
    assert!(!co_accepts(&parity(), &w("1")).unwrap());
}

#[test]
fn nondeterministic_runs_reject_if_any_branch_rejects() {
    let mut b = Builder::new(1);
    b.step(INIT, "*", 1, Dir::In, "go")
        .step("go", "?", 1, Dir::In, "go")
        .step("go", "*", 1, Dir::In, "a")
        .halt("go", ACCEPT);
    b.raw("go", &[ig_core::words::Symbol::One], Some(1), Some(Dir::Out), "bad");
    b.rewind("bad", REJECT);
    let a = b.build();
    assert!(!a.is_deterministic());
    assert!(co_accepts(&a, &w("00")).unwrap());
    assert!(!co_accepts(&a, &w("010")).unwrap());
}

#[test]
fn invalid_automata_are_rejected() {
    let json = |head: usize, next: &str| {
        format!(r#"{{"heads": 1, "states": ["init", "go", "accept", "reject"], "transitions": [{{"read": ["*"], "state": "init", "head": {head}, "dir": "In", "next": "{next}"}}]}}"#)
    };
    assert!(Automaton::from_json(&json(1, "go")).is_ok());
    assert!(matches!(Automaton::from_json(&json(3, "go")), Err(Error::InvalidAutomaton(_))));
    assert!(matches!(Automaton::from_json(&json(1, "nowhere")), Err(Error::InvalidAutomaton(_))));
}
