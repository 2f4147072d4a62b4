use ig_core::graphings::validate;
use ig_core::microcosm::MicrocosmSpec;
use ig_core::space::MSet;
use ig_core::words::{canonical_representation, promote, representation, word_graph, word_graphing, Dir, Psi, Symbol, Vertex, Word};
use ig_core::Error;

#[test]
fn word_parsing_and_order() {
    let w: Word = "0110".parse().unwrap();
    assert_eq!(w.len(), 4);
    assert_eq!(w.at(0), Symbol::Star);
    assert_eq!(w.at(5), Symbol::Star);
    assert_eq!(w.body(), "0110");
    assert_eq!("*0110".parse::<Word>().unwrap(), w);
    assert!(matches!("012".parse::<Word>(), Err(Error::BadAlphabet('2'))));
    assert_eq!(Word::all_up_to(3).len(), 15);
    let words = Word::all_up_to(2);
    assert!(words.windows(2).all(|p| p[0] < p[1]));
    assert_eq!(Word::all_up_to(0)[0].to_string(), "ε");
}

#[test]
fn word_graph_is_a_circular_successor_structure() {
    let w: Word = "01".parse().unwrap();
    let g = word_graph(&w);
    assert_eq!(g.edges.len(), 6);
    assert_eq!(g.dialect_size(), 3);
    for e in &g.edges {
        assert_ne!(e.source.1, e.target.1);
        let n = 3;
        let step = if e.source.1 == Dir::Out { 1 } else { n - 1 };
        assert_eq!(e.output, (e.input + step) % n);
    }
}

#[test]
fn tables_are_injective_and_disjoint() {
    for psi in [Psi::default(), Psi::alternative()] {
        let mut seen: Vec<i64> = Vertex::LETTERS.iter().map(|&v| psi.block(v)).collect();
        seen.push(psi.accept());
        seen.push(psi.reject());
        let n = seen.len();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), n);
        assert!(psi.letters().disjoint_ae(&psi.results()));
        for &v in &Vertex::LETTERS {
            assert_eq!(psi.vertex_at(psi.block(v)), Some(v));
        }
    }
}

#[test]
fn representation_is_a_translation_graphing_with_coordinate_shifts() {
    let psi = Psi::default();
    for w in Word::all_up_to(3) {
        let rep = canonical_representation(&w, &psi);
        assert_eq!(rep.dialect_size, 1);
        assert!(validate(&rep, MicrocosmSpec::MBar(1)).is_empty(), "{w}");
        assert!(rep.support.equal_ae(&psi.letters()));
        let total = rep.edges.iter().fold(MSet::empty(), |acc, e| acc.union(&e.source));
        assert!(total.subset_ae(&psi.letters()));
    }
}

#[test]
fn renamed_representations_and_promotion_errors() {
    let psi = Psi::default();
    let w: Word = "10".parse().unwrap();
    let r = representation(&w, &[4, 0, 2], 5, &psi).unwrap();
    assert_eq!(r.edges.len(), word_graphing(&w, &psi).edges.len());
    assert!(matches!(representation(&w, &[0, 0, 1], 5, &psi), Err(Error::NotInjective)));
    let promoted = promote(&canonical_representation(&w, &psi)).unwrap_err();
    assert!(matches!(promoted, Error::PairingRequired(_)));
}
