use nominal::format::{parse_automaton, print_automaton, FormatError};
use nominal::runner::{run, Algo, RunConfig};
use nominal_core::automata::Kind;
use nominal_core::equivalence::{dfa_equiv, nfa_equiv_bounded, EquivOptions, Verdict};
use nominal_core::targets::{three_orbit_automaton, make_fifo, make_leq, TargetSpec};

const FIFO2: &str = include_str!("data/fifo2.nomaut");
const THREE_ORBIT: &str = include_str!("data/three_orbit.nomaut");

#[test]
fn fifo2_fixture_is_canonical_and_correct() {
    let a = parse_automaton(FIFO2).unwrap();
    assert_eq!(print_automaton(&a), FIFO2);
    assert_eq!((a.orbit_count(), a.dimension()), (5, 2));
    assert_eq!(dfa_equiv(&a, &make_fifo(2), &EquivOptions::default()).unwrap(), Verdict::Equal);
}

#[test]
fn three_orbit_fixture_matches_builtin() {
    let a = parse_automaton(THREE_ORBIT).unwrap();
    assert_eq!(print_automaton(&a), THREE_ORBIT);
    assert_eq!(dfa_equiv(&a, &three_orbit_automaton(), &EquivOptions::default()).unwrap(), Verdict::Equal);
    assert_eq!(print_automaton(&three_orbit_automaton()), THREE_ORBIT);
}

#[test]
fn learned_automata_round_trip() {
    for (target, algo) in [
        (TargetSpec::Fifo(2), Algo::Lstar),
        (TargetSpec::DoubleWord(2), Algo::Lstarcol),
        (TargetSpec::NLast(2), Algo::Nlstar),
        (TargetSpec::Leq, Algo::Nlstar),
    ] {
        let learned = run(&RunConfig::new(target, algo)).unwrap().report.automaton;
        let text = print_automaton(&learned);
        let back = parse_automaton(&text).unwrap();
        assert_eq!(print_automaton(&back), text, "{target}");
        assert_eq!(back, learned, "{target}");
    }
}

#[test]
fn learned_leq_uses_any() {
    let learned = run(&RunConfig::new(TargetSpec::Leq, Algo::Nlstar)).unwrap().report.automaton;
    assert_eq!(learned.kind, Kind::Nfa);
    let text = print_automaton(&learned);
    assert!(text.contains("any)"), "{text}");
    let back = parse_automaton(&text).unwrap();
    let v = nfa_equiv_bounded(&back, &make_leq(), 12, &EquivOptions::default()).unwrap();
    assert_eq!(v, Verdict::EqualUpToDepth(12));
}

fn syntax_line(text: &str) -> (usize, String) {
    match parse_automaton(text) {
        Err(FormatError::Syntax { line, message }) => (line, message),
        other => panic!("expected a syntax error, got {other:?}"),
    }
}

#[test]
fn errors_carry_line_numbers() {
    let (line, msg) = syntax_line(&FIFO2.replace("-> twice(r0)", "-> thrice(r0)"));
    assert_eq!(line, 12);
    assert!(msg.contains("thrice"));
    assert_eq!(syntax_line("nomaut 2\n").0, 1);
    let (line, msg) = syntax_line(&FIFO2.replace("rule empty pop(fresh)", "rule empty peek(fresh)"));
    assert_eq!(line, 11);
    assert!(msg.contains("peek"));
    let (line, _) = syntax_line(&FIFO2.replace("sym (0 1)", "sym (0 0)"));
    assert_eq!(line, 6);
    let (line, _) = syntax_line(&FIFO2.replace("one(r1)", "one(s1)"));
    assert_eq!(line, 19);
}

#[test]
fn semantic_errors_surface() {
    let missing = FIFO2.replace("rule sink pop(fresh) -> sink()\n", "");
    let e = parse_automaton(&missing).unwrap_err();
    assert!(matches!(e, FormatError::Invalid(_)));
    assert!(e.to_string().contains("totality"), "{e}");
    let asym = FIFO2.replace("orbit two dim 2 accepting sym (0 1)", "orbit two dim 2 accepting sym (1 0)");
    let e = parse_automaton(&asym).unwrap_err();
    assert!(e.to_string().contains("symmetry"), "{e}");
}
