mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{perms, runner};
use nominal_core::automata::{permute_regs, Acceptor};
use nominal_core::equivalence::{default_depth, reachable_orbits};
use nominal_core::kernel::{permute_word, word_atoms, Atom, Word};
use nominal_core::learners::{
    learn_dfa_observed, learn_nfa_observed, CounterexampleMode, EquivalenceMode, LearnOptions, Teacher, TraceEvent,
};
use nominal_core::obstable::ObservationTable;
use nominal_core::targets::{three_orbit_automaton, make_double_word, make_fifo, make_leq, make_nlast};
use proptest::prelude::*;
use proptest::sample::Index;

/// Support and symmetries (as atom maps) of every row of `S`.
type Snapshot = BTreeMap<Word, (BTreeSet<Atom>, BTreeSet<Vec<(Atom, Atom)>>)>;

struct Run {
    rows: Vec<Word>,
    columns: Vec<Word>,
    snapshots: Vec<Snapshot>,
    /// Cells checked against a hypothesis, and how many disagreed.
    agreement: (usize, usize),
}

fn snapshot(t: &ObservationTable) -> Snapshot {
    t.rows()
        .map(|s| {
            let (regs, sym) = t.row_symmetries(s).unwrap();
            let maps = sym.elements().iter().map(|h| regs.iter().copied().zip(permute_regs(&regs, h)).collect()).collect();
            (s.clone(), (regs.into_iter().collect(), maps))
        })
        .collect()
}

fn record<T: Acceptor>(target: &T, algo: Option<CounterexampleMode>) -> Run {
    let mut run = Run { rows: vec![], columns: vec![], snapshots: vec![], agreement: (0, 0) };
    let mut observe = |ev: &TraceEvent, t: &ObservationTable| match ev {
        TraceEvent::Filled { .. } => run.snapshots.push(snapshot(t)),
        TraceEvent::Hypothesis { automaton } => {
            run.rows = t.rows().cloned().collect();
            run.columns = t.columns().cloned().collect();
            if automaton.kind == nominal_core::automata::Kind::Dfa {
                let words: Vec<Word> = t.upper().unwrap().iter().chain(t.lower().unwrap()).cloned().collect();
                for s in words {
                    for e in t.probes(&word_atoms(&s)).unwrap() {
                        run.agreement.0 += 1;
                        let w = [s.clone(), e.clone()].concat();
                        if automaton.accepts(&w).unwrap() != t.row_value(&s, &e).unwrap() {
                            run.agreement.1 += 1;
                        }
                    }
                }
            }
        }
        _ => {}
    };
    match algo {
        Some(mode) => {
            let mut teacher = Teacher::new(target, EquivalenceMode::Exact, Default::default());
            learn_dfa_observed(&mut teacher, &LearnOptions { mode, assert_progress: true }, &mut observe).unwrap();
        }
        None => {
            let depth = default_depth(reachable_orbits(target, 100_000).unwrap());
            let mut teacher = Teacher::new(target, EquivalenceMode::Bounded(depth), Default::default());
            learn_nfa_observed(&mut teacher, &mut observe).unwrap();
        }
    }
    run
}

fn runs() -> Vec<Run> {
    vec![
        record(&three_orbit_automaton(), Some(CounterexampleMode::Rows)),
        record(&make_fifo(2), Some(CounterexampleMode::Rows)),
        record(&make_fifo(2), Some(CounterexampleMode::Cols)),
        record(&make_double_word(2), Some(CounterexampleMode::Cols)),
        record(&make_nlast(2), Some(CounterexampleMode::Rows)),
        record(&make_nlast(2), None),
        record(&make_double_word(2), None),
        record(&make_leq(), None),
    ]
}

/// Refills a table with the final rows and columns of a run.
fn rebuild<T: Acceptor>(target: &T, run: &Run) -> (ObservationTable, Vec<Word>) {
    let mut t = ObservationTable::new(target.alphabet().clone());
    for s in &run.rows {
        t.add_row_orbit(s);
    }
    for e in &run.columns {
        t.add_column_orbit(e);
    }
    t.fill(|w| target.member(w));
    let words = t.upper().unwrap().iter().chain(t.lower().unwrap()).cloned().collect();
    (t, words)
}

#[test]
fn hypotheses_agree_with_their_tables() {
    for run in runs() {
        assert_eq!(run.agreement.1, 0, "{} of {} cells disagree", run.agreement.1, run.agreement.0);
    }
}

#[test]
fn supports_grow_and_symmetries_shrink() {
    let runs = runs();
    let strategy = (any::<Index>(), any::<Index>(), any::<Index>(), any::<Index>());
    runner()
        .run(&strategy, |(r, i, j, s)| {
            let run = &runs[r.index(runs.len())];
            let n = run.snapshots.len();
            let (a, b) = (i.index(n), j.index(n));
            let (early, late) = (&run.snapshots[a.min(b)], &run.snapshots[a.max(b)]);
            let (row, (supp, sym)) = early.iter().nth(s.index(early.len())).unwrap();
            let (supp2, sym2) = &late[row];
            prop_assert!(supp.is_subset(supp2));
            if supp == supp2 {
                prop_assert!(sym2.is_subset(sym));
            }
            Ok(())
        })
        .unwrap();
}

fn check_table<T: Acceptor>(target: &T, run: &Run) {
    let (t, words) = rebuild(target, run);
    let cols = &run.columns;
    let pick = |i: &Index| words[i.index(words.len())].clone();
    let strategy = (any::<Index>(), any::<Index>(), any::<Index>(), any::<Index>(), perms(), perms(), perms());
    runner()
        .run(&strategy, |(iu, iv, iw, ie, p, q, r)| {
            let u = pick(&iu);
            let v = permute_word(&pick(&iv), &q);
            let w = permute_word(&pick(&iw), &r);
            let e = permute_word(&cols[ie.index(cols.len())], &q);

            // Equivariance of cells, and cells are membership answers.
            let value = t.row_value(&u, &e).unwrap();
            prop_assert_eq!(value, target.member(&[u.clone(), e.clone()].concat()));
            prop_assert_eq!(t.row_value(&permute_word(&u, &p), &permute_word(&e, &p)).unwrap(), value);
            let (pu, pv) = (permute_word(&u, &p), permute_word(&v, &p));
            prop_assert_eq!(t.rows_equal(&pu, &pv).unwrap(), t.rows_equal(&u, &v).unwrap());
            prop_assert_eq!(t.rows_leq(&pu, &pv).unwrap(), t.rows_leq(&u, &v).unwrap());
            let moved: BTreeSet<Atom> = t.row_support(&u).unwrap().iter().map(|&a| p.apply(a)).collect();
            prop_assert_eq!(t.row_support(&pu).unwrap(), moved);

            // Symbolic row equality agrees with direct probing.
            prop_assert_eq!(t.rows_equal(&u, &v).unwrap(), t.rows_equal_by_probes(&u, &v).unwrap());

            // Order and join laws over a base holding all three words.
            let base: Vec<Atom> = word_atoms(&[u.clone(), v.clone(), w.clone()].concat());
            let on = |x: &Word| t.row_on(&t.row_ref(x).unwrap(), &base).unwrap();
            let (xu, xv, xw) = (on(&u), on(&v), on(&w));
            let leq = |a: &[bool], b: &[bool]| a.iter().zip(b).all(|(&p, &q)| !p || q);
            let uv = t.rows_leq(&u, &v).unwrap();
            prop_assert_eq!(uv, leq(&xu, &xv));
            let vu = t.rows_leq(&v, &u).unwrap();
            prop_assert_eq!(uv && vu, t.rows_equal(&u, &v).unwrap());
            if uv && t.rows_leq(&v, &w).unwrap() {
                prop_assert!(t.rows_leq(&u, &w).unwrap());
            }
            let join = t.row_join(&[u.clone(), v.clone()], &base).unwrap();
            prop_assert_eq!(&join, &t.row_join(&[v.clone(), u.clone()], &base).unwrap());
            prop_assert_eq!(&t.row_join(&[u.clone(), u.clone()], &base).unwrap(), &xu);
            prop_assert!(leq(&xu, &join) && leq(&xv, &join));
            prop_assert_eq!(uv, join == xv);
            let or: Vec<bool> = xu.iter().zip(&xv).zip(&xw).map(|((a, b), c)| a | b | c).collect();
            prop_assert_eq!(t.row_join(&[u.clone(), v.clone(), w.clone()], &base).unwrap(), or);
            Ok(())
        })
        .unwrap();
}

#[test]
fn rows_are_equivariant_and_form_a_lattice() {
    let runs = runs();
    check_table(&three_orbit_automaton(), &runs[0]);
    check_table(&make_fifo(2), &runs[1]);
    check_table(&make_double_word(2), &runs[3]);
    check_table(&make_nlast(2), &runs[5]);
    check_table(&make_leq(), &runs[7]);
}
