//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. Set
//! `NOMINAL_FIFO5=1` to include the optional five-slot queue (several
//! minutes in an optimized build).

#![allow(clippy::type_complexity, clippy::neg_cmp_op_on_partial_ord)]

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use nominal::runner::{run, Algo, RunConfig, RunOutcome};
use nominal_core::automata::{permute_regs, Acceptor, SymbolicAutomaton};
use nominal_core::equivalence::{dfa_equiv, nfa_equiv_bounded, EquivOptions, Verdict};
use nominal_core::kernel::{
    atom_word, canonical, enumerate_shapes, instantiate_word, permute_word, placements, word_atoms, Atom,
    Perm, Word,
};
use nominal_core::learners::{learn_dfa_observed, query_bound, CounterexampleMode, EquivalenceMode, LearnOptions, Teacher, TraceEvent};
use nominal_core::obstable::ObservationTable;
use nominal_core::targets::{three_orbit_automaton, make_double_word, make_fifo, make_leq, make_nlast, TargetSpec};
use proptest::prelude::*;
use proptest::sample::Index;
use proptest::test_runner::{Config, TestRunner};

const CASES: u32 = 1000;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

macro_rules! with_target {
    ($spec:expr, $t:ident => $body:expr) => {
        match $spec {
            TargetSpec::Fifo(n) => {
                let $t = make_fifo(n);
                $body
            }
            TargetSpec::DoubleWord(n) => {
                let $t = make_double_word(n);
                $body
            }
            TargetSpec::NLast(n) => {
                let $t = make_nlast(n);
                $body
            }
            TargetSpec::Leq => {
                let $t = make_leq();
                $body
            }
        }
    };
}

struct Learned {
    spec: TargetSpec,
    algo: Algo,
    outcome: RunOutcome,
}

impl Learned {
    fn counts(&self) -> (usize, usize) {
        (self.outcome.report.orbits, self.outcome.report.dimension)
    }
    fn wall(&self) -> Duration {
        self.outcome.report.wall_time.unwrap_or_default()
    }
    fn label(&self) -> String {
        format!("{} {}", self.spec, self.algo.name())
    }
}

fn learn(spec: TargetSpec, algo: Algo) -> Result<Learned, String> {
    let mut cfg = RunConfig::new(spec, algo);
    cfg.assert_bounds = true;
    let outcome = run(&cfg).map_err(|e| format!("{spec} {}: {e}", algo.name()))?;
    Ok(Learned { spec, algo, outcome })
}

fn seconds(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn check_counts(runs: &[Learned], want: &[(TargetSpec, (usize, usize))], limit: Duration) -> Check {
    let mut slowest = Duration::ZERO;
    for (spec, counts) in want {
        let r = runs.iter().find(|r| r.spec == *spec).ok_or(format!("{spec} was not run"))?;
        ensure!(r.counts() == *counts, "{}: got {:?}, want {:?}", r.label(), r.counts(), counts);
        ensure!(r.wall() <= limit, "{} took {}", r.label(), seconds(r.wall()));
        slowest = slowest.max(r.wall());
    }
    Ok(format!("{} targets, slowest {}", want.len(), seconds(slowest)))
}

fn dfa_table() -> Vec<(TargetSpec, (usize, usize))> {
    use TargetSpec::*;
    vec![
        (Fifo(0), (2, 0)),
        (Fifo(1), (3, 1)),
        (Fifo(2), (5, 2)),
        (Fifo(3), (10, 3)),
        (DoubleWord(0), (2, 0)),
        (DoubleWord(1), (4, 1)),
        (DoubleWord(2), (7, 2)),
        (NLast(1), (5, 1)),
        (NLast(2), (9, 1)),
        (NLast(3), (17, 1)),
    ]
}

fn rfsa_table() -> Vec<(TargetSpec, (usize, usize))> {
    use TargetSpec::*;
    vec![
        (Fifo(0), (2, 0)),
        (Fifo(1), (3, 1)),
        (Fifo(2), (5, 2)),
        (DoubleWord(0), (2, 0)),
        (DoubleWord(1), (4, 1)),
        (DoubleWord(2), (7, 2)),
        (NLast(1), (4, 1)),
        (NLast(2), (5, 1)),
        (NLast(3), (6, 1)),
        (Leq, (3, 1)),
    ]
}

fn criterion_1(lstar: &[Learned]) -> Check {
    let base = check_counts(lstar, &dfa_table(), Duration::from_secs(60))?;
    let fifo4 = lstar.iter().find(|r| r.spec == TargetSpec::Fifo(4)).ok_or("FIFO_4 was not run")?;
    ensure!(fifo4.counts() == (25, 4), "fifo:4: got {:?}", fifo4.counts());
    let within = if fifo4.wall() <= Duration::from_secs(600) { "within" } else { "OVER" };
    let fifo5 = if std::env::var_os("NOMINAL_FIFO5").is_some() {
        let r = learn(TargetSpec::Fifo(5), Algo::Lstar)?;
        ensure!(r.counts() == (77, 5), "fifo:5: got {:?}", r.counts());
        format!("fifo:5 (77,5) in {}", seconds(r.wall()))
    } else {
        "fifo:5 skipped (optional, set NOMINAL_FIFO5=1)".to_string()
    };
    Ok(format!("{base}; fifo:4 (25,4) in {} ({within} 10 min); {fifo5}", seconds(fifo4.wall())))
}

fn criterion_2(nlstar: &[Learned]) -> Check {
    check_counts(nlstar, &rfsa_table(), Duration::from_secs(120))
}

fn criterion_3(lstar: &[Learned], lstarcol: &[Learned]) -> Check {
    for (a, b) in lstar.iter().zip(lstarcol) {
        ensure!(a.counts() == b.counts(), "{}: {:?} vs {:?}", a.spec, a.counts(), b.counts());
        let v = dfa_equiv(&a.outcome.report.automaton, &b.outcome.report.automaton, &EquivOptions::default())
            .map_err(|e| e.to_string())?;
        ensure!(v == Verdict::Equal, "{}: the two variants learned different languages", a.spec);
    }
    Ok(format!("{} targets agree", lstar.len()))
}

fn criterion_4() -> Check {
    let r = learn(TargetSpec::DoubleWord(1), Algo::Lstar)?;
    let first = r.outcome.report.trace.iter().find_map(|e| match e {
        TraceEvent::Hypothesis { automaton } => Some(automaton),
        _ => None,
    });
    let first = first.ok_or("no hypothesis recorded")?;
    ensure!(first.orbit_count() == 1 && !first.orbits[0].accepting, "first hypothesis is not one rejecting orbit");
    ensure!(r.outcome.report.eq_queries <= 3, "{} equivalence queries", r.outcome.report.eq_queries);
    ensure!(r.counts() == (4, 1), "final automaton {:?}", r.counts());
    let target = make_double_word(1);
    let v = dfa_equiv(&r.outcome.report.automaton, &target, &EquivOptions::default()).map_err(|e| e.to_string())?;
    ensure!(v == Verdict::Equal, "final automaton differs from the target");
    Ok(format!("{} equivalence queries, final 4 orbits", r.outcome.report.eq_queries))
}

fn columns_of(u: &Word, shape: &[u32]) -> Vec<Word> {
    let tau = atom_word(shape);
    let atoms = word_atoms(u);
    let fresh = atoms.iter().map(|a| a.0 + 1).max().unwrap_or(0);
    placements(word_atoms(&tau).len(), atoms.len())
        .into_iter()
        .map(|b| instantiate_word(&tau, &b, &atoms, fresh))
        .collect()
}

fn criterion_5() -> Check {
    let e = |x: nominal_core::Error| x.to_string();
    let target = three_orbit_automaton();
    let w = atom_word;
    let (a, b) = (0, 1);
    let mut t = ObservationTable::new(target.alphabet().clone());
    t.add_row_orbit(&w(&[a, b]));
    t.fill(|x| target.member(x));
    let t1: [(&[u32], bool); 7] = [
        (&[], false),
        (&[0], false),
        (&[0, 1], true),
        (&[0, 0], false),
        (&[0, 1, 0], false),
        (&[0, 1, 1], false),
        (&[0, 1, 2], true),
    ];
    for (u, v) in t1 {
        ensure!(t.row_value(&w(u), &[]).map_err(e)? == v, "first table, row {u:?}");
    }
    let wit = t.find_inconsistent().map_err(e)?.ok_or("first table is consistent")?;
    ensure!(
        wit.s1.is_empty() && wit.s2 == w(&[a]) && wit.letter.atom == Some(Atom(b)) && wit.column.is_empty(),
        "unexpected first witness {wit:?}"
    );
    let mut col = vec![wit.letter];
    col.extend(wit.column);
    t.add_column_orbit(&col);
    t.fill(|x| target.member(x));
    let t2: [(&[u32], fn(u32) -> bool); 7] = [
        (&[], |_| false),
        (&[0], |x| x != 0),
        (&[0, 1], |x| x != 0 && x != 1),
        (&[0, 0], |_| false),
        (&[0, 1, 0], |_| false),
        (&[0, 1, 1], |x| x != 0),
        (&[0, 1, 2], |x| x != 0 && x != 1),
    ];
    for (u, f) in t2 {
        for c in columns_of(&w(u), &[0]) {
            let x = c[0].atom.unwrap().0;
            ensure!(t.row_value(&w(u), &c).map_err(e)? == f(x), "second table, row {u:?} column {x}");
        }
    }
    ensure!(t.row_support(&w(&[a])).map_err(e)? == BTreeSet::from([Atom(a)]), "support of a");
    ensure!(t.row_symmetries(&w(&[a, b])).map_err(e)?.1.order() == 2, "symmetries of ab");
    let wit = t.find_inconsistent().map_err(e)?.ok_or("second table is consistent")?;
    let mut col = vec![wit.letter];
    col.extend(wit.column);
    ensure!(canonical(&col) == w(&[0, 1]), "second fix adds {col:?}");
    t.add_column_orbit(&col);
    t.fill(|x| target.member(x));
    let at_a = |bp: u32, ap: u32| ap != 0 && bp != 0;
    let at_ab = |bp: u32, ap: u32| (bp != 0 && bp != 1 && ap != 0 && ap != 1) || (bp == 1 && ap != 0);
    let t3: [(&[u32], &dyn Fn(u32, u32) -> bool); 7] = [
        (&[], &|_, _| true),
        (&[0], &at_a),
        (&[0, 1], &at_ab),
        (&[0, 0], &|_, _| true),
        (&[0, 1, 0], &|_, _| true),
        (&[0, 1, 1], &at_a),
        (&[0, 1, 2], &at_ab),
    ];
    for (u, f) in t3 {
        for c in columns_of(&w(u), &[0, 1]) {
            let (bp, ap) = (c[0].atom.unwrap().0, c[1].atom.unwrap().0);
            ensure!(t.row_value(&w(u), &c).map_err(e)? == f(bp, ap), "third table, row {u:?} column {bp} {ap}");
        }
    }
    ensure!(t.find_unclosed().map_err(e)?.is_none() && t.find_inconsistent().map_err(e)?.is_none(), "third table not closed and consistent");
    Ok("three tables and both witnesses match".into())
}

fn criterion_6(all: &[&Learned]) -> Check {
    let mut tightest = f64::INFINITY;
    for r in all {
        let (n, k) = r.counts();
        let bound = query_bound(n, k);
        let eq = r.outcome.report.eq_queries as f64;
        ensure!(eq <= bound, "{}: {eq} queries, bound {bound:.2}", r.label());
        tightest = tightest.min(bound - eq);
    }
    Ok(format!("{} runs, smallest slack {tightest:.2}", all.len()))
}

// Invariant suites, each over CASES random cases.

fn runner() -> TestRunner {
    TestRunner::new(Config { cases: CASES, failure_persistence: None, ..Config::default() })
}

fn perms() -> impl Strategy<Value = Perm> {
    Just((0..8u32).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|img| Perm::from_pairs((0..8).map(|i| (Atom(i), Atom(img[i as usize])))).unwrap())
}

fn stirling2(n: usize, k: usize) -> usize {
    match (n, k) {
        (0, 0) => 1,
        (0, _) | (_, 0) => 0,
        _ => k * stirling2(n - 1, k) + stirling2(n - 1, k - 1),
    }
}

/// Support and symmetries of each row of `S` at one point of a run.
type Snapshot = BTreeMap<Word, (BTreeSet<Atom>, BTreeSet<Vec<(Atom, Atom)>>)>;

/// Rebuilds the final table of a run for random probing.
fn final_table<T: Acceptor>(target: &T) -> (ObservationTable, Vec<Word>, Vec<Word>, Vec<Snapshot>) {
    let mut rows = vec![];
    let mut cols = vec![];
    let mut snaps = vec![];
    let mut teacher = Teacher::new(target, EquivalenceMode::Exact, Default::default());
    let opts = LearnOptions { mode: CounterexampleMode::Cols, assert_progress: true };
    learn_dfa_observed(&mut teacher, &opts, |ev, t| {
        if let TraceEvent::Filled { .. } = ev {
            snaps.push(
                t.rows()
                    .map(|s| {
                        let (regs, sym) = t.row_symmetries(s).unwrap();
                        let maps = sym.elements().iter().map(|h| regs.iter().copied().zip(permute_regs(&regs, h)).collect()).collect();
                        (s.clone(), (regs.into_iter().collect(), maps))
                    })
                    .collect(),
            );
            rows = t.rows().cloned().collect();
            cols = t.columns().cloned().collect();
        }
    })
    .unwrap();
    let mut t = ObservationTable::new(target.alphabet().clone());
    rows.iter().for_each(|s| {
        t.add_row_orbit(s);
    });
    cols.iter().for_each(|e| {
        t.add_column_orbit(e);
    });
    t.fill(|w| target.member(w));
    let words: Vec<Word> = t.upper().unwrap().iter().chain(t.lower().unwrap()).cloned().collect();
    (t, words, cols, snaps)
}

fn criterion_7() -> Check {
    let words = prop::collection::vec(0u32..6, 0..=8);
    let mut names = vec![];
    let mut suite = |name: &str, r: Result<(), String>| -> Result<(), String> {
        r.map_err(|e| format!("{name}: {e}"))?;
        names.push(name.to_string());
        Ok(())
    };

    suite(
        "shape invariance",
        runner()
            .run(&(words.clone(), perms()), |(w, p)| {
                let w = atom_word(&w);
                prop_assert_eq!(canonical(&permute_word(&w, &p)), canonical(&w));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;
    suite(
        "shape counts",
        runner()
            .run(&(0usize..=6, 0usize..=6), |(n, k)| {
                let c = enumerate_shapes(n).iter().filter(|s| s.classes() == k).count();
                prop_assert_eq!(c, stirling2(n, k));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;

    let target = make_fifo(2);
    let (t, rows, cols, snaps) = final_table(&target);
    let strategy = (any::<Index>(), any::<Index>(), any::<Index>(), perms(), perms());
    suite(
        "row equivariance",
        runner()
            .run(&strategy, |(iu, _, ie, p, q)| {
                let u = rows[iu.index(rows.len())].clone();
                let e = permute_word(&cols[ie.index(cols.len())], &q);
                let v = t.row_value(&u, &e).unwrap();
                prop_assert_eq!(t.row_value(&permute_word(&u, &p), &permute_word(&e, &p)).unwrap(), v);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;
    suite(
        "support and symmetry monotonicity",
        runner()
            .run(&(any::<Index>(), any::<Index>(), any::<Index>()), |(i, j, s)| {
                let (a, b) = (i.index(snaps.len()), j.index(snaps.len()));
                let (early, late) = (&snaps[a.min(b)], &snaps[a.max(b)]);
                let (row, (supp, sym)) = early.iter().nth(s.index(early.len())).unwrap();
                let (supp2, sym2) = &late[row];
                prop_assert!(supp.is_subset(supp2));
                prop_assert!(supp != supp2 || sym2.is_subset(sym));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;
    suite(
        "join and order laws",
        runner()
            .run(&strategy, |(iu, iv, _, p, _)| {
                let u = rows[iu.index(rows.len())].clone();
                let v = permute_word(&rows[iv.index(rows.len())], &p);
                let base = word_atoms(&[u.clone(), v.clone()].concat());
                let join = t.row_join(&[u.clone(), v.clone()], &base).unwrap();
                let xu = t.row_on(&t.row_ref(&u).unwrap(), &base).unwrap();
                let xv = t.row_on(&t.row_ref(&v).unwrap(), &base).unwrap();
                prop_assert_eq!(&join, &t.row_join(&[v.clone(), u.clone()], &base).unwrap());
                prop_assert_eq!(t.rows_leq(&u, &v).unwrap(), join == xv);
                prop_assert_eq!(t.rows_leq(&u, &v).unwrap() && t.rows_leq(&v, &u).unwrap(), t.rows_equal(&u, &v).unwrap());
                prop_assert!(xu.iter().zip(&join).all(|(&x, &j)| !x || j));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;

    let base = three_orbit_automaton();
    suite(
        "counterexample self-check",
        runner()
            .run(&(prop::collection::vec(any::<bool>(), 3), any::<Index>(), any::<Index>()), |(flips, r, d)| {
                let mut h: SymbolicAutomaton = base.clone();
                for (o, f) in h.orbits.iter_mut().zip(flips) {
                    o.accepting ^= f;
                }
                let i = r.index(h.rules.len());
                let dim = h.orbits[h.rules[i].dst].dim;
                let same: Vec<usize> = (0..h.orbits.len()).filter(|&j| h.orbits[j].dim == dim).collect();
                h.rules[i].dst = same[d.index(same.len())];
                let mut teacher = Teacher::new(&base, EquivalenceMode::Exact, Default::default());
                if let Some(w) = teacher.equivalence(&h).unwrap() {
                    prop_assert_ne!(h.accepts(&w).unwrap(), base.member(&w));
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;
    Ok(format!("{} suites x {CASES} cases: {}", names.len(), names.join(", ")))
}

fn criterion_8(dfas: &[&Learned], nfas: &[Learned]) -> Check {
    for r in dfas {
        let v = with_target!(r.spec, t => dfa_equiv(&r.outcome.report.automaton, &t, &EquivOptions::default()));
        ensure!(v.map_err(|e| e.to_string())? == Verdict::Equal, "{} differs from its target", r.label());
    }
    for r in nfas {
        let d = 2 * r.outcome.depth.ok_or("nlstar run without a depth")?;
        let v = with_target!(r.spec, t => nfa_equiv_bounded(&r.outcome.report.automaton, &t, d, &EquivOptions::default()));
        ensure!(v.map_err(|e| e.to_string())? == Verdict::EqualUpToDepth(d), "{} differs within depth {d}", r.label());
    }
    Ok(format!("{} DFAs equal, {} NFAs equal up to twice the learning depth", dfas.len(), nfas.len()))
}

fn criterion_9(all: &[&Learned]) -> Check {
    let mut table = String::new();
    for r in all {
        let rep = &r.outcome.report;
        table += &format!(
            "\n      {:<16} {:>9}  orbit MQ {:>7}  concrete MQ {:>7}  EQ {:>3}",
            r.label(),
            seconds(r.wall()),
            rep.orbit_membership_queries,
            rep.concrete_membership_queries,
            rep.eq_queries
        );
    }
    Ok(format!("not reproduced by design; reported for information only:{table}"))
}

fn main() {
    let started = Instant::now();
    let mut results: Vec<(usize, &str, Check)> = Vec::new();
    let mut specs: Vec<TargetSpec> = dfa_table().into_iter().map(|(s, _)| s).collect();
    specs.push(TargetSpec::Fifo(4));
    let learned = |specs: &[TargetSpec], algo| specs.iter().map(|&s| learn(s, algo)).collect::<Result<Vec<_>, _>>();
    let (lstar, lstarcol, nlstar) = match (
        learned(&specs, Algo::Lstar),
        learned(&specs, Algo::Lstarcol),
        learned(&rfsa_table().into_iter().map(|(s, _)| s).collect::<Vec<_>>(), Algo::Nlstar),
    ) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (a, b, c) => {
            let e = [a.err(), b.err(), c.err()].into_iter().flatten().collect::<Vec<_>>().join("; ");
            println!("FAIL  learning runs: {e}");
            std::process::exit(1);
        }
    };
    let dfas: Vec<&Learned> = lstar.iter().chain(&lstarcol).collect();
    let all: Vec<&Learned> = dfas.iter().copied().chain(&nlstar).collect();

    results.push((1, "νL* orbit counts and dimensions", criterion_1(&lstar)));
    results.push((2, "νNL* orbit counts and dimensions", criterion_2(&nlstar)));
    results.push((3, "counterexamples as columns give the same automata", criterion_3(&lstar, &lstarcol)));
    results.push((4, "worked run on L_1", criterion_4()));
    results.push((5, "worked tables on the three-orbit target", criterion_5()));
    results.push((6, "equivalence-query bound on every run", criterion_6(&all)));
    results.push((7, "property suites", criterion_7()));
    results.push((8, "learned automata equal their targets", criterion_8(&dfas, &nlstar)));
    results.push((9, "timings and membership counts", criterion_9(&all)));

    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(detail) => println!("PASS  {n}  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {n}  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed in {}", results.len() - failed, seconds(started.elapsed()));
    if failed > 0 {
        std::process::exit(1);
    }
}
