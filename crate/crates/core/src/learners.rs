//! νL* (with counterexamples as rows or as columns) and νNL*.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use crate::automata::{permute_regs, Acceptor, Guard, Kind, OrbitDecl, Rule, Source, SymbolicAutomaton};
use crate::equivalence::{dfa_equiv, nfa_equiv_bounded, EquivOptions, Verdict};
use crate::error::Error;
use crate::kernel::{placements, word_atoms, Atom, Bind, Letter, Word};
use crate::obstable::{ObservationTable, RowRef, Witness};

/// How the teacher decides equivalence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquivalenceMode {
    /// Exact product search; both sides must be deterministic.
    Exact,
    /// Depth-bounded search over configuration sets.
    Bounded(usize),
}

/// Exact membership and equivalence for a known target.
pub struct Teacher<'a, T: Acceptor> {
    target: &'a T,
    mode: EquivalenceMode,
    options: EquivOptions,
    membership_queries: usize,
    equivalence_queries: usize,
}

impl<'a, T: Acceptor> Teacher<'a, T> {
    pub fn new(target: &'a T, mode: EquivalenceMode, options: EquivOptions) -> Self {
        Teacher { target, mode, options, membership_queries: 0, equivalence_queries: 0 }
    }

    pub fn target(&self) -> &T {
        self.target
    }

    pub fn membership(&mut self, w: &[Letter]) -> bool {
        self.membership_queries += 1;
        self.target.member(w)
    }

    pub fn membership_queries(&self) -> usize {
        self.membership_queries
    }

    pub fn equivalence_queries(&self) -> usize {
        self.equivalence_queries
    }

    /// `None` if the hypothesis is accepted, otherwise a counterexample that
    /// has been checked to separate the hypothesis from the target.
    pub fn equivalence(&mut self, h: &SymbolicAutomaton) -> Result<Option<Word>, Error> {
        self.equivalence_queries += 1;
        let verdict = match self.mode {
            EquivalenceMode::Exact => dfa_equiv(h, self.target, &self.options)?,
            EquivalenceMode::Bounded(d) => nfa_equiv_bounded(h, self.target, d, &self.options)?,
        };
        match verdict {
            Verdict::Equal | Verdict::EqualUpToDepth(_) => Ok(None),
            Verdict::Counterexample(w) => {
                if h.accepts(&w)? == self.target.member(&w) {
                    return Err(Error::BadCounterexample(h.alphabet.show_word(&w)));
                }
                Ok(Some(w))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CounterexampleMode {
    /// Add the prefixes of a counterexample as rows.
    Rows,
    /// Add the suffixes of a counterexample as columns.
    Cols,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnOptions {
    pub mode: CounterexampleMode,
    /// Check that each hypothesis makes progress in the termination order.
    pub assert_progress: bool,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions { mode: CounterexampleMode::Rows, assert_progress: false }
    }
}

/// One step of a learning run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Filled { rows: usize, columns: usize, classes: usize },
    Unclosed { row: Word },
    Inconsistent { witness: Witness, column: Word },
    Hypothesis { automaton: SymbolicAutomaton },
    Counterexample { word: Word },
}

#[derive(Clone, Debug)]
pub struct LearnReport {
    pub automaton: SymbolicAutomaton,
    pub orbits: usize,
    pub dimension: usize,
    pub eq_queries: usize,
    pub orbit_membership_queries: usize,
    pub concrete_membership_queries: usize,
    pub trace: Vec<TraceEvent>,
    /// Left empty by the learners; filled in by callers that time the run.
    pub wall_time: Option<Duration>,
}

/// The equivalence-query bound `n + n·(k + k·log₂ k)`.
pub fn query_bound(orbits: usize, dimension: usize) -> f64 {
    let (n, k) = (orbits as f64, dimension as f64);
    let log = if dimension > 1 { libm::log2(k) } else { 0.0 };
    n + n * (k + k * log)
}

fn orbit_names(n: usize) -> impl Iterator<Item = alloc::string::String> {
    (0..n).map(|i| format!("q{i}"))
}

/// Input cases of a state with registers `regs`: for each tag, each register
/// then a fresh atom (or no atom for arity-0 tags).
fn cases(t: &ObservationTable, s: &[Letter], regs: &[Atom]) -> Vec<(u16, Guard, Option<Atom>)> {
    let fresh = Atom(word_atoms(s).iter().map(|a| a.0 + 1).max().unwrap_or(0));
    let mut out = Vec::new();
    for (i, tag) in t.alphabet().tags().iter().enumerate() {
        let i = i as u16;
        if tag.arity == 0 {
            out.push((i, Guard::None, None));
        } else {
            for (j, &a) in regs.iter().enumerate() {
                out.push((i, Guard::Reg(j), Some(a)));
            }
            out.push((i, Guard::Fresh, Some(fresh)));
        }
    }
    out
}

fn extend(s: &[Letter], tag: u16, atom: Option<Atom>) -> Word {
    let mut w = s.to_vec();
    w.push(Letter { tag, atom });
    w
}

/// Minimizes an assignment under the destination's symmetries.
fn normalize_assign(assign: Vec<Source>, sym: &crate::kernel::SymGroup) -> Vec<Source> {
    sym.elements().iter().map(|h| permute_regs(&assign, h)).min().unwrap_or(assign)
}

/// Hypothesis DFA of a closed, consistent table: one orbit per row orbit of `S`.
pub fn build_hypothesis_dfa(t: &ObservationTable) -> Result<SymbolicAutomaton, Error> {
    let states = t.upper_classes()?.to_vec();
    let classes = t.classes()?;
    let state_of: BTreeMap<usize, usize> = states.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let orbits: Vec<OrbitDecl> = states
        .iter()
        .zip(orbit_names(states.len()))
        .map(|(&c, name)| OrbitDecl {
            name,
            dim: classes[c].dim,
            sym: classes[c].sym.clone(),
            accepting: classes[c].values[0],
        })
        .collect();
    let mut rules = Vec::new();
    for (src, &c) in states.iter().enumerate() {
        let s = &classes[c].rep;
        let regs = t.row_ref(s)?.regs;
        for (tag, guard, x) in cases(t, s, &regs) {
            let r = t.row_ref(&extend(s, tag, x))?;
            let &dst = state_of.get(&r.class).ok_or(Error::Precondition("hypothesis needs a closed table"))?;
            let assign = r
                .regs
                .iter()
                .map(|a| match regs.iter().position(|b| b == a) {
                    Some(j) => Ok(Source::Reg(j)),
                    None if Some(*a) == x => Ok(Source::Input),
                    None => Err(Error::Precondition("hypothesis needs a consistent table")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rules.push(Rule { src, tag, guard, dst, assign: normalize_assign(assign, &orbits[dst].sym) });
        }
    }
    let init = *state_of.get(&t.row_ref(&[])?.class).ok_or(Error::Precondition("ε row missing"))?;
    let aut = SymbolicAutomaton { kind: Kind::Dfa, alphabet: t.alphabet().clone(), orbits, initial: vec![init], rules };
    aut.validate()?;
    Ok(aut)
}

/// Hypothesis NFA of an RFSA-closed, RFSA-consistent table: one orbit per
/// prime row orbit of `S`, with every prime below `row(s·a)` as a successor.
pub fn build_hypothesis_nfa(t: &ObservationTable) -> Result<SymbolicAutomaton, Error> {
    let (_, top) = t.prime_rows()?;
    let classes = t.classes()?;
    let orbits: Vec<OrbitDecl> = top
        .iter()
        .zip(orbit_names(top.len()))
        .map(|(&c, name)| OrbitDecl {
            name,
            dim: classes[c].dim,
            sym: classes[c].sym.clone(),
            accepting: classes[c].values[0],
        })
        .collect();
    let mut rules: BTreeSet<Rule> = BTreeSet::new();
    for (src, &c) in top.iter().enumerate() {
        let s = &classes[c].rep;
        let regs = t.row_ref(s)?.regs;
        for (tag, guard, x) in cases(t, s, &regs) {
            let target = t.row_ref(&extend(s, tag, x))?;
            let mut base = regs.clone();
            if guard == Guard::Fresh {
                base.extend(x);
            }
            if let Some(a) = target.regs.iter().find(|a| !base.contains(a)) {
                let _ = a;
                return Err(Error::Precondition("hypothesis needs an RFSA-consistent table"));
            }
            let fresh_from = base.iter().chain(word_atoms(s).iter()).map(|a| a.0 + 1).max().unwrap_or(0);
            for (dst, &d) in top.iter().enumerate() {
                for binds in placements(classes[d].dim, base.len()) {
                    let mut next = fresh_from;
                    let mut v = Vec::new();
                    let mut assign = Vec::new();
                    for b in &binds {
                        match *b {
                            Bind::Known(j) => {
                                v.push(base[j]);
                                assign.push(if j < regs.len() { Source::Reg(j) } else { Source::Input });
                            }
                            Bind::Fresh => {
                                v.push(Atom(next));
                                next += 1;
                                assign.push(Source::Any);
                            }
                        }
                    }
                    if t.refs_leq(&RowRef { class: d, regs: v }, &target)? {
                        rules.insert(Rule { src, tag, guard, dst, assign: normalize_assign(assign, &orbits[dst].sym) });
                    }
                }
            }
        }
    }
    let eps = t.row_ref(&[])?;
    let mut initial = Vec::new();
    for (i, &d) in top.iter().enumerate() {
        let r = RowRef { class: d, regs: (0..classes[d].dim as u32).map(Atom).collect() };
        if t.refs_leq(&r, &eps)? {
            initial.push(i);
        }
    }
    let aut = SymbolicAutomaton {
        kind: Kind::Nfa,
        alphabet: t.alphabet().clone(),
        orbits,
        initial,
        rules: rules.into_iter().collect(),
    };
    aut.validate()?;
    Ok(aut)
}

/// Per-row support and symmetries (as atom permutations) of the upper rows.
type Snapshot = BTreeMap<Word, (BTreeSet<Atom>, BTreeSet<Vec<(Atom, Atom)>>)>;

fn snapshot(t: &ObservationTable) -> Result<(usize, Snapshot), Error> {
    let mut out = BTreeMap::new();
    for s in t.upper()? {
        let (regs, sym) = t.row_symmetries(s)?;
        let perms = sym
            .elements()
            .iter()
            .map(|h| regs.iter().zip(permute_regs(&regs, h)).map(|(&a, b)| (a, b)).collect())
            .collect();
        out.insert(s.clone(), (regs.into_iter().collect(), perms));
    }
    Ok((t.upper_classes()?.len(), out))
}

/// Between consecutive hypotheses: supports only grow, symmetry groups only
/// shrink, and at least one of the row-orbit count, a support or a group
/// changes strictly.
fn check_progress(old: &(usize, Snapshot), new: &(usize, Snapshot)) -> Result<(), Error> {
    let mut strict = new.0 > old.0;
    if new.0 < old.0 {
        return Err(Error::Assertion(format!("row orbits dropped from {} to {}", old.0, new.0)));
    }
    for (s, (supp, sym)) in &old.1 {
        let Some((supp2, sym2)) = new.1.get(s) else { continue };
        if !supp.is_subset(supp2) {
            return Err(Error::Assertion(format!("support of a row shrank ({supp:?} to {supp2:?})")));
        }
        if supp == supp2 {
            if !sym2.is_subset(sym) {
                return Err(Error::Assertion("symmetry group of a row grew".into()));
            }
            strict |= sym2.len() < sym.len();
        } else {
            strict = true;
        }
    }
    if !strict {
        return Err(Error::Assertion("hypothesis made no progress".into()));
    }
    Ok(())
}

fn column_of(w: &Witness) -> Word {
    let mut c = vec![w.letter];
    c.extend(w.column.iter().copied());
    c
}

fn report(t: &ObservationTable, eq: usize, automaton: SymbolicAutomaton, trace: Vec<TraceEvent>) -> LearnReport {
    LearnReport {
        orbits: automaton.orbit_count(),
        dimension: automaton.dimension(),
        automaton,
        eq_queries: eq,
        orbit_membership_queries: t.stats().orbit_queries,
        concrete_membership_queries: t.stats().concrete_queries,
        trace,
        wall_time: None,
    }
}

/// νL*. `observe` sees every event together with the table it refers to.
pub fn learn_dfa_observed<T: Acceptor>(
    teacher: &mut Teacher<'_, T>,
    opts: &LearnOptions,
    mut observe: impl FnMut(&TraceEvent, &ObservationTable),
) -> Result<LearnReport, Error> {
    let mut t = ObservationTable::new(teacher.target().alphabet().clone());
    let mut trace = Vec::new();
    let mut last: Option<(usize, Snapshot)> = None;
    let mut log = |ev: TraceEvent, t: &ObservationTable, trace: &mut Vec<TraceEvent>| {
        observe(&ev, t);
        trace.push(ev);
    };
    loop {
        t.fill(|w| teacher.membership(w));
        let ev = TraceEvent::Filled {
            rows: t.rows().count(),
            columns: t.columns().count(),
            classes: t.upper_classes()?.len(),
        };
        log(ev, &t, &mut trace);
        if let Some(row) = t.find_unclosed()? {
            t.add_row_orbit(&row);
            log(TraceEvent::Unclosed { row }, &t, &mut trace);
            continue;
        }
        if let Some(witness) = t.find_inconsistent()? {
            let column = column_of(&witness);
            if !t.add_column_orbit(&column) {
                return Err(Error::Assertion("inconsistency column already present".into()));
            }
            log(TraceEvent::Inconsistent { witness, column }, &t, &mut trace);
            continue;
        }
        let h = build_hypothesis_dfa(&t)?;
        if opts.assert_progress {
            let snap = snapshot(&t)?;
            if let Some(old) = &last {
                check_progress(old, &snap)?;
            }
            last = Some(snap);
        }
        log(TraceEvent::Hypothesis { automaton: h.clone() }, &t, &mut trace);
        match teacher.equivalence(&h)? {
            None => return Ok(report(&t, teacher.equivalence_queries(), h, trace)),
            Some(word) => {
                let changed = match opts.mode {
                    CounterexampleMode::Rows => t.add_row_orbit(&word),
                    CounterexampleMode::Cols => t.add_column_orbit(&word),
                };
                if !changed {
                    return Err(Error::Assertion("counterexample added nothing to the table".into()));
                }
                log(TraceEvent::Counterexample { word }, &t, &mut trace);
            }
        }
    }
}

pub fn learn_dfa<T: Acceptor>(teacher: &mut Teacher<'_, T>, opts: &LearnOptions) -> Result<LearnReport, Error> {
    learn_dfa_observed(teacher, opts, |_, _| {})
}

/// νNL*. Counterexamples are always added as column suffixes.
pub fn learn_nfa_observed<T: Acceptor>(
    teacher: &mut Teacher<'_, T>,
    mut observe: impl FnMut(&TraceEvent, &ObservationTable),
) -> Result<LearnReport, Error> {
    let mut t = ObservationTable::new(teacher.target().alphabet().clone());
    let mut trace = Vec::new();
    let mut log = |ev: TraceEvent, t: &ObservationTable, trace: &mut Vec<TraceEvent>| {
        observe(&ev, t);
        trace.push(ev);
    };
    loop {
        t.fill(|w| teacher.membership(w));
        let ev = TraceEvent::Filled {
            rows: t.rows().count(),
            columns: t.columns().count(),
            classes: t.upper_classes()?.len(),
        };
        log(ev, &t, &mut trace);
        if let Some(row) = t.find_rfsa_unclosed()? {
            t.add_row_orbit(&row);
            log(TraceEvent::Unclosed { row }, &t, &mut trace);
            continue;
        }
        if let Some(witness) = t.find_rfsa_inconsistent()? {
            let column = column_of(&witness);
            if !t.add_column_orbit(&column) {
                return Err(Error::Assertion("RFSA inconsistency column already present".into()));
            }
            log(TraceEvent::Inconsistent { witness, column }, &t, &mut trace);
            continue;
        }
        let h = build_hypothesis_nfa(&t)?;
        log(TraceEvent::Hypothesis { automaton: h.clone() }, &t, &mut trace);
        match teacher.equivalence(&h)? {
            None => return Ok(report(&t, teacher.equivalence_queries(), h, trace)),
            Some(word) => {
                if !t.add_column_orbit(&word) {
                    return Err(Error::Assertion("counterexample added nothing to the table".into()));
                }
                log(TraceEvent::Counterexample { word }, &t, &mut trace);
            }
        }
    }
}

pub fn learn_nfa<T: Acceptor>(teacher: &mut Teacher<'_, T>) -> Result<LearnReport, Error> {
    learn_nfa_observed(teacher, |_, _| {})
}
