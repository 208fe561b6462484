//! Runs one learner against one built-in target and collects its statistics.

use std::fmt::Write as _;
use std::time::Instant;

use nominal_core::automata::{Acceptor, SymbolicAutomaton};
use nominal_core::equivalence::{default_depth, reachable_orbits, EquivOptions};
use nominal_core::kernel::{Atom, Letter, Word};
use nominal_core::learners::{
    learn_dfa_observed, learn_nfa_observed, query_bound, CounterexampleMode, EquivalenceMode, LearnOptions,
    LearnReport, Teacher, TraceEvent,
};
use nominal_core::obstable::ObservationTable;
use nominal_core::targets::{make_double_word, make_fifo, make_leq, make_nlast, TargetSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

/// Cap on canonical configurations explored when counting target orbits.
const ORBIT_COUNT_CAP: usize = 1_000_000;
/// Random words checked per `--seed` self-check.
const SELF_CHECK_WORDS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Algo {
    /// νL*, counterexample prefixes become rows.
    Lstar,
    /// νL*, counterexample suffixes become columns.
    Lstarcol,
    /// νNL*, learns a residual nondeterministic automaton.
    Nlstar,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Lstar => "lstar",
            Algo::Lstarcol => "lstarcol",
            Algo::Nlstar => "nlstar",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub target: TargetSpec,
    pub algo: Algo,
    pub depth: Option<usize>,
    pub max_configs: Option<usize>,
    pub assert_bounds: bool,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn new(target: TargetSpec, algo: Algo) -> Self {
        RunConfig { target, algo, depth: None, max_configs: None, assert_bounds: false, seed: None }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Learn(#[from] nominal_core::Error),
    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl RunError {
    /// Process exit code: 2 for learner or teacher failures, 3 for failed assertions.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Learn(nominal_core::Error::Assertion(_)) | RunError::Assertion(_) => 3,
            RunError::Learn(_) => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub target: TargetSpec,
    pub algo: Algo,
    pub report: LearnReport,
    /// Equivalence depth bound, νNL* only.
    pub depth: Option<usize>,
    pub notices: Vec<String>,
    pub trace: Vec<String>,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    match cfg.target {
        TargetSpec::Fifo(n) => run_on(cfg, &make_fifo(n), None),
        TargetSpec::DoubleWord(n) => run_on(cfg, &make_double_word(n), None),
        TargetSpec::NLast(n) => run_on(cfg, &make_nlast(n), None),
        TargetSpec::Leq => {
            let leq = make_leq();
            let orbits = leq.nfa().orbit_count();
            run_on(cfg, &leq, Some(orbits))
        }
    }
}

fn run_on<T: Acceptor>(cfg: &RunConfig, target: &T, known_orbits: Option<usize>) -> Result<RunOutcome, RunError> {
    let mut options = EquivOptions::default();
    if let Some(cap) = cfg.max_configs {
        options.max_configs = cap;
    }
    let mut notices = Vec::new();
    let mut trace = Vec::new();
    let alphabet = target.alphabet().clone();
    let mut hypotheses = 0;
    let mut observe = |ev: &TraceEvent, _: &ObservationTable| {
        if let TraceEvent::Hypothesis { .. } = ev {
            hypotheses += 1;
        }
        trace.push(trace_line(ev, &alphabet, hypotheses));
    };
    let start = Instant::now();
    let (mut report, depth) = match cfg.algo {
        Algo::Lstar | Algo::Lstarcol => {
            if !target.is_deterministic() {
                return Err(nominal_core::Error::Unsupported("νL* needs a deterministic target").into());
            }
            let mode = if cfg.algo == Algo::Lstar { CounterexampleMode::Rows } else { CounterexampleMode::Cols };
            let opts = LearnOptions { mode, assert_progress: cfg.assert_bounds };
            let mut teacher = Teacher::new(target, EquivalenceMode::Exact, options);
            (learn_dfa_observed(&mut teacher, &opts, &mut observe)?, None)
        }
        Algo::Nlstar => {
            let depth = match cfg.depth {
                Some(d) => d,
                None => {
                    let n = match known_orbits {
                        Some(n) => n,
                        None => reachable_orbits(target, ORBIT_COUNT_CAP)?,
                    };
                    let d = default_depth(n);
                    notices.push(format!("no --depth given; using 3·({n} target orbits + 1) = {d}"));
                    d
                }
            };
            let mut teacher = Teacher::new(target, EquivalenceMode::Bounded(depth), options);
            (learn_nfa_observed(&mut teacher, &mut observe)?, Some(depth))
        }
    };
    report.wall_time = Some(start.elapsed());
    check_report(&report)?;
    if cfg.assert_bounds {
        let bound = query_bound(report.orbits, report.dimension);
        if report.eq_queries as f64 > bound {
            return Err(RunError::Assertion(format!(
                "{} equivalence queries exceed the bound {bound:.2} for {} orbits of dimension {}",
                report.eq_queries, report.orbits, report.dimension
            )));
        }
    }
    if let Some(seed) = cfg.seed {
        self_check(&report.automaton, target, seed)?;
    }
    Ok(RunOutcome { target: cfg.target, algo: cfg.algo, report, depth, notices, trace })
}

/// Orbit count and dimension in the report must describe the emitted automaton.
fn check_report(r: &LearnReport) -> Result<(), RunError> {
    if r.orbits != r.automaton.orbit_count() || r.dimension != r.automaton.dimension() {
        return Err(RunError::Assertion("report disagrees with the learned automaton".into()));
    }
    Ok(())
}

/// Compares the learned automaton with the target on seeded random words.
fn self_check<T: Acceptor>(h: &SymbolicAutomaton, target: &T, seed: u64) -> Result<(), RunError> {
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..SELF_CHECK_WORDS {
        let w = random_word(&mut rng, target, 2 * h.dimension() + 4);
        if h.accepts(&w)? != target.member(&w) {
            return Err(RunError::Assertion(format!(
                "learned automaton disagrees with the target on {}",
                h.alphabet.show_word(&w)
            )));
        }
    }
    Ok(())
}

/// A random word of length at most `max_len` whose atoms repeat often enough
/// to exercise equality guards.
pub fn random_word<T: Acceptor>(rng: &mut StdRng, target: &T, max_len: usize) -> Word {
    let tags = target.alphabet().tags();
    let len = rng.random_range(0..=max_len);
    let pool = (len as u32 / 2).max(1);
    (0..len)
        .map(|_| {
            let tag = rng.random_range(0..tags.len());
            let atom = (tags[tag].arity == 1).then(|| Atom(rng.random_range(0..pool)));
            Letter { tag: tag as u16, atom }
        })
        .collect()
}

fn trace_line(ev: &TraceEvent, alphabet: &nominal_core::automata::Alphabet, hypotheses: usize) -> String {
    let show = |w: &[Letter]| alphabet.show_word(w);
    match ev {
        TraceEvent::Filled { rows, columns, classes } => {
            format!("filled rows={rows} columns={columns} classes={classes}")
        }
        TraceEvent::Unclosed { row } => format!("unclosed row={}", show(row)),
        TraceEvent::Inconsistent { witness, column } => format!(
            "inconsistent s1={} s2={} letter={} column={} added={}",
            show(&witness.s1),
            show(&witness.s2),
            alphabet.show_letter(&witness.letter),
            show(&witness.column),
            show(column)
        ),
        TraceEvent::Hypothesis { automaton } => {
            let accepting = automaton.orbits.iter().filter(|o| o.accepting).count();
            format!(
                "hypothesis #{hypotheses} orbits={} dimension={} accepting={accepting}",
                automaton.orbit_count(),
                automaton.dimension()
            )
        }
        TraceEvent::Counterexample { word } => format!("counterexample {}", show(word)),
    }
}

impl RunOutcome {
    fn fields(&self) -> Vec<(&'static str, String)> {
        let r = &self.report;
        let mut out = vec![
            ("target", self.target.to_string()),
            ("algo", self.algo.name().to_string()),
            ("orbits", r.orbits.to_string()),
            ("dimension", r.dimension.to_string()),
            ("eq_queries", r.eq_queries.to_string()),
            ("orbit_membership_queries", r.orbit_membership_queries.to_string()),
            ("concrete_membership_queries", r.concrete_membership_queries.to_string()),
            ("wall_ms", r.wall_time.map_or(0, |d| d.as_millis()).to_string()),
        ];
        if let Some(d) = self.depth {
            out.push(("depth", d.to_string()));
        }
        out
    }

    /// Aligned two-column table for people.
    pub fn stats_table(&self) -> String {
        let fields = self.fields();
        let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut s = String::new();
        for (k, v) in fields {
            let _ = writeln!(s, "{k:<width$}  {v}");
        }
        s
    }

    /// One `key=value` per line for scripts.
    pub fn stats_kv(&self) -> String {
        self.fields().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn summary(&self) -> String {
        format!(
            "learned {} with {}: {} orbits, dimension {}, {} equivalence queries",
            self.target,
            self.algo.name(),
            self.report.orbits,
            self.report.dimension,
            self.report.eq_queries
        )
    }
}
