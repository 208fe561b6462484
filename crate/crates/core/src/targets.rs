//! Benchmark languages as black-box acceptors.
//!
//! The deterministic targets are step functions over their own configuration
//! types; their orbit structure is only discovered by the equivalence search.

use alloc::collections::BTreeSet;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::automata::{Acceptor, Alphabet, Guard, Kind, OrbitDecl, Rule, Source, SymbolicAutomaton, Tag};
use crate::error::Error;
use crate::kernel::{Atom, Letter, SymGroup};

pub const PUSH: u16 = 0;
pub const POP: u16 = 1;

pub fn fifo_alphabet() -> Alphabet {
    Alphabet::new(vec![Tag { label: "push".into(), arity: 1 }, Tag { label: "pop".into(), arity: 1 }])
        .expect("static alphabet")
}

/// Valid traces of a queue holding at most `n` atoms.
#[derive(Clone, Debug)]
pub struct Fifo {
    capacity: usize,
    alphabet: Alphabet,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FifoConfig {
    Queue(Vec<Atom>),
    Sink,
}

pub fn make_fifo(n: usize) -> Fifo {
    Fifo { capacity: n, alphabet: fifo_alphabet() }
}

fn distinct(atoms: &[Atom]) -> Vec<Atom> {
    let mut out: Vec<Atom> = Vec::new();
    for &a in atoms {
        if !out.contains(&a) {
            out.push(a);
        }
    }
    out
}

impl Acceptor for Fifo {
    type Config = FifoConfig;

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn max_dim(&self) -> usize {
        self.capacity
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn initial(&self) -> Vec<FifoConfig> {
        vec![FifoConfig::Queue(Vec::new())]
    }

    fn step(&self, c: &FifoConfig, l: Letter, _known: &BTreeSet<Atom>) -> Vec<FifoConfig> {
        let next = match (c, l.tag, l.atom) {
            (FifoConfig::Queue(q), PUSH, Some(a)) if q.len() < self.capacity => {
                let mut q = q.clone();
                q.push(a);
                FifoConfig::Queue(q)
            }
            (FifoConfig::Queue(q), POP, Some(a)) if q.first() == Some(&a) => FifoConfig::Queue(q[1..].to_vec()),
            _ => FifoConfig::Sink,
        };
        vec![next]
    }

    fn is_accepting(&self, c: &FifoConfig) -> bool {
        matches!(c, FifoConfig::Queue(_))
    }

    fn atoms(&self, c: &FifoConfig) -> Vec<Atom> {
        match c {
            FifoConfig::Queue(q) => distinct(q),
            FifoConfig::Sink => Vec::new(),
        }
    }

    fn rename(&self, c: &FifoConfig, f: &dyn Fn(Atom) -> Atom) -> FifoConfig {
        match c {
            FifoConfig::Queue(q) => FifoConfig::Queue(q.iter().map(|&a| f(a)).collect()),
            FifoConfig::Sink => FifoConfig::Sink,
        }
    }
}

/// `{ww | |w| = n}` over the pure atom alphabet.
#[derive(Clone, Debug)]
pub struct DoubleWord {
    half: usize,
    alphabet: Alphabet,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DoubleWordConfig {
    /// First half read so far (shorter than `n`).
    Reading(Vec<Atom>),
    /// Letters still expected; accepting when empty.
    Expect(Vec<Atom>),
    Sink,
}

pub fn make_double_word(n: usize) -> DoubleWord {
    DoubleWord { half: n, alphabet: Alphabet::atoms() }
}

impl Acceptor for DoubleWord {
    type Config = DoubleWordConfig;

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn max_dim(&self) -> usize {
        self.half
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn initial(&self) -> Vec<DoubleWordConfig> {
        if self.half == 0 {
            vec![DoubleWordConfig::Expect(Vec::new())]
        } else {
            vec![DoubleWordConfig::Reading(Vec::new())]
        }
    }

    fn step(&self, c: &DoubleWordConfig, l: Letter, _known: &BTreeSet<Atom>) -> Vec<DoubleWordConfig> {
        use DoubleWordConfig::*;
        let Some(a) = l.atom else { return vec![Sink] };
        let next = match c {
            Reading(w) => {
                let mut w = w.clone();
                w.push(a);
                if w.len() == self.half {
                    Expect(w)
                } else {
                    Reading(w)
                }
            }
            Expect(rest) if rest.first() == Some(&a) => Expect(rest[1..].to_vec()),
            _ => Sink,
        };
        vec![next]
    }

    fn is_accepting(&self, c: &DoubleWordConfig) -> bool {
        matches!(c, DoubleWordConfig::Expect(r) if r.is_empty())
    }

    fn atoms(&self, c: &DoubleWordConfig) -> Vec<Atom> {
        match c {
            DoubleWordConfig::Reading(w) | DoubleWordConfig::Expect(w) => distinct(w),
            DoubleWordConfig::Sink => Vec::new(),
        }
    }

    fn rename(&self, c: &DoubleWordConfig, f: &dyn Fn(Atom) -> Atom) -> DoubleWordConfig {
        use DoubleWordConfig::*;
        match c {
            Reading(w) => Reading(w.iter().map(|&a| f(a)).collect()),
            Expect(w) => Expect(w.iter().map(|&a| f(a)).collect()),
            Sink => Sink,
        }
    }
}

/// Words whose first atom occurs again exactly `n` positions before the end.
#[derive(Clone, Debug)]
pub struct NLast {
    n: usize,
    alphabet: Alphabet,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum NLastConfig {
    Start,
    /// The first atom and, oldest first, whether each of the last `n + 1`
    /// letters after it equals it (padded with `false`).
    Track(Atom, Vec<bool>),
}

pub fn make_nlast(n: usize) -> NLast {
    NLast { n, alphabet: Alphabet::atoms() }
}

impl Acceptor for NLast {
    type Config = NLastConfig;

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn max_dim(&self) -> usize {
        1
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn initial(&self) -> Vec<NLastConfig> {
        vec![NLastConfig::Start]
    }

    fn step(&self, c: &NLastConfig, l: Letter, _known: &BTreeSet<Atom>) -> Vec<NLastConfig> {
        let Some(b) = l.atom else { return vec![c.clone()] };
        let next = match c {
            NLastConfig::Start => NLastConfig::Track(b, vec![false; self.n + 1]),
            NLastConfig::Track(a, w) => {
                let mut w = w[1..].to_vec();
                w.push(*a == b);
                NLastConfig::Track(*a, w)
            }
        };
        vec![next]
    }

    fn is_accepting(&self, c: &NLastConfig) -> bool {
        matches!(c, NLastConfig::Track(_, w) if w[0])
    }

    fn atoms(&self, c: &NLastConfig) -> Vec<Atom> {
        match c {
            NLastConfig::Start => Vec::new(),
            NLastConfig::Track(a, _) => vec![*a],
        }
    }

    fn rename(&self, c: &NLastConfig, f: &dyn Fn(Atom) -> Atom) -> NLastConfig {
        match c {
            NLastConfig::Start => NLastConfig::Start,
            NLastConfig::Track(a, w) => NLastConfig::Track(f(*a), w.clone()),
        }
    }
}

/// Direct scan: `w = a · u · a · v` with `|v| = n`.
pub fn nlast_member(n: usize, w: &[Letter]) -> bool {
    w.len() >= n + 2 && w[0].atom == w[w.len() - 1 - n].atom
}

/// Direct scan: `w = u u` with `|u| = n`.
pub fn double_word_member(n: usize, w: &[Letter]) -> bool {
    w.len() == 2 * n && w[..n] == w[n..]
}

/// Direct scan: some atom occurs twice.
pub fn leq_member(w: &[Letter]) -> bool {
    let mut seen = BTreeSet::new();
    w.iter().filter_map(|l| l.atom).any(|a| !seen.insert(a))
}

/// Words in which some atom repeats: a 3-orbit NFA, answered by a direct scan.
#[derive(Clone, Debug)]
pub struct Leq {
    nfa: SymbolicAutomaton,
}

pub fn make_leq() -> Leq {
    Leq { nfa: leq_nfa() }
}

impl Leq {
    pub fn nfa(&self) -> &SymbolicAutomaton {
        &self.nfa
    }
}

fn orbit(name: &str, dim: usize, accepting: bool) -> OrbitDecl {
    OrbitDecl { name: name.to_string(), dim, sym: SymGroup::trivial(dim), accepting }
}

fn rule(src: usize, guard: Guard, dst: usize, assign: &[Source]) -> Rule {
    Rule { src, tag: 0, guard, dst, assign: assign.to_vec() }
}

/// The canonical RFSA for repeated atoms: `q0` waits, `q1(a)` has guessed `a`
/// will repeat, `q2` has seen the repetition.
pub fn leq_nfa() -> SymbolicAutomaton {
    use Guard::{Fresh, Reg};
    use Source::{Any, Input};
    let r0 = Source::Reg(0);
    SymbolicAutomaton {
        kind: Kind::Nfa,
        alphabet: Alphabet::atoms(),
        orbits: vec![orbit("q0", 0, false), orbit("q1", 1, false), orbit("q2", 0, true)],
        initial: vec![0],
        rules: vec![
            rule(0, Fresh, 0, &[]),
            rule(0, Fresh, 1, &[Input]),
            rule(1, Reg(0), 0, &[]),
            rule(1, Fresh, 0, &[]),
            rule(1, Reg(0), 1, &[r0]),
            rule(1, Fresh, 1, &[r0]),
            rule(1, Reg(0), 2, &[]),
            rule(1, Fresh, 1, &[Input]),
            rule(2, Fresh, 2, &[]),
            rule(2, Fresh, 0, &[]),
            rule(2, Fresh, 1, &[Any]),
            rule(2, Fresh, 1, &[Input]),
        ],
    }
}

impl Acceptor for Leq {
    type Config = <SymbolicAutomaton as Acceptor>::Config;

    fn alphabet(&self) -> &Alphabet {
        &self.nfa.alphabet
    }

    fn max_dim(&self) -> usize {
        self.nfa.max_dim()
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn initial(&self) -> Vec<Self::Config> {
        self.nfa.initial()
    }

    fn step(&self, c: &Self::Config, l: Letter, known: &BTreeSet<Atom>) -> Vec<Self::Config> {
        self.nfa.step(c, l, known)
    }

    fn is_accepting(&self, c: &Self::Config) -> bool {
        self.nfa.is_accepting(c)
    }

    fn atoms(&self, c: &Self::Config) -> Vec<Atom> {
        c.atoms()
    }

    fn has_wild(&self, c: &Self::Config) -> bool {
        c.has_wild()
    }

    fn rename(&self, c: &Self::Config, f: &dyn Fn(Atom) -> Atom) -> Self::Config {
        self.nfa.rename(c, f)
    }

    fn normalize(&self, c: &Self::Config) -> Self::Config {
        self.nfa.normalize(c)
    }

    fn orderings(&self, c: &Self::Config) -> Vec<Vec<Atom>> {
        self.nfa.orderings(c)
    }

    fn member(&self, w: &[Letter]) -> bool {
        leq_member(w)
    }
}

/// The three-orbit target of the worked tables: `q2` holds two atoms and
/// accepts; reading a register sends it back along the chain.
pub fn three_orbit_automaton() -> SymbolicAutomaton {
    use Guard::{Fresh, Reg};
    use Source::Input;
    let (r0, r1) = (Source::Reg(0), Source::Reg(1));
    SymbolicAutomaton {
        kind: Kind::Dfa,
        alphabet: Alphabet::atoms(),
        orbits: vec![orbit("q0", 0, false), orbit("q1", 1, false), orbit("q2", 2, true)],
        initial: vec![0],
        rules: vec![
            rule(0, Fresh, 1, &[Input]),
            rule(1, Reg(0), 0, &[]),
            rule(1, Fresh, 2, &[r0, Input]),
            rule(2, Reg(1), 1, &[r0]),
            rule(2, Reg(0), 0, &[]),
            rule(2, Fresh, 2, &[r0, r1]),
        ],
    }
}

/// Registry names: `fifo:N`, `ww:N`, `nlast:N`, `leq`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetSpec {
    Fifo(usize),
    DoubleWord(usize),
    NLast(usize),
    Leq,
}

impl FromStr for TargetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "leq" {
            return Ok(TargetSpec::Leq);
        }
        let unknown = || Error::Invalid(alloc::format!("unknown target `{s}` (expected fifo:N, ww:N, nlast:N or leq)"));
        let (name, n) = s.split_once(':').ok_or_else(unknown)?;
        let n: usize = n.parse().map_err(|_| unknown())?;
        match name {
            "fifo" => Ok(TargetSpec::Fifo(n)),
            "ww" => Ok(TargetSpec::DoubleWord(n)),
            "nlast" => Ok(TargetSpec::NLast(n)),
            _ => Err(unknown()),
        }
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSpec::Fifo(n) => write!(f, "fifo:{n}"),
            TargetSpec::DoubleWord(n) => write!(f, "ww:{n}"),
            TargetSpec::NLast(n) => write!(f, "nlast:{n}"),
            TargetSpec::Leq => f.write_str("leq"),
        }
    }
}
