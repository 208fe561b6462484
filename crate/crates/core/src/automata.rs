//! Orbit-wise nominal automata and the acceptor interface shared by
//! hypotheses and benchmark targets.
//!
//! A state of a [`SymbolicAutomaton`] is a [`Config`]: an orbit name plus a
//! tuple of pairwise distinct registers. Two configs of the same orbit denote
//! the same state when their register tuples differ by an element of the
//! orbit's local symmetry group.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::kernel::{all_perms, Atom, IndexPerm, Letter, Perm, SymGroup};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tag {
    pub label: String,
    pub arity: u8,
}

/// Finitely many tags, each carrying zero or one atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    tags: Vec<Tag>,
}

/// Label of the single tag of the pure-atom alphabet.
pub const ATOM_LABEL: &str = "_";

impl Alphabet {
    pub fn new(tags: Vec<Tag>) -> Result<Self, Error> {
        for (i, t) in tags.iter().enumerate() {
            if t.arity > 1 {
                return Err(Error::UnsupportedArity { label: t.label.clone(), arity: t.arity });
            }
            if tags[..i].iter().any(|u| u.label == t.label) {
                return Err(Error::DuplicateLabel(t.label.clone()));
            }
        }
        Ok(Alphabet { tags })
    }

    /// The alphabet `A` itself: one anonymous arity-1 tag.
    pub fn atoms() -> Self {
        Alphabet { tags: vec![Tag { label: ATOM_LABEL.to_string(), arity: 1 }] }
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn tag_index(&self, label: &str) -> Option<u16> {
        self.tags.iter().position(|t| t.label == label).map(|i| i as u16)
    }

    pub fn arity(&self, tag: u16) -> Result<u8, Error> {
        self.tags.get(tag as usize).map(|t| t.arity).ok_or(Error::UnknownTag { tag })
    }

    pub fn is_pure_atoms(&self) -> bool {
        self.tags.len() == 1 && self.tags[0].arity == 1 && self.tags[0].label == ATOM_LABEL
    }

    pub fn check_letter(&self, l: &Letter) -> Result<(), Error> {
        let arity = self.arity(l.tag)?;
        if (arity == 1) != l.atom.is_some() {
            return Err(Error::ArityMismatch { tag: l.tag });
        }
        Ok(())
    }

    pub fn check_word(&self, w: &[Letter]) -> Result<(), Error> {
        w.iter().try_for_each(|l| self.check_letter(l))
    }

    /// One letter per orbit of letters relative to `known`: for each tag in
    /// order, the known atoms in the given order, then `fresh`.
    pub fn letters(&self, known: &[Atom], fresh: Atom) -> Vec<Letter> {
        let mut out = Vec::new();
        for (i, t) in self.tags.iter().enumerate() {
            let tag = i as u16;
            if t.arity == 0 {
                out.push(Letter { tag, atom: None });
            } else {
                out.extend(known.iter().map(|&a| Letter { tag, atom: Some(a) }));
                out.push(Letter { tag, atom: Some(fresh) });
            }
        }
        out
    }

    pub fn show_letter(&self, l: &Letter) -> String {
        let label = self.tags.get(l.tag as usize).map(|t| t.label.as_str()).unwrap_or("?");
        match (self.is_pure_atoms(), l.atom) {
            (true, Some(a)) => format!("{a}"),
            (_, Some(a)) => format!("{label}({a})"),
            (_, None) => label.to_string(),
        }
    }

    pub fn show_word(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "ε".to_string();
        }
        let parts: Vec<String> = w.iter().map(|l| self.show_letter(l)).collect();
        parts.join(" ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Dfa,
    Nfa,
}

/// Constraint on the input atom of a rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Guard {
    /// Arity-0 tag: no atom.
    None,
    /// The input atom equals register `i`.
    Reg(usize),
    /// The input atom differs from every register.
    Fresh,
}

/// Where a destination register gets its atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Reg(usize),
    Input,
    /// Any atom distinct from the source registers, the input atom and the
    /// other destination registers. NFA only.
    Any,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub src: usize,
    pub tag: u16,
    pub guard: Guard,
    pub dst: usize,
    pub assign: Vec<Source>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitDecl {
    pub name: String,
    pub dim: usize,
    pub sym: SymGroup,
    pub accepting: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicAutomaton {
    pub kind: Kind,
    pub alphabet: Alphabet,
    pub orbits: Vec<OrbitDecl>,
    /// Initial orbits. DFAs have exactly one, of dimension 0. An NFA initial
    /// orbit of positive dimension contributes all of its configurations.
    pub initial: Vec<usize>,
    pub rules: Vec<Rule>,
}

/// One register value: a concrete atom or, inside symbolic state sets, a
/// placeholder standing for every atom outside the known context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Atom(Atom),
    Wild(u8),
}

impl Slot {
    pub fn atom(self) -> Option<Atom> {
        match self {
            Slot::Atom(a) => Some(a),
            Slot::Wild(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Config {
    pub orbit: usize,
    pub regs: Vec<Slot>,
}

impl Config {
    pub fn concrete(orbit: usize, regs: &[Atom]) -> Self {
        Config { orbit, regs: regs.iter().map(|&a| Slot::Atom(a)).collect() }
    }

    pub fn atoms(&self) -> Vec<Atom> {
        self.regs.iter().filter_map(|s| s.atom()).collect()
    }

    pub fn has_wild(&self) -> bool {
        self.regs.iter().any(|s| matches!(s, Slot::Wild(_)))
    }
}

/// Uniform substrate for teachers: anything that can be run on data words.
///
/// `step` receives the atoms known in the surrounding context; placeholder
/// registers (if the acceptor uses them) stand for atoms outside that set.
pub trait Acceptor {
    type Config: Clone + Ord + fmt::Debug;

    fn alphabet(&self) -> &Alphabet;

    /// Largest number of atoms held by one configuration.
    fn max_dim(&self) -> usize;

    fn is_deterministic(&self) -> bool;

    fn initial(&self) -> Vec<Self::Config>;

    fn step(&self, c: &Self::Config, letter: Letter, known: &BTreeSet<Atom>) -> Vec<Self::Config>;

    fn is_accepting(&self, c: &Self::Config) -> bool;

    /// Concrete atoms of a configuration, in register order.
    fn atoms(&self, c: &Self::Config) -> Vec<Atom>;

    fn has_wild(&self, _c: &Self::Config) -> bool {
        false
    }

    /// Injective renaming of the concrete atoms.
    fn rename(&self, c: &Self::Config, f: &dyn Fn(Atom) -> Atom) -> Self::Config;

    /// Representative of the configuration under its local symmetries.
    fn normalize(&self, c: &Self::Config) -> Self::Config {
        c.clone()
    }

    /// The atom orders of `c` under each of its local symmetries.
    fn orderings(&self, c: &Self::Config) -> Vec<Vec<Atom>> {
        vec![self.atoms(c)]
    }

    /// Membership query. Defaults to running the configuration sets; targets
    /// with a direct oracle override it. Ill-formed words are rejected.
    fn member(&self, w: &[Letter]) -> bool
    where
        Self: Sized,
    {
        run_accepts(self, w).unwrap_or(false)
    }
}

/// Applies `g` to a register tuple: `(regs ∘ g)[i] = regs[g[i]]`.
pub fn permute_regs<T: Copy>(regs: &[T], g: &[usize]) -> Vec<T> {
    g.iter().map(|&i| regs[i]).collect()
}

fn renumber_wilds(regs: &mut [Slot]) {
    let mut seen: Vec<u8> = Vec::new();
    for s in regs.iter_mut() {
        if let Slot::Wild(w) = *s {
            let i = match seen.iter().position(|&v| v == w) {
                Some(i) => i,
                None => {
                    seen.push(w);
                    seen.len() - 1
                }
            };
            *s = Slot::Wild(i as u8);
        }
    }
}

impl SymbolicAutomaton {
    pub fn orbit_count(&self) -> usize {
        self.orbits.len()
    }

    pub fn dimension(&self) -> usize {
        self.orbits.iter().map(|o| o.dim).max().unwrap_or(0)
    }

    pub fn orbit_index(&self, name: &str) -> Option<usize> {
        self.orbits.iter().position(|o| o.name == name)
    }

    pub fn rules_from(&self, orbit: usize, tag: u16) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(move |r| r.src == orbit && r.tag == tag)
    }

    /// Minimizes the register tuple under the orbit's local symmetries.
    pub fn normalize_config(&self, c: &Config) -> Config {
        let sym = &self.orbits[c.orbit].sym;
        let mut best: Option<Vec<Slot>> = None;
        for g in sym.elements() {
            let mut regs = permute_regs(&c.regs, g);
            renumber_wilds(&mut regs);
            if best.as_ref().is_none_or(|b| regs < *b) {
                best = Some(regs);
            }
        }
        Config { orbit: c.orbit, regs: best.unwrap_or_default() }
    }

    fn guard_matches(guard: Guard, regs: &[Slot], x: Option<Atom>) -> bool {
        match (guard, x) {
            (Guard::None, None) => true,
            (Guard::Reg(i), Some(x)) => regs.get(i) == Some(&Slot::Atom(x)),
            (Guard::Fresh, Some(x)) => !regs.contains(&Slot::Atom(x)),
            _ => false,
        }
    }

    /// Destination register tuples of `rule` fired from `regs` on input `x`.
    /// `any` atoms range over `pool` (minus the excluded atoms) plus, if
    /// `wild` is set, one placeholder per position.
    fn fire(rule: &Rule, regs: &[Slot], x: Option<Atom>, pool: &BTreeSet<Atom>, wild: bool) -> Vec<Vec<Slot>> {
        let mut fixed: Vec<Option<Slot>> = rule
            .assign
            .iter()
            .map(|s| match *s {
                Source::Reg(i) => Some(regs[i]),
                Source::Input => x.map(Slot::Atom),
                Source::Any => None,
            })
            .collect();
        let any_positions: Vec<usize> = (0..fixed.len()).filter(|&i| fixed[i].is_none()).collect();
        if any_positions.is_empty() {
            return vec![fixed.into_iter().map(|s| s.unwrap()).collect()];
        }
        let mut excluded: BTreeSet<Atom> = regs.iter().filter_map(|s| s.atom()).collect();
        excluded.extend(x);
        excluded.extend(fixed.iter().filter_map(|s| s.and_then(|s| s.atom())));
        let mut next_wild = regs
            .iter()
            .chain(fixed.iter().flatten())
            .filter_map(|s| if let Slot::Wild(w) = s { Some(*w + 1) } else { None })
            .max()
            .unwrap_or(0);
        let mut choices: Vec<Slot> = pool.iter().filter(|a| !excluded.contains(a)).map(|&a| Slot::Atom(a)).collect();
        if wild {
            for _ in &any_positions {
                choices.push(Slot::Wild(next_wild));
                next_wild += 1;
            }
        }
        let mut out = Vec::new();
        fn go(
            k: usize,
            positions: &[usize],
            choices: &[Slot],
            used: &mut Vec<bool>,
            fixed: &mut Vec<Option<Slot>>,
            out: &mut Vec<Vec<Slot>>,
        ) {
            if k == positions.len() {
                out.push(fixed.iter().map(|s| s.unwrap()).collect());
                return;
            }
            for (ci, &c) in choices.iter().enumerate() {
                if used[ci] {
                    continue;
                }
                // placeholders are interchangeable: only take the first unused one
                if let Slot::Wild(_) = c {
                    if choices[..ci].iter().enumerate().any(|(j, p)| matches!(p, Slot::Wild(_)) && !used[j]) {
                        continue;
                    }
                }
                used[ci] = true;
                fixed[positions[k]] = Some(c);
                go(k + 1, positions, choices, used, fixed, out);
                fixed[positions[k]] = None;
                used[ci] = false;
            }
        }
        let mut used = vec![false; choices.len()];
        go(0, &any_positions, &choices, &mut used, &mut fixed, &mut out);
        out
    }

    /// Deterministic step. `c` must be a concrete configuration.
    pub fn step_dfa(&self, c: &Config, letter: Letter) -> Result<Config, Error> {
        if self.kind != Kind::Dfa {
            return Err(Error::Unsupported("step_dfa on an NFA"));
        }
        self.alphabet.check_letter(&letter)?;
        let mut hits = self
            .rules_from(c.orbit, letter.tag)
            .filter(|r| Self::guard_matches(r.guard, &c.regs, letter.atom));
        let rule = hits.next().ok_or_else(|| Error::Invalid(format!("no rule applies in orbit {}", self.orbits[c.orbit].name)))?;
        let regs = Self::fire(rule, &c.regs, letter.atom, &BTreeSet::new(), false).remove(0);
        Ok(self.normalize_config(&Config { orbit: rule.dst, regs }))
    }

    /// Nondeterministic step on concrete configurations; `any` registers are
    /// instantiated over `context`.
    pub fn step_nfa(&self, cs: &BTreeSet<Config>, letter: Letter, context: &BTreeSet<Atom>) -> Result<BTreeSet<Config>, Error> {
        self.alphabet.check_letter(&letter)?;
        let mut out = BTreeSet::new();
        for c in cs {
            for rule in self.rules_from(c.orbit, letter.tag) {
                if !Self::guard_matches(rule.guard, &c.regs, letter.atom) {
                    continue;
                }
                for regs in Self::fire(rule, &c.regs, letter.atom, context, false) {
                    out.insert(self.normalize_config(&Config { orbit: rule.dst, regs }));
                }
            }
        }
        Ok(out)
    }

    /// Concrete initial configurations; positive-dimension NFA initial orbits
    /// are instantiated over `pool`.
    fn concrete_initial(&self, pool: &BTreeSet<Atom>) -> BTreeSet<Config> {
        let mut out = BTreeSet::new();
        for &o in &self.initial {
            let k = self.orbits[o].dim;
            let pool: Vec<Atom> = pool.iter().copied().collect();
            for tuple in injective_tuples(&pool, k) {
                out.insert(self.normalize_config(&Config::concrete(o, &tuple)));
            }
        }
        out
    }

    /// Membership by direct execution. For NFAs, `any` registers range over the
    /// atoms of the remaining input plus `2 · dimension` atoms outside the word.
    pub fn accepts(&self, word: &[Letter]) -> Result<bool, Error> {
        self.alphabet.check_word(word)?;
        match self.kind {
            Kind::Dfa => {
                let &init = self.initial.first().ok_or_else(|| Error::Invalid("no initial orbit".into()))?;
                let mut c = Config::concrete(init, &[]);
                for &l in word {
                    c = self.step_dfa(&c, l)?;
                }
                Ok(self.orbits[c.orbit].accepting)
            }
            Kind::Nfa => self.accepts_with_budget(word, 2 * self.dimension()),
        }
    }

    /// NFA membership with an explicit number of atoms outside the word.
    pub fn accepts_with_budget(&self, word: &[Letter], budget: usize) -> Result<bool, Error> {
        self.alphabet.check_word(word)?;
        let word_atoms: BTreeSet<Atom> = word.iter().filter_map(|l| l.atom).collect();
        let base = word_atoms.iter().map(|a| a.0 + 1).max().unwrap_or(0);
        let extra: BTreeSet<Atom> = (0..budget as u32).map(|i| Atom(base + i)).collect();
        let mut pool = word_atoms.clone();
        pool.extend(&extra);
        let mut cs = self.concrete_initial(&pool);
        for (i, &l) in word.iter().enumerate() {
            let mut context: BTreeSet<Atom> = word[i + 1..].iter().filter_map(|l| l.atom).collect();
            context.extend(&extra);
            cs = self.step_nfa(&cs, l, &context)?;
            if cs.is_empty() {
                return Ok(false);
            }
        }
        Ok(cs.iter().any(|c| self.orbits[c.orbit].accepting))
    }

    /// Checks alphabet use, register discipline, DFA totality and
    /// determinism, and symmetry coherence.
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: String| Err(Error::Invalid(m));
        for (i, o) in self.orbits.iter().enumerate() {
            if self.orbits[..i].iter().any(|p| p.name == o.name) {
                return bad(format!("duplicate orbit name {}", o.name));
            }
            if o.sym.degree() != o.dim {
                return bad(format!("orbit {}: symmetry degree {} differs from dimension {}", o.name, o.sym.degree(), o.dim));
            }
        }
        if self.initial.iter().any(|&o| o >= self.orbits.len()) {
            return bad("initial orbit out of range".into());
        }
        if self.kind == Kind::Dfa {
            if self.initial.len() != 1 {
                return bad(format!("a DFA needs exactly one initial orbit, found {}", self.initial.len()));
            }
            if self.orbits[self.initial[0]].dim != 0 {
                return bad("DFA initial orbit must have dimension 0".into());
            }
        }
        for r in &self.rules {
            self.check_rule(r)?;
        }
        if self.kind == Kind::Dfa {
            for (oi, o) in self.orbits.iter().enumerate() {
                for (ti, t) in self.alphabet.tags().iter().enumerate() {
                    let guards: Vec<Guard> = if t.arity == 0 {
                        vec![Guard::None]
                    } else {
                        (0..o.dim).map(Guard::Reg).chain([Guard::Fresh]).collect()
                    };
                    for g in guards {
                        let n = self.rules_from(oi, ti as u16).filter(|r| r.guard == g).count();
                        if n != 1 {
                            return bad(format!(
                                "DFA orbit {} tag {}: guard {:?} covered by {} rules (totality/determinism)",
                                o.name, t.label, g, n
                            ));
                        }
                    }
                }
            }
        }
        // symmetry coherence
        for r in &self.rules {
            for g in self.orbits[r.src].sym.elements() {
                let moved = translate_rule(r, g);
                let dst_sym = &self.orbits[r.dst].sym;
                let found = self.rules.iter().any(|s| {
                    s.src == moved.src
                        && s.tag == moved.tag
                        && s.guard == moved.guard
                        && s.dst == moved.dst
                        && dst_sym.elements().iter().any(|h| permute_regs(&moved.assign, h) == s.assign)
                });
                if !found {
                    return bad(format!(
                        "rule {} -> {} is not closed under the local symmetry {:?} of {}",
                        self.orbits[r.src].name, self.orbits[r.dst].name, g, self.orbits[r.src].name
                    ));
                }
            }
        }
        Ok(())
    }

    fn check_rule(&self, r: &Rule) -> Result<(), Error> {
        let bad = |m: String| Err(Error::Invalid(m));
        if r.src >= self.orbits.len() || r.dst >= self.orbits.len() {
            return bad("rule references an undeclared orbit".into());
        }
        let src = &self.orbits[r.src];
        let dst = &self.orbits[r.dst];
        let arity = self.alphabet.arity(r.tag)?;
        match (arity, r.guard) {
            (0, Guard::None) | (1, Guard::Fresh) => {}
            (1, Guard::Reg(i)) if i < src.dim => {}
            _ => return bad(format!("rule from {}: guard {:?} does not fit the tag or registers", src.name, r.guard)),
        }
        if r.assign.len() != dst.dim {
            return bad(format!("rule {} -> {}: {} assignments for dimension {}", src.name, dst.name, r.assign.len(), dst.dim));
        }
        let mut regs_used = BTreeSet::new();
        let mut inputs = 0;
        for s in &r.assign {
            match *s {
                Source::Reg(i) => {
                    if i >= src.dim || !regs_used.insert(i) {
                        return bad(format!("rule {} -> {}: bad or repeated register r{}", src.name, dst.name, i));
                    }
                }
                Source::Input => {
                    inputs += 1;
                    if arity == 0 {
                        return bad(format!("rule {} -> {}: `in` on an arity-0 tag", src.name, dst.name));
                    }
                }
                Source::Any => {
                    if self.kind == Kind::Dfa {
                        return bad(format!("rule {} -> {}: `any` in a DFA", src.name, dst.name));
                    }
                }
            }
        }
        if inputs > 1 {
            return bad(format!("rule {} -> {}: input stored twice", src.name, dst.name));
        }
        if let Guard::Reg(i) = r.guard {
            if inputs == 1 && regs_used.contains(&i) {
                return bad(format!("rule {} -> {}: input equals r{} and both are stored", src.name, dst.name, i));
            }
        }
        Ok(())
    }
}

/// The rule `r` seen from the configuration `regs ∘ g`.
fn translate_rule(r: &Rule, g: &[usize]) -> Rule {
    let guard = match r.guard {
        Guard::Reg(i) => Guard::Reg(g[i]),
        other => other,
    };
    let assign = r
        .assign
        .iter()
        .map(|s| match *s {
            Source::Reg(i) => Source::Reg(g[i]),
            other => other,
        })
        .collect();
    Rule { src: r.src, tag: r.tag, guard, dst: r.dst, assign }
}

/// All tuples of `k` pairwise distinct atoms from `pool`.
pub fn injective_tuples(pool: &[Atom], k: usize) -> Vec<Vec<Atom>> {
    fn go(pool: &[Atom], k: usize, cur: &mut Vec<Atom>, out: &mut Vec<Vec<Atom>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for &a in pool {
            if !cur.contains(&a) {
                cur.push(a);
                go(pool, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(pool, k, &mut Vec::new(), &mut out);
    out
}

impl Acceptor for SymbolicAutomaton {
    type Config = Config;

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn max_dim(&self) -> usize {
        self.dimension()
    }

    fn is_deterministic(&self) -> bool {
        self.kind == Kind::Dfa
    }

    fn initial(&self) -> Vec<Config> {
        self.initial
            .iter()
            .map(|&o| {
                let regs = (0..self.orbits[o].dim).map(|i| Slot::Wild(i as u8)).collect();
                self.normalize_config(&Config { orbit: o, regs })
            })
            .collect()
    }

    fn step(&self, c: &Config, letter: Letter, known: &BTreeSet<Atom>) -> Vec<Config> {
        let mut variants = vec![c.clone()];
        if let Some(x) = letter.atom {
            if !known.contains(&x) {
                for (i, s) in c.regs.iter().enumerate() {
                    if let Slot::Wild(_) = s {
                        let mut v = c.clone();
                        v.regs[i] = Slot::Atom(x);
                        variants.push(v);
                    }
                }
            }
        }
        let mut pool = known.clone();
        pool.extend(letter.atom);
        let mut out = BTreeSet::new();
        for v in &variants {
            for rule in self.rules_from(v.orbit, letter.tag) {
                if !Self::guard_matches(rule.guard, &v.regs, letter.atom) {
                    continue;
                }
                for regs in Self::fire(rule, &v.regs, letter.atom, &pool, true) {
                    out.insert(self.normalize_config(&Config { orbit: rule.dst, regs }));
                }
            }
        }
        out.into_iter().collect()
    }

    fn is_accepting(&self, c: &Config) -> bool {
        self.orbits[c.orbit].accepting
    }

    fn atoms(&self, c: &Config) -> Vec<Atom> {
        c.atoms()
    }

    fn has_wild(&self, c: &Config) -> bool {
        c.has_wild()
    }

    fn rename(&self, c: &Config, f: &dyn Fn(Atom) -> Atom) -> Config {
        Config { orbit: c.orbit, regs: c.regs.iter().map(|s| if let Slot::Atom(a) = s { Slot::Atom(f(*a)) } else { *s }).collect() }
    }

    fn normalize(&self, c: &Config) -> Config {
        self.normalize_config(c)
    }

    fn orderings(&self, c: &Config) -> Vec<Vec<Atom>> {
        self.orbits[c.orbit]
            .sym
            .elements()
            .iter()
            .map(|g| permute_regs(&c.regs, g).into_iter().filter_map(|s| s.atom()).collect())
            .collect()
    }
}

/// Membership for any acceptor by running the set of configurations, with
/// placeholders for atoms outside the word read so far.
pub fn run_accepts<A: Acceptor>(a: &A, word: &[Letter]) -> Result<bool, Error> {
    a.alphabet().check_word(word)?;
    let mut known: BTreeSet<Atom> = BTreeSet::new();
    let mut cs: BTreeSet<A::Config> = a.initial().into_iter().map(|c| a.normalize(&c)).collect();
    for &l in word {
        for c in &cs {
            known.extend(a.atoms(c));
        }
        let mut next = BTreeSet::new();
        for c in &cs {
            next.extend(a.step(c, l, &known));
        }
        known.extend(l.atom);
        cs = next;
        if cs.is_empty() {
            return Ok(false);
        }
    }
    Ok(cs.iter().any(|c| a.is_accepting(c)))
}

/// Canonical items, the extra atoms they keep, and the renaming applied.
pub type Canonical<C> = (Vec<C>, Vec<Atom>, BTreeMap<Atom, Atom>);

/// Canonical form of a collection of configurations: atoms renamed to
/// `0, 1, …` in order of first use, each config minimized under its local
/// symmetries, then sorted. Small collections are canonicalized exactly by
/// trying every item order and symmetry choice; larger ones by iterating the
/// first-use renaming to a fixpoint.
pub fn canonicalize<C: Clone + Ord>(
    items: &[C],
    orderings: impl Fn(&C) -> Vec<Vec<Atom>>,
    rename: impl Fn(&C, &dyn Fn(Atom) -> Atom) -> C,
    normalize: impl Fn(&C) -> C,
    extra: &BTreeSet<Atom>,
) -> Canonical<C> {
    let apply = |order: &[Atom]| -> Canonical<C> {
        let mut map: BTreeMap<Atom, Atom> = BTreeMap::new();
        for &a in order.iter().chain(extra.iter()) {
            let n = map.len() as u32;
            map.entry(a).or_insert(Atom(n));
        }
        let f = |a: Atom| map.get(&a).copied().unwrap_or(a);
        let mut out: Vec<C> = items.iter().map(|c| normalize(&rename(c, &f))).collect();
        out.sort();
        out.dedup();
        let mut ex: Vec<Atom> = extra.iter().map(|&a| f(a)).collect();
        ex.sort();
        (out, ex, map)
    };
    let opts: Vec<Vec<Vec<Atom>>> = items.iter().map(&orderings).collect();
    let combos = opts.iter().fold(1usize, |acc, o| acc.saturating_mul(o.len().max(1)));
    let n = items.len();
    let fact = (1..=n).fold(1usize, |acc, i| acc.saturating_mul(i));
    if n <= 4 && combos.saturating_mul(fact) <= 4096 {
        let mut best: Option<Canonical<C>> = None;
        for perm in all_perms(n) {
            let mut choice = vec![0usize; n];
            loop {
                let mut order = Vec::new();
                for &i in &perm {
                    if let Some(o) = opts[i].get(choice[i]) {
                        order.extend_from_slice(o);
                    }
                }
                let cand = apply(&order);
                if best.as_ref().is_none_or(|b| (&cand.0, &cand.1) < (&b.0, &b.1)) {
                    best = Some(cand);
                }
                // odometer over symmetry choices
                let mut k = 0;
                while k < n {
                    choice[k] += 1;
                    if choice[k] < opts[k].len() {
                        break;
                    }
                    choice[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
        }
        return best.unwrap_or_else(|| apply(&[]));
    }
    let mut order: Vec<Atom> = opts.iter().flat_map(|o| o.first().cloned().unwrap_or_default()).collect();
    let mut result = apply(&order);
    for _ in 0..4 {
        // re-run on the sorted result, mapped back to the original atoms
        let inv: BTreeMap<Atom, Atom> = result.2.iter().map(|(&a, &b)| (b, a)).collect();
        let next_order: Vec<Atom> = result
            .0
            .iter()
            .flat_map(|c| orderings(c).into_iter().next().unwrap_or_default())
            .map(|a| inv.get(&a).copied().unwrap_or(a))
            .collect();
        if next_order == order {
            break;
        }
        order = next_order;
        let cand = apply(&order);
        if (&cand.0, &cand.1) >= (&result.0, &result.1) {
            break;
        }
        result = cand;
    }
    result
}

/// Canonical form of a set of configurations of `aut`, with the renaming used.
pub fn canonical_config_set(aut: &SymbolicAutomaton, cs: &BTreeSet<Config>) -> (Vec<Config>, Perm) {
    let items: Vec<Config> = cs.iter().cloned().collect();
    let (out, _, map) = canonicalize(
        &items,
        |c| aut.orderings(c),
        |c, f| aut.rename(c, f),
        |c| aut.normalize_config(c),
        &BTreeSet::new(),
    );
    (out, Perm::extend_injection(&map))
}

/// Register tuple of the orbit's local symmetry acting on a concrete config.
pub fn sym_variants(aut: &SymbolicAutomaton, c: &Config) -> Vec<Vec<Slot>> {
    aut.orbits[c.orbit].sym.elements().iter().map(|g: &IndexPerm| permute_regs(&c.regs, g)).collect()
}
