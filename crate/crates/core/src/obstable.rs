//! Symbolic observation tables.
//!
//! Rows and columns are orbits of words, kept as canonical representatives.
//! A cell is one orbit of row·column concatenations, so filling needs one
//! membership query per joint orbit.
//!
//! Every row is summarized by its *class*: the row function restricted to its
//! support, with the support atoms placed in a canonical register order. Two
//! rows lie in the same orbit exactly when they have the same class, and a
//! concrete row is a class together with its register atoms ([`RowRef`]).
//! Row functions are evaluated on *probes*: for a list of `k` base atoms, every
//! column with each of its equality classes sent to a base atom or to a fresh
//! atom. Probes over the support determine a row completely.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::cmp::Ordering;
use core::fmt::Write as _;

use crate::automata::{permute_regs, Alphabet};
use crate::error::Error;
use crate::kernel::{
    all_perms, canonical, compose_index, instantiate_word, joint_words, placements, rename_word, word_atoms,
    Atom, Bind, IndexPerm, Letter, SymGroup, Word,
};

/// Words ordered by length, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LenLex(pub Word);

impl Ord for LenLex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for LenLex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// Row-orbit × column-orbit pairs filled.
    pub orbit_queries: usize,
    /// Joint orbits sent to the oracle (one concrete word each).
    pub concrete_queries: usize,
}

/// A row orbit: the row function over probes of its `dim` registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowClass {
    pub dim: usize,
    pub values: Vec<bool>,
    /// Register permutations fixing the row.
    pub sym: SymGroup,
    /// First canonical row word (upper rows first) with this class.
    pub rep: Word,
}

/// A concrete row: its class and the atoms filling the class registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowRef {
    pub class: usize,
    pub regs: Vec<Atom>,
}

/// A consistency violation: `row(s1) ~ row(s2)` (or `⊑` for the residual
/// variant) but the rows of `s1·letter` and `s2·letter` differ at `column`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub s1: Word,
    pub s2: Word,
    pub letter: Letter,
    pub column: Word,
}

type ProbeKey = (usize, Vec<Bind>);

struct ProbeSet {
    list: Vec<ProbeKey>,
    index: BTreeMap<ProbeKey, usize>,
}

#[derive(Default)]
struct Derived {
    cols: Vec<Word>,
    upper: Vec<Word>,
    lower: Vec<Word>,
    rows: BTreeMap<Word, (usize, Vec<Atom>)>,
    classes: Vec<RowClass>,
    upper_classes: Vec<usize>,
}

pub struct ObservationTable {
    alphabet: Alphabet,
    s: BTreeSet<LenLex>,
    e: BTreeSet<LenLex>,
    cells: BTreeMap<Word, bool>,
    filled: BTreeSet<(Word, Word)>,
    stats: QueryStats,
    derived: Option<Derived>,
    probes: RefCell<BTreeMap<usize, Rc<ProbeSet>>>,
    perm_tables: RefCell<BTreeMap<usize, Rc<Vec<Vec<usize>>>>>,
    primes: RefCell<Option<Rc<Vec<bool>>>>,
}

fn swap_bind(binds: &[Bind], from: Bind, to: Bind) -> Vec<Bind> {
    binds.iter().map(|&b| if b == from { to } else { b }).collect()
}

fn max_atom_plus_one<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> u32 {
    atoms.into_iter().map(|a| a.0 + 1).max().unwrap_or(0)
}

fn concat(u: &[Letter], l: Letter) -> Word {
    let mut w = u.to_vec();
    w.push(l);
    w
}

/// `left` followed by the atoms of `right` it does not contain.
fn union_list(left: &[Atom], right: &[Atom]) -> Vec<Atom> {
    let mut out = left.to_vec();
    out.extend(right.iter().filter(|a| !left.contains(a)));
    out
}

impl ObservationTable {
    /// The table with `S = E = {ε}`.
    pub fn new(alphabet: Alphabet) -> Self {
        let mut t = ObservationTable {
            alphabet,
            s: BTreeSet::new(),
            e: BTreeSet::new(),
            cells: BTreeMap::new(),
            filled: BTreeSet::new(),
            stats: QueryStats::default(),
            derived: None,
            probes: RefCell::new(BTreeMap::new()),
            perm_tables: RefCell::new(BTreeMap::new()),
            primes: RefCell::new(None),
        };
        t.s.insert(LenLex(Vec::new()));
        t.e.insert(LenLex(Vec::new()));
        t
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn stats(&self) -> QueryStats {
        self.stats
    }

    /// Row orbits, in length-lexicographic order of representatives.
    pub fn rows(&self) -> impl Iterator<Item = &Word> {
        self.s.iter().map(|w| &w.0)
    }

    /// Column orbits, in length-lexicographic order of representatives.
    pub fn columns(&self) -> impl Iterator<Item = &Word> {
        self.e.iter().map(|w| &w.0)
    }

    pub fn is_filled(&self) -> bool {
        self.derived.is_some()
    }

    /// Adds the orbit of `w` and its prefixes to the rows. Returns whether
    /// anything was new.
    pub fn add_row_orbit(&mut self, w: &[Letter]) -> bool {
        let mut changed = false;
        for i in 0..=w.len() {
            changed |= self.s.insert(LenLex(canonical(&w[..i])));
        }
        if changed {
            self.invalidate();
        }
        changed
    }

    /// Adds the orbit of `w` and its suffixes to the columns.
    pub fn add_column_orbit(&mut self, w: &[Letter]) -> bool {
        let mut changed = false;
        for i in 0..=w.len() {
            changed |= self.e.insert(LenLex(canonical(&w[i..])));
        }
        if changed {
            self.invalidate();
        }
        changed
    }

    pub fn has_column_orbit(&self, w: &[Letter]) -> bool {
        self.e.contains(&LenLex(canonical(w)))
    }

    fn invalidate(&mut self) {
        self.derived = None;
        self.probes.borrow_mut().clear();
        self.perm_tables.borrow_mut().clear();
        *self.primes.borrow_mut() = None;
    }

    fn extensions(&self, sigma: &[Letter]) -> Vec<Word> {
        let atoms = word_atoms(sigma);
        let fresh = Atom(atoms.len() as u32);
        self.alphabet.letters(&atoms, fresh).into_iter().map(|l| concat(sigma, l)).collect()
    }

    /// Fills every missing cell through `member` and recomputes the row classes.
    pub fn fill(&mut self, mut member: impl FnMut(&[Letter]) -> bool) {
        if self.derived.is_some() {
            return;
        }
        let upper: Vec<Word> = self.s.iter().map(|w| w.0.clone()).collect();
        let lower: BTreeSet<LenLex> = upper
            .iter()
            .flat_map(|s| self.extensions(s))
            .map(LenLex)
            .filter(|w| !self.s.contains(w))
            .collect();
        let lower: Vec<Word> = lower.into_iter().map(|w| w.0).collect();
        let cols: Vec<Word> = self.e.iter().map(|w| w.0.clone()).collect();
        for sigma in upper.iter().chain(lower.iter()) {
            for tau in &cols {
                if !self.filled.insert((sigma.clone(), tau.clone())) {
                    continue;
                }
                self.stats.orbit_queries += 1;
                for (_, w) in joint_words(sigma, tau) {
                    let w = canonical(&w);
                    if !self.cells.contains_key(&w) {
                        let v = member(&w);
                        self.stats.concrete_queries += 1;
                        self.cells.insert(w, v);
                    }
                }
            }
        }
        self.derived = Some(Derived { cols, upper, lower, ..Default::default() });
        self.probes.borrow_mut().clear();
        self.perm_tables.borrow_mut().clear();
        *self.primes.borrow_mut() = None;
        self.classify();
    }

    fn derived(&self) -> Result<&Derived, Error> {
        self.derived.as_ref().ok_or(Error::MissingCell)
    }

    /// Canonical row words of `S`, in order.
    pub fn upper(&self) -> Result<&[Word], Error> {
        Ok(&self.derived()?.upper)
    }

    /// Canonical row words of `S·A` outside `S`, in order.
    pub fn lower(&self) -> Result<&[Word], Error> {
        Ok(&self.derived()?.lower)
    }

    pub fn classes(&self) -> Result<&[RowClass], Error> {
        Ok(&self.derived()?.classes)
    }

    /// Distinct classes of `S` rows, ordered by first representative.
    pub fn upper_classes(&self) -> Result<&[usize], Error> {
        Ok(&self.derived()?.upper_classes)
    }

    fn probe_set(&self, k: usize) -> Rc<ProbeSet> {
        if let Some(p) = self.probes.borrow().get(&k) {
            return p.clone();
        }
        let cols = &self.derived.as_ref().expect("probes need a filled table").cols;
        let mut list = Vec::new();
        for (c, tau) in cols.iter().enumerate() {
            for binds in placements(word_atoms(tau).len(), k) {
                list.push((c, binds));
            }
        }
        let index = list.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let p = Rc::new(ProbeSet { list, index });
        self.probes.borrow_mut().insert(k, p.clone());
        p
    }

    /// For each `g` in `all_perms(k)`: probe `q` ↦ probe with `Known(i)`
    /// replaced by `Known(g[i])`.
    fn perm_table(&self, k: usize) -> Rc<Vec<Vec<usize>>> {
        if let Some(t) = self.perm_tables.borrow().get(&k) {
            return t.clone();
        }
        let ps = self.probe_set(k);
        let t: Vec<Vec<usize>> = all_perms(k)
            .iter()
            .map(|g| {
                ps.list
                    .iter()
                    .map(|(c, binds)| {
                        let moved: Vec<Bind> = binds
                            .iter()
                            .map(|b| match *b {
                                Bind::Known(i) => Bind::Known(g[i]),
                                Bind::Fresh => Bind::Fresh,
                            })
                            .collect();
                        ps.index[&(*c, moved)]
                    })
                    .collect()
            })
            .collect();
        let t = Rc::new(t);
        self.perm_tables.borrow_mut().insert(k, t.clone());
        t
    }

    fn cell(&self, w: &[Letter]) -> Result<bool, Error> {
        self.cells.get(&canonical(w)).copied().ok_or(Error::MissingCell)
    }

    /// The concrete column word of a probe over `base`, with fresh atoms
    /// numbered from `fresh_from`.
    fn probe_word(&self, probe: &ProbeKey, base: &[Atom], fresh_from: u32) -> Word {
        let cols = &self.derived.as_ref().expect("filled").cols;
        instantiate_word(&cols[probe.0], &probe.1, base, fresh_from)
    }

    fn classify(&mut self) {
        let (upper, lower) = {
            let d = self.derived.as_ref().expect("filled");
            (d.upper.clone(), d.lower.clone())
        };
        let mut interned: BTreeMap<(usize, Vec<bool>), usize> = BTreeMap::new();
        let mut classes: Vec<RowClass> = Vec::new();
        let mut rows = BTreeMap::new();
        let mut upper_classes = Vec::new();
        for (n, s) in upper.iter().chain(lower.iter()).enumerate() {
            let (k, w, regs, sym) = self.summarize(s);
            let id = *interned.entry((k, w.clone())).or_insert_with(|| {
                classes.push(RowClass { dim: k, values: w, sym, rep: s.clone() });
                classes.len() - 1
            });
            if n < upper.len() && !upper_classes.contains(&id) {
                upper_classes.push(id);
            }
            rows.insert(s.clone(), (id, regs));
        }
        let d = self.derived.as_mut().expect("filled");
        d.rows = rows;
        d.classes = classes;
        d.upper_classes = upper_classes;
    }

    /// Support, canonical register order, canonical values and symmetries of
    /// the row of a canonical row word.
    fn summarize(&self, s: &[Letter]) -> (usize, Vec<bool>, Vec<Atom>, SymGroup) {
        let atoms = word_atoms(s);
        let b = atoms.len();
        let fresh_from = b as u32;
        let full = self.probe_set(b);
        let f: Vec<bool> = full
            .list
            .iter()
            .map(|p| self.cell(&[s, &self.probe_word(p, &atoms, fresh_from)[..]].concat()).expect("filled cell"))
            .collect();
        // atom j is outside the support iff renaming it to a fresh atom never
        // changes a value
        let support: Vec<usize> = (0..b)
            .filter(|&j| {
                full.list.iter().enumerate().any(|(i, (c, binds))| {
                    binds.contains(&Bind::Known(j)) && {
                        let moved = swap_bind(binds, Bind::Known(j), Bind::Fresh);
                        f[i] != f[full.index[&(*c, moved)]]
                    }
                })
            })
            .collect();
        let k = support.len();
        let small = self.probe_set(k);
        let v: Vec<bool> = small
            .list
            .iter()
            .map(|(c, binds)| {
                let lifted: Vec<Bind> = binds
                    .iter()
                    .map(|bd| match *bd {
                        Bind::Known(i) => Bind::Known(support[i]),
                        Bind::Fresh => Bind::Fresh,
                    })
                    .collect();
                f[full.index[&(*c, lifted)]]
            })
            .collect();
        let perms = all_perms(k);
        let table = self.perm_table(k);
        let mut best = 0usize;
        for gi in 1..perms.len() {
            let (tb, tg) = (&table[best], &table[gi]);
            for q in 0..v.len() {
                match v[tg[q]].cmp(&v[tb[q]]) {
                    Ordering::Less => {
                        best = gi;
                        break;
                    }
                    Ordering::Greater => break,
                    Ordering::Equal => {}
                }
            }
        }
        let g = &perms[best];
        let w: Vec<bool> = table[best].iter().map(|&q| v[q]).collect();
        let regs: Vec<Atom> = g.iter().map(|&i| atoms[support[i]]).collect();
        let position: BTreeMap<&IndexPerm, usize> = perms.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let sym: Vec<IndexPerm> = perms
            .iter()
            .filter(|h| {
                let gh = compose_index(g, h);
                let t = &table[position[&gh]];
                t.iter().zip(&w).all(|(&q, &x)| v[q] == x)
            })
            .cloned()
            .collect();
        (k, w, regs, SymGroup::from_elements(k, sym))
    }

    /// The class and registers of the row of any word in the orbit of a row
    /// of `S ∪ S·A`.
    pub fn row_ref(&self, u: &[Letter]) -> Result<RowRef, Error> {
        let d = self.derived()?;
        let atoms = word_atoms(u);
        let (class, regs) = d
            .rows
            .get(&canonical(u))
            .ok_or(Error::Precondition("word is not in the orbit of a table row"))?;
        Ok(RowRef { class: *class, regs: regs.iter().map(|a| atoms[a.0 as usize]).collect() })
    }

    /// Row values over the probes of `base`; `base` must contain the registers.
    pub fn row_on(&self, r: &RowRef, base: &[Atom]) -> Result<Vec<bool>, Error> {
        let class = &self.derived()?.classes[r.class];
        let own = self.probe_set(class.dim);
        let ps = self.probe_set(base.len());
        Ok(ps
            .list
            .iter()
            .map(|(c, binds)| {
                let moved: Vec<Bind> = binds
                    .iter()
                    .map(|b| match *b {
                        Bind::Known(j) => match r.regs.iter().position(|&a| a == base[j]) {
                            Some(i) => Bind::Known(i),
                            None => Bind::Fresh,
                        },
                        Bind::Fresh => Bind::Fresh,
                    })
                    .collect();
                class.values[own.index[&(*c, moved)]]
            })
            .collect())
    }

    fn canonical_regs(&self, r: &RowRef) -> Result<Vec<Atom>, Error> {
        let class = &self.derived()?.classes[r.class];
        Ok(class.sym.elements().iter().map(|h| permute_regs(&r.regs, h)).min().unwrap_or_default())
    }

    pub fn refs_equal(&self, a: &RowRef, b: &RowRef) -> Result<bool, Error> {
        Ok(a.class == b.class && self.canonical_regs(a)? == self.canonical_regs(b)?)
    }

    pub fn refs_leq(&self, a: &RowRef, b: &RowRef) -> Result<bool, Error> {
        let base = union_list(&a.regs, &b.regs);
        let (x, y) = (self.row_on(a, &base)?, self.row_on(b, &base)?);
        Ok(x.iter().zip(&y).all(|(&p, &q)| !p || q))
    }

    /// `row(u) = row(v)`.
    pub fn rows_equal(&self, u: &[Letter], v: &[Letter]) -> Result<bool, Error> {
        self.refs_equal(&self.row_ref(u)?, &self.row_ref(v)?)
    }

    /// `row(u) ⊑ row(v)`.
    pub fn rows_leq(&self, u: &[Letter], v: &[Letter]) -> Result<bool, Error> {
        self.refs_leq(&self.row_ref(u)?, &self.row_ref(v)?)
    }

    /// `T(u·e)`, read directly from the cells.
    pub fn row_value(&self, u: &[Letter], e: &[Letter]) -> Result<bool, Error> {
        self.derived()?;
        self.cell(&[u, e].concat())
    }

    /// Concrete probe columns over `base`: every column with its classes sent
    /// to atoms of `base` or to fresh atoms above them.
    pub fn probes(&self, base: &[Atom]) -> Result<Vec<Word>, Error> {
        self.derived()?;
        let fresh_from = max_atom_plus_one(base);
        Ok(self.probe_set(base.len()).list.iter().map(|p| self.probe_word(p, base, fresh_from)).collect())
    }

    /// Row comparison by direct cell lookups over the probes of the atoms of
    /// both words. Slower than [`rows_equal`](Self::rows_equal); same answer.
    pub fn rows_equal_by_probes(&self, u: &[Letter], v: &[Letter]) -> Result<bool, Error> {
        let base = union_list(&word_atoms(u), &word_atoms(v));
        for e in self.probes(&base)? {
            if self.row_value(u, &e)? != self.row_value(v, &e)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Support of `row(u)`.
    pub fn row_support(&self, u: &[Letter]) -> Result<BTreeSet<Atom>, Error> {
        Ok(self.row_ref(u)?.regs.into_iter().collect())
    }

    /// The support of `row(u)` as a register tuple, and the permutations of
    /// that tuple fixing the row.
    pub fn row_symmetries(&self, u: &[Letter]) -> Result<(Vec<Atom>, SymGroup), Error> {
        let r = self.row_ref(u)?;
        let sym = self.derived()?.classes[r.class].sym.clone();
        Ok((r.regs, sym))
    }

    /// First instantiation of a candidate shape, over the atoms of `u` and
    /// fresh atoms, whose row equals `row(u)`.
    pub fn find_orbit_match(&self, u: &[Letter], candidates: &[Word]) -> Result<Option<Word>, Error> {
        let target = self.row_ref(u)?;
        let atoms = word_atoms(u);
        let fresh_from = max_atom_plus_one(&atoms);
        for sigma in candidates {
            for binds in placements(word_atoms(sigma).len(), atoms.len()) {
                let v = instantiate_word(sigma, &binds, &atoms, fresh_from);
                if let Ok(r) = self.row_ref(&v) {
                    if self.refs_equal(&target, &r)? {
                        return Ok(Some(v));
                    }
                }
            }
        }
        Ok(None)
    }

    /// First row of `S·A` whose orbit matches no row of `S`.
    pub fn find_unclosed(&self) -> Result<Option<Word>, Error> {
        let d = self.derived()?;
        for t in &d.lower {
            if !d.upper_classes.contains(&d.rows[t].0) {
                return Ok(Some(t.clone()));
            }
        }
        Ok(None)
    }

    /// First probe over the registers of both rows where `pred` holds.
    fn separating_probe(
        &self,
        a: &RowRef,
        b: &RowRef,
        fresh_from: u32,
        pred: impl Fn(bool, bool) -> bool,
    ) -> Result<Option<Word>, Error> {
        let base = union_list(&a.regs, &b.regs);
        let (x, y) = (self.row_on(a, &base)?, self.row_on(b, &base)?);
        let ps = self.probe_set(base.len());
        let fresh_from = fresh_from.max(max_atom_plus_one(&base));
        Ok((0..x.len()).find(|&i| pred(x[i], y[i])).map(|i| self.probe_word(&ps.list[i], &base, fresh_from)))
    }

    /// Places the atoms of canonical `s2` outside its registers over
    /// `available` plus fresh atoms, once the registers are already mapped.
    fn complete_instantiations(&self, s2: &[Letter], mapped: &BTreeMap<Atom, Atom>, available: &[Atom], fresh_from: u32) -> Vec<Word> {
        let rest: Vec<Atom> = word_atoms(s2).into_iter().filter(|a| !mapped.contains_key(a)).collect();
        placements(rest.len(), available.len())
            .into_iter()
            .map(|binds| {
                let mut m = mapped.clone();
                let mut next = fresh_from;
                for (a, b) in rest.iter().zip(&binds) {
                    let img = match *b {
                        Bind::Known(j) => available[j],
                        Bind::Fresh => {
                            next += 1;
                            Atom(next - 1)
                        }
                    };
                    m.insert(*a, img);
                }
                rename_word(s2, |a| m[&a])
            })
            .collect()
    }

    /// First violation of `s1 ~ s2 ⟹ s1·a ~ s2·a`, over orbit representatives
    /// of pairs of upper rows.
    pub fn find_inconsistent(&self) -> Result<Option<Witness>, Error> {
        let d = self.derived()?;
        for s1 in &d.upper {
            let r1 = self.row_ref(s1)?;
            let atoms1 = word_atoms(s1);
            let fresh_from = max_atom_plus_one(&atoms1);
            for s2 in &d.upper {
                let (c2, regs2) = &d.rows[s2];
                if *c2 != r1.class {
                    continue;
                }
                let mut seen = BTreeSet::new();
                for h in d.classes[r1.class].sym.elements() {
                    let target = permute_regs(&r1.regs, h);
                    let mapped: BTreeMap<Atom, Atom> = regs2.iter().copied().zip(target.iter().copied()).collect();
                    let available: Vec<Atom> = atoms1.iter().copied().filter(|a| !target.contains(a)).collect();
                    for s2i in self.complete_instantiations(s2, &mapped, &available, fresh_from) {
                        if s2i == *s1 || !seen.insert(s2i.clone()) {
                            continue;
                        }
                        if let Some(w) = self.first_letter_violation(s1, &s2i, |x, y| x != y)? {
                            return Ok(Some(w));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    fn first_letter_violation(
        &self,
        s1: &[Letter],
        s2: &[Letter],
        pred: impl Fn(bool, bool) -> bool + Copy,
    ) -> Result<Option<Witness>, Error> {
        let known = union_list(&word_atoms(s1), &word_atoms(s2));
        let fresh = Atom(max_atom_plus_one(&known));
        for l in self.alphabet.letters(&known, fresh) {
            let (u1, u2) = (concat(s1, l), concat(s2, l));
            let (a, b) = (self.row_ref(&u1)?, self.row_ref(&u2)?);
            if let Some(e) = self.separating_probe(&a, &b, fresh.0 + 1, pred)? {
                return Ok(Some(Witness { s1: s1.to_vec(), s2: s2.to_vec(), letter: l, column: e }));
            }
        }
        Ok(None)
    }

    /// First violation of `s1 ⊑ s2 ⟹ s1·a ⊑ s2·a` over upper rows.
    pub fn find_rfsa_inconsistent(&self) -> Result<Option<Witness>, Error> {
        let d = self.derived()?;
        for s1 in &d.upper {
            let r1 = self.row_ref(s1)?;
            let atoms1 = word_atoms(s1);
            let fresh_from = max_atom_plus_one(&atoms1);
            for s2 in &d.upper {
                let (c2, regs2) = &d.rows[s2];
                let mut seen = BTreeSet::new();
                for binds in placements(regs2.len(), atoms1.len()) {
                    let mut next = fresh_from;
                    let target: Vec<Atom> = binds
                        .iter()
                        .map(|b| match *b {
                            Bind::Known(j) => atoms1[j],
                            Bind::Fresh => {
                                next += 1;
                                Atom(next - 1)
                            }
                        })
                        .collect();
                    if !self.refs_leq(&r1, &RowRef { class: *c2, regs: target.clone() })? {
                        continue;
                    }
                    let mapped: BTreeMap<Atom, Atom> = regs2.iter().copied().zip(target.iter().copied()).collect();
                    let available: Vec<Atom> = atoms1.iter().copied().filter(|a| !target.contains(a)).collect();
                    for s2i in self.complete_instantiations(s2, &mapped, &available, next) {
                        if s2i == *s1 || !seen.insert(s2i.clone()) {
                            continue;
                        }
                        if let Some(w) = self.first_letter_violation(s1, &s2i, |x, y| x && !y)? {
                            return Ok(Some(w));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    /// Pointwise disjunction of rows over the probes of `base`.
    pub fn row_join(&self, us: &[Word], base: &[Atom]) -> Result<Vec<bool>, Error> {
        let mut out = vec![false; self.probe_set(base.len()).list.len()];
        for u in us {
            for (o, v) in out.iter_mut().zip(self.row_on(&self.row_ref(u)?, base)?) {
                *o |= v;
            }
        }
        Ok(out)
    }

    /// Whether each class is prime: not the join of one or more rows strictly
    /// below it, ranging over all instantiations of all rows of the table.
    pub fn prime_classes(&self) -> Result<Rc<Vec<bool>>, Error> {
        if let Some(p) = self.primes.borrow().as_ref() {
            return Ok(p.clone());
        }
        let n = self.derived()?.classes.len();
        let flags: Vec<bool> = (0..n).map(|c| self.is_prime(c)).collect::<Result<_, _>>()?;
        let flags = Rc::new(flags);
        *self.primes.borrow_mut() = Some(flags.clone());
        Ok(flags)
    }

    fn is_prime(&self, c: usize) -> Result<bool, Error> {
        let classes = &self.derived()?.classes;
        let k = classes[c].dim;
        let own = RowRef { class: c, regs: (0..k as u32).map(Atom).collect() };
        let target = &classes[c].values;
        // a join needs at least one strictly smaller row, so the empty row is prime
        if target.iter().all(|v| !v) {
            return Ok(true);
        }
        let small = self.probe_set(k);
        let mut join = vec![false; target.len()];
        for (d, class) in classes.iter().enumerate() {
            for binds in placements(class.dim, k) {
                let mut next = k as u32;
                let regs: Vec<Atom> = binds
                    .iter()
                    .map(|b| match *b {
                        Bind::Known(i) => Atom(i as u32),
                        Bind::Fresh => {
                            next += 1;
                            Atom(next - 1)
                        }
                    })
                    .collect();
                let cand = RowRef { class: d, regs };
                let base = union_list(&own.regs, &cand.regs);
                let (x, y) = (self.row_on(&cand, &base)?, self.row_on(&own, &base)?);
                let below = x.iter().zip(&y).all(|(&p, &q)| !p || q);
                if !below || x == y {
                    continue;
                }
                let ps = self.probe_set(base.len());
                for (i, _) in x.iter().enumerate().filter(|(_, &v)| v) {
                    let (col, binds) = &ps.list[i];
                    let projected: Vec<Bind> = binds
                        .iter()
                        .map(|b| match *b {
                            Bind::Known(j) if j < k => Bind::Known(j),
                            _ => Bind::Fresh,
                        })
                        .collect();
                    join[small.index[&(*col, projected)]] = true;
                }
            }
        }
        Ok(join != *target)
    }

    /// Prime classes of the whole table, and those occurring among the upper rows.
    pub fn prime_rows(&self) -> Result<(Vec<usize>, Vec<usize>), Error> {
        let flags = self.prime_classes()?;
        let d = self.derived()?;
        let pr: Vec<usize> = (0..flags.len()).filter(|&c| flags[c]).collect();
        let top: Vec<usize> = d.upper_classes.iter().copied().filter(|&c| flags[c]).collect();
        Ok((pr, top))
    }

    /// First row of `S·A` that is prime but whose orbit does not occur in `S`.
    pub fn find_rfsa_unclosed(&self) -> Result<Option<Word>, Error> {
        let flags = self.prime_classes()?;
        let d = self.derived()?;
        for t in &d.lower {
            let c = d.rows[t].0;
            if flags[c] && !d.upper_classes.contains(&c) {
                return Ok(Some(t.clone()));
            }
        }
        Ok(None)
    }

    /// Stable textual dump: one line per row orbit and column orbit listing the
    /// joint orbits and their values.
    pub fn dump(&self) -> Result<String, Error> {
        let d = self.derived()?;
        let show = |w: &[Letter]| self.alphabet.show_word(w);
        let mut out = String::new();
        let cols: Vec<String> = d.cols.iter().map(|c| show(c)).collect();
        let _ = writeln!(out, "E: {}", cols.join(" | "));
        for (part, words) in [("S", &d.upper), ("S·A", &d.lower)] {
            for s in words.iter() {
                let (class, regs) = &d.rows[s];
                let _ = write!(out, "{part} {} [class {class}, support {:?}]:", show(s), regs.iter().map(|a| a.0).collect::<Vec<_>>());
                for tau in &d.cols {
                    let _ = write!(out, " {} {{", show(tau));
                    let cells: Vec<String> = joint_words(s, tau)
                        .into_iter()
                        .map(|(_, w)| alloc::format!("{}={}", show(&w[s.len()..]), u8::from(self.cells[&canonical(&w)])))
                        .collect();
                    let _ = write!(out, "{}}}", cells.join(", "));
                }
                out.push('\n');
            }
        }
        Ok(out)
    }
}
