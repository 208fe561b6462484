//! Equivalence oracles: breadth-first search over jointly canonicalized
//! product configurations.
//!
//! Both sides are run as sets of configurations, which covers deterministic
//! acceptors (singleton sets) and the subset construction for NFAs. Atoms are
//! renamed to `0, 1, …` at every node, so the search visits one node per orbit
//! of reachable pairs. A letter is either an atom already held somewhere in
//! the pair or one fresh atom; by equivariance no other choice can matter.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::automata::{canonicalize, Acceptor};
use crate::error::Error;
use crate::kernel::{Atom, Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivOptions {
    /// Bound on distinct canonical product configurations.
    pub max_configs: usize,
    /// Discharge NFA pairs implied by the congruence closure of visited pairs.
    pub prune: bool,
    /// Re-run every fresh-letter step with a second fresh atom and assert the
    /// outcome is the same orbit.
    pub check_two_fresh: bool,
}

impl Default for EquivOptions {
    fn default() -> Self {
        EquivOptions { max_configs: 1_000_000, prune: true, check_two_fresh: cfg!(debug_assertions) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equal,
    EqualUpToDepth(usize),
    Counterexample(Word),
}

impl Verdict {
    pub fn counterexample(&self) -> Option<&Word> {
        match self {
            Verdict::Counterexample(w) => Some(w),
            _ => None,
        }
    }
}

/// Default depth bound for bounded NFA equivalence.
pub fn default_depth(target_orbits: usize) -> usize {
    3 * (target_orbits + 1)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Side<X, Y> {
    L(X),
    R(Y),
}

type Key<X, Y> = (Vec<Side<X, Y>>, Vec<Atom>);

type NodeSet<A, B> = BTreeSet<Side<<A as Acceptor>::Config, <B as Acceptor>::Config>>;

struct Node<X, Y> {
    items: Vec<Side<X, Y>>,
    /// Atoms placeholders must avoid besides those held by `items`.
    extra: Vec<Atom>,
    depth: usize,
    parent: Option<(usize, Letter, BTreeMap<Atom, Atom>)>,
}

struct Engine<'a, A: Acceptor, B: Acceptor> {
    a: &'a A,
    b: &'a B,
    opts: &'a EquivOptions,
}

impl<'a, A: Acceptor, B: Acceptor> Engine<'a, A, B> {
    fn atoms(&self, s: &Side<A::Config, B::Config>) -> Vec<Atom> {
        match s {
            Side::L(c) => self.a.atoms(c),
            Side::R(c) => self.b.atoms(c),
        }
    }

    fn has_wild(&self, s: &Side<A::Config, B::Config>) -> bool {
        match s {
            Side::L(c) => self.a.has_wild(c),
            Side::R(c) => self.b.has_wild(c),
        }
    }

    fn accepting(&self, items: &[Side<A::Config, B::Config>]) -> (bool, bool) {
        let l = items.iter().any(|s| matches!(s, Side::L(c) if self.a.is_accepting(c)));
        let r = items.iter().any(|s| matches!(s, Side::R(c) if self.b.is_accepting(c)));
        (l, r)
    }

    fn canon(
        &self,
        items: &[Side<A::Config, B::Config>],
        extra: &BTreeSet<Atom>,
    ) -> (Key<A::Config, B::Config>, BTreeMap<Atom, Atom>) {
        let (out, ex, map) = canonicalize(
            items,
            |s| match s {
                Side::L(c) => self.a.orderings(c),
                Side::R(c) => self.b.orderings(c),
            },
            |s, f| match s {
                Side::L(c) => Side::L(self.a.rename(c, f)),
                Side::R(c) => Side::R(self.b.rename(c, f)),
            },
            |s| match s {
                Side::L(c) => Side::L(self.a.normalize(c)),
                Side::R(c) => Side::R(self.b.normalize(c)),
            },
            extra,
        );
        ((out, ex), map)
    }

    fn known(&self, node: &Node<A::Config, B::Config>) -> BTreeSet<Atom> {
        let mut k: BTreeSet<Atom> = node.items.iter().flat_map(|s| self.atoms(s)).collect();
        k.extend(node.extra.iter().copied());
        k
    }

    /// Successor of `node` on `l`, canonicalized, with the renaming from the
    /// parent's coordinates to the child's.
    fn successor(
        &self,
        node: &Node<A::Config, B::Config>,
        known: &BTreeSet<Atom>,
        l: Letter,
    ) -> (Key<A::Config, B::Config>, BTreeMap<Atom, Atom>) {
        let mut next: BTreeSet<Side<A::Config, B::Config>> = BTreeSet::new();
        for s in &node.items {
            match s {
                Side::L(c) => next.extend(self.a.step(c, l, known).into_iter().map(|d| Side::L(self.a.normalize(&d)))),
                Side::R(c) => next.extend(self.b.step(c, l, known).into_iter().map(|d| Side::R(self.b.normalize(&d)))),
            }
        }
        let items: Vec<_> = next.into_iter().collect();
        let mut extra = BTreeSet::new();
        if items.iter().any(|s| self.has_wild(s)) {
            let held: BTreeSet<Atom> = items.iter().flat_map(|s| self.atoms(s)).collect();
            extra = known.iter().copied().chain(l.atom).filter(|x| !held.contains(x)).collect();
        }
        self.canon(&items, &extra)
    }

    fn run(&self, depth: Option<usize>, prune: bool) -> Result<Verdict, Error> {
        let alphabet = self.a.alphabet();
        let mut init: Vec<Side<A::Config, B::Config>> = Vec::new();
        init.extend(self.a.initial().into_iter().map(|c| Side::L(self.a.normalize(&c))));
        init.extend(self.b.initial().into_iter().map(|c| Side::R(self.b.normalize(&c))));
        init.sort();
        init.dedup();
        let (key, rho0) = self.canon(&init, &BTreeSet::new());
        let mut nodes: Vec<Node<A::Config, B::Config>> =
            vec![Node { items: key.0.clone(), extra: key.1.clone(), depth: 0, parent: None }];
        let mut index: BTreeMap<Key<A::Config, B::Config>, usize> = BTreeMap::new();
        index.insert(key, 0);
        let (l0, r0) = self.accepting(&nodes[0].items);
        if l0 != r0 {
            return Ok(Verdict::Counterexample(Vec::new()));
        }
        let mut rules: Vec<(NodeSet<A, B>, NodeSet<A, B>)> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            if let Some(d) = depth {
                if nodes[i].depth >= d {
                    continue;
                }
            }
            if prune {
                let wild = nodes[i].items.iter().any(|s| self.has_wild(s));
                if !wild {
                    let (x, y): (BTreeSet<_>, BTreeSet<_>) = {
                        let x = nodes[i].items.iter().filter(|s| matches!(s, Side::L(_))).cloned().collect();
                        let y = nodes[i].items.iter().filter(|s| matches!(s, Side::R(_))).cloned().collect();
                        (x, y)
                    };
                    if close(&x, &rules) == close(&y, &rules) {
                        continue;
                    }
                    rules.push((x, y));
                }
            }
            let known = self.known(&nodes[i]);
            let fresh = Atom(known.iter().map(|a| a.0 + 1).max().unwrap_or(0));
            let known_list: Vec<Atom> = known.iter().copied().collect();
            for l in alphabet.letters(&known_list, fresh) {
                let (key, rho) = self.successor(&nodes[i], &known, l);
                if self.opts.check_two_fresh && l.atom == Some(fresh) {
                    let other = Letter { tag: l.tag, atom: Some(Atom(fresh.0 + 1)) };
                    let (key2, _) = self.successor(&nodes[i], &known, other);
                    assert!(key == key2, "two fresh atoms led to different product orbits");
                }
                if index.contains_key(&key) {
                    continue;
                }
                if nodes.len() >= self.opts.max_configs {
                    return Err(Error::ConfigCap { cap: self.opts.max_configs });
                }
                let j = nodes.len();
                let (la, ra) = self.accepting(&key.0);
                nodes.push(Node {
                    items: key.0.clone(),
                    extra: key.1.clone(),
                    depth: nodes[i].depth + 1,
                    parent: Some((i, l, rho)),
                });
                if la != ra {
                    return Ok(Verdict::Counterexample(reconstruct(&nodes, j, &rho0)));
                }
                index.insert(key, j);
                queue.push_back(j);
            }
        }
        Ok(match depth {
            Some(d) => Verdict::EqualUpToDepth(d),
            None => Verdict::Equal,
        })
    }
}

/// Normal form of `z` under the rewriting `U ↔ U ∪ V` for every pair.
fn close<T: Ord + Clone>(z: &BTreeSet<T>, rules: &[(BTreeSet<T>, BTreeSet<T>)]) -> BTreeSet<T> {
    let mut z = z.clone();
    loop {
        let before = z.len();
        for (u, v) in rules {
            if u.is_subset(&z) && !v.is_subset(&z) {
                z.extend(v.iter().cloned());
            }
            if v.is_subset(&z) && !u.is_subset(&z) {
                z.extend(u.iter().cloned());
            }
        }
        if z.len() == before {
            return z;
        }
    }
}

/// Concrete word reaching node `j`: canonical coordinates are mapped back to
/// actual atoms along the parent chain, and fresh letters get atoms never used
/// before.
fn reconstruct<X, Y>(nodes: &[Node<X, Y>], j: usize, rho0: &BTreeMap<Atom, Atom>) -> Word {
    let mut chain = Vec::new();
    let mut cur = j;
    while let Some((p, l, rho)) = &nodes[cur].parent {
        chain.push((*l, rho));
        cur = *p;
    }
    chain.reverse();
    // coordinates of the current node -> actual atoms
    let mut phi: BTreeMap<Atom, Atom> = rho0.iter().map(|(&a, &c)| (c, a)).collect();
    let mut next_unused = phi.values().map(|a| a.0 + 1).max().unwrap_or(0);
    let mut word = Vec::new();
    for (l, rho) in chain {
        let actual = l.atom.map(|x| match phi.get(&x) {
            Some(&a) => a,
            None => {
                let a = Atom(next_unused);
                next_unused += 1;
                phi.insert(x, a);
                a
            }
        });
        word.push(Letter { tag: l.tag, atom: actual });
        phi = rho.iter().filter_map(|(p, c)| phi.get(p).map(|&a| (*c, a))).collect();
    }
    word
}

/// Exact equivalence of two deterministic, orbit-finite acceptors. A
/// counterexample is a shortest word in the symmetric difference.
pub fn dfa_equiv<A: Acceptor, B: Acceptor>(a: &A, b: &B, opts: &EquivOptions) -> Result<Verdict, Error> {
    if !a.is_deterministic() || !b.is_deterministic() {
        return Err(Error::Unsupported("dfa_equiv needs deterministic acceptors"));
    }
    if a.alphabet() != b.alphabet() {
        return Err(Error::Invalid("acceptors over different alphabets".into()));
    }
    Engine { a, b, opts }.run(None, false)
}

/// Equivalence on all words of length at most `depth`, for arbitrary
/// acceptors.
pub fn nfa_equiv_bounded<A: Acceptor, B: Acceptor>(
    a: &A,
    b: &B,
    depth: usize,
    opts: &EquivOptions,
) -> Result<Verdict, Error> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::Invalid("acceptors over different alphabets".into()));
    }
    Engine { a, b, opts }.run(Some(depth), opts.prune)
}

/// Number of orbits of reachable configurations of a deterministic acceptor.
pub fn reachable_orbits<A: Acceptor>(a: &A, cap: usize) -> Result<usize, Error> {
    let canon = |c: &A::Config| {
        canonicalize(
            core::slice::from_ref(c),
            |c| a.orderings(c),
            |c, f| a.rename(c, f),
            |c| a.normalize(c),
            &BTreeSet::new(),
        )
        .0
    };
    let mut seen: BTreeSet<Vec<A::Config>> = BTreeSet::new();
    let mut queue = VecDeque::new();
    for c in a.initial() {
        let k = canon(&c);
        if seen.insert(k.clone()) {
            queue.push_back(k);
        }
    }
    while let Some(cs) = queue.pop_front() {
        for c in &cs {
            let known: BTreeSet<Atom> = a.atoms(c).into_iter().collect();
            let list: Vec<Atom> = known.iter().copied().collect();
            let fresh = Atom(list.iter().map(|x| x.0 + 1).max().unwrap_or(0));
            for l in a.alphabet().letters(&list, fresh) {
                for d in a.step(c, l, &known) {
                    let k = canon(&d);
                    if seen.insert(k.clone()) {
                        if seen.len() > cap {
                            return Err(Error::ConfigCap { cap });
                        }
                        queue.push_back(k);
                    }
                }
            }
        }
    }
    Ok(seen.len())
}
