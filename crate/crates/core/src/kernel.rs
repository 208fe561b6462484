//! Atoms, permutations, equality shapes of data words, and small symmetry groups.
//!
//! Everything here is a finite representative of some infinite nominal object:
//! a [`Shape`] stands for one orbit of words, a [`SymGroup`] for the local
//! symmetries of one orbit of states.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;

/// An equality atom. Only `==` is meaningful; the numeric id is a name.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Atom(pub u32);

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The smallest atom not contained in `used`.
pub fn fresh_atom<'a>(used: impl IntoIterator<Item = &'a Atom>) -> Atom {
    let used: BTreeSet<u32> = used.into_iter().map(|a| a.0).collect();
    let mut n = 0;
    while used.contains(&n) {
        n += 1;
    }
    Atom(n)
}

/// A permutation of atoms with finite support, stored as its non-identity part.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Perm {
    map: BTreeMap<Atom, Atom>,
}

impl Perm {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Transposition of two atoms.
    pub fn swap(a: Atom, b: Atom) -> Self {
        let mut map = BTreeMap::new();
        if a != b {
            map.insert(a, b);
            map.insert(b, a);
        }
        Perm { map }
    }

    /// Builds a permutation from explicit pairs `(from, to)`.
    ///
    /// The pairs must describe an injective map whose image of its domain is
    /// the domain itself; otherwise `None`.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Atom, Atom)>) -> Option<Self> {
        let mut map = BTreeMap::new();
        let mut image = BTreeSet::new();
        for (a, b) in pairs {
            if map.insert(a, b).is_some() || !image.insert(b) {
                return None;
            }
        }
        let dom: BTreeSet<Atom> = map.keys().copied().collect();
        if dom != image {
            return None;
        }
        map.retain(|a, b| a != b);
        Some(Perm { map })
    }

    /// Extends an injective partial map to a finite permutation by closing
    /// its open chains.
    pub fn extend_injection(pairs: &BTreeMap<Atom, Atom>) -> Self {
        let mut map = pairs.clone();
        let image: BTreeSet<Atom> = pairs.values().copied().collect();
        // Chains end at atoms in the image that are not in the domain; map them
        // back to the chain starts (domain atoms not in the image).
        let mut starts: Vec<Atom> = pairs.keys().filter(|a| !image.contains(a)).copied().collect();
        let mut ends: Vec<Atom> = image.iter().filter(|b| !pairs.contains_key(b)).copied().collect();
        starts.sort();
        ends.sort();
        for (e, s) in ends.into_iter().zip(starts) {
            map.insert(e, s);
        }
        map.retain(|a, b| a != b);
        Perm { map }
    }

    pub fn apply(&self, a: Atom) -> Atom {
        self.map.get(&a).copied().unwrap_or(a)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        let mut map = BTreeMap::new();
        for &a in self.map.keys().chain(other.map.keys()) {
            let b = self.apply(other.apply(a));
            if a != b {
                map.insert(a, b);
            }
        }
        Perm { map }
    }

    pub fn inverse(&self) -> Perm {
        Perm { map: self.map.iter().map(|(&a, &b)| (b, a)).collect() }
    }

    pub fn support(&self) -> impl Iterator<Item = Atom> + '_ {
        self.map.keys().copied()
    }

    pub fn apply_all(&self, atoms: &[Atom]) -> Vec<Atom> {
        atoms.iter().map(|&a| self.apply(a)).collect()
    }
}

/// First-occurrence canonical form of a sequence of atoms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Shape(Vec<u32>);

impl Shape {
    /// Checks the canonical-form invariant.
    pub fn new(codes: Vec<u32>) -> Result<Self, Error> {
        let mut next = 0u32;
        for (i, &c) in codes.iter().enumerate() {
            if c > next {
                return Err(Error::MalformedShape { position: i });
            }
            if c == next {
                next += 1;
            }
        }
        Ok(Shape(codes))
    }

    pub fn empty() -> Self {
        Shape(Vec::new())
    }

    pub fn codes(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of distinct atoms in any word of this orbit.
    pub fn classes(&self) -> usize {
        self.0.iter().map(|&c| c as usize + 1).max().unwrap_or(0)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Renames atoms by order of first occurrence.
pub fn shape_of(word: &[Atom]) -> Shape {
    let mut seen: Vec<Atom> = Vec::new();
    let codes = word
        .iter()
        .map(|a| match seen.iter().position(|b| b == a) {
            Some(i) => i as u32,
            None => {
                seen.push(*a);
                (seen.len() - 1) as u32
            }
        })
        .collect();
    Shape(codes)
}

pub fn canonical_word(s: &Shape) -> Vec<Atom> {
    s.0.iter().map(|&c| Atom(c)).collect()
}

/// All shapes of length `n`, in lexicographic order. There are Bell(n) of them.
pub fn enumerate_shapes(n: usize) -> Vec<Shape> {
    fn go(prefix: &mut Vec<u32>, next: u32, n: usize, out: &mut Vec<Shape>) {
        if prefix.len() == n {
            out.push(Shape(prefix.clone()));
            return;
        }
        for c in 0..=next {
            prefix.push(c);
            go(prefix, if c == next { next + 1 } else { next }, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), 0, n, &mut out);
    out
}

/// Where one equality class of a column word lands when the column is
/// instantiated next to a row word with `base` known atoms.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Bind {
    /// Equal to the known atom with this index.
    Known(usize),
    /// A fresh atom, distinct from every known atom and every other fresh class.
    Fresh,
}

/// All injective placements of `classes` equality classes into `base` known
/// atoms plus fresh atoms. Order: each class tries known atoms in index order,
/// then fresh.
pub fn placements(classes: usize, base: usize) -> Vec<Vec<Bind>> {
    fn go(cur: &mut Vec<Bind>, used: &mut Vec<bool>, classes: usize, out: &mut Vec<Vec<Bind>>) {
        if cur.len() == classes {
            out.push(cur.clone());
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                cur.push(Bind::Known(j));
                go(cur, used, classes, out);
                cur.pop();
                used[j] = false;
            }
        }
        cur.push(Bind::Fresh);
        go(cur, used, classes, out);
        cur.pop();
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; base], classes, &mut out);
    out
}

/// Instantiates class indices via `binds` over the known atom list `known`;
/// fresh classes receive consecutive atoms starting at `fresh_from`.
pub fn instantiate(codes: &[u32], binds: &[Bind], known: &[Atom], fresh_from: u32) -> Vec<Atom> {
    let mut images = Vec::with_capacity(binds.len());
    let mut next = fresh_from;
    for b in binds {
        images.push(match *b {
            Bind::Known(j) => known[j],
            Bind::Fresh => {
                let a = Atom(next);
                next += 1;
                a
            }
        });
    }
    codes.iter().map(|&c| images[c as usize]).collect()
}

/// Shapes of all orbits of concatenations `u·v` with `u ∈ orb(sigma)`,
/// `v ∈ orb(tau)`.
pub fn joint_shapes(sigma: &Shape, tau: &Shape) -> Vec<Shape> {
    let base = sigma.classes();
    let known: Vec<Atom> = (0..base as u32).map(Atom).collect();
    placements(tau.classes(), base)
        .into_iter()
        .map(|binds| {
            let mut w = canonical_word(sigma);
            w.extend(instantiate(tau.codes(), &binds, &known, base as u32));
            shape_of(&w)
        })
        .collect()
}

/// Number of orbits of `A^(k_1) × … × A^(k_n)` (tuples of pairwise distinct
/// atoms), by enumerating joint equality patterns.
pub fn count_product_orbits(dims: &[usize]) -> usize {
    // Place the tuples one after another; each new block places its k atoms
    // injectively into the atoms seen so far, or fresh.
    fn go(dims: &[usize], seen: usize) -> usize {
        match dims.split_first() {
            None => 1,
            Some((&k, rest)) => placements(k, seen)
                .into_iter()
                .map(|p| go(rest, seen + p.iter().filter(|b| **b == Bind::Fresh).count()))
                .sum(),
        }
    }
    go(dims, 0)
}

/// Shapes of all prefixes of the shape, from `[]` up to the shape itself.
pub fn prefixes_of(s: &Shape) -> BTreeSet<Shape> {
    (0..=s.len()).map(|i| Shape(s.0[..i].to_vec())).collect()
}

/// Re-canonicalized shapes of all suffixes, from the shape itself down to `[]`.
pub fn suffixes_of(s: &Shape) -> BTreeSet<Shape> {
    let w = canonical_word(s);
    (0..=s.len()).map(|i| shape_of(&w[i..])).collect()
}

/// A permutation of `{0..k-1}` in image-list form: `p[i]` is the image of `i`.
pub type IndexPerm = Vec<usize>;

pub fn identity_perm(k: usize) -> IndexPerm {
    (0..k).collect()
}

/// `(p ∘ q)[i] = p[q[i]]`.
pub fn compose_index(p: &[usize], q: &[usize]) -> IndexPerm {
    q.iter().map(|&i| p[i]).collect()
}

pub fn invert_index(p: &[usize]) -> IndexPerm {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

pub fn is_index_perm(p: &[usize], k: usize) -> bool {
    if p.len() != k {
        return false;
    }
    let mut seen = vec![false; k];
    p.iter().all(|&j| j < k && !core::mem::replace(&mut seen[j], true))
}

/// All permutations of `{0..k-1}` in lexicographic order.
pub fn all_perms(k: usize) -> Vec<IndexPerm> {
    let mut out = Vec::new();
    let mut cur = identity_perm(k);
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// A subgroup of the symmetric group `S_k`, stored extensionally.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SymGroup {
    degree: usize,
    elements: Vec<IndexPerm>,
}

impl SymGroup {
    pub fn trivial(k: usize) -> Self {
        SymGroup { degree: k, elements: vec![identity_perm(k)] }
    }

    pub fn symmetric(k: usize) -> Self {
        SymGroup { degree: k, elements: all_perms(k) }
    }

    /// Wraps a set already known to be a group. Sorts the elements.
    pub(crate) fn from_elements(degree: usize, mut elements: Vec<IndexPerm>) -> Self {
        elements.sort();
        elements.dedup();
        SymGroup { degree, elements }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Elements in lexicographic order; the identity comes first.
    pub fn elements(&self) -> &[IndexPerm] {
        &self.elements
    }

    pub fn contains(&self, p: &[usize]) -> bool {
        self.elements.binary_search_by(|e| e.as_slice().cmp(p)).is_ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }
}

/// Smallest subgroup of `S_k` containing the generators.
pub fn group_closure(k: usize, generators: &[IndexPerm]) -> Result<SymGroup, Error> {
    for g in generators {
        if !is_index_perm(g, k) {
            return Err(Error::NotAPermutation { degree: k });
        }
    }
    let mut elems: BTreeSet<IndexPerm> = BTreeSet::new();
    elems.insert(identity_perm(k));
    let mut frontier = vec![identity_perm(k)];
    while let Some(e) = frontier.pop() {
        for g in generators {
            let n = compose_index(g, &e);
            if elems.insert(n.clone()) {
                frontier.push(n);
            }
        }
    }
    Ok(SymGroup { degree: k, elements: elems.into_iter().collect() })
}

/// A letter: a tag from the alphabet and, for arity-1 tags, one atom.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Letter {
    pub tag: u16,
    pub atom: Option<Atom>,
}

impl Letter {
    pub fn atom(a: u32) -> Self {
        Letter { tag: 0, atom: Some(Atom(a)) }
    }

    pub fn tagged(tag: u16, atom: Option<Atom>) -> Self {
        Letter { tag, atom }
    }

    pub fn rename(self, f: impl Fn(Atom) -> Atom) -> Self {
        Letter { tag: self.tag, atom: self.atom.map(f) }
    }
}

pub type Word = Vec<Letter>;

/// Word over the single anonymous arity-1 tag.
pub fn atom_word(ids: &[u32]) -> Word {
    ids.iter().map(|&a| Letter::atom(a)).collect()
}

/// Atoms of a word in order of first occurrence.
pub fn word_atoms(w: &[Letter]) -> Vec<Atom> {
    let mut seen = Vec::new();
    for l in w {
        if let Some(a) = l.atom {
            if !seen.contains(&a) {
                seen.push(a);
            }
        }
    }
    seen
}

pub fn rename_word(w: &[Letter], f: impl Fn(Atom) -> Atom) -> Word {
    w.iter().map(|l| l.rename(&f)).collect()
}

pub fn permute_word(w: &[Letter], p: &Perm) -> Word {
    rename_word(w, |a| p.apply(a))
}

/// Canonical representative of the orbit of `w`: atoms renamed to `0, 1, …`
/// by first occurrence. Tags are kept.
pub fn canonical(w: &[Letter]) -> Word {
    let atoms = word_atoms(w);
    rename_word(w, |a| Atom(atoms.iter().position(|b| *b == a).unwrap() as u32))
}

pub fn is_canonical(w: &[Letter]) -> bool {
    canonical(w) == w
}

/// Equality shape of the atom subsequence of a word.
pub fn word_shape(w: &[Letter]) -> Shape {
    let atoms: Vec<Atom> = w.iter().filter_map(|l| l.atom).collect();
    shape_of(&atoms)
}

/// Canonical words for every orbit of `u·v`, `u ∈ orb(sigma)`, `v ∈ orb(tau)`,
/// together with the placement of `tau`'s classes that produced each.
/// Both inputs must be canonical.
pub fn joint_words(sigma: &[Letter], tau: &[Letter]) -> Vec<(Vec<Bind>, Word)> {
    let known = word_atoms(sigma);
    let tau_atoms = word_atoms(tau);
    placements(tau_atoms.len(), known.len())
        .into_iter()
        .map(|binds| {
            let mut w = sigma.to_vec();
            w.extend(instantiate_word(tau, &binds, &known, known.len() as u32));
            (binds, w)
        })
        .collect()
}

/// Instantiates a canonical word's classes by `binds` (see [`instantiate`]).
pub fn instantiate_word(tau: &[Letter], binds: &[Bind], known: &[Atom], fresh_from: u32) -> Word {
    let mut images = Vec::with_capacity(binds.len());
    let mut next = fresh_from;
    for b in binds {
        images.push(match *b {
            Bind::Known(j) => known[j],
            Bind::Fresh => {
                next += 1;
                Atom(next - 1)
            }
        });
    }
    rename_word(tau, |a| images[a.0 as usize])
}

pub fn word_prefixes(w: &[Letter]) -> BTreeSet<Word> {
    (0..=w.len()).map(|i| canonical(&w[..i])).collect()
}

pub fn word_suffixes(w: &[Letter]) -> BTreeSet<Word> {
    (0..=w.len()).map(|i| canonical(&w[i..])).collect()
}
