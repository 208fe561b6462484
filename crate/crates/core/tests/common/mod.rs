#![allow(dead_code)]

use std::collections::BTreeSet;

use nominal_core::automata::{Acceptor, Alphabet};
use nominal_core::kernel::{Atom, Letter, Perm, Word};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

pub const CASES: u32 = 1000;

/// Atoms used by random words and permutations.
pub const POOL: u32 = 8;

pub fn runner() -> TestRunner {
    TestRunner::new(Config { cases: CASES, ..Config::default() })
}

pub fn perms() -> impl Strategy<Value = Perm> {
    Just((0..POOL).collect::<Vec<u32>>())
        .prop_shuffle()
        .prop_map(|img| Perm::from_pairs((0..POOL).map(|i| (Atom(i), Atom(img[i as usize])))).unwrap())
}

pub fn atom_words(max_len: usize, atoms: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..atoms, 0..=max_len)
}

/// Random well-formed words over `alphabet` with atoms below `atoms`.
pub fn words(alphabet: &Alphabet, max_len: usize, atoms: u32) -> impl Strategy<Value = Word> {
    let arities: Vec<u8> = alphabet.tags().iter().map(|t| t.arity).collect();
    let n = arities.len() as u16;
    prop::collection::vec((0..n, 0..atoms), 0..=max_len).prop_map(move |ls| {
        ls.into_iter()
            .map(|(tag, a)| Letter { tag, atom: (arities[tag as usize] == 1).then_some(Atom(a)) })
            .collect()
    })
}

pub fn letters(alphabet: &Alphabet, atoms: u32) -> impl Strategy<Value = Letter> {
    let arities: Vec<u8> = alphabet.tags().iter().map(|t| t.arity).collect();
    let n = arities.len() as u16;
    (0..n, 0..atoms)
        .prop_map(move |(tag, a)| Letter { tag, atom: (arities[tag as usize] == 1).then_some(Atom(a)) })
}

/// Every canonical word (atoms introduced in increasing order) of length
/// exactly `len`.
pub fn canonical_words(alphabet: &Alphabet, len: usize) -> Vec<Word> {
    fn go(alphabet: &Alphabet, len: usize, next: u32, cur: &mut Word, out: &mut Vec<Word>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for (i, t) in alphabet.tags().iter().enumerate() {
            if t.arity == 0 {
                cur.push(Letter { tag: i as u16, atom: None });
                go(alphabet, len, next, cur, out);
                cur.pop();
            } else {
                for a in 0..=next {
                    cur.push(Letter { tag: i as u16, atom: Some(Atom(a)) });
                    go(alphabet, len, next.max(a + 1), cur, out);
                    cur.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    go(alphabet, len, 0, &mut Vec::new(), &mut out);
    out
}

/// Configurations of `a` reached by reading `w`.
pub fn reach<A: Acceptor>(a: &A, w: &[Letter]) -> BTreeSet<A::Config> {
    let known: BTreeSet<Atom> = w.iter().filter_map(|l| l.atom).collect();
    let mut cs: BTreeSet<A::Config> = a.initial().into_iter().collect();
    for &l in w {
        cs = cs.iter().flat_map(|c| a.step(c, l, &known)).map(|c| a.normalize(&c)).collect();
    }
    cs
}

/// Stirling numbers of the second kind by the usual recurrence.
pub fn stirling2(n: usize, k: usize) -> u64 {
    let mut row = vec![1u64];
    for i in 1..=n {
        let mut next = vec![0u64; i + 1];
        for j in 1..=i {
            let keep = if j < row.len() { j as u64 * row[j] } else { 0 };
            next[j] = keep + row[j - 1];
        }
        row = next;
    }
    row.get(k).copied().unwrap_or(0)
}
