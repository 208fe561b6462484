use alloc::string::String;
use core::fmt;

/// Errors raised by the kernel, the automata, the teachers and the learners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    MalformedShape { position: usize },
    NotAPermutation { degree: usize },
    UnknownTag { tag: u16 },
    ArityMismatch { tag: u16 },
    DuplicateLabel(String),
    /// A tag arity other than 0 or 1.
    UnsupportedArity { label: String, arity: u8 },
    /// The automaton violates a well-formedness condition.
    Invalid(String),
    /// The product search exceeded its bound on canonical configurations.
    ConfigCap { cap: usize },
    /// A table cell was read before being filled.
    MissingCell,
    /// A learner step was called on a table that does not meet its precondition.
    Precondition(&'static str),
    /// A teacher answered with a word that does not separate hypothesis and target.
    BadCounterexample(String),
    /// A progress or bound assertion failed during learning.
    Assertion(String),
    /// The acceptor kind is not supported by the requested operation.
    Unsupported(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::MalformedShape { position } => {
                write!(f, "malformed shape: code at position {position} skips a class")
            }
            Error::NotAPermutation { degree } => write!(f, "not a permutation of degree {degree}"),
            Error::UnknownTag { tag } => write!(f, "unknown tag #{tag}"),
            Error::ArityMismatch { tag } => write!(f, "arity mismatch for tag #{tag}"),
            Error::DuplicateLabel(l) => write!(f, "duplicate label `{l}`"),
            Error::UnsupportedArity { label, arity } => {
                write!(f, "tag `{label}` has arity {arity}; only 0 and 1 are supported")
            }
            Error::Invalid(msg) => write!(f, "invalid automaton: {msg}"),
            Error::ConfigCap { cap } => {
                write!(f, "equivalence search exceeded {cap} canonical configurations")
            }
            Error::MissingCell => write!(f, "observation table read before fill"),
            Error::Precondition(what) => write!(f, "precondition violated: {what}"),
            Error::BadCounterexample(w) => write!(f, "teacher returned a non-separating word {w}"),
            Error::Assertion(msg) => write!(f, "assertion failed: {msg}"),
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
        }
    }
}

impl core::error::Error for Error {}
