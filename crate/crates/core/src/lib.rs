//! Learning nominal automata over the equality atoms.
//!
//! The crate is `no_std` (it needs `alloc`). Words are sequences of
//! [`kernel::Letter`]s, hypotheses are [`automata::SymbolicAutomaton`]s given
//! orbit by orbit, and the learners in [`learners`] talk to a
//! [`learners::Teacher`] wrapping any [`automata::Acceptor`].
#![no_std]

extern crate alloc;

pub mod automata;
pub mod equivalence;
pub mod error;
pub mod kernel;
pub mod learners;
pub mod obstable;
pub mod targets;

pub use error::Error;
