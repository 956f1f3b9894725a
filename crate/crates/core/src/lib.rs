//! Symbolic kernel of an equational prover for plain and labelled Dirac
//! notation: terms, surface syntax, the typing judgment, rewriting modulo AC,
//! the normalization pipeline, and label elimination.
//!
//! The crate is `no_std` (with `alloc`); everything here is deterministic and
//! free of IO. The dense-tensor semantics, command-line driver, and script
//! formats live in the companion `dirac-prover` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod symbol;
pub mod term;
pub mod syntax;
pub mod context;
pub mod typing;
pub mod scalar;
pub mod rewrite;
pub mod rules;
pub mod normalize;
pub mod label;
pub mod command;

pub use context::{Context, Entry};
pub use symbol::{Builtin, CNum, Head};
pub use syntax::{parse_command, parse_script, parse_term, print_term, Command, ParseError};
pub use term::{
    alpha_eq, compare_without_bound, flatten, from_de_bruijn, to_de_bruijn, uniquify_binders,
    SourceSpan, Substitution, Term,
};
pub use typing::{infer_type, resolve, TypeError};
