//! Contexts: ordered sequences of index assumptions, typed assumptions,
//! register declarations, and unfoldable definitions.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::term::Term;

#[derive(Debug, Clone, PartialEq)]
pub enum Entry {
    /// `x : Index`
    Index(Arc<str>),
    /// `x : T`
    Assum(Arc<str>, Term),
    /// `r : Reg(σ)`
    Register(Arc<str>, Term),
    /// `x := t : T`, unfoldable during rewriting
    Def(Arc<str>, Term, Term),
}

impl Entry {
    pub fn name(&self) -> &Arc<str> {
        match self {
            Entry::Index(n) | Entry::Assum(n, _) | Entry::Register(n, _) | Entry::Def(n, _, _) => {
                n
            }
        }
    }
}

/// An ordered, immutable-after-construction context. Commands extend it one
/// well-formed entry at a time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Context {
    entries: Vec<Entry>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn lookup(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name().as_ref() == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup(name).is_some()
    }

    /// The body of a definition, if `name` is defined.
    pub fn def_body(&self, name: &str) -> Option<&Term> {
        match self.lookup(name) {
            Some(Entry::Def(_, body, _)) => Some(body),
            _ => None,
        }
    }

    /// The declared index of a register, if `name` is one.
    pub fn register_index(&self, name: &str) -> Option<&Term> {
        match self.lookup(name) {
            Some(Entry::Register(_, sigma)) => Some(sigma),
            _ => None,
        }
    }

    pub fn is_index_var(&self, name: &str) -> bool {
        matches!(self.lookup(name), Some(Entry::Index(_)))
    }

    /// Appends an entry without checking; the typing layer validates first.
    pub fn pushed(&self, entry: Entry) -> Context {
        let mut entries = self.entries.clone();
        entries.push(entry);
        Context { entries }
    }

    /// Context truncated to the entries before position `i` (used when
    /// re-checking well-formedness entry by entry).
    pub fn prefix(&self, i: usize) -> Context {
        Context {
            entries: self.entries[..i].to_vec(),
        }
    }
}
