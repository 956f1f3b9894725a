//! The term kernel: immutable syntax trees with AC flattening, substitution,
//! bound-variable bookkeeping, the bound-variable-agnostic order, and
//! de Bruijn conversion.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use crate::symbol::{Builtin, CNum, Head};

/// Byte span of a parsed node, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub column: u32,
}

#[derive(Debug)]
pub struct TermData {
    head: Head,
    args: Vec<Term>,
    /// Attached at parse time only; ignored by equality, hashing, and order.
    span: Option<SourceSpan>,
}

/// An immutable, shareable term. Cloning is cheap; equality is structural.
#[derive(Clone)]
pub struct Term(Arc<TermData>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        self.head() == other.head() && self.args() == other.args()
    }
}

impl Eq for Term {}

impl core::hash::Hash for Term {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.head().hash(state);
        for a in self.args() {
            a.hash(state);
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::syntax::print_term(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::syntax::print_term(self))
    }
}

static FRESH_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Generates a name that cannot collide with any parsed identifier
/// (identifiers never contain `~`).
pub fn fresh_name(base: &str) -> Arc<str> {
    use alloc::format;
    let n = FRESH_COUNTER.fetch_add(1, AtomicOrdering::Relaxed);
    let base = base.split('~').next().unwrap_or("v");
    Arc::from(format!("{base}~{n}").as_str())
}

impl Term {
    /// General constructor; maintains the AC flatness invariant eagerly.
    pub fn app(head: Head, args: Vec<Term>) -> Term {
        if head.is_flattenable() && args.iter().any(|a| *a.head() == head) {
            let mut flat = Vec::with_capacity(args.len() + 4);
            for a in args {
                if *a.head() == head {
                    flat.extend(a.args().iter().cloned());
                } else {
                    flat.push(a);
                }
            }
            return Term::app_raw(head, flat);
        }
        Term::app_raw(head, args)
    }

    /// Constructor that skips AC flattening. Needed to express the left-hand
    /// side of the flatten rule itself; everything else goes through `app`.
    pub fn app_raw(head: Head, args: Vec<Term>) -> Term {
        Term(Arc::new(TermData {
            head,
            args,
            span: None,
        }))
    }

    pub fn with_span(self, span: SourceSpan) -> Term {
        Term(Arc::new(TermData {
            head: self.0.head.clone(),
            args: self.0.args.clone(),
            span: Some(span),
        }))
    }

    pub fn builtin(b: Builtin, args: Vec<Term>) -> Term {
        Term::app(Head::B(b), args)
    }

    pub fn atom(b: Builtin) -> Term {
        Term::app(Head::B(b), Vec::new())
    }

    pub fn var(name: &str) -> Term {
        Term::app(Head::User(Arc::from(name)), Vec::new())
    }

    pub fn var_arc(name: Arc<str>) -> Term {
        Term::app(Head::User(name), Vec::new())
    }

    pub fn num(n: CNum) -> Term {
        Term::app(Head::Num(n), Vec::new())
    }

    pub fn int(k: i64) -> Term {
        Term::num(CNum::real(k))
    }

    pub fn db(k: u32) -> Term {
        Term::app(Head::DbIdx(k), Vec::new())
    }

    pub fn head(&self) -> &Head {
        &self.0.head
    }

    pub fn args(&self) -> &[Term] {
        &self.0.args
    }

    pub fn span(&self) -> Option<SourceSpan> {
        self.0.span
    }

    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn is(&self, b: Builtin) -> bool {
        matches!(self.head(), Head::B(x) if *x == b)
    }

    pub fn is_num(&self, n: CNum) -> bool {
        matches!(self.head(), Head::Num(m) if *m == n)
    }

    pub fn as_num(&self) -> Option<CNum> {
        match self.head() {
            Head::Num(n) => Some(*n),
            _ => None,
        }
    }

    /// User name of a zero-argument user node.
    pub fn as_var(&self) -> Option<&Arc<str>> {
        match self.head() {
            Head::User(s) if self.args().is_empty() => Some(s),
            _ => None,
        }
    }

    pub fn arg(&self, i: usize) -> &Term {
        &self.0.args[i]
    }

    /// Subterm at a position path (list of child indices).
    pub fn at_path(&self, path: &[usize]) -> Option<&Term> {
        let mut t = self;
        for &i in path {
            t = t.args().get(i)?;
        }
        Some(t)
    }

    /// Returns a copy with the subterm at `path` replaced.
    pub fn splice(&self, path: &[usize], replacement: Term) -> Option<Term> {
        match path.split_first() {
            None => Some(replacement),
            Some((&i, rest)) => {
                let child = self.args().get(i)?;
                let new_child = child.splice(rest, replacement)?;
                let mut args = self.args().to_vec();
                args[i] = new_child;
                // raw: splicing must not re-associate recorded positions
                Some(Term::app_raw(self.head().clone(), args))
            }
        }
    }

    /// Binder shape of this node in named form: for `FUN[x, T, e]` and
    /// `IDX[x, e]` returns (bound name, body index).
    pub fn named_binder(&self) -> Option<(&Arc<str>, usize)> {
        match self.head() {
            Head::B(Builtin::Fun) if self.args().len() == 3 => {
                self.arg(0).as_var().map(|n| (n, 2))
            }
            Head::B(Builtin::Idx) if self.args().len() == 2 => {
                self.arg(0).as_var().map(|n| (n, 1))
            }
            _ => None,
        }
    }

    /// Binder shape in de Bruijn form: `FUN[T, e]` / `IDX[e]`, returning the
    /// body index.
    pub fn nameless_binder(&self) -> Option<usize> {
        match self.head() {
            Head::B(Builtin::Fun) if self.args().len() == 2 && self.arg(0).as_var().is_none() => {
                Some(1)
            }
            Head::B(Builtin::Idx) if self.args().len() == 1 => Some(0),
            _ => None,
        }
    }

    /// Free user variables (names not captured by an enclosing binder).
    pub fn free_vars(&self) -> BTreeSet<Arc<str>> {
        let mut acc = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut acc);
        acc
    }

    pub fn contains_free(&self, name: &str) -> bool {
        let mut bound = Vec::new();
        contains_free_in(self, name, &mut bound)
    }

    /// All names bound by binders anywhere in the term.
    pub fn bound_names(&self) -> BTreeSet<Arc<str>> {
        let mut acc = BTreeSet::new();
        self.visit(&mut |t| {
            if let Some((name, _)) = t.named_binder() {
                acc.insert(name.clone());
            }
        });
        acc
    }

    pub fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        for a in self.args() {
            a.visit(f);
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.args().iter().map(Term::node_count).sum::<usize>()
    }

    pub fn contains_db(&self) -> bool {
        matches!(self.head(), Head::DbIdx(_)) || self.args().iter().any(Term::contains_db)
    }
}

fn collect_free(t: &Term, bound: &mut Vec<Arc<str>>, acc: &mut BTreeSet<Arc<str>>) {
    if let Some(name) = t.as_var() {
        if !bound.iter().any(|b| b == name) {
            acc.insert(name.clone());
        }
        return;
    }
    if let Some((name, body_ix)) = t.named_binder() {
        for (i, a) in t.args().iter().enumerate() {
            if i == 0 {
                continue;
            }
            if i == body_ix {
                bound.push(name.clone());
                collect_free(a, bound, acc);
                bound.pop();
            } else {
                collect_free(a, bound, acc);
            }
        }
        return;
    }
    for a in t.args() {
        collect_free(a, bound, acc);
    }
}

fn contains_free_in(t: &Term, name: &str, bound: &mut Vec<Arc<str>>) -> bool {
    if let Some(v) = t.as_var() {
        return v.as_ref() == name && !bound.iter().any(|b| b.as_ref() == name);
    }
    if let Some((bname, body_ix)) = t.named_binder() {
        let mut found = false;
        for (i, a) in t.args().iter().enumerate() {
            if i == 0 {
                continue;
            }
            if i == body_ix {
                bound.push(bname.clone());
                found |= contains_free_in(a, name, bound);
                bound.pop();
            } else {
                found |= contains_free_in(a, name, bound);
            }
            if found {
                break;
            }
        }
        return found;
    }
    t.args().iter().any(|a| contains_free_in(a, name, bound))
}

/// Flattens nested occurrences of the same AC head. Idempotent; preserves all
/// other structure.
pub fn flatten(t: &Term) -> Term {
    let args: Vec<Term> = t.args().iter().map(flatten).collect();
    Term::app(t.head().clone(), args)
}

/// A simultaneous, capture-avoiding substitution of terms for free variables.
#[derive(Debug, Clone, Default)]
pub struct Substitution {
    bindings: BTreeMap<Arc<str>, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn single(name: &str, t: Term) -> Self {
        let mut s = Substitution::new();
        s.bind(name, t);
        s
    }

    pub fn bind(&mut self, name: &str, t: Term) {
        self.bindings.insert(Arc::from(name), t);
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.bindings.get(name)
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.is_empty() {
            return t.clone();
        }
        // names free in any replacement; a binder with one of these names
        // must be renamed before descending
        let mut hot: BTreeSet<Arc<str>> = BTreeSet::new();
        for v in self.bindings.values() {
            hot.extend(v.free_vars());
        }
        subst_rec(t, self, &hot)
    }
}

fn subst_rec(t: &Term, s: &Substitution, hot: &BTreeSet<Arc<str>>) -> Term {
    if let Some(name) = t.as_var() {
        if let Some(rep) = s.get(name) {
            return rep.clone();
        }
        return t.clone();
    }
    if let Some((bname, body_ix)) = t.named_binder() {
        let shadowed = s.get(bname).is_some();
        let captures = hot.contains(bname);
        let (bname, body) = if captures {
            let fresh = fresh_name(bname);
            let renamed = Substitution::single(bname, Term::var_arc(fresh.clone()))
                .apply(t.arg(body_ix));
            (fresh, renamed)
        } else {
            (bname.clone(), t.arg(body_ix).clone())
        };
        let mut args: Vec<Term> = Vec::with_capacity(t.args().len());
        for (i, a) in t.args().iter().enumerate() {
            if i == 0 {
                args.push(Term::var_arc(bname.clone()));
            } else if i == body_ix {
                if shadowed && !captures {
                    // bound name shadows the substitution domain
                    let mut inner = s.clone();
                    inner.bindings.remove(bname.as_ref());
                    if inner.is_empty() {
                        args.push(body.clone());
                    } else {
                        args.push(subst_rec(&body, &inner, hot));
                    }
                } else {
                    args.push(subst_rec(&body, s, hot));
                }
            } else {
                args.push(subst_rec(a, s, hot));
            }
        }
        return Term::app(t.head().clone(), args);
    }
    let args: Vec<Term> = t.args().iter().map(|a| subst_rec(a, s, hot)).collect();
    Term::app(t.head().clone(), args)
}

/// Renames every binder in the term to a globally fresh name, so that all
/// bound variables are unique (the precondition of the sort and swap
/// transformations).
pub fn uniquify_binders(t: &Term) -> Term {
    fn go(t: &Term, map: &mut Vec<(Arc<str>, Arc<str>)>) -> Term {
        if let Some(name) = t.as_var() {
            for (old, new) in map.iter().rev() {
                if old == name {
                    return Term::var_arc(new.clone());
                }
            }
            return t.clone();
        }
        if let Some((bname, body_ix)) = t.named_binder() {
            let fresh = fresh_name(bname);
            let mut args: Vec<Term> = Vec::with_capacity(t.args().len());
            for (i, a) in t.args().iter().enumerate() {
                if i == 0 {
                    args.push(Term::var_arc(fresh.clone()));
                } else if i == body_ix {
                    map.push((bname.clone(), fresh.clone()));
                    args.push(go(a, map));
                    map.pop();
                } else {
                    args.push(go(a, map));
                }
            }
            return Term::app(t.head().clone(), args);
        }
        let args: Vec<Term> = t.args().iter().map(|a| go(a, map)).collect();
        Term::app(t.head().clone(), args)
    }
    go(t, &mut Vec::new())
}

/// Converts named binders to de Bruijn form: `FUN[x, T, e]` becomes
/// `FUN[T, e']` with occurrences of `x` replaced by `$k`, where `k` counts
/// the binders strictly between the occurrence and its binder.
pub fn to_de_bruijn(t: &Term) -> Term {
    fn go(t: &Term, stack: &mut Vec<Arc<str>>) -> Term {
        if let Some(name) = t.as_var() {
            if let Some(pos) = stack.iter().rev().position(|b| b == name) {
                return Term::db(pos as u32);
            }
            return t.clone();
        }
        if let Some((bname, body_ix)) = t.named_binder() {
            let mut args: Vec<Term> = Vec::with_capacity(t.args().len() - 1);
            for (i, a) in t.args().iter().enumerate() {
                if i == 0 {
                    continue;
                }
                if i == body_ix {
                    stack.push(bname.clone());
                    args.push(go(a, stack));
                    stack.pop();
                } else {
                    args.push(go(a, stack));
                }
            }
            return Term::app(t.head().clone(), args);
        }
        let args: Vec<Term> = t.args().iter().map(|a| go(a, stack)).collect();
        Term::app(t.head().clone(), args)
    }
    go(t, &mut Vec::new())
}

/// Inverse of [`to_de_bruijn`]: introduces fresh names for all binders.
pub fn from_de_bruijn(t: &Term) -> Term {
    fn go(t: &Term, stack: &mut Vec<Arc<str>>) -> Term {
        if let Head::DbIdx(k) = t.head() {
            let k = *k as usize;
            if k < stack.len() {
                return Term::var_arc(stack[stack.len() - 1 - k].clone());
            }
            return t.clone();
        }
        if let Some(body_ix) = t.nameless_binder() {
            let fresh = fresh_name("x");
            let mut args: Vec<Term> = Vec::with_capacity(t.args().len() + 1);
            args.push(Term::var_arc(fresh.clone()));
            for (i, a) in t.args().iter().enumerate() {
                if i == body_ix {
                    stack.push(fresh.clone());
                    args.push(go(a, stack));
                    stack.pop();
                } else {
                    args.push(go(a, stack));
                }
            }
            return Term::app(t.head().clone(), args);
        }
        let args: Vec<Term> = t.args().iter().map(|a| go(a, stack)).collect();
        Term::app(t.head().clone(), args)
    }
    go(t, &mut Vec::new())
}

/// α-equivalence by direct renaming. The de Bruijn conversion is checked
/// against this independently.
pub fn alpha_eq(t1: &Term, t2: &Term) -> bool {
    fn go(t1: &Term, t2: &Term, s1: &mut Vec<Arc<str>>, s2: &mut Vec<Arc<str>>) -> bool {
        match (t1.as_var(), t2.as_var()) {
            (Some(a), Some(b)) => {
                let p1 = s1.iter().rev().position(|x| x == a);
                let p2 = s2.iter().rev().position(|x| x == b);
                return match (p1, p2) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => a == b,
                    _ => false,
                };
            }
            (None, None) => {}
            _ => return false,
        }
        if t1.head() != t2.head() || t1.args().len() != t2.args().len() {
            return false;
        }
        match (t1.named_binder(), t2.named_binder()) {
            (Some((n1, bix1)), Some((n2, bix2))) => {
                if bix1 != bix2 {
                    return false;
                }
                for i in 1..t1.args().len() {
                    let ok = if i == bix1 {
                        s1.push(n1.clone());
                        s2.push(n2.clone());
                        let r = go(t1.arg(i), t2.arg(i), s1, s2);
                        s1.pop();
                        s2.pop();
                        r
                    } else {
                        go(t1.arg(i), t2.arg(i), s1, s2)
                    };
                    if !ok {
                        return false;
                    }
                }
                true
            }
            (None, None) => (0..t1.args().len()).all(|i| go(t1.arg(i), t2.arg(i), s1, s2)),
            _ => false,
        }
    }
    go(t1, t2, &mut Vec::new(), &mut Vec::new())
}

/// The order without bound variables of the normalization procedure: any two
/// members of `bound` compare equal, a non-member is smaller than a member,
/// and otherwise heads compare by the global symbol order followed by the
/// arguments lexicographically.
pub fn compare_without_bound(e1: &Term, e2: &Term, bound: &BTreeSet<Arc<str>>) -> Ordering {
    let b1 = e1.as_var().is_some_and(|v| bound.contains(v));
    let b2 = e2.as_var().is_some_and(|v| bound.contains(v));
    match (b1, b2) {
        (true, true) => return Ordering::Equal,
        (false, true) => return Ordering::Less,
        (true, false) => return Ordering::Greater,
        (false, false) => {}
    }
    match e1.head().order(e2.head()) {
        Ordering::Equal => {}
        ord => return ord,
    }
    for (a, b) in e1.args().iter().zip(e2.args().iter()) {
        match compare_without_bound(a, b, bound) {
            Ordering::Equal => {}
            ord => return ord,
        }
    }
    e1.args().len().cmp(&e2.args().len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Builtin as B;

    fn add(args: Vec<Term>) -> Term {
        Term::builtin(B::Add, args)
    }

    fn fun(x: &str, ann: Term, body: Term) -> Term {
        Term::builtin(B::Fun, alloc::vec![Term::var(x), ann, body])
    }

    fn apply(f: Term, a: Term) -> Term {
        Term::builtin(B::Apply, alloc::vec![f, a])
    }

    #[test]
    fn flatten_merges_nested_ac() {
        let a = Term::var("a");
        let b = Term::var("b");
        let c = Term::var("c");
        let d = Term::var("d");
        let nested = Term::app_raw(
            Head::B(B::Add),
            alloc::vec![a.clone(), add(alloc::vec![b.clone(), c.clone()]), d.clone()],
        );
        assert_eq!(flatten(&nested), add(alloc::vec![a, b, c, d]));
    }

    #[test]
    fn flatten_is_identity_on_flat_terms() {
        let t = add(alloc::vec![Term::var("a"), Term::var("b")]);
        assert_eq!(flatten(&t), t);
    }

    #[test]
    fn flatten_muls_associativity() {
        let m = |args| Term::app_raw(Head::B(B::Muls), args);
        let t = m(alloc::vec![
            Term::var("x"),
            m(alloc::vec![
                Term::var("y"),
                m(alloc::vec![Term::var("z"), Term::var("w")]),
            ]),
        ]);
        let expect = Term::builtin(
            B::Muls,
            alloc::vec![Term::var("x"), Term::var("y"), Term::var("z"), Term::var("w")],
        );
        assert_eq!(flatten(&t), expect);
    }

    #[test]
    fn substitute_empty_is_identity() {
        let t = Term::var("x");
        assert_eq!(Substitution::new().apply(&t), t);
    }

    #[test]
    fn substitute_renames_on_capture() {
        // (fun y => x){x := y}  must rename the binder
        let lam = fun("y", Term::atom(B::SType), Term::var("x"));
        let out = Substitution::single("x", Term::var("y")).apply(&lam);
        let (bname, body_ix) = out.named_binder().expect("still a binder");
        assert_ne!(bname.as_ref(), "y");
        assert_eq!(out.arg(body_ix), &Term::var("y"));
    }

    #[test]
    fn substitute_delta_shape() {
        // DELTA[i, t].A with {i := t} gives DELTA[t, t].(A{i/t})
        let scr = Term::builtin(
            B::Scr,
            alloc::vec![
                Term::builtin(B::Delta, alloc::vec![Term::var("i"), Term::var("t")]),
                Term::builtin(B::Ket, alloc::vec![Term::var("i")]),
            ],
        );
        let out = Substitution::single("i", Term::var("t")).apply(&scr);
        let expect = Term::builtin(
            B::Scr,
            alloc::vec![
                Term::builtin(B::Delta, alloc::vec![Term::var("t"), Term::var("t")]),
                Term::builtin(B::Ket, alloc::vec![Term::var("t")]),
            ],
        );
        assert_eq!(out, expect);
    }

    #[test]
    fn de_bruijn_identity_fn() {
        let lam = fun("x", Term::atom(B::SType), Term::var("x"));
        let db = to_de_bruijn(&lam);
        assert_eq!(
            db,
            Term::builtin(B::Fun, alloc::vec![Term::atom(B::SType), Term::db(0)])
        );
    }

    #[test]
    fn de_bruijn_two_binders() {
        // fun x => fun y => (x (y x))  ~>  FUN[FUN[($1 ($0 $1))]]
        let inner = apply(Term::var("x"), apply(Term::var("y"), Term::var("x")));
        let lam = fun(
            "x",
            Term::atom(B::SType),
            fun("y", Term::atom(B::SType), inner),
        );
        let db = to_de_bruijn(&lam);
        let expect = Term::builtin(
            B::Fun,
            alloc::vec![
                Term::atom(B::SType),
                Term::builtin(
                    B::Fun,
                    alloc::vec![
                        Term::atom(B::SType),
                        apply(Term::db(1), apply(Term::db(0), Term::db(1))),
                    ],
                ),
            ],
        );
        assert_eq!(db, expect);
    }

    #[test]
    fn de_bruijn_constant_body() {
        let lam = fun("x", Term::atom(B::SType), Term::var("c"));
        let db = to_de_bruijn(&lam);
        assert_eq!(
            db,
            Term::builtin(B::Fun, alloc::vec![Term::atom(B::SType), Term::var("c")])
        );
    }

    #[test]
    fn order_bound_vars_equal() {
        let mut bound = BTreeSet::new();
        bound.insert(Arc::from("i"));
        bound.insert(Arc::from("j"));
        assert_eq!(
            compare_without_bound(&Term::var("i"), &Term::var("j"), &bound),
            Ordering::Equal
        );
    }

    #[test]
    fn order_worked_example() {
        // <i|A|j> vs <j|B|i> with A < B and i, j bound
        let atom = |o: &str, l: &str, r: &str| {
            Term::builtin(
                B::Dot,
                alloc::vec![
                    Term::builtin(B::Bra, alloc::vec![Term::var(l)]),
                    Term::builtin(
                        B::MulK,
                        alloc::vec![Term::var(o), Term::builtin(B::Ket, alloc::vec![Term::var(r)])],
                    ),
                ],
            )
        };
        let mut bound = BTreeSet::new();
        bound.insert(Arc::from("i"));
        bound.insert(Arc::from("j"));
        assert_eq!(
            compare_without_bound(&atom("A", "i", "j"), &atom("B", "j", "i"), &bound),
            Ordering::Less
        );
    }

    #[test]
    fn order_identical_terms_equal() {
        let c = Term::var("c");
        assert_eq!(
            compare_without_bound(&c, &c, &BTreeSet::new()),
            Ordering::Equal
        );
    }

    #[test]
    fn alpha_eq_and_de_bruijn_agree_on_simple_renaming() {
        let l1 = fun("x", Term::atom(B::SType), Term::var("x"));
        let l2 = fun("y", Term::atom(B::SType), Term::var("y"));
        assert!(alpha_eq(&l1, &l2));
        assert_eq!(to_de_bruijn(&l1), to_de_bruijn(&l2));
    }
}
