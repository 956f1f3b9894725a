//! The typing judgment: algorithmic synthesis for every rule of the system,
//! including register validity and labelled Dirac types.
//!
//! Typing doubles as elaboration: the placeholder heads produced by the
//! parser (`COMPO` for juxtaposition, `LABEL` for `e_R` subscripts, `ADD`
//! over scalars, `MULS` over indices, the `HOLE` annotation of sum binders)
//! are resolved to their concrete heads while the type is computed. The
//! resolved term is returned next to the type and resolving is idempotent.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::context::{Context, Entry};
use crate::symbol::{Builtin as B, Head};
use crate::term::{from_de_bruijn, SourceSpan, Substitution, Term};

#[derive(Debug, Clone, PartialEq)]
pub struct TypeError {
    /// Machine-readable code: the name of the typing rule whose premise
    /// failed, or of the side condition.
    pub rule: &'static str,
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl core::fmt::Display for TypeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.span {
            Some(s) => write!(
                f,
                "type error [{}] at line {}, column {}: {}",
                self.rule, s.line, s.column, self.message
            ),
            None => write!(f, "type error [{}]: {}", self.rule, self.message),
        }
    }
}

fn err<T>(rule: &'static str, at: &Term, message: String) -> Result<T, TypeError> {
    Err(TypeError {
        rule,
        message,
        span: at.span(),
    })
}

#[derive(Debug, Clone)]
enum BinderKind {
    TermVar(Term),
    IndexVar,
}

/// The binder stack threaded through typing. Rewrite-time guards construct
/// one from the path to the redex.
#[derive(Debug, Clone, Default)]
pub struct Binders {
    stack: Vec<(Option<Arc<str>>, BinderKind)>,
}

impl Binders {
    pub fn new() -> Self {
        Binders::default()
    }

    pub fn push_term(&mut self, name: Option<Arc<str>>, ty: Term) {
        self.stack.push((name, BinderKind::TermVar(ty)));
    }

    pub fn push_index(&mut self, name: Option<Arc<str>>) {
        self.stack.push((name, BinderKind::IndexVar));
    }

    pub fn pop(&mut self) {
        self.stack.pop();
    }

    fn lookup(&self, name: &str) -> Option<&BinderKind> {
        self.stack
            .iter()
            .rev()
            .find(|(n, _)| n.as_deref() == Some(name))
            .map(|(_, k)| k)
    }

    fn lookup_db(&self, k: u32) -> Option<&BinderKind> {
        let n = self.stack.len();
        if (k as usize) < n {
            Some(&self.stack[n - 1 - k as usize].1)
        } else {
            None
        }
    }
}

// ---------------------------------------------------------------------------
// type-term helpers
// ---------------------------------------------------------------------------

pub fn stype() -> Term {
    Term::atom(B::SType)
}

pub fn ktype(sigma: Term) -> Term {
    Term::builtin(B::KType, alloc::vec![sigma])
}

pub fn btype(sigma: Term) -> Term {
    Term::builtin(B::BType, alloc::vec![sigma])
}

pub fn otype(sigma: Term, tau: Term) -> Term {
    Term::builtin(B::OType, alloc::vec![sigma, tau])
}

pub fn set_type(sigma: Term) -> Term {
    Term::builtin(B::SetT, alloc::vec![sigma])
}

pub fn basis_type(sigma: Term) -> Term {
    Term::builtin(B::Basis, alloc::vec![sigma])
}

pub fn reg_type(sigma: Term) -> Term {
    Term::builtin(B::Reg, alloc::vec![sigma])
}

fn rset(names: &[Arc<str>]) -> Term {
    Term::builtin(
        B::RSet,
        names.iter().map(|n| Term::var_arc(n.clone())).collect(),
    )
}

/// `DTYPE` with both register sets empty is identified with the scalar type:
/// the sort rules rewrite e.g. `<i|_r · |j>_r` to the scalar `DELTA[i, j]`,
/// which is only type-preserving under this identification.
pub fn dtype(codomain: &[Arc<str>], domain: &[Arc<str>]) -> Term {
    if codomain.is_empty() && domain.is_empty() {
        stype()
    } else {
        Term::builtin(B::DType, alloc::vec![rset(codomain), rset(domain)])
    }
}

/// Splits `DTYPE[RSET[..], RSET[..]]` into its two sorted register name sets.
pub fn dtype_sets(ty: &Term) -> Option<(Vec<Arc<str>>, Vec<Arc<str>>)> {
    if !ty.is(B::DType) || ty.args().len() != 2 {
        return None;
    }
    let names = |t: &Term| -> Option<Vec<Arc<str>>> {
        if !t.is(B::RSet) {
            return None;
        }
        t.args().iter().map(|a| a.as_var().cloned()).collect()
    };
    Some((names(ty.arg(0))?, names(ty.arg(1))?))
}

fn sorted_union(a: &[Arc<str>], b: &[Arc<str>]) -> Vec<Arc<str>> {
    let mut out: Vec<Arc<str>> = a.to_vec();
    out.extend(b.iter().cloned());
    out.sort();
    out.dedup();
    out
}

fn set_minus(a: &[Arc<str>], b: &[Arc<str>]) -> Vec<Arc<str>> {
    a.iter().filter(|x| !b.contains(x)).cloned().collect()
}

fn disjoint(a: &[Arc<str>], b: &[Arc<str>]) -> bool {
    a.iter().all(|x| !b.contains(x))
}

// ---------------------------------------------------------------------------
// registers
// ---------------------------------------------------------------------------

/// The ordered variable set of a register term, rejecting repeated leaves
/// (the no-cloning side condition of register formation).
pub fn var_set(r: &Term) -> Result<Vec<Arc<str>>, TypeError> {
    let mut leaves = Vec::new();
    collect_reg_leaves(r, &mut leaves)?;
    let mut sorted = leaves.clone();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return err(
                "Reg-Pair",
                r,
                format!("register reuse violates no-cloning typing: `{}`", w[0]),
            );
        }
    }
    Ok(sorted)
}

fn collect_reg_leaves(r: &Term, out: &mut Vec<Arc<str>>) -> Result<(), TypeError> {
    if let Some(name) = r.as_var() {
        out.push(name.clone());
        return Ok(());
    }
    if r.is(B::Pair) && r.args().len() == 2 {
        collect_reg_leaves(r.arg(0), out)?;
        collect_reg_leaves(r.arg(1), out)?;
        return Ok(());
    }
    err("Reg-Var", r, format!("`{r}` is not a register term"))
}

/// The index of a register tree: leaves look up their declaration, pairs
/// build an index product.
pub fn register_sigma(ctx: &Context, r: &Term) -> Result<Term, TypeError> {
    if let Some(name) = r.as_var() {
        return match ctx.register_index(name) {
            Some(sigma) => Ok(sigma.clone()),
            None => err("Reg-Var", r, format!("`{name}` is not a declared register")),
        };
    }
    if r.is(B::Pair) && r.args().len() == 2 {
        let a = register_sigma(ctx, r.arg(0))?;
        let b = register_sigma(ctx, r.arg(1))?;
        return Ok(Term::builtin(B::Prod, alloc::vec![a, b]));
    }
    err("Reg-Var", r, format!("`{r}` is not a register term"))
}

// ---------------------------------------------------------------------------
// the index and type layers
// ---------------------------------------------------------------------------

pub fn check_index(ctx: &Context, binders: &Binders, t: &Term) -> Result<(), TypeError> {
    match t.head() {
        Head::B(B::Bit) if t.args().is_empty() => Ok(()),
        Head::B(B::Prod) if t.args().len() == 2 => {
            check_index(ctx, binders, t.arg(0))?;
            check_index(ctx, binders, t.arg(1))
        }
        Head::User(name) if t.args().is_empty() => {
            if matches!(binders.lookup(name), Some(BinderKind::IndexVar)) || ctx.is_index_var(name)
            {
                Ok(())
            } else {
                err("Index-Var", t, format!("unknown index `{name}`"))
            }
        }
        Head::DbIdx(k) => match binders.lookup_db(*k) {
            Some(BinderKind::IndexVar) => Ok(()),
            _ => err("Index-Var", t, format!("`{t}` is not an index")),
        },
        _ => err("Index-Var", t, format!("`{t}` is not an index")),
    }
}

fn is_index(ctx: &Context, binders: &Binders, t: &Term) -> bool {
    check_index(ctx, binders, t).is_ok()
}

/// Validates a type-term (the `Γ ⊢ T : Type` judgment).
pub fn check_type(ctx: &Context, binders: &Binders, t: &Term) -> Result<(), TypeError> {
    match t.head() {
        Head::B(B::SType) if t.args().is_empty() => Ok(()),
        Head::B(B::Basis) | Head::B(B::KType) | Head::B(B::BType) | Head::B(B::SetT)
        | Head::B(B::Reg)
            if t.args().len() == 1 =>
        {
            check_index(ctx, binders, t.arg(0))
        }
        Head::B(B::OType) if t.args().len() == 2 => {
            check_index(ctx, binders, t.arg(0))?;
            check_index(ctx, binders, t.arg(1))
        }
        Head::B(B::Arrow) if t.args().len() == 2 => {
            check_type(ctx, binders, t.arg(0))?;
            check_type(ctx, binders, t.arg(1))
        }
        Head::B(B::Forall) if t.args().len() == 2 => match t.arg(0).as_var() {
            Some(x) => {
                let mut inner = binders.clone();
                inner.push_index(Some(x.clone()));
                check_type(ctx, &inner, t.arg(1))
            }
            None => err("Type-Index", t, "FORALL needs a bound index name".into()),
        },
        Head::B(B::DType) if t.args().len() == 2 => {
            let (s1, s2) = match dtype_sets(t) {
                Some(x) => x,
                None => return err("Type-Labelled", t, format!("malformed DTYPE `{t}`")),
            };
            for r in s1.iter().chain(s2.iter()) {
                if ctx.register_index(r).is_none() {
                    return err(
                        "Type-Labelled",
                        t,
                        format!("`{r}` is not a declared register"),
                    );
                }
            }
            for set in [&s1, &s2] {
                let mut sorted = set.clone();
                sorted.sort();
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return err("Type-Labelled", t, format!("duplicate register in `{t}`"));
                }
            }
            Ok(())
        }
        _ => err("Type-Lam", t, format!("`{t}` is not a type")),
    }
}

// ---------------------------------------------------------------------------
// context well-formedness
// ---------------------------------------------------------------------------

/// Checks every entry of the context per the W-rules: names are unique, each
/// assumption's type is valid in its prefix, and each definition's body
/// checks at its declared type in its prefix.
pub fn check_context(ctx: &Context) -> Result<(), TypeError> {
    for (i, entry) in ctx.entries().iter().enumerate() {
        let prefix = ctx.prefix(i);
        if prefix.contains(entry.name()) {
            return Err(TypeError {
                rule: "W-Def-Term",
                message: format!("duplicate name `{}` in context", entry.name()),
                span: None,
            });
        }
        match entry {
            Entry::Index(_) => {}
            Entry::Assum(name, ty) => {
                if ty.is(B::Index) {
                    return Err(TypeError {
                        rule: "W-Assum-Index",
                        message: format!("`{name}` should be an Entry::Index"),
                        span: None,
                    });
                }
                check_type(&prefix, &Binders::new(), ty)?;
            }
            Entry::Register(_, sigma) => check_index(&prefix, &Binders::new(), sigma)?,
            Entry::Def(_, body, ty) => {
                let (_, inferred) = resolve(&prefix, body)?;
                if inferred != *ty {
                    return Err(TypeError {
                        rule: "W-Def-Term",
                        message: format!(
                            "definition `{}` declared at `{}` but its body has type `{}`",
                            entry.name(),
                            ty,
                            inferred
                        ),
                        span: body.span(),
                    });
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// term typing / elaboration
// ---------------------------------------------------------------------------

/// Classifies a type-term for the composition dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sort {
    Scalar,
    Ket,
    Bra,
    Opt,
    Labelled,
    BasisSort,
    SetSort,
    RegSort,
    FunSort,
    Other,
}

fn sort_of(ty: &Term) -> Sort {
    match ty.head() {
        Head::B(B::SType) => Sort::Scalar,
        Head::B(B::KType) => Sort::Ket,
        Head::B(B::BType) => Sort::Bra,
        Head::B(B::OType) => Sort::Opt,
        Head::B(B::DType) => Sort::Labelled,
        Head::B(B::Basis) => Sort::BasisSort,
        Head::B(B::SetT) => Sort::SetSort,
        Head::B(B::Reg) => Sort::RegSort,
        Head::B(B::Arrow) | Head::B(B::Forall) => Sort::FunSort,
        _ => Sort::Other,
    }
}

/// Resolves placeholders and infers the unique type: the main entry point.
pub fn resolve(ctx: &Context, t: &Term) -> Result<(Term, Term), TypeError> {
    if t.contains_db() {
        let named = from_de_bruijn(t);
        return resolve_in(ctx, &mut Binders::new(), &named);
    }
    resolve_in(ctx, &mut Binders::new(), t)
}

/// The inferred type alone.
pub fn infer_type(ctx: &Context, t: &Term) -> Result<Term, TypeError> {
    resolve(ctx, t).map(|(_, ty)| ty)
}

/// The elaborated term alone (every `COMPO`/`LABEL` placeholder replaced by
/// its concrete head).
pub fn compo_resolve(ctx: &Context, t: &Term) -> Result<Term, TypeError> {
    resolve(ctx, t).map(|(rt, _)| rt)
}

/// Resolve within a binder stack; exposed for the rewrite engine's guards.
pub fn resolve_in(
    ctx: &Context,
    binders: &mut Binders,
    t: &Term,
) -> Result<(Term, Term), TypeError> {
    match t.head().clone() {
        Head::Num(_) => Ok((t.clone(), stype())),
        Head::DbIdx(k) => match binders.lookup_db(k) {
            Some(BinderKind::TermVar(ty)) => Ok((t.clone(), ty.clone())),
            Some(BinderKind::IndexVar) => err("Term-Var", t, "index used as a term".into()),
            None => err("Term-Var", t, format!("unbound de Bruijn index `{t}`")),
        },
        Head::User(name) if t.args().is_empty() => {
            if let Some(kind) = binders.lookup(&name) {
                return match kind {
                    BinderKind::TermVar(ty) => Ok((t.clone(), ty.clone())),
                    BinderKind::IndexVar => {
                        err("Term-Var", t, format!("index `{name}` used as a term"))
                    }
                };
            }
            match ctx.lookup(&name) {
                Some(Entry::Assum(_, ty)) => Ok((t.clone(), ty.clone())),
                Some(Entry::Def(_, _, ty)) => Ok((t.clone(), ty.clone())),
                Some(Entry::Register(_, sigma)) => Ok((t.clone(), reg_type(sigma.clone()))),
                Some(Entry::Index(_)) => {
                    err("Term-Var", t, format!("index `{name}` used as a term"))
                }
                None => err("Term-Var", t, format!("unknown identifier `{name}`")),
            }
        }
        Head::User(_) => err("Term-Var", t, format!("`{t}` is not applicable")),
        Head::PVar(_) | Head::PSeq(_) => err("Term-Var", t, "pattern variable in term".into()),
        Head::B(b) => resolve_builtin(ctx, binders, t, b),
    }
}

fn arity<'a>(
    t: &'a Term,
    n: usize,
    rule: &'static str,
) -> Result<&'a [Term], TypeError> {
    if t.args().len() == n {
        Ok(t.args())
    } else {
        err(
            rule,
            t,
            format!("`{}` expects {n} argument(s), got {}", t.head().display_name(), t.args().len()),
        )
    }
}

fn resolve_builtin(
    ctx: &Context,
    binders: &mut Binders,
    t: &Term,
    b: B,
) -> Result<(Term, Term), TypeError> {
    match b {
        // -- basis-position heads -------------------------------------------
        B::Ket => {
            arity(t, 1, "Ket-Basis")?;
            let (i, sigma) = resolve_basis(ctx, binders, t.arg(0))?;
            Ok((Term::builtin(B::Ket, alloc::vec![i]), ktype(sigma)))
        }
        B::Bra => {
            arity(t, 1, "Bra-Basis")?;
            let (i, sigma) = resolve_basis(ctx, binders, t.arg(0))?;
            Ok((Term::builtin(B::Bra, alloc::vec![i]), btype(sigma)))
        }
        B::Delta => {
            arity(t, 2, "Sca-Delta")?;
            let (a, s1) = resolve_basis(ctx, binders, t.arg(0))?;
            let (bb, s2) = resolve_basis(ctx, binders, t.arg(1))?;
            if s1 != s2 {
                return err(
                    "Sca-Delta",
                    t,
                    format!("delta arguments have different indices `{s1}` and `{s2}`"),
                );
            }
            Ok((Term::builtin(B::Delta, alloc::vec![a, bb]), stype()))
        }
        B::Pair => {
            arity(t, 2, "Basis-Pair")?;
            // a pair of registers is a register; otherwise a basis pair
            if register_sigma(ctx, t).is_ok() {
                let sigma = register_sigma(ctx, t)?;
                var_set(t)?;
                return Ok((t.clone(), reg_type(sigma)));
            }
            let (a, s1) = resolve_basis(ctx, binders, t.arg(0))?;
            let (bb, s2) = resolve_basis(ctx, binders, t.arg(1))?;
            Ok((
                Term::builtin(B::Pair, alloc::vec![a, bb]),
                basis_type(Term::builtin(B::Prod, alloc::vec![s1, s2])),
            ))
        }
        // -- scalars ---------------------------------------------------------
        B::Conj => {
            arity(t, 1, "Sca-Conj")?;
            let (a, ty) = resolve_in(ctx, binders, t.arg(0))?;
            if sort_of(&ty) != Sort::Scalar {
                return err("Sca-Conj", t, format!("conjugate of non-scalar `{ty}`"));
            }
            Ok((Term::builtin(B::Conj, alloc::vec![a]), stype()))
        }
        B::Dot => {
            arity(t, 2, "Sca-Dot")?;
            let (bb, tb) = resolve_in(ctx, binders, t.arg(0))?;
            let (kk, tk) = resolve_in(ctx, binders, t.arg(1))?;
            match (sort_of(&tb), sort_of(&tk)) {
                (Sort::Bra, Sort::Ket) if tb.arg(0) == tk.arg(0) => {
                    Ok((Term::builtin(B::Dot, alloc::vec![bb, kk]), stype()))
                }
                _ => err("Sca-Dot", t, format!("cannot dot `{tb}` with `{tk}`")),
            }
        }
        B::Muls => {
            if t.args().len() == 1 {
                return resolve_in(ctx, binders, t.arg(0));
            }
            let mut args = Vec::new();
            for a in t.args() {
                let (ra, ty) = resolve_in(ctx, binders, a)?;
                if sort_of(&ty) != Sort::Scalar {
                    return err("Sca-Mul", a, format!("non-scalar factor of type `{ty}`"));
                }
                args.push(ra);
            }
            Ok((Term::builtin(B::Muls, args), stype()))
        }
        B::Adds | B::Add => {
            if t.args().is_empty() {
                return err("Sca-Add", t, "empty addition".into());
            }
            if t.args().len() == 1 {
                return resolve_in(ctx, binders, t.arg(0));
            }
            let mut args = Vec::new();
            let mut ty0: Option<Term> = None;
            for a in t.args() {
                let (ra, ty) = resolve_in(ctx, binders, a)?;
                match &ty0 {
                    None => ty0 = Some(ty),
                    Some(prev) if *prev == ty => {}
                    Some(prev) => {
                        return err(
                            "Ket-Add",
                            a,
                            format!("addition mixes types `{prev}` and `{ty}`"),
                        )
                    }
                }
                args.push(ra);
            }
            let ty = ty0.unwrap();
            let head = match sort_of(&ty) {
                Sort::Scalar => B::Adds,
                Sort::Ket | Sort::Bra | Sort::Opt | Sort::Labelled => B::Add,
                _ => return err("Ket-Add", t, format!("cannot add values of type `{ty}`")),
            };
            Ok((Term::builtin(head, args), ty))
        }
        // -- Dirac constants --------------------------------------------------
        B::ZeroK | B::ZeroB | B::OneO => {
            arity(t, 1, "Ket-0")?;
            let sigma = canon_index(t.arg(0));
            check_index(ctx, binders, &sigma)?;
            let ty = match b {
                B::ZeroK => ktype(sigma.clone()),
                B::ZeroB => btype(sigma.clone()),
                _ => otype(sigma.clone(), sigma.clone()),
            };
            Ok((Term::builtin(b, alloc::vec![sigma]), ty))
        }
        B::ZeroO => {
            arity(t, 2, "Opt-0")?;
            let s1 = canon_index(t.arg(0));
            let s2 = canon_index(t.arg(1));
            check_index(ctx, binders, &s1)?;
            check_index(ctx, binders, &s2)?;
            Ok((
                Term::builtin(B::ZeroO, alloc::vec![s1.clone(), s2.clone()]),
                otype(s1, s2),
            ))
        }
        // -- shared Dirac operations -----------------------------------------
        B::Adj => {
            arity(t, 1, "Ket-Adj")?;
            let (x, ty) = resolve_in(ctx, binders, t.arg(0))?;
            let rty = match sort_of(&ty) {
                Sort::Ket => btype(ty.arg(0).clone()),
                Sort::Bra => ktype(ty.arg(0).clone()),
                Sort::Opt => otype(ty.arg(1).clone(), ty.arg(0).clone()),
                Sort::Labelled => {
                    let (s1, s2) = dtype_sets(&ty).unwrap();
                    dtype(&s2, &s1)
                }
                _ => return err("Ket-Adj", t, format!("adjoint of `{ty}`")),
            };
            Ok((Term::builtin(B::Adj, alloc::vec![x]), rty))
        }
        B::Scr => {
            arity(t, 2, "Ket-Scr")?;
            let (a, ta) = resolve_in(ctx, binders, t.arg(0))?;
            if sort_of(&ta) != Sort::Scalar {
                return err("Ket-Scr", t, format!("scaling by non-scalar `{ta}`"));
            }
            let (x, tx) = resolve_in(ctx, binders, t.arg(1))?;
            match sort_of(&tx) {
                // scaling a scalar is just multiplication
                Sort::Scalar => Ok((Term::builtin(B::Muls, alloc::vec![a, x]), stype())),
                Sort::Ket | Sort::Bra | Sort::Opt | Sort::Labelled => {
                    Ok((Term::builtin(B::Scr, alloc::vec![a, x]), tx))
                }
                _ => err("Ket-Scr", t, format!("cannot scale a value of type `{tx}`")),
            }
        }
        B::MulK => {
            arity(t, 2, "Ket-MulK")?;
            let (o, to) = resolve_in(ctx, binders, t.arg(0))?;
            let (k, tk) = resolve_in(ctx, binders, t.arg(1))?;
            match (sort_of(&to), sort_of(&tk)) {
                (Sort::Opt, Sort::Ket) if to.arg(1) == tk.arg(0) => Ok((
                    Term::builtin(B::MulK, alloc::vec![o, k]),
                    ktype(to.arg(0).clone()),
                )),
                _ => err("Ket-MulK", t, format!("cannot apply `{to}` to `{tk}`")),
            }
        }
        B::MulB => {
            arity(t, 2, "Bra-MulB")?;
            let (bb, tb) = resolve_in(ctx, binders, t.arg(0))?;
            let (o, to) = resolve_in(ctx, binders, t.arg(1))?;
            match (sort_of(&tb), sort_of(&to)) {
                (Sort::Bra, Sort::Opt) if tb.arg(0) == to.arg(0) => Ok((
                    Term::builtin(B::MulB, alloc::vec![bb, o]),
                    btype(to.arg(1).clone()),
                )),
                _ => err("Bra-MulB", t, format!("cannot compose `{tb}` with `{to}`")),
            }
        }
        B::MulO => {
            arity(t, 2, "Opt-Mulo")?;
            let (o1, t1) = resolve_in(ctx, binders, t.arg(0))?;
            let (o2, t2) = resolve_in(ctx, binders, t.arg(1))?;
            match (sort_of(&t1), sort_of(&t2)) {
                (Sort::Opt, Sort::Opt) if t1.arg(1) == t2.arg(0) => Ok((
                    Term::builtin(B::MulO, alloc::vec![o1, o2]),
                    otype(t1.arg(0).clone(), t2.arg(1).clone()),
                )),
                _ => err("Opt-Mulo", t, format!("cannot compose `{t1}` with `{t2}`")),
            }
        }
        B::Outer => {
            arity(t, 2, "Opt-Outer")?;
            let (k, tk) = resolve_in(ctx, binders, t.arg(0))?;
            let (bb, tb) = resolve_in(ctx, binders, t.arg(1))?;
            match (sort_of(&tk), sort_of(&tb)) {
                (Sort::Ket, Sort::Bra) => Ok((
                    Term::builtin(B::Outer, alloc::vec![k, bb]),
                    otype(tk.arg(0).clone(), tb.arg(0).clone()),
                )),
                _ => err("Opt-Outer", t, format!("cannot outer `{tk}` with `{tb}`")),
            }
        }
        B::Tsr => {
            arity(t, 2, "Ket-Tsr")?;
            let (x, tx) = resolve_in(ctx, binders, t.arg(0))?;
            let (y, ty) = resolve_in(ctx, binders, t.arg(1))?;
            match (sort_of(&tx), sort_of(&ty)) {
                (Sort::Ket, Sort::Ket) => Ok((
                    Term::builtin(B::Tsr, alloc::vec![x, y]),
                    ktype(Term::builtin(
                        B::Prod,
                        alloc::vec![tx.arg(0).clone(), ty.arg(0).clone()],
                    )),
                )),
                (Sort::Bra, Sort::Bra) => Ok((
                    Term::builtin(B::Tsr, alloc::vec![x, y]),
                    btype(Term::builtin(
                        B::Prod,
                        alloc::vec![tx.arg(0).clone(), ty.arg(0).clone()],
                    )),
                )),
                (Sort::Opt, Sort::Opt) => Ok((
                    Term::builtin(B::Tsr, alloc::vec![x, y]),
                    otype(
                        Term::builtin(B::Prod, alloc::vec![tx.arg(0).clone(), ty.arg(0).clone()]),
                        Term::builtin(B::Prod, alloc::vec![tx.arg(1).clone(), ty.arg(1).clone()]),
                    ),
                )),
                (Sort::Labelled, Sort::Labelled) => {
                    ltsr_type(t, alloc::vec![(x, tx), (y, ty)])
                }
                _ => err("Ket-Tsr", t, format!("cannot tensor `{tx}` with `{ty}`")),
            }
        }
        B::LTsr => {
            if t.args().len() < 2 {
                return err("L-Tsr", t, "labelled tensor needs two factors".into());
            }
            let mut parts = Vec::new();
            for a in t.args() {
                let (x, ty) = resolve_in(ctx, binders, a)?;
                if sort_of(&ty) != Sort::Labelled {
                    return err("L-Tsr", a, format!("labelled tensor of `{ty}`"));
                }
                parts.push((x, ty));
            }
            ltsr_type(t, parts)
        }
        B::LDot => {
            arity(t, 2, "L-Dot")?;
            let (d1, t1) = resolve_in(ctx, binders, t.arg(0))?;
            let (d2, t2) = resolve_in(ctx, binders, t.arg(1))?;
            let ty = ldot_type(t, &t1, &t2)?;
            Ok((Term::builtin(B::LDot, alloc::vec![d1, d2]), ty))
        }
        B::LKet | B::LBra => {
            arity(t, 2, "L-Basis-Ket")?;
            let rname = match t.arg(1).as_var() {
                Some(n) => n.clone(),
                None => return err("L-Basis-Ket", t, "labelled basis needs a register".into()),
            };
            let sigma = match ctx.register_index(&rname) {
                Some(s) => s.clone(),
                None => {
                    return err(
                        "L-Basis-Ket",
                        t,
                        format!("`{rname}` is not a declared register"),
                    )
                }
            };
            let (i, si) = resolve_basis(ctx, binders, t.arg(0))?;
            if si != sigma {
                return err(
                    "L-Basis-Ket",
                    t,
                    format!("basis index `{si}` does not match register index `{sigma}`"),
                );
            }
            let set = alloc::vec![rname];
            let ty = if b == B::LKet {
                dtype(&set, &[])
            } else {
                dtype(&[], &set)
            };
            Ok((Term::builtin(b, alloc::vec![i, t.arg(1).clone()]), ty))
        }
        B::LiftK | B::LiftB => {
            arity(t, 2, "L-Ket")?;
            resolve_label(ctx, binders, t, t.arg(0), t.arg(1), None)
        }
        B::LiftO => {
            arity(t, 3, "L-Opt")?;
            resolve_label(ctx, binders, t, t.arg(0), t.arg(1), Some(t.arg(2)))
        }
        B::Label => match t.args().len() {
            2 => resolve_label(ctx, binders, t, t.arg(0), t.arg(1), None),
            3 => resolve_label(ctx, binders, t, t.arg(0), t.arg(1), Some(t.arg(2))),
            _ => err("L-Ket", t, "malformed lifting".into()),
        },
        B::ZeroD => {
            arity(t, 2, "L-Zero")?;
            let ty = Term::builtin(B::DType, t.args().to_vec());
            check_type(ctx, binders, &ty)?;
            let (s1, s2) = dtype_sets(&ty).unwrap();
            Ok((t.clone(), dtype(&s1, &s2)))
        }
        // -- sets --------------------------------------------------------------
        B::USet => {
            arity(t, 1, "Set-U")?;
            let sigma = canon_index(t.arg(0));
            check_index(ctx, binders, &sigma)?;
            Ok((
                Term::builtin(B::USet, alloc::vec![sigma.clone()]),
                set_type(sigma),
            ))
        }
        B::Star => {
            arity(t, 2, "Set-Prod")?;
            let (a, ta) = resolve_in(ctx, binders, t.arg(0))?;
            let (bb, tb) = resolve_in(ctx, binders, t.arg(1))?;
            match (sort_of(&ta), sort_of(&tb)) {
                (Sort::SetSort, Sort::SetSort) => Ok((
                    Term::builtin(B::Star, alloc::vec![a, bb]),
                    set_type(Term::builtin(
                        B::Prod,
                        alloc::vec![ta.arg(0).clone(), tb.arg(0).clone()],
                    )),
                )),
                _ => err("Set-Prod", t, format!("cannot product `{ta}` and `{tb}`")),
            }
        }
        // -- sums and functions -------------------------------------------------
        B::Sum => {
            arity(t, 2, "Sca-Sum")?;
            let (s, ts) = resolve_in(ctx, binders, t.arg(0))?;
            if sort_of(&ts) != Sort::SetSort {
                return err("Sca-Sum", t, format!("sum over non-set `{ts}`"));
            }
            let sigma = ts.arg(0).clone();
            let f = t.arg(1);
            if f.is(B::Fun) && (f.args().len() == 3 || f.args().len() == 2) {
                let named = f.named_binder().is_some();
                let (ann_ix, body_ix) = if named { (1, 2) } else { (0, 1) };
                let ann = elaborate_sorts(f.arg(ann_ix));
                if !ann.is(B::Hole) && ann != basis_type(sigma.clone()) {
                    return err(
                        "Sca-Sum",
                        f,
                        format!("sum binder annotated `{ann}`, expected `{}`", basis_type(sigma)),
                    );
                }
                let bound_name = f.named_binder().map(|(n, _)| n.clone());
                binders.push_term(bound_name.clone(), basis_type(sigma.clone()));
                let body_r = resolve_in(ctx, binders, f.arg(body_ix));
                binders.pop();
                let (body, tbody) = body_r?;
                match sort_of(&tbody) {
                    Sort::Scalar | Sort::Ket | Sort::Bra | Sort::Opt | Sort::Labelled => {}
                    _ => return err("Sca-Sum", t, format!("sum body has type `{tbody}`")),
                }
                let fun_args = match bound_name {
                    Some(n) => {
                        alloc::vec![Term::var_arc(n), basis_type(sigma.clone()), body]
                    }
                    None => alloc::vec![basis_type(sigma.clone()), body],
                };
                return Ok((
                    Term::builtin(B::Sum, alloc::vec![s, Term::builtin(B::Fun, fun_args)]),
                    tbody,
                ));
            }
            // sums over a non-literal function term
            let (f, tf) = resolve_in(ctx, binders, f)?;
            if tf.is(B::Arrow) && *tf.arg(0) == basis_type(sigma) {
                let tbody = tf.arg(1).clone();
                return Ok((Term::builtin(B::Sum, alloc::vec![s, f]), tbody));
            }
            err("Sca-Sum", t, format!("sum body has type `{tf}`"))
        }
        B::Fun => {
            if t.args().len() == 3 {
                let x = match t.arg(0).as_var() {
                    Some(x) => x.clone(),
                    None => return err("Lam", t, "malformed binder".into()),
                };
                let ann = elaborate_sorts(t.arg(1));
                if ann.is(B::Index) {
                    // `fun x : INDEX => e` is the index abstraction
                    let idx = Term::builtin(
                        B::Idx,
                        alloc::vec![t.arg(0).clone(), t.arg(2).clone()],
                    );
                    return resolve_in(ctx, binders, &idx);
                }
                if ann.is(B::Hole) {
                    return err("Lam", t, "cannot infer binder annotation here".into());
                }
                check_type(ctx, binders, &ann)?;
                binders.push_term(Some(x.clone()), ann.clone());
                let body_r = resolve_in(ctx, binders, t.arg(2));
                binders.pop();
                let (body, tbody) = body_r?;
                Ok((
                    Term::builtin(B::Fun, alloc::vec![Term::var_arc(x), ann.clone(), body]),
                    Term::builtin(B::Arrow, alloc::vec![ann, tbody]),
                ))
            } else if t.args().len() == 2 && t.nameless_binder().is_some() {
                let ann = elaborate_sorts(t.arg(0));
                check_type(ctx, binders, &ann)?;
                binders.push_term(None, ann.clone());
                let body_r = resolve_in(ctx, binders, t.arg(1));
                binders.pop();
                let (body, tbody) = body_r?;
                Ok((
                    Term::builtin(B::Fun, alloc::vec![ann.clone(), body]),
                    Term::builtin(B::Arrow, alloc::vec![ann, tbody]),
                ))
            } else {
                err("Lam", t, "malformed function".into())
            }
        }
        B::Idx => {
            if t.args().len() == 2 {
                let x = match t.arg(0).as_var() {
                    Some(x) => x.clone(),
                    None => return err("Index", t, "malformed index binder".into()),
                };
                binders.push_index(Some(x.clone()));
                let body_r = resolve_in(ctx, binders, t.arg(1));
                binders.pop();
                let (body, tbody) = body_r?;
                Ok((
                    Term::builtin(B::Idx, alloc::vec![Term::var_arc(x.clone()), body]),
                    Term::builtin(B::Forall, alloc::vec![Term::var_arc(x), tbody]),
                ))
            } else {
                err("Index", t, "nameless index abstraction cannot be typed".into())
            }
        }
        B::Apply => {
            arity(t, 2, "App-Lam")?;
            let (f, tf) = resolve_in(ctx, binders, t.arg(0))?;
            apply_type(ctx, binders, t, f, &tf, t.arg(1))
        }
        B::Compo => {
            arity(t, 2, "Compo-SS")?;
            let (x, tx) = resolve_in(ctx, binders, t.arg(0))?;
            if sort_of(&tx) == Sort::FunSort {
                return apply_type(ctx, binders, t, x, &tx, t.arg(1));
            }
            let (y, ty) = resolve_in(ctx, binders, t.arg(1))?;
            compo_dispatch(t, x, tx, y, ty)
        }
        B::Hole => err("Lam", t, "unresolved binder annotation".into()),
        // type-layer heads are not terms
        _ => err("Term-Var", t, format!("`{t}` is not a term")),
    }
}

/// Folds the surface spelling `σ1 * σ2` (which the parser reads as `MULS`)
/// into the index product `PROD` inside index positions.
pub fn canon_index(t: &Term) -> Term {
    match t.head() {
        Head::B(B::Muls) if t.args().len() >= 2 => t
            .args()
            .iter()
            .map(canon_index)
            .reduce(|a, b| Term::builtin(B::Prod, alloc::vec![a, b]))
            .unwrap(),
        Head::B(B::Prod) if t.args().len() == 2 => Term::builtin(
            B::Prod,
            alloc::vec![canon_index(t.arg(0)), canon_index(t.arg(1))],
        ),
        _ => t.clone(),
    }
}

/// Elaborates index spellings inside a type-term.
pub fn elaborate_sorts(t: &Term) -> Term {
    match t.head() {
        Head::B(B::Basis) | Head::B(B::KType) | Head::B(B::BType) | Head::B(B::SetT)
        | Head::B(B::Reg)
            if t.args().len() == 1 =>
        {
            Term::app(t.head().clone(), alloc::vec![canon_index(t.arg(0))])
        }
        Head::B(B::OType) if t.args().len() == 2 => Term::builtin(
            B::OType,
            alloc::vec![canon_index(t.arg(0)), canon_index(t.arg(1))],
        ),
        Head::B(B::Arrow) if t.args().len() == 2 => Term::builtin(
            B::Arrow,
            alloc::vec![elaborate_sorts(t.arg(0)), elaborate_sorts(t.arg(1))],
        ),
        Head::B(B::Forall) if t.args().len() == 2 => Term::builtin(
            B::Forall,
            alloc::vec![t.arg(0).clone(), elaborate_sorts(t.arg(1))],
        ),
        _ => t.clone(),
    }
}

fn ltsr_type(at: &Term, parts: Vec<(Term, Term)>) -> Result<(Term, Term), TypeError> {
    let mut kets: Vec<Arc<str>> = Vec::new();
    let mut bras: Vec<Arc<str>> = Vec::new();
    let mut args = Vec::new();
    for (x, ty) in parts {
        let (s1, s2) = dtype_sets(&ty).unwrap_or_default();
        if !disjoint(&kets, &s1) {
            return err(
                "L-Tsr",
                at,
                "labelled tensor subsystems are not disjoint (codomain overlap)".into(),
            );
        }
        if !disjoint(&bras, &s2) {
            return err(
                "L-Tsr",
                at,
                "labelled tensor subsystems are not disjoint (domain overlap)".into(),
            );
        }
        kets = sorted_union(&kets, &s1);
        bras = sorted_union(&bras, &s2);
        args.push(x);
    }
    Ok((Term::builtin(B::LTsr, args), dtype(&kets, &bras)))
}

fn ldot_type(at: &Term, t1: &Term, t2: &Term) -> Result<Term, TypeError> {
    let scalar_sets = (Vec::new(), Vec::new());
    let (s1, s1p) = if sort_of(t1) == Sort::Scalar {
        scalar_sets.clone()
    } else {
        match dtype_sets(t1) {
            Some(x) => x,
            None => return err("L-Dot", at, format!("cannot compose `{t1}`")),
        }
    };
    let (s2, s2p) = if sort_of(t2) == Sort::Scalar {
        scalar_sets
    } else {
        match dtype_sets(t2) {
            Some(x) => x,
            None => return err("L-Dot", at, format!("cannot compose `{t2}`")),
        }
    };
    if !disjoint(&s1, &set_minus(&s2, &s1p)) {
        return err("L-Dot", at, "composition codomains overlap".into());
    }
    if !disjoint(&s2p, &set_minus(&s1p, &s2)) {
        return err("L-Dot", at, "composition domains overlap".into());
    }
    let cod = sorted_union(&s1, &set_minus(&s2, &s1p));
    let dom = sorted_union(&s2p, &set_minus(&s1p, &s2));
    Ok(dtype(&cod, &dom))
}

fn apply_type(
    ctx: &Context,
    binders: &mut Binders,
    at: &Term,
    f: Term,
    tf: &Term,
    arg: &Term,
) -> Result<(Term, Term), TypeError> {
    if tf.is(B::Arrow) {
        let expected = tf.arg(0);
        let ra = check_against(ctx, binders, arg, expected)?;
        return Ok((
            Term::builtin(B::Apply, alloc::vec![f, ra]),
            tf.arg(1).clone(),
        ));
    }
    if tf.is(B::Forall) {
        check_index(ctx, binders, arg)?;
        let x = tf.arg(0).as_var().cloned().unwrap_or_else(|| Arc::from("x"));
        let body = Substitution::single(&x, arg.clone()).apply(tf.arg(1));
        return Ok((Term::builtin(B::Apply, alloc::vec![f, arg.clone()]), body));
    }
    err("App-Lam", at, format!("`{tf}` is not a function type"))
}

fn check_against(
    ctx: &Context,
    binders: &mut Binders,
    t: &Term,
    expected: &Term,
) -> Result<Term, TypeError> {
    if expected.is(B::Basis) {
        let (rt, sigma) = resolve_basis(ctx, binders, t)?;
        if sigma != *expected.arg(0) {
            return err(
                "App-Lam",
                t,
                format!("expected basis of `{}`, got `{sigma}`", expected.arg(0)),
            );
        }
        return Ok(rt);
    }
    let (rt, ty) = resolve_in(ctx, binders, t)?;
    if ty != *expected {
        return err("App-Lam", t, format!("expected `{expected}`, got `{ty}`"));
    }
    Ok(rt)
}

fn compo_dispatch(
    at: &Term,
    x: Term,
    tx: Term,
    y: Term,
    ty: Term,
) -> Result<(Term, Term), TypeError> {
    use Sort::*;
    let pack = |head: B, a: Term, bb: Term| Term::builtin(head, alloc::vec![a, bb]);
    match (sort_of(&tx), sort_of(&ty)) {
        (Scalar, Scalar) => Ok((pack(B::Muls, x, y), stype())),
        (Scalar, Ket) | (Scalar, Bra) | (Scalar, Opt) | (Scalar, Labelled) => {
            Ok((pack(B::Scr, x, y), ty))
        }
        (Ket, Scalar) | (Bra, Scalar) | (Opt, Scalar) | (Labelled, Scalar) => {
            Ok((pack(B::Scr, y, x), tx))
        }
        (Ket, Ket) => Ok((
            pack(B::Tsr, x, y),
            ktype(Term::builtin(
                B::Prod,
                alloc::vec![tx.arg(0).clone(), ty.arg(0).clone()],
            )),
        )),
        (Ket, Bra) => Ok((
            pack(B::Outer, x, y),
            otype(tx.arg(0).clone(), ty.arg(0).clone()),
        )),
        (Bra, Ket) if tx.arg(0) == ty.arg(0) => Ok((pack(B::Dot, x, y), stype())),
        (Bra, Bra) => Ok((
            pack(B::Tsr, x, y),
            btype(Term::builtin(
                B::Prod,
                alloc::vec![tx.arg(0).clone(), ty.arg(0).clone()],
            )),
        )),
        (Bra, Opt) if tx.arg(0) == ty.arg(0) => {
            Ok((pack(B::MulB, x, y), btype(ty.arg(1).clone())))
        }
        (Opt, Ket) if tx.arg(1) == ty.arg(0) => {
            Ok((pack(B::MulK, x, y), ktype(tx.arg(0).clone())))
        }
        (Opt, Opt) if tx.arg(1) == ty.arg(0) => Ok((
            pack(B::MulO, x, y),
            otype(tx.arg(0).clone(), ty.arg(1).clone()),
        )),
        (Labelled, Labelled) => {
            let rty = ldot_type(at, &tx, &ty)?;
            Ok((pack(B::LDot, x, y), rty))
        }
        _ => err(
            "Compo-DD",
            at,
            format!("no composition of `{tx}` with `{ty}`"),
        ),
    }
}

fn resolve_label(
    ctx: &Context,
    binders: &mut Binders,
    at: &Term,
    e: &Term,
    r1: &Term,
    r2: Option<&Term>,
) -> Result<(Term, Term), TypeError> {
    let (x, tx) = resolve_in(ctx, binders, e)?;
    match (sort_of(&tx), r2) {
        (Sort::Ket, None) => {
            let sigma = register_sigma(ctx, r1)?;
            let vars = var_set(r1)?;
            if *tx.arg(0) != sigma {
                return err(
                    "L-Ket",
                    at,
                    format!(
                        "register `{r1}` has index `{sigma}` but the ket has `{}`",
                        tx.arg(0)
                    ),
                );
            }
            // a basis ket on a single register is already a labelled basis
            if x.is(B::Ket) && r1.as_var().is_some() {
                return Ok((
                    Term::builtin(B::LKet, alloc::vec![x.arg(0).clone(), r1.clone()]),
                    dtype(&vars, &[]),
                ));
            }
            Ok((
                Term::builtin(B::LiftK, alloc::vec![x, r1.clone()]),
                dtype(&vars, &[]),
            ))
        }
        (Sort::Bra, None) => {
            let sigma = register_sigma(ctx, r1)?;
            let vars = var_set(r1)?;
            if *tx.arg(0) != sigma {
                return err(
                    "L-Bra",
                    at,
                    format!(
                        "register `{r1}` has index `{sigma}` but the bra has `{}`",
                        tx.arg(0)
                    ),
                );
            }
            if x.is(B::Bra) && r1.as_var().is_some() {
                return Ok((
                    Term::builtin(B::LBra, alloc::vec![x.arg(0).clone(), r1.clone()]),
                    dtype(&[], &vars),
                ));
            }
            Ok((
                Term::builtin(B::LiftB, alloc::vec![x, r1.clone()]),
                dtype(&[], &vars),
            ))
        }
        (Sort::Opt, r2) => {
            let r2 = r2.unwrap_or(r1);
            let sigma1 = register_sigma(ctx, r1)?;
            let sigma2 = register_sigma(ctx, r2)?;
            let v1 = var_set(r1)?;
            let v2 = var_set(r2)?;
            if *tx.arg(0) != sigma1 || *tx.arg(1) != sigma2 {
                return err(
                    "L-Opt",
                    at,
                    format!(
                        "operator of type `{tx}` lifted at registers of indices `{sigma1}`, `{sigma2}`"
                    ),
                );
            }
            Ok((
                Term::builtin(B::LiftO, alloc::vec![x, r1.clone(), r2.clone()]),
                dtype(&v1, &v2),
            ))
        }
        (_, Some(_)) => err("L-Opt", at, format!("two-register lifting of `{tx}`")),
        _ => err("L-Ket", at, format!("cannot lift a value of type `{tx}`")),
    }
}

/// Basis-position resolution: `0`/`1` are the qubit basis, pairs build
/// product bases, and anything else must resolve to a `Basis` type.
pub fn resolve_basis(
    ctx: &Context,
    binders: &mut Binders,
    t: &Term,
) -> Result<(Term, Term), TypeError> {
    match t.head() {
        Head::Num(n) if t.args().is_empty() => {
            if n.im == 0 && (n.re == 0 || n.re == 1) {
                Ok((t.clone(), Term::atom(B::Bit)))
            } else {
                err("Basis-0", t, format!("`{t}` is not a basis literal"))
            }
        }
        Head::B(B::Pair) if t.args().len() == 2 => {
            let (a, s1) = resolve_basis(ctx, binders, t.arg(0))?;
            let (bb, s2) = resolve_basis(ctx, binders, t.arg(1))?;
            Ok((
                Term::builtin(B::Pair, alloc::vec![a, bb]),
                Term::builtin(B::Prod, alloc::vec![s1, s2]),
            ))
        }
        _ => {
            let (rt, ty) = resolve_in(ctx, binders, t)?;
            if ty.is(B::Basis) {
                Ok((rt, ty.arg(0).clone()))
            } else {
                err("Ket-Basis", t, format!("`{t}` is not a basis term (type `{ty}`)"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn motivating_ctx() -> Context {
        Context::new()
            .pushed(Entry::Index(Arc::from("T")))
            .pushed(Entry::Assum(
                Arc::from("M"),
                parse_term("OTYPE[T, T]").unwrap(),
            ))
            .pushed(Entry::Register(Arc::from("r1"), Term::var("T")))
            .pushed(Entry::Register(Arc::from("r2"), Term::var("T")))
    }

    #[test]
    fn empty_context_is_well_formed() {
        assert!(check_context(&Context::new()).is_ok());
    }

    #[test]
    fn motivating_context_is_well_formed() {
        assert!(check_context(&motivating_ctx()).is_ok());
    }

    #[test]
    fn unknown_index_is_rejected() {
        let ctx = Context::new().pushed(Entry::Assum(
            Arc::from("x"),
            parse_term("KTYPE[T]").unwrap(),
        ));
        let e = check_context(&ctx).unwrap_err();
        assert_eq!(e.rule, "Index-Var");
    }

    #[test]
    fn ket_of_basis_var() {
        let ctx = Context::new()
            .pushed(Entry::Index(Arc::from("T")))
            .pushed(Entry::Assum(Arc::from("t"), parse_term("BASIS[T]").unwrap()));
        let ty = infer_type(&ctx, &parse_term("|t>").unwrap()).unwrap();
        assert_eq!(ty, parse_term("KTYPE[T]").unwrap());
    }

    #[test]
    fn labelled_ket_type() {
        let ctx = motivating_ctx().pushed(Entry::Assum(
            Arc::from("i"),
            parse_term("BASIS[T]").unwrap(),
        ));
        let (rt, ty) = resolve(&ctx, &parse_term("(|i>)_r1").unwrap()).unwrap();
        assert_eq!(rt, parse_term("LKET[i, r1]").unwrap());
        assert_eq!(ty, parse_term("DTYPE[RSET[r1], RSET]").unwrap());
    }

    #[test]
    fn tensor_label_overlap_rejected() {
        let ctx = Context::new()
            .pushed(Entry::Index(Arc::from("T")))
            .pushed(Entry::Register(Arc::from("p"), Term::var("T")))
            .pushed(Entry::Assum(Arc::from("i"), parse_term("BASIS[T]").unwrap()))
            .pushed(Entry::Assum(Arc::from("j"), parse_term("BASIS[T]").unwrap()))
            .pushed(Entry::Assum(Arc::from("k"), parse_term("BASIS[T]").unwrap()));
        // <i|_p · (|j>_p ⊗ |k>_p) : the tensor reuses p
        let t = parse_term("LTSR[LKET[j, p], LKET[k, p]]").unwrap();
        let e = resolve(&ctx, &t).unwrap_err();
        assert_eq!(e.rule, "L-Tsr");
    }

    #[test]
    fn var_set_rejects_repeats() {
        let pair = parse_term("(q, q)").unwrap();
        assert!(var_set(&pair).is_err());
        let ok = parse_term("(q, r)").unwrap();
        assert_eq!(
            var_set(&ok).unwrap(),
            alloc::vec![Arc::<str>::from("q"), Arc::<str>::from("r")]
        );
    }

    #[test]
    fn compo_resolution_examples() {
        let ctx = Context::new()
            .pushed(Entry::Index(Arc::from("T")))
            .pushed(Entry::Assum(Arc::from("B1"), parse_term("BTYPE[T]").unwrap()))
            .pushed(Entry::Assum(Arc::from("K1"), parse_term("KTYPE[T]").unwrap()))
            .pushed(Entry::Assum(Arc::from("O1"), parse_term("OTYPE[T, T]").unwrap()))
            .pushed(Entry::Assum(Arc::from("a"), Term::atom(B::SType)))
            .pushed(Entry::Assum(Arc::from("b"), Term::atom(B::SType)));
        let r = compo_resolve(&ctx, &parse_term("B1 K1").unwrap()).unwrap();
        assert_eq!(r, parse_term("DOT[B1, K1]").unwrap());
        let r = compo_resolve(&ctx, &parse_term("O1 K1").unwrap()).unwrap();
        assert_eq!(r, parse_term("MULK[O1, K1]").unwrap());
        let r = compo_resolve(&ctx, &parse_term("a b").unwrap()).unwrap();
        assert_eq!(r, parse_term("MULS[a, b]").unwrap());
        // resolution is idempotent
        assert_eq!(compo_resolve(&ctx, &r).unwrap(), r);
    }

    #[test]
    fn use_case_checkeq_sides_have_equal_types() {
        let mut ctx = motivating_ctx();
        // Def phi := idx T' => Sum nv in USET[T'], |(nv, nv)>
        let phi = parse_term("idx S => Sum nv in USET[S], |(nv, nv)>").unwrap();
        let (body, ty) = resolve(&ctx, &phi).unwrap();
        assert_eq!(ty, parse_term("FORALL[S, KTYPE[PROD[S, S]]]").unwrap());
        ctx = ctx.pushed(Entry::Def(Arc::from("phi"), body, ty));
        let lhs = parse_term("M_r1 (phi T)_(r1, r2)").unwrap();
        let t1 = infer_type(&ctx, &lhs).unwrap();
        assert_eq!(t1, parse_term("DTYPE[RSET[r1, r2], RSET]").unwrap());
    }

    #[test]
    fn scalar_zero_types() {
        assert_eq!(
            infer_type(&Context::new(), &Term::int(0)).unwrap(),
            stype()
        );
    }

    #[test]
    fn add_resolves_to_adds_on_scalars() {
        let ctx = Context::new()
            .pushed(Entry::Assum(Arc::from("a"), stype()))
            .pushed(Entry::Assum(Arc::from("b"), stype()));
        let r = compo_resolve(&ctx, &parse_term("a + b").unwrap()).unwrap();
        assert_eq!(r, parse_term("ADDS[a, b]").unwrap());
    }
}
