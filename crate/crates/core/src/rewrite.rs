//! Rule representation, AC-aware pattern matching, and innermost-leftmost
//! rewriting to a fixpoint with trace recording.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::context::Context;
use crate::symbol::{Builtin as B, Head};
use crate::term::Term;
use crate::typing::{self, Binders};

/// One rewrite step: the rule applied, the position (child-index path from
/// the root), and the redex before and after. Splicing `post` at `path`
/// into the current term replays the step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub rule: &'static str,
    pub path: Vec<usize>,
    pub pre: Term,
    pub post: Term,
}

impl TraceRecord {
    /// `rule-name @ position : pre ==> post`
    pub fn render(&self) -> String {
        use alloc::format;
        let mut pos = String::from("[");
        for (i, p) in self.path.iter().enumerate() {
            if i > 0 {
                pos.push('.');
            }
            pos.push_str(&format!("{p}"));
        }
        pos.push(']');
        format!("{} @ {} : {} ==> {}", self.rule, pos, self.pre, self.post)
    }
}

/// Replays a trace against `initial`, checking each pre-term, and returns the
/// final term.
pub fn replay(initial: &Term, trace: &[TraceRecord]) -> Option<Term> {
    let mut t = initial.clone();
    for rec in trace {
        if t.at_path(&rec.path)? != &rec.pre {
            return None;
        }
        t = t.splice(&rec.path, rec.post.clone())?;
    }
    Some(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewriteError {
    pub message: String,
    /// Steps applied before the failure, for diagnosis.
    pub partial_trace_len: usize,
}

// ---------------------------------------------------------------------------
// bindings
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    One(Term),
    Seq(Vec<Term>),
}

#[derive(Debug, Clone, Default)]
pub struct Bindings {
    map: BTreeMap<&'static str, Bound>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        match self.map.get(name) {
            Some(Bound::One(t)) => Some(t),
            _ => None,
        }
    }

    pub fn get_seq(&self, name: &str) -> Option<&[Term]> {
        match self.map.get(name) {
            Some(Bound::Seq(ts)) => Some(ts),
            _ => None,
        }
    }

    pub fn insert(&mut self, name: &'static str, t: Term) {
        self.map.insert(name, Bound::One(t));
    }

    fn bind_one(&mut self, name: &'static str, t: &Term) -> bool {
        match self.map.get(name) {
            Some(Bound::One(prev)) => prev == t,
            Some(Bound::Seq(_)) => false,
            None => {
                self.map.insert(name, Bound::One(t.clone()));
                true
            }
        }
    }
}

// ---------------------------------------------------------------------------
// matching
// ---------------------------------------------------------------------------

/// Matches `pattern` against `subject`. Non-AC heads match syntactically;
/// AC heads select an unordered sub-multiset for each fixed pattern element
/// and bind at most one sequence variable to the remainder (in subject
/// order). The first match under the deterministic left-to-right enumeration
/// is returned.
pub fn match_ac(pattern: &Term, subject: &Term) -> Option<Bindings> {
    let mut b = Bindings::new();
    if match_into(pattern, subject, &mut b) {
        Some(b)
    } else {
        None
    }
}

fn match_into(pattern: &Term, subject: &Term, b: &mut Bindings) -> bool {
    match pattern.head() {
        Head::PVar(name) => return b.bind_one(name, subject),
        Head::PSeq(_) => return false, // sequence vars live in AC argument lists only
        _ => {}
    }
    if pattern.head() != subject.head() {
        return false;
    }
    if pattern.head().is_ac() {
        return match_ac_args(pattern.args(), subject.args(), b);
    }
    if pattern.args().len() != subject.args().len() {
        return false;
    }
    pattern
        .args()
        .iter()
        .zip(subject.args())
        .all(|(p, s)| match_into(p, s, b))
}

fn match_ac_args(pats: &[Term], subj: &[Term], b: &mut Bindings) -> bool {
    let mut fixed: Vec<&Term> = Vec::new();
    let mut seq_var: Option<&'static str> = None;
    for p in pats {
        if let Head::PSeq(name) = p.head() {
            if seq_var.is_some() {
                return false;
            }
            seq_var = Some(name);
        } else {
            fixed.push(p);
        }
    }
    if seq_var.is_none() && fixed.len() != subj.len() {
        return false;
    }
    if fixed.len() > subj.len() {
        return false;
    }
    let mut used = alloc::vec![false; subj.len()];
    if !assign(&fixed, 0, subj, &mut used, b) {
        return false;
    }
    if let Some(name) = seq_var {
        let rest: Vec<Term> = subj
            .iter()
            .zip(used.iter())
            .filter(|(_, u)| !**u)
            .map(|(t, _)| t.clone())
            .collect();
        match b.map.get(name) {
            Some(Bound::Seq(prev)) => return *prev == rest,
            Some(Bound::One(_)) => return false,
            None => b.map.insert(name, Bound::Seq(rest)),
        };
    }
    true
}

fn assign(fixed: &[&Term], i: usize, subj: &[Term], used: &mut [bool], b: &mut Bindings) -> bool {
    if i == fixed.len() {
        return true;
    }
    for j in 0..subj.len() {
        if used[j] {
            continue;
        }
        let snapshot = b.map.clone();
        if match_into(fixed[i], &subj[j], b) {
            used[j] = true;
            if assign(fixed, i + 1, subj, used, b) {
                return true;
            }
            used[j] = false;
        }
        b.map = snapshot;
    }
    false
}

/// Instantiates a template containing pattern and sequence variables.
pub fn instantiate(template: &Term, b: &Bindings) -> Term {
    match template.head() {
        Head::PVar(name) => b
            .get(name)
            .unwrap_or_else(|| panic!("unbound pattern variable {name}"))
            .clone(),
        Head::PSeq(name) => panic!("sequence variable {name} outside an argument list"),
        _ => {
            let mut args = Vec::with_capacity(template.args().len());
            for a in template.args() {
                if let Head::PSeq(name) = a.head() {
                    args.extend(b.get_seq(name).expect("unbound sequence variable").iter().cloned());
                } else {
                    args.push(instantiate(a, b));
                }
            }
            Term::app(template.head().clone(), args)
        }
    }
}

// ---------------------------------------------------------------------------
// rules
// ---------------------------------------------------------------------------

/// Context handed to guards and custom matchers: the typing context plus the
/// binder stack of the position being rewritten.
pub struct RwCtx<'a> {
    pub ctx: &'a Context,
    pub binders: &'a Binders,
}

impl<'a> RwCtx<'a> {
    /// Type of a subterm at the current position, if it is well-typed.
    pub fn type_of(&self, t: &Term) -> Option<Term> {
        typing::resolve_in(self.ctx, &mut self.binders.clone(), t)
            .ok()
            .map(|(_, ty)| ty)
    }
}

type GuardFn = fn(&RwCtx<'_>, &mut Bindings) -> bool;
type BuildFn = fn(&RwCtx<'_>, &Bindings) -> Option<Term>;
type CustomFn = fn(&RwCtx<'_>, &Term) -> Option<Term>;

pub enum RuleBody {
    /// Pattern match, optional guard (which may bind extra variables), and a
    /// builder for the replacement.
    Pattern {
        lhs: Term,
        guard: Option<GuardFn>,
        build: BuildFn,
    },
    /// A dedicated matcher for shapes the pattern language does not cover
    /// (variadic sum prefixes, binder destructuring, typed conversions).
    Custom(CustomFn),
}

pub struct Rule {
    pub name: &'static str,
    /// Root heads this rule can fire on, used for dispatch. `None` means the
    /// rule must be tried everywhere (e.g. definition unfolding).
    pub heads: Option<&'static [B]>,
    pub body: RuleBody,
}

impl Rule {
    pub fn try_apply(&self, rc: &RwCtx<'_>, t: &Term) -> Option<Term> {
        match &self.body {
            RuleBody::Pattern { lhs, guard, build } => {
                let mut b = match_ac(lhs, t)?;
                if let Some(g) = guard {
                    if !g(rc, &mut b) {
                        return None;
                    }
                }
                build(rc, &b)
            }
            RuleBody::Custom(f) => f(rc, t),
        }
    }
}

/// An ordered list of rules with a head-indexed dispatch table.
pub struct RuleSet {
    rules: Vec<Rule>,
    by_head: BTreeMap<B, Vec<usize>>,
    anywhere: Vec<usize>,
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> Self {
        let mut by_head: BTreeMap<B, Vec<usize>> = BTreeMap::new();
        let mut anywhere = Vec::new();
        for (i, r) in rules.iter().enumerate() {
            match r.heads {
                Some(hs) => {
                    for h in hs {
                        by_head.entry(*h).or_default().push(i);
                    }
                }
                None => anywhere.push(i),
            }
        }
        RuleSet {
            rules,
            by_head,
            anywhere,
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Tries the rules in list order at the root of `t`.
    pub fn apply_at(&self, rc: &RwCtx<'_>, t: &Term) -> Option<(&'static str, Term)> {
        let head_rules: &[usize] = match t.head() {
            Head::B(b) => self.by_head.get(b).map(|v| v.as_slice()).unwrap_or(&[]),
            _ => &[],
        };
        let mut hi = 0;
        let mut ai = 0;
        // merge the two index lists to preserve overall rule order
        loop {
            let next = match (head_rules.get(hi), self.anywhere.get(ai)) {
                (Some(&h), Some(&a)) => {
                    if h < a {
                        hi += 1;
                        h
                    } else {
                        ai += 1;
                        a
                    }
                }
                (Some(&h), None) => {
                    hi += 1;
                    h
                }
                (None, Some(&a)) => {
                    ai += 1;
                    a
                }
                (None, None) => return None,
            };
            let rule = &self.rules[next];
            if let Some(out) = rule.try_apply(rc, t) {
                if out != *t {
                    return Some((rule.name, out));
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// the engine
// ---------------------------------------------------------------------------

pub struct EngineConfig {
    pub step_limit: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { step_limit: 100_000 }
    }
}

struct EngineState<'a> {
    rules: &'a RuleSet,
    ctx: &'a Context,
    trace: Vec<TraceRecord>,
    steps_left: usize,
    /// Terms known to be in normal form w.r.t. the rule set, by pointer.
    /// Sound because bound names are globally unique during a pipeline run,
    /// so a shared subterm types identically wherever it occurs.
    normal: BTreeSet<usize>,
    limit_hit: bool,
}

/// Applies the first firing rule at the innermost-leftmost position.
/// Returns the rewritten whole term and the step's record.
pub fn apply_once(
    rules: &RuleSet,
    ctx: &Context,
    t: &Term,
) -> Option<(Term, TraceRecord)> {
    let mut path = Vec::new();
    let mut binders = Binders::new();
    let found = find_innermost(rules, ctx, t, &mut path, &mut binders)?;
    let rec = TraceRecord {
        rule: found.0,
        path: path.clone(),
        pre: t.at_path(&path).unwrap().clone(),
        post: found.1.clone(),
    };
    let out = t.splice(&path, found.1).unwrap();
    Some((out, rec))
}

fn find_innermost(
    rules: &RuleSet,
    ctx: &Context,
    t: &Term,
    path: &mut Vec<usize>,
    binders: &mut Binders,
) -> Option<(&'static str, Term)> {
    for (i, a) in t.args().iter().enumerate() {
        path.push(i);
        push_binder(t, i, binders);
        let r = find_innermost(rules, ctx, a, path, binders);
        pop_binder(t, i, binders);
        if r.is_some() {
            return r;
        }
        path.pop();
    }
    let rc = RwCtx { ctx, binders };
    rules.apply_at(&rc, t)
}

fn push_binder(parent: &Term, child_ix: usize, binders: &mut Binders) {
    if let Some((name, body_ix)) = parent.named_binder() {
        if child_ix == body_ix {
            match parent.head() {
                Head::B(B::Fun) => {
                    binders.push_term(Some(name.clone()), parent.arg(1).clone());
                }
                Head::B(B::Idx) => binders.push_index(Some(name.clone())),
                _ => {}
            }
            return;
        }
    }
    if let Some(body_ix) = parent.nameless_binder() {
        if child_ix == body_ix {
            match parent.head() {
                Head::B(B::Fun) => binders.push_term(None, parent.arg(0).clone()),
                Head::B(B::Idx) => binders.push_index(None),
                _ => {}
            }
        }
    }
}

fn pop_binder(parent: &Term, child_ix: usize, binders: &mut Binders) {
    let is_binder_body = parent
        .named_binder()
        .map(|(_, ix)| ix == child_ix)
        .or_else(|| parent.nameless_binder().map(|ix| ix == child_ix))
        .unwrap_or(false);
    if is_binder_body {
        binders.pop();
    }
}

/// Rewrites to a fixpoint under the innermost-leftmost strategy, recording
/// one trace record per step.
pub fn rewrite_to_fixpoint(
    rules: &RuleSet,
    ctx: &Context,
    t: &Term,
    config: &EngineConfig,
) -> Result<(Term, Vec<TraceRecord>), (RewriteError, Vec<TraceRecord>)> {
    let mut state = EngineState {
        rules,
        ctx,
        trace: Vec::new(),
        steps_left: config.step_limit,
        normal: BTreeSet::new(),
        limit_hit: false,
    };
    let mut path = Vec::new();
    let mut binders = Binders::new();
    let out = normalize_rec(&mut state, t, &mut path, &mut binders);
    if state.limit_hit {
        let n = state.trace.len();
        return Err((
            RewriteError {
                message: alloc::format!(
                    "step limit exceeded after {} rewrite steps (possible nontermination)",
                    n
                ),
                partial_trace_len: n,
            },
            state.trace,
        ));
    }
    Ok((out, state.trace))
}

fn normalize_rec(
    state: &mut EngineState<'_>,
    t: &Term,
    path: &mut Vec<usize>,
    binders: &mut Binders,
) -> Term {
    if state.normal.contains(&t.ptr_id()) || state.limit_hit {
        return t.clone();
    }
    let mut current = t.clone();
    loop {
        // children first, left to right
        let mut new_args: Option<Vec<Term>> = None;
        for i in 0..current.args().len() {
            path.push(i);
            push_binder(&current, i, binders);
            let child = &current.args()[i];
            let normed = normalize_rec(state, child, path, binders);
            pop_binder(&current, i, binders);
            path.pop();
            if normed != *child {
                new_args
                    .get_or_insert_with(|| current.args().to_vec())
                    .truncate(i);
                new_args.as_mut().unwrap().push(normed);
                // renormalize remaining children against the rebuilt node
                for j in (i + 1)..current.args().len() {
                    new_args.as_mut().unwrap().push(current.args()[j].clone());
                }
            } else if let Some(args) = new_args.as_mut() {
                args[i] = normed;
            }
        }
        if let Some(args) = new_args {
            // rebuilding may flatten a nested AC head produced by a child step
            current = Term::app(current.head().clone(), args);
        }
        if state.limit_hit {
            return current;
        }
        let rc = RwCtx {
            ctx: state.ctx,
            binders,
        };
        match state.rules.apply_at(&rc, &current) {
            Some((name, out)) => {
                if state.steps_left == 0 {
                    state.limit_hit = true;
                    return current;
                }
                state.steps_left -= 1;
                state.trace.push(TraceRecord {
                    rule: name,
                    path: path.clone(),
                    pre: current.clone(),
                    post: out.clone(),
                });
                current = out;
            }
            None => {
                state.normal.insert(current.ptr_id());
                return current;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Builtin as B;

    fn pv(n: &'static str) -> Term {
        Term::app(Head::PVar(n), Vec::new())
    }

    fn sq(n: &'static str) -> Term {
        Term::app(Head::PSeq(n), Vec::new())
    }

    #[test]
    fn ac_match_binds_scaled_element_and_rest() {
        // pattern a.K + K against (x*y).|t> + |t>
        let ket_t = Term::builtin(B::Ket, alloc::vec![Term::var("t")]);
        let scaled = Term::builtin(
            B::Scr,
            alloc::vec![
                Term::builtin(B::Muls, alloc::vec![Term::var("x"), Term::var("y")]),
                ket_t.clone(),
            ],
        );
        let subject = Term::builtin(B::Add, alloc::vec![scaled, ket_t.clone()]);
        let pattern = Term::builtin(
            B::Add,
            alloc::vec![
                sq("Y"),
                Term::builtin(B::Scr, alloc::vec![pv("a"), pv("K")]),
                pv("K"),
            ],
        );
        let b = match_ac(&pattern, &subject).expect("must match");
        assert_eq!(
            b.get("a").unwrap(),
            &Term::builtin(B::Muls, alloc::vec![Term::var("x"), Term::var("y")])
        );
        assert_eq!(b.get("K").unwrap(), &ket_t);
        assert_eq!(b.get_seq("Y").unwrap().len(), 0);
    }

    #[test]
    fn delta_matches_modulo_commutativity() {
        let pattern = Term::builtin(B::Delta, alloc::vec![pv("i"), Term::var("t")]);
        let subject = Term::builtin(B::Delta, alloc::vec![Term::var("t"), Term::var("s")]);
        let b = match_ac(&pattern, &subject).expect("commutative match");
        assert_eq!(b.get("i").unwrap(), &Term::var("s"));
    }

    #[test]
    fn nonlinear_failure() {
        let pattern = Term::builtin(B::Add, alloc::vec![pv("X"), pv("X")]);
        let subject = Term::builtin(B::Add, alloc::vec![Term::var("a"), Term::var("b")]);
        assert!(match_ac(&pattern, &subject).is_none());
    }
}
