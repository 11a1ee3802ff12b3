//! Term-level simplifications.

use std::fmt;

use crate::builtins::Builtin;
use crate::interp::eval_term;
use crate::specialize::{KRule, ResidualProgram};
use crate::state::State;
use crate::term::{Cond, Rule, Term};
use crate::value::Value;

/// One local rewrite. `guard` is true when only the term's truth matters:
/// the top of a guard, or an operand of `and` in such a position.
pub trait Rewrite: Send + Sync {
    fn name(&self) -> &'static str;
    fn rewrite(&self, t: &Term, guard: bool) -> Option<Term>;
}

/// `Car(Cons(a, b))` ⇒ `a`.
pub struct CarCons;

/// `Cdr(Cons(a, b))` ⇒ `b`.
pub struct CdrCons;

/// Built-in applications over literals are replaced by their value. Cons
/// and nil stay, since pairs have no literal syntax.
pub struct ConstFold;

/// Identity and absorbing elements of `and` and `or`; `=(x, true)` is `x`
/// where only truth matters.
pub struct BoolIdentity;

fn projection(t: &Term, outer: Builtin, take_first: bool) -> Option<Term> {
    let Term::App { head, args } = t else {
        return None;
    };
    if Builtin::lookup(head) != Some(outer) {
        return None;
    }
    match &args[0] {
        Term::App { head, args } if Builtin::lookup(head) == Some(Builtin::Cons) => {
            Some(args[if take_first { 0 } else { 1 }].clone())
        }
        _ => None,
    }
}

impl Rewrite for CarCons {
    fn name(&self) -> &'static str {
        "car-cons"
    }

    fn rewrite(&self, t: &Term, _: bool) -> Option<Term> {
        projection(t, Builtin::Car, true)
    }
}

impl Rewrite for CdrCons {
    fn name(&self) -> &'static str {
        "cdr-cons"
    }

    fn rewrite(&self, t: &Term, _: bool) -> Option<Term> {
        projection(t, Builtin::Cdr, false)
    }
}

impl Rewrite for ConstFold {
    fn name(&self) -> &'static str {
        "fold"
    }

    fn rewrite(&self, t: &Term, _: bool) -> Option<Term> {
        let Term::App { head, args } = t else {
            return None;
        };
        let b = Builtin::lookup(head)?;
        if matches!(b, Builtin::Cons | Builtin::Nil) || !args.iter().all(Term::is_lit) {
            return None;
        }
        let v = eval_term(t, &State::new());
        (!matches!(v, Value::Pair(..) | Value::Nil)).then_some(Term::Lit(v))
    }
}

/// Terms whose value is always `true` or `false`.
pub fn boolean_guaranteed(t: &Term) -> bool {
    match t {
        Term::Lit(v) => matches!(v, Value::Bool(_)),
        Term::App { head, args } => match Builtin::lookup(head) {
            Some(b) if b.is_total_boolean() => true,
            Some(Builtin::And | Builtin::Or | Builtin::Not) => args.iter().all(boolean_guaranteed),
            _ => false,
        },
    }
}

impl Rewrite for BoolIdentity {
    fn name(&self) -> &'static str {
        "bool"
    }

    fn rewrite(&self, t: &Term, guard: bool) -> Option<Term> {
        let Term::App { head, args } = t else {
            return None;
        };
        let op = Builtin::lookup(head)?;
        if op == Builtin::Eq && guard {
            return match (&args[0], &args[1]) {
                (Term::Lit(Value::Bool(true)), x) | (x, Term::Lit(Value::Bool(true))) => {
                    Some(x.clone())
                }
                _ => None,
            };
        }
        if !matches!(op, Builtin::And | Builtin::Or) {
            return None;
        }
        let (lit, other) = match (&args[0], &args[1]) {
            (Term::Lit(Value::Bool(b)), x) | (x, Term::Lit(Value::Bool(b))) => (*b, x),
            _ => return None,
        };
        let sure = boolean_guaranteed(other);
        match (op, lit) {
            (Builtin::And, true) | (Builtin::Or, false) if guard || sure => Some(other.clone()),
            (Builtin::And, false) if guard || sure => Some(Term::bool(false)),
            (Builtin::Or, true) if sure => Some(Term::bool(true)),
            _ => None,
        }
    }
}

/// An ordered collection of rewrites, tried in order at every node.
pub struct RewriteSet {
    rules: Vec<Box<dyn Rewrite>>,
}

impl fmt::Debug for RewriteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

impl Default for RewriteSet {
    fn default() -> Self {
        RewriteSet::standard()
    }
}

pub const STANDARD_REWRITES: [&str; 4] = ["car-cons", "cdr-cons", "fold", "bool"];

impl RewriteSet {
    pub fn empty() -> Self {
        RewriteSet { rules: Vec::new() }
    }

    pub fn standard() -> Self {
        RewriteSet::named(&STANDARD_REWRITES).expect("standard names")
    }

    /// Builds a set from rewrite names; unknown names are returned as the
    /// error.
    pub fn named<S: AsRef<str>>(names: &[S]) -> Result<Self, String> {
        let mut set = RewriteSet::empty();
        for n in names {
            let r: Box<dyn Rewrite> = match n.as_ref() {
                "car-cons" => Box::new(CarCons),
                "cdr-cons" => Box::new(CdrCons),
                "fold" => Box::new(ConstFold),
                "bool" => Box::new(BoolIdentity),
                other => return Err(other.to_string()),
            };
            set.push(r);
        }
        Ok(set)
    }

    pub fn push(&mut self, r: Box<dyn Rewrite>) {
        self.rules.push(r);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.rules.iter().map(|r| r.name()).collect()
    }

    /// Rewrites `t` to a normal form: children first, then the node itself
    /// until no rule applies.
    pub fn normalize(&self, t: &Term, guard: bool) -> Term {
        let t = match t {
            Term::Lit(_) => t.clone(),
            Term::App { head, args } => {
                let inner = guard && Builtin::lookup(head) == Some(Builtin::And);
                Term::App {
                    head: head.clone(),
                    args: args.iter().map(|a| self.normalize(a, inner)).collect(),
                }
            }
        };
        for r in &self.rules {
            if let Some(next) = r.rewrite(&t, guard) {
                return self.normalize(&next, guard);
            }
        }
        t
    }

    /// Normalizes every term of `r`, then drops branches whose guard became
    /// a literal.
    pub fn rewrite_rule(&self, r: &Rule) -> Rule {
        match r {
            Rule::Update(_) => r.map_terms(&mut |t, g| self.normalize(t, g)),
            Rule::Block(rs) => Rule::Block(rs.iter().map(|m| self.rewrite_rule(m)).collect()),
            Rule::Cond(c) => {
                let mut branches = Vec::with_capacity(c.branches.len());
                let mut else_body = c.else_body.as_deref().map(|e| self.rewrite_rule(e));
                for (g, body) in &c.branches {
                    let g = self.normalize(g, true);
                    match g {
                        Term::Lit(Value::Bool(true)) => {
                            else_body = Some(self.rewrite_rule(body));
                            break;
                        }
                        Term::Lit(_) => {}
                        g => branches.push((g, self.rewrite_rule(body))),
                    }
                }
                if branches.is_empty() {
                    return else_body.unwrap_or_else(Rule::skip);
                }
                Rule::Cond(Cond {
                    branches,
                    else_body: else_body.map(Box::new),
                })
            }
        }
    }
}

/// Applies `set` to every K-rule body.
pub fn apply_rewrites_with(rp: &ResidualProgram, set: &RewriteSet) -> ResidualProgram {
    ResidualProgram {
        krules: rp
            .krules
            .iter()
            .map(|k| KRule {
                body: set.rewrite_rule(&k.body),
                ..k.clone()
            })
            .collect(),
        ..rp.clone()
    }
}

/// Applies the standard rewrite set.
pub fn apply_rewrites(rp: &ResidualProgram) -> ResidualProgram {
    apply_rewrites_with(rp, &RewriteSet::standard())
}
