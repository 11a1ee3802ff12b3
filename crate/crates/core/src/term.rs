//! Terms and transition rules.

use std::collections::BTreeSet;

use crate::builtins::{is_builtin, Builtin, CONTROL};
use crate::value::Value;

/// A first-order term. Literals carry scalar values only; pairs and nil are
/// written with the `Cons` and `nil` built-ins so every term has one textual
/// form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Lit(Value),
    App { head: String, args: Vec<Term> },
}

impl Term {
    pub fn app(head: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App {
            head: head.into(),
            args,
        }
    }

    /// A nullary application.
    pub fn name(head: impl Into<String>) -> Self {
        Term::app(head, Vec::new())
    }

    pub fn int(i: i64) -> Self {
        Term::Lit(Value::Int(i))
    }

    pub fn str(s: impl Into<String>) -> Self {
        Term::Lit(Value::Str(s.into()))
    }

    pub fn bool(b: bool) -> Self {
        Term::Lit(Value::Bool(b))
    }

    pub fn undef() -> Self {
        Term::Lit(Value::Undef)
    }

    pub fn from_value(v: &Value) -> Self {
        match v {
            Value::Nil => Term::name(Builtin::Nil.name()),
            Value::Pair(a, b) => Term::app(
                Builtin::Cons.name(),
                vec![Term::from_value(a), Term::from_value(b)],
            ),
            scalar => Term::Lit(scalar.clone()),
        }
    }

    /// The value of a closed constructor term (literal, `nil`, or `Cons` of
    /// such), if this is one.
    pub fn as_value(&self) -> Option<Value> {
        match self {
            Term::Lit(v) => Some(v.clone()),
            Term::App { head, .. } if head == Builtin::Nil.name() => Some(Value::Nil),
            Term::App { head, args } if head == Builtin::Cons.name() && args.len() == 2 => {
                Some(Value::pair(args[0].as_value()?, args[1].as_value()?))
            }
            _ => None,
        }
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            Term::App { head, .. } => Some(head),
            Term::Lit(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App { args, .. } => args,
            Term::Lit(_) => &[],
        }
    }

    pub fn is_lit(&self) -> bool {
        matches!(self, Term::Lit(_))
    }

    pub fn size(&self) -> usize {
        1 + self.args().iter().map(Term::size).sum::<usize>()
    }

    /// Visits every application head, outermost first.
    pub fn for_each_head(&self, f: &mut impl FnMut(&str, usize)) {
        if let Term::App { head, args } = self {
            f(head, args.len());
            for a in args {
                a.for_each_head(f);
            }
        }
    }

    /// Non-built-in function names occurring in the term.
    pub fn user_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.for_each_head(&mut |h, _| {
            if !is_builtin(h) {
                out.insert(h.to_string());
            }
        });
        out
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Term::Lit(_) => false,
            Term::App { head, args } => head == name || args.iter().any(|a| a.mentions(name)),
        }
    }

    /// Rebuilds the term bottom-up, offering each node to `f` after its
    /// children have been rebuilt.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Term) -> Term) -> Term {
        match self {
            Term::Lit(_) => f(self.clone()),
            Term::App { head, args } => {
                let args = args.iter().map(|a| a.map_bottom_up(f)).collect();
                f(Term::App {
                    head: head.clone(),
                    args,
                })
            }
        }
    }
}

/// `f(args) := rhs`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Update {
    pub head: String,
    pub args: Vec<Term>,
    pub rhs: Term,
}

impl Update {
    pub fn new(head: impl Into<String>, args: Vec<Term>, rhs: Term) -> Self {
        Update {
            head: head.into(),
            args,
            rhs,
        }
    }

    pub fn nullary(head: impl Into<String>, rhs: Term) -> Self {
        Update::new(head, Vec::new(), rhs)
    }

    /// `K := "label"`.
    pub fn control(label: &str) -> Self {
        Update::nullary(CONTROL, Term::str(label))
    }

    /// The label of a control update.
    pub fn control_target(&self) -> Option<&str> {
        if self.head != CONTROL || !self.args.is_empty() {
            return None;
        }
        match &self.rhs {
            Term::Lit(Value::Str(s)) => Some(s),
            _ => None,
        }
    }

    pub fn location(&self) -> Term {
        Term::app(self.head.clone(), self.args.clone())
    }

    /// Terms read by this update: location arguments and right-hand side.
    pub fn read_terms(&self) -> impl Iterator<Item = &Term> {
        self.args.iter().chain(std::iter::once(&self.rhs))
    }

    pub fn size(&self) -> usize {
        1 + 1 + self.args.iter().map(Term::size).sum::<usize>() + self.rhs.size()
    }
}

/// `if g0 then R0 elseif g1 then R1 ... [else E] endif`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cond {
    pub branches: Vec<(Term, Rule)>,
    pub else_body: Option<Box<Rule>>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Update(Update),
    Block(Vec<Rule>),
    Cond(Cond),
}

impl Rule {
    /// The empty block.
    pub fn skip() -> Self {
        Rule::Block(Vec::new())
    }

    pub fn update(head: impl Into<String>, args: Vec<Term>, rhs: Term) -> Self {
        Rule::Update(Update::new(head, args, rhs))
    }

    pub fn assign(head: impl Into<String>, rhs: Term) -> Self {
        Rule::Update(Update::nullary(head, rhs))
    }

    pub fn if_else(guard: Term, then: Rule, otherwise: Rule) -> Self {
        Rule::Cond(Cond {
            branches: vec![(guard, then)],
            else_body: Some(Box::new(otherwise)),
        })
    }

    pub fn if_then(guard: Term, then: Rule) -> Self {
        Rule::Cond(Cond {
            branches: vec![(guard, then)],
            else_body: None,
        })
    }

    pub fn is_skip(&self) -> bool {
        matches!(self, Rule::Block(rs) if rs.is_empty())
    }

    /// True for an update or a block containing only updates.
    pub fn is_update_leaf(&self) -> bool {
        match self {
            Rule::Update(_) => true,
            Rule::Block(rs) => rs.iter().all(|r| matches!(r, Rule::Update(_))),
            Rule::Cond(_) => false,
        }
    }

    /// Number of rule nodes (updates, blocks, conditionals).
    pub fn rule_count(&self) -> usize {
        match self {
            Rule::Update(_) => 1,
            Rule::Block(rs) => 1 + rs.iter().map(Rule::rule_count).sum::<usize>(),
            Rule::Cond(c) => {
                1 + c
                    .branches
                    .iter()
                    .map(|(_, r)| r.rule_count())
                    .sum::<usize>()
                    + c.else_body.as_ref().map_or(0, |e| e.rule_count())
            }
        }
    }

    /// Rule nodes plus term nodes.
    pub fn size(&self) -> usize {
        match self {
            Rule::Update(u) => u.size(),
            Rule::Block(rs) => 1 + rs.iter().map(Rule::size).sum::<usize>(),
            Rule::Cond(c) => {
                1 + c
                    .branches
                    .iter()
                    .map(|(g, r)| g.size() + r.size())
                    .sum::<usize>()
                    + c.else_body.as_ref().map_or(0, |e| e.size())
            }
        }
    }

    pub fn for_each_update<'a>(&'a self, f: &mut impl FnMut(&'a Update)) {
        match self {
            Rule::Update(u) => f(u),
            Rule::Block(rs) => rs.iter().for_each(|r| r.for_each_update(f)),
            Rule::Cond(c) => {
                for (_, r) in &c.branches {
                    r.for_each_update(f);
                }
                if let Some(e) = &c.else_body {
                    e.for_each_update(f);
                }
            }
        }
    }

    pub fn updates(&self) -> Vec<&Update> {
        let mut out = Vec::new();
        self.for_each_update(&mut |u| out.push(u));
        out
    }

    pub fn for_each_guard<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        match self {
            Rule::Update(_) => {}
            Rule::Block(rs) => rs.iter().for_each(|r| r.for_each_guard(f)),
            Rule::Cond(c) => {
                for (g, r) in &c.branches {
                    f(g);
                    r.for_each_guard(f);
                }
                if let Some(e) = &c.else_body {
                    e.for_each_guard(f);
                }
            }
        }
    }

    /// Every term read by the rule: guards, location arguments, right-hand
    /// sides.
    pub fn read_terms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.for_each_guard(&mut |g| out.push(g));
        self.for_each_update(&mut |u| out.extend(u.read_terms()));
        out
    }

    /// Rebuilds every term, telling `f` whether the term sits in guard
    /// position.
    pub fn map_terms(&self, f: &mut impl FnMut(&Term, bool) -> Term) -> Rule {
        match self {
            Rule::Update(u) => Rule::Update(Update {
                head: u.head.clone(),
                args: u.args.iter().map(|a| f(a, false)).collect(),
                rhs: f(&u.rhs, false),
            }),
            Rule::Block(rs) => Rule::Block(rs.iter().map(|r| r.map_terms(f)).collect()),
            Rule::Cond(c) => Rule::Cond(Cond {
                branches: c
                    .branches
                    .iter()
                    .map(|(g, r)| (f(g, true), r.map_terms(f)))
                    .collect(),
                else_body: c.else_body.as_ref().map(|e| Box::new(e.map_terms(f))),
            }),
        }
    }
}

impl From<Update> for Rule {
    fn from(u: Update) -> Self {
        Rule::Update(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_values_become_cons_terms() {
        let v = Value::list([Value::Int(1), Value::str("x")]);
        let t = Term::from_value(&v);
        assert_eq!(t.head(), Some("Cons"));
        assert_eq!(t.as_value(), Some(v));
    }

    #[test]
    fn sizes_count_rules_and_terms() {
        let r = Rule::if_else(
            Term::app("=", vec![Term::name("a"), Term::int(0)]),
            Rule::assign("b", Term::int(1)),
            Rule::skip(),
        );
        assert_eq!(r.rule_count(), 3);
        // cond + guard(3) + update(1 + head + 1 literal) + empty block
        assert_eq!(r.size(), 1 + 3 + 3 + 1);
    }

    #[test]
    fn control_updates_expose_their_target() {
        let u = Update::control("κ3");
        assert_eq!(u.control_target(), Some("κ3"));
        assert_eq!(Update::nullary("a", Term::str("κ3")).control_target(), None);
    }
}
