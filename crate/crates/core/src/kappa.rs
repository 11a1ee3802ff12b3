//! Binding-time classifications and reduced states.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::builtins::is_builtin;
use crate::state::{fmt_location, Graph, State};
use crate::term::Term;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassificationError {
    #[error("`{0}` is not classified positive")]
    NotPositive(String),
    #[error("`{0}` is not classified")]
    Unclassified(String),
}

/// Why a name received its polarity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reason {
    InputNegative,
    DependsOnNegative(String),
    InputPositiveStatic,
    DependsOnlyOnPositive,
    FiniteAnnotation,
    CdrDescent,
    Unresolved,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::InputNegative => f.write_str("input negative"),
            Reason::DependsOnNegative(g) => write!(f, "depends on negative {g}"),
            Reason::InputPositiveStatic => f.write_str("input positive static"),
            Reason::DependsOnlyOnPositive => f.write_str("depends only on positive functions"),
            Reason::FiniteAnnotation => f.write_str("self-dependent, declared finite"),
            Reason::CdrDescent => f.write_str("self-dependent, Cdr descent"),
            Reason::Unresolved => f.write_str("unresolved self-dependence"),
        }
    }
}

/// Partition of the user function names into positive and negative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Classification {
    polarity: BTreeMap<String, (Polarity, Reason)>,
    pub warnings: Vec<String>,
}

impl Classification {
    pub fn new() -> Self {
        Classification::default()
    }

    pub fn set(&mut self, name: impl Into<String>, polarity: Polarity, reason: Reason) {
        self.polarity.insert(name.into(), (polarity, reason));
    }

    pub fn get(&self, name: &str) -> Option<Polarity> {
        self.polarity.get(name).map(|(p, _)| *p)
    }

    pub fn reason(&self, name: &str) -> Option<&Reason> {
        self.polarity.get(name).map(|(_, r)| r)
    }

    pub fn is_positive(&self, name: &str) -> bool {
        self.get(name) == Some(Polarity::Positive)
    }

    pub fn is_negative(&self, name: &str) -> bool {
        self.get(name) == Some(Polarity::Negative)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.polarity.keys().map(String::as_str)
    }

    pub fn with(&self, polarity: Polarity) -> Vec<String> {
        self.polarity
            .iter()
            .filter(|(_, (p, _))| *p == polarity)
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.polarity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polarity.is_empty()
    }
}

/// Polarity of a term: positive iff every non-built-in name in it is
/// positive. Built-ins and literals count as positive.
pub fn term_polarity(t: &Term, cls: &Classification) -> Result<Polarity, ClassificationError> {
    let mut result = Ok(Polarity::Positive);
    t.for_each_head(&mut |h, _| {
        if is_builtin(h) || result.is_err() {
            return;
        }
        match cls.get(h) {
            None => result = Err(ClassificationError::Unclassified(h.to_string())),
            Some(Polarity::Negative) => result = Ok(Polarity::Negative),
            Some(Polarity::Positive) => {}
        }
    });
    result
}

/// A state restricted to the positive functions, with a canonical id.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReducedState {
    entries: BTreeMap<String, Graph>,
    id: String,
}

impl ReducedState {
    pub fn entries(&self) -> &BTreeMap<String, Graph> {
        &self.entries
    }

    /// Canonical rendering: `name(args)=value` entries sorted by name then
    /// argument tuple, `;`-separated, undef entries omitted.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn get(&self, name: &str, args: &[Value]) -> Value {
        self.entries
            .get(name)
            .and_then(|g| g.get(args))
            .cloned()
            .unwrap_or(Value::Undef)
    }

    pub fn to_state(&self) -> State {
        let mut s = State::new();
        for (n, g) in &self.entries {
            for (a, v) in g {
                s.set(n, a.clone(), v.clone());
            }
        }
        s
    }

    /// The positive part of a full state.
    pub fn project(state: &State, cls: &Classification) -> ReducedState {
        let snapshot = state.restrict(|n| cls.is_positive(n));
        canonicalize_kappa(
            snapshot
                .entries()
                .map(|(n, a, v)| (n, a.to_vec(), v.clone())),
            cls,
        )
        .expect("projection keeps positive names only")
    }
}

impl fmt::Display for ReducedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

/// Builds the canonical reduced state from a snapshot of positive locations,
/// in any order. Undef-valued entries are dropped; a later entry for the same
/// location replaces an earlier one.
pub fn canonicalize_kappa<'a>(
    entries: impl IntoIterator<Item = (&'a str, Vec<Value>, Value)>,
    cls: &Classification,
) -> Result<ReducedState, ClassificationError> {
    let mut map: BTreeMap<String, Graph> = BTreeMap::new();
    for (name, args, value) in entries {
        if !cls.is_positive(name) {
            return Err(ClassificationError::NotPositive(name.to_string()));
        }
        let graph = map.entry(name.to_string()).or_default();
        if value.is_undef() {
            graph.remove(&args);
        } else {
            graph.insert(args, value);
        }
    }
    map.retain(|_, g| !g.is_empty());
    let mut id = String::new();
    for (n, g) in &map {
        for (a, v) in g {
            if !id.is_empty() {
                id.push(';');
            }
            fmt_location(&mut id, n, a).expect("write to string");
            write!(id, "={v}").expect("write to string");
        }
    }
    Ok(ReducedState { entries: map, id })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cls(pos: &[&str], neg: &[&str]) -> Classification {
        let mut c = Classification::new();
        for p in pos {
            c.set(*p, Polarity::Positive, Reason::DependsOnlyOnPositive);
        }
        for n in neg {
            c.set(*n, Polarity::Negative, Reason::InputNegative);
        }
        c
    }

    #[test]
    fn id_is_order_independent() {
        let c = cls(&["c", "pc"], &[]);
        let a = canonicalize_kappa(
            [
                ("c", vec![], Value::Int(3)),
                ("pc", vec![], Value::str("loop")),
            ],
            &c,
        )
        .unwrap();
        let b = canonicalize_kappa(
            [
                ("pc", vec![], Value::str("loop")),
                ("c", vec![], Value::Int(3)),
            ],
            &c,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.id(), "c=3;pc=\"loop\"");
    }

    #[test]
    fn undef_entries_are_dropped() {
        let c = cls(&["c", "f"], &[]);
        let a = canonicalize_kappa(
            [
                ("c", vec![], Value::Int(3)),
                ("f", vec![Value::Int(1)], Value::Undef),
            ],
            &c,
        )
        .unwrap();
        let b = canonicalize_kappa([("c", vec![], Value::Int(3))], &c).unwrap();
        assert_eq!(a, b);
        assert!(!a.entries().contains_key("f"));
    }

    #[test]
    fn distinct_values_give_distinct_ids() {
        let c = cls(&["c"], &[]);
        let a = canonicalize_kappa([("c", vec![], Value::Int(3))], &c).unwrap();
        let b = canonicalize_kappa([("c", vec![], Value::Int(4))], &c).unwrap();
        assert_ne!(a.id(), b.id());
    }

    #[test]
    fn negative_entries_are_rejected() {
        let c = cls(&["c"], &["n"]);
        assert_eq!(
            canonicalize_kappa([("n", vec![], Value::Int(3))], &c),
            Err(ClassificationError::NotPositive("n".into()))
        );
    }

    #[test]
    fn term_polarity_examples() {
        let c = cls(&["c"], &["n"]);
        let plus = |a, b| Term::app("+", vec![a, b]);
        assert_eq!(
            term_polarity(&plus(Term::name("c"), Term::int(1)), &c),
            Ok(Polarity::Positive)
        );
        assert_eq!(
            term_polarity(&plus(Term::name("c"), Term::name("n")), &c),
            Ok(Polarity::Negative)
        );
        assert_eq!(term_polarity(&Term::int(5), &c), Ok(Polarity::Positive));
        assert_eq!(
            term_polarity(&Term::name("z"), &c),
            Err(ClassificationError::Unclassified("z".into()))
        );
    }

    fn snapshot() -> impl Strategy<Value = Vec<(u8, i64, i64)>> {
        proptest::collection::vec((0u8..3, 0i64..3, -1i64..3), 0..8)
    }

    fn to_entries(raw: &[(u8, i64, i64)]) -> Vec<(&'static str, Vec<Value>, Value)> {
        raw.iter()
            .map(|(n, a, v)| {
                let name = ["a", "b", "f"][*n as usize];
                let args = if name == "f" {
                    vec![Value::Int(*a)]
                } else {
                    vec![]
                };
                let value = if *v < 0 { Value::Undef } else { Value::Int(*v) };
                (name, args, value)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(raw in snapshot()) {
            let c = cls(&["a", "b", "f"], &[]);
            let k = canonicalize_kappa(to_entries(&raw), &c).unwrap();
            let again = canonicalize_kappa(
                k.to_state().entries().map(|(n, a, v)| (n, a.to_vec(), v.clone())),
                &c,
            ).unwrap();
            prop_assert_eq!(k, again);
        }

        #[test]
        fn ids_agree_iff_states_agree(x in snapshot(), y in snapshot()) {
            let c = cls(&["a", "b", "f"], &[]);
            let kx = canonicalize_kappa(to_entries(&x), &c).unwrap();
            let ky = canonicalize_kappa(to_entries(&y), &c).unwrap();
            prop_assert_eq!(kx.id() == ky.id(), kx.to_state() == ky.to_state());
        }

        #[test]
        fn positive_terms_stay_positive_under_positive_substitution(k in 0i64..5) {
            let c = cls(&["c"], &["n"]);
            let t = Term::app("+", vec![Term::name("c"), Term::int(1)]);
            let replaced = Term::app("+", vec![Term::name("c"), Term::app("*", vec![Term::name("c"), Term::int(k)])]);
            prop_assert_eq!(term_polarity(&t, &c), Ok(Polarity::Positive));
            prop_assert_eq!(term_polarity(&replaced, &c), Ok(Polarity::Positive));
        }
    }
}
