//! Reference interpreter for sequential evolving algebras.
//!
//! Every transformation in this crate is checked against runs produced here.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::builtins::Builtin;
use crate::state::{fmt_location, State};
use crate::term::{Rule, Term};
use crate::value::Value;
use crate::vocab::Program;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("conflict at {}: {first} vs {second}", show_location(.name, .args))]
    Conflict {
        name: String,
        args: Vec<Value>,
        first: Value,
        second: Value,
    },
    #[error("relational function {} assigned non-Boolean {value}", show_location(.name, .args))]
    NonBoolean {
        name: String,
        args: Vec<Value>,
        value: Value,
    },
}

fn show_location(name: &str, args: &[Value]) -> String {
    let mut s = String::new();
    let _ = fmt_location(&mut s, name, args);
    s
}

/// A consistent set of location updates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UpdateSet {
    updates: BTreeMap<(String, Vec<Value>), Value>,
}

impl UpdateSet {
    pub fn new() -> Self {
        UpdateSet::default()
    }

    /// Adds an update. Equal duplicates are accepted; unequal ones conflict.
    pub fn insert(
        &mut self,
        name: &str,
        args: Vec<Value>,
        value: Value,
    ) -> Result<(), InterpError> {
        match self.updates.entry((name.to_string(), args)) {
            Entry::Vacant(e) => {
                e.insert(value);
                Ok(())
            }
            Entry::Occupied(e) if *e.get() == value => Ok(()),
            Entry::Occupied(e) => {
                let ((name, args), first) = (e.key().clone(), e.get().clone());
                Err(InterpError::Conflict {
                    name,
                    args,
                    first,
                    second: value,
                })
            }
        }
    }

    pub fn union(&mut self, other: UpdateSet) -> Result<(), InterpError> {
        for ((n, a), v) in other.updates {
            self.insert(&n, a, v)?;
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Value], &Value)> {
        self.updates
            .iter()
            .map(|((n, a), v)| (n.as_str(), a.as_slice(), v))
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    /// True when applying the set to `s` would change nothing.
    pub fn is_noop(&self, s: &State) -> bool {
        self.iter().all(|(n, a, v)| s.get(n, a) == *v)
    }

    pub fn apply(&self, s: &State) -> State {
        let mut next = s.clone();
        for (n, a, v) in self.iter() {
            next.set(n, a.to_vec(), v.clone());
        }
        next
    }
}

/// Strict innermost evaluation. Built-ins are computed, every other name is
/// looked up in `s`.
pub fn eval_term(t: &Term, s: &State) -> Value {
    match t {
        Term::Lit(v) => v.clone(),
        Term::App { head, args } => {
            let vals: Vec<Value> = args.iter().map(|a| eval_term(a, s)).collect();
            match Builtin::lookup(head) {
                Some(b) => b.apply(&vals),
                None => s.get(head, &vals),
            }
        }
    }
}

/// The update set a rule produces in `s`. Blocks fire every member at once;
/// a conditional fires the first branch whose guard is `true`.
pub fn collect_updates(r: &Rule, s: &State) -> Result<UpdateSet, InterpError> {
    let mut out = UpdateSet::new();
    collect_into(r, s, &mut out)?;
    Ok(out)
}

fn collect_into(r: &Rule, s: &State, out: &mut UpdateSet) -> Result<(), InterpError> {
    match r {
        Rule::Update(u) => {
            let args = u.args.iter().map(|a| eval_term(a, s)).collect();
            out.insert(&u.head, args, eval_term(&u.rhs, s))
        }
        Rule::Block(rs) => rs.iter().try_for_each(|r| collect_into(r, s, out)),
        Rule::Cond(c) => {
            for (g, body) in &c.branches {
                if eval_term(g, s).is_true() {
                    return collect_into(body, s, out);
                }
            }
            match &c.else_body {
                Some(e) => collect_into(e, s, out),
                None => Ok(()),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HaltReason {
    /// The last computed update set changed nothing.
    Fixpoint,
    StepLimit,
    Error(InterpError),
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltReason::Fixpoint => f.write_str("fixpoint"),
            HaltReason::StepLimit => f.write_str("step_limit"),
            HaltReason::Error(e @ InterpError::Conflict { .. }) => write!(f, "conflict ({e})"),
            HaltReason::Error(e) => write!(f, "error ({e})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunTrace {
    pub states: Vec<State>,
    pub halt: HaltReason,
}

impl RunTrace {
    pub fn last(&self) -> &State {
        self.states
            .last()
            .expect("a trace holds at least the initial state")
    }

    /// Number of state-changing steps.
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }
}

/// A program prepared for repeated stepping.
pub struct Machine {
    body: Rule,
    relational: BTreeSet<String>,
}

impl Machine {
    pub fn new(p: &Program) -> Self {
        Machine {
            body: p.root(),
            relational: p
                .vocab()
                .iter()
                .filter(|(_, i)| i.is_relational)
                .map(|(n, _)| n.to_string())
                .collect(),
        }
    }

    /// A machine for a bare rule with no relational functions.
    pub fn for_rule(body: Rule) -> Self {
        Machine {
            body,
            relational: BTreeSet::new(),
        }
    }

    pub fn updates(&self, s: &State) -> Result<UpdateSet, InterpError> {
        let set = collect_updates(&self.body, s)?;
        for (n, a, v) in set.iter() {
            if self.relational.contains(n) && !matches!(v, Value::Bool(_) | Value::Undef) {
                return Err(InterpError::NonBoolean {
                    name: n.to_string(),
                    args: a.to_vec(),
                    value: v.clone(),
                });
            }
        }
        Ok(set)
    }

    pub fn step(&self, s: &State) -> Result<State, InterpError> {
        Ok(self.updates(s)?.apply(s))
    }

    pub fn run(&self, s0: &State, max_steps: usize) -> RunTrace {
        let mut states = vec![s0.clone()];
        loop {
            if states.len() > max_steps {
                return RunTrace {
                    states,
                    halt: HaltReason::StepLimit,
                };
            }
            let cur = states.last().expect("non-empty");
            match self.updates(cur) {
                Err(e) => {
                    return RunTrace {
                        states,
                        halt: HaltReason::Error(e),
                    }
                }
                Ok(set) if set.is_noop(cur) => {
                    return RunTrace {
                        states,
                        halt: HaltReason::Fixpoint,
                    }
                }
                Ok(set) => {
                    let next = set.apply(cur);
                    states.push(next);
                }
            }
        }
    }
}

pub fn step(p: &Program, s: &State) -> Result<State, InterpError> {
    Machine::new(p).step(s)
}

/// Runs `p` from `s0` until a fixpoint, an error, or `max_steps` state
/// changes.
pub fn run(p: &Program, s0: &State, max_steps: usize) -> RunTrace {
    Machine::new(p).run(s0, max_steps)
}
