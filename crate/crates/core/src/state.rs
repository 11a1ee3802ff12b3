//! States: finite interpretations of dynamic and input functions.

use std::collections::BTreeMap;
use std::fmt;

use crate::value::Value;

/// Argument tuple to value map for one function.
pub type Graph = BTreeMap<Vec<Value>, Value>;

/// A state stores only explicitly set locations. Every other location is
/// `undef`, and no location is ever stored as `undef`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State {
    functions: BTreeMap<String, Graph>,
}

impl State {
    pub fn new() -> Self {
        State::default()
    }

    pub fn get(&self, name: &str, args: &[Value]) -> Value {
        self.functions
            .get(name)
            .and_then(|g| g.get(args))
            .cloned()
            .unwrap_or(Value::Undef)
    }

    /// Sets a location; setting `undef` removes it.
    pub fn set(&mut self, name: &str, args: Vec<Value>, value: Value) {
        if value.is_undef() {
            if let Some(g) = self.functions.get_mut(name) {
                g.remove(&args);
                if g.is_empty() {
                    self.functions.remove(name);
                }
            }
        } else {
            self.functions
                .entry(name.to_string())
                .or_default()
                .insert(args, value);
        }
    }

    pub fn graph(&self, name: &str) -> Option<&Graph> {
        self.functions.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.functions.keys().map(String::as_str)
    }

    /// All stored locations in name, then argument order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &[Value], &Value)> {
        self.functions
            .iter()
            .flat_map(|(n, g)| g.iter().map(move |(a, v)| (n.as_str(), a.as_slice(), v)))
    }

    pub fn len(&self) -> usize {
        self.functions.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// The sub-state holding only functions accepted by `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&str) -> bool) -> State {
        State {
            functions: self
                .functions
                .iter()
                .filter(|(n, _)| keep(n))
                .map(|(n, g)| (n.clone(), g.clone()))
                .collect(),
        }
    }

    /// Locations whose value differs between `self` and `next`, with the
    /// value in `next`.
    pub fn diff(&self, next: &State) -> Vec<(String, Vec<Value>, Value)> {
        let mut out = Vec::new();
        for (n, a, v) in next.entries() {
            if self.get(n, a) != *v {
                out.push((n.to_string(), a.to_vec(), v.clone()));
            }
        }
        for (n, a, _) in self.entries() {
            if next.get(n, a).is_undef() {
                out.push((n.to_string(), a.to_vec(), Value::Undef));
            }
        }
        out.sort();
        out
    }
}

pub fn fmt_location(f: &mut impl fmt::Write, name: &str, args: &[Value]) -> fmt::Result {
    f.write_str(name)?;
    if !args.is_empty() {
        f.write_char('(')?;
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_char(')')?;
    }
    Ok(())
}

/// One `name(args) = value` line per stored location: the state file format.
impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, a, v) in self.entries() {
            fmt_location(f, n, a)?;
            writeln!(f, " = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unset_locations_are_undef() {
        let mut s = State::new();
        assert_eq!(s.get("f", &[Value::Int(0)]), Value::Undef);
        s.set("f", vec![Value::Int(0)], Value::Int(7));
        assert_eq!(s.get("f", &[Value::Int(0)]), Value::Int(7));
        s.set("f", vec![Value::Int(0)], Value::Undef);
        assert_eq!(s.get("f", &[Value::Int(0)]), Value::Undef);
        assert_eq!(s, State::new());
    }

    #[test]
    fn diff_reports_changes_and_removals() {
        let mut a = State::new();
        a.set("x", vec![], Value::Int(1));
        a.set("y", vec![], Value::Int(2));
        let mut b = a.clone();
        b.set("x", vec![], Value::Int(3));
        b.set("y", vec![], Value::Undef);
        assert_eq!(
            a.diff(&b),
            vec![
                ("x".into(), vec![], Value::Int(3)),
                ("y".into(), vec![], Value::Undef)
            ]
        );
    }

    #[test]
    fn display_is_state_file_syntax() {
        let mut s = State::new();
        s.set("Memory", vec![Value::Int(100)], Value::Int(104));
        s.set("c", vec![], Value::str("a"));
        assert_eq!(s.to_string(), "Memory(100) = 104\nc = \"a\"\n");
    }
}
