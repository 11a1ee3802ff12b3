//! The value universe shared by states, reduced states and literals.

use std::fmt;

/// A value of the superuniverse.
///
/// `Undef`, `Bool(true)` and `Bool(false)` are pairwise distinct. Equality is
/// structural, so pairs compare element-wise.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Undef,
    Bool(bool),
    Int(i64),
    Str(String),
    Nil,
    Pair(Box<Value>, Box<Value>),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    pub fn pair(car: Value, cdr: Value) -> Self {
        Value::Pair(Box::new(car), Box::new(cdr))
    }

    /// Builds a nil-terminated list.
    pub fn list(items: impl IntoIterator<Item = Value>) -> Self {
        let items: Vec<Value> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .fold(Value::Nil, |tail, head| Value::pair(head, tail))
    }

    pub fn is_undef(&self) -> bool {
        matches!(self, Value::Undef)
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Value::Bool(true))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

/// Writes `s` as a double-quoted literal with `\"`, `\\`, `\n`, `\t` escapes.
pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

/// Literal syntax; pairs print as `Cons(a, b)` so the text re-parses.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Undef => f.write_str("undef"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write_quoted(f, s),
            Value::Nil => f.write_str("nil"),
            Value::Pair(a, b) => write!(f, "Cons({a}, {b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obligatory_values_are_distinct() {
        assert_ne!(Value::Undef, Value::Bool(true));
        assert_ne!(Value::Undef, Value::Bool(false));
        assert_ne!(Value::Bool(true), Value::Bool(false));
    }

    #[test]
    fn list_builds_nested_pairs() {
        let l = Value::list([Value::Int(1), Value::Int(2)]);
        assert_eq!(
            l,
            Value::pair(Value::Int(1), Value::pair(Value::Int(2), Value::Nil))
        );
        assert_eq!(l.to_string(), "Cons(1, Cons(2, nil))");
    }

    #[test]
    fn strings_are_escaped() {
        assert_eq!(Value::str("a\"b\\c").to_string(), r#""a\"b\\c""#);
    }
}
