//! Built-in static functions.
//!
//! Built-ins are computed, never stored, and are total: any argument outside
//! a built-in's intended domain yields `undef`.

use crate::value::Value;

/// Reserved name of the control function introduced by the specializer.
pub const CONTROL: &str = "K";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    And,
    Or,
    Not,
    Cons,
    Car,
    Cdr,
    Nil,
}

const ALL: [Builtin; 14] = [
    Builtin::Add,
    Builtin::Sub,
    Builtin::Mul,
    Builtin::Eq,
    Builtin::Ne,
    Builtin::Lt,
    Builtin::Le,
    Builtin::And,
    Builtin::Or,
    Builtin::Not,
    Builtin::Cons,
    Builtin::Car,
    Builtin::Cdr,
    Builtin::Nil,
];

impl Builtin {
    pub fn lookup(name: &str) -> Option<Builtin> {
        ALL.iter().copied().find(|b| b.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Add => "+",
            Builtin::Sub => "-",
            Builtin::Mul => "*",
            Builtin::Eq => "=",
            Builtin::Ne => "!=",
            Builtin::Lt => "<",
            Builtin::Le => "<=",
            Builtin::And => "and",
            Builtin::Or => "or",
            Builtin::Not => "not",
            Builtin::Cons => "Cons",
            Builtin::Car => "Car",
            Builtin::Cdr => "Cdr",
            Builtin::Nil => "nil",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Nil => 0,
            Builtin::Not | Builtin::Car | Builtin::Cdr => 1,
            _ => 2,
        }
    }

    /// True for built-ins whose result is always `true` or `false`.
    pub fn is_total_boolean(self) -> bool {
        matches!(self, Builtin::Eq | Builtin::Ne)
    }

    pub fn apply(self, args: &[Value]) -> Value {
        debug_assert_eq!(args.len(), self.arity());
        match self {
            Builtin::Add => int2(args, i64::checked_add),
            Builtin::Sub => int2(args, i64::checked_sub),
            Builtin::Mul => int2(args, i64::checked_mul),
            Builtin::Eq => Value::Bool(args[0] == args[1]),
            Builtin::Ne => Value::Bool(args[0] != args[1]),
            Builtin::Lt => cmp2(args, |a, b| a < b),
            Builtin::Le => cmp2(args, |a, b| a <= b),
            Builtin::And => bool2(args, |a, b| a && b),
            Builtin::Or => bool2(args, |a, b| a || b),
            Builtin::Not => match args[0] {
                Value::Bool(b) => Value::Bool(!b),
                _ => Value::Undef,
            },
            Builtin::Cons => Value::pair(args[0].clone(), args[1].clone()),
            Builtin::Car => match &args[0] {
                Value::Pair(a, _) => (**a).clone(),
                _ => Value::Undef,
            },
            Builtin::Cdr => match &args[0] {
                Value::Pair(_, b) => (**b).clone(),
                _ => Value::Undef,
            },
            Builtin::Nil => Value::Nil,
        }
    }
}

pub fn is_builtin(name: &str) -> bool {
    Builtin::lookup(name).is_some()
}

fn int2(args: &[Value], op: fn(i64, i64) -> Option<i64>) -> Value {
    match (&args[0], &args[1]) {
        (Value::Int(a), Value::Int(b)) => op(*a, *b).map_or(Value::Undef, Value::Int),
        _ => Value::Undef,
    }
}

fn cmp2(args: &[Value], op: fn(i64, i64) -> bool) -> Value {
    match (&args[0], &args[1]) {
        (Value::Int(a), Value::Int(b)) => Value::Bool(op(*a, *b)),
        _ => Value::Undef,
    }
}

fn bool2(args: &[Value], op: fn(bool, bool) -> bool) -> Value {
    match (&args[0], &args[1]) {
        (Value::Bool(a), Value::Bool(b)) => Value::Bool(op(*a, *b)),
        _ => Value::Undef,
    }
}
