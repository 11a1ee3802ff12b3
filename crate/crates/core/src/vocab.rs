//! Vocabularies, declarations and programs.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::builtins::{is_builtin, Builtin, CONTROL};
use crate::term::{Rule, Term};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InputMode {
    #[default]
    None,
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnInfo {
    pub arity: usize,
    pub is_static: bool,
    pub is_relational: bool,
    pub input: InputMode,
    pub finite: bool,
}

impl FnInfo {
    fn new(arity: usize) -> Self {
        FnInfo {
            arity,
            is_static: false,
            is_relational: false,
            input: InputMode::None,
            finite: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeclKind {
    Static,
    Relational,
    Finite,
    InputPositive,
    InputNegative,
}

impl fmt::Display for DeclKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeclKind::Static => "static",
            DeclKind::Relational => "relational",
            DeclKind::Finite => "finite",
            DeclKind::InputPositive => "input positive",
            DeclKind::InputNegative => "input negative",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decl {
    pub kind: DeclKind,
    pub name: String,
    pub arity: usize,
}

impl Decl {
    pub fn new(kind: DeclKind, name: impl Into<String>, arity: usize) -> Self {
        Decl {
            kind,
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}/{}", self.kind, self.name, self.arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("`{0}` is reserved")]
    Reserved(String),
    #[error("`{0}` is a built-in and cannot be declared")]
    BuiltinDeclared(String),
    #[error("`{0}` is a built-in and cannot be updated")]
    BuiltinUpdated(String),
    #[error("`{0}` is static and cannot be updated")]
    StaticUpdated(String),
    #[error("`{name}` has arity {expected} but is used with {found} argument(s)")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate declaration `{0}`")]
    Duplicate(String),
    #[error("`{0}` is declared both input positive and input negative")]
    ConflictingInput(String),
    #[error("`{0}` is not a declared input function")]
    NotAnInput(String),
    #[error("unknown function `{0}`")]
    Unknown(String),
}

/// Which names a program may mention.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dialect {
    /// User programs: `K` is rejected everywhere.
    Source,
    /// Specializer output: `K` is an implicit nullary dynamic function.
    Residual,
}

/// Function names with their arities and tags. Built-ins are not stored;
/// [`Vocabulary::arity`] answers for them too.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    entries: BTreeMap<String, FnInfo>,
    dialect: Dialect,
}

impl Vocabulary {
    pub fn new(dialect: Dialect) -> Self {
        let mut entries = BTreeMap::new();
        if dialect == Dialect::Residual {
            entries.insert(CONTROL.to_string(), FnInfo::new(0));
        }
        Vocabulary { entries, dialect }
    }

    pub fn dialect(&self) -> Dialect {
        self.dialect
    }

    pub fn get(&self, name: &str) -> Option<&FnInfo> {
        self.entries.get(name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        Builtin::lookup(name)
            .map(Builtin::arity)
            .or_else(|| self.entries.get(name).map(|i| i.arity))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.arity(name).is_some()
    }

    /// User function names (including `K` in residual vocabularies).
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &FnInfo)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn is_static(&self, name: &str) -> bool {
        is_builtin(name) || self.entries.get(name).is_some_and(|i| i.is_static)
    }

    pub fn is_relational(&self, name: &str) -> bool {
        self.entries.get(name).is_some_and(|i| i.is_relational)
    }

    pub fn declare(&mut self, decl: &Decl) -> Result<(), ValidationError> {
        if decl.name == CONTROL {
            return Err(ValidationError::Reserved(decl.name.clone()));
        }
        if is_builtin(&decl.name) {
            return Err(ValidationError::BuiltinDeclared(decl.name.clone()));
        }
        let info = self
            .entries
            .entry(decl.name.clone())
            .or_insert_with(|| FnInfo::new(decl.arity));
        if info.arity != decl.arity {
            return Err(ValidationError::Arity {
                name: decl.name.clone(),
                expected: info.arity,
                found: decl.arity,
            });
        }
        let dup = || ValidationError::Duplicate(decl.to_string());
        match decl.kind {
            DeclKind::Static if info.is_static => return Err(dup()),
            DeclKind::Static => info.is_static = true,
            DeclKind::Relational if info.is_relational => return Err(dup()),
            DeclKind::Relational => info.is_relational = true,
            DeclKind::Finite if info.finite => return Err(dup()),
            DeclKind::Finite => info.finite = true,
            DeclKind::InputPositive | DeclKind::InputNegative => {
                let mode = if decl.kind == DeclKind::InputPositive {
                    InputMode::Positive
                } else {
                    InputMode::Negative
                };
                match info.input {
                    InputMode::None => info.input = mode,
                    m if m == mode => return Err(dup()),
                    _ => return Err(ValidationError::ConflictingInput(decl.name.clone())),
                }
            }
        }
        Ok(())
    }

    /// Records a use of `name` with `arity` arguments; undeclared user names
    /// become dynamic functions of that arity.
    pub fn use_name(&mut self, name: &str, arity: usize) -> Result<(), ValidationError> {
        if name == CONTROL && self.dialect == Dialect::Source {
            return Err(ValidationError::Reserved(name.to_string()));
        }
        let expected = match Builtin::lookup(name) {
            Some(b) => b.arity(),
            None => {
                self.entries
                    .entry(name.to_string())
                    .or_insert_with(|| FnInfo::new(arity))
                    .arity
            }
        };
        if expected != arity {
            return Err(ValidationError::Arity {
                name: name.to_string(),
                expected,
                found: arity,
            });
        }
        Ok(())
    }

    pub fn check_update_target(&self, name: &str) -> Result<(), ValidationError> {
        if is_builtin(name) {
            return Err(ValidationError::BuiltinUpdated(name.to_string()));
        }
        if self.is_static(name) {
            return Err(ValidationError::StaticUpdated(name.to_string()));
        }
        Ok(())
    }

    pub fn use_term(&mut self, t: &Term) -> Result<(), ValidationError> {
        let mut result = Ok(());
        t.for_each_head(&mut |h, n| {
            if result.is_ok() {
                result = self.use_name(h, n);
            }
        });
        result
    }

    pub fn use_rule(&mut self, r: &Rule) -> Result<(), ValidationError> {
        for g in r.read_terms() {
            self.use_term(g)?;
        }
        for u in r.updates() {
            self.use_name(&u.head, u.args.len())?;
            self.check_update_target(&u.head)?;
        }
        Ok(())
    }
}

/// A parsed program: declarations and the top-level rule sequence, which
/// executes as one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub rules: Vec<Rule>,
    vocab: Vocabulary,
}

impl Program {
    pub fn new(
        decls: Vec<Decl>,
        rules: Vec<Rule>,
        dialect: Dialect,
    ) -> Result<Self, ValidationError> {
        let mut vocab = Vocabulary::new(dialect);
        for d in &decls {
            vocab.declare(d)?;
        }
        for r in &rules {
            vocab.use_rule(r)?;
        }
        Ok(Program {
            decls,
            rules,
            vocab,
        })
    }

    /// Used by the parser, which has already validated every name.
    pub(crate) fn from_parts(decls: Vec<Decl>, rules: Vec<Rule>, vocab: Vocabulary) -> Self {
        Program {
            decls,
            rules,
            vocab,
        }
    }

    /// Builds a program whose single top-level rule is `root`; a root block
    /// is spread into the top-level sequence.
    pub fn from_root(
        decls: Vec<Decl>,
        root: Rule,
        dialect: Dialect,
    ) -> Result<Self, ValidationError> {
        let rules = match root {
            Rule::Block(rs) => rs,
            other => vec![other],
        };
        Program::new(decls, rules, dialect)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dialect(&self) -> Dialect {
        self.vocab.dialect
    }

    /// The program as one rule: the block of its top-level rules.
    pub fn body(&self) -> Rule {
        Rule::Block(self.rules.clone())
    }

    /// The program as one rule, without wrapping a single top-level rule.
    pub fn root(&self) -> Rule {
        match self.rules.as_slice() {
            [only] => only.clone(),
            _ => self.body(),
        }
    }

    pub fn input_names(&self, mode: InputMode) -> Vec<String> {
        self.vocab
            .iter()
            .filter(|(_, i)| i.input == mode)
            .map(|(n, _)| n.to_string())
            .collect()
    }

    /// Re-partitions the declared inputs: names in `positive` become input
    /// positive, every other input becomes input negative.
    pub fn with_positive_inputs(&self, positive: &[String]) -> Result<Program, ValidationError> {
        for name in positive {
            if self
                .vocab
                .get(name)
                .is_none_or(|i| i.input == InputMode::None)
            {
                return Err(ValidationError::NotAnInput(name.clone()));
            }
        }
        let decls = self
            .decls
            .iter()
            .map(|d| match d.kind {
                DeclKind::InputPositive | DeclKind::InputNegative => {
                    let kind = if positive.contains(&d.name) {
                        DeclKind::InputPositive
                    } else {
                        DeclKind::InputNegative
                    };
                    Decl::new(kind, d.name.clone(), d.arity)
                }
                _ => d.clone(),
            })
            .collect();
        Program::new(decls, self.rules.clone(), self.dialect())
    }
}
