//! Concrete syntax for programs (`.ea`), states (`.eas`) and reduced-state
//! maps (`.kmap`).
//!
//! ```text
//! program := decl* rule*
//! decl    := ("static" | "relational" | "finite") name "/" nat
//!          | "input" ("positive" | "negative") name "/" nat
//! rule    := term ":=" term
//!          | "do" rule* "enddo"
//!          | "if" term "then" rule ("elseif" term "then" rule)* ("else" rule)? "endif"
//! term    := name ("(" term ("," term)* ")")? | int | string | "true" | "false" | "undef"
//! ```
//!
//! `%` starts a comment running to the end of the line.

use std::fmt;

use thiserror::Error;

use crate::builtins::is_builtin;
use crate::state::State;
use crate::term::{Cond, Rule, Term, Update};
use crate::value::Value;
use crate::vocab::{Decl, DeclKind, Dialect, Program, ValidationError, Vocabulary};

const KEYWORDS: &[&str] = &[
    "do",
    "enddo",
    "if",
    "then",
    "elseif",
    "else",
    "endif",
    "true",
    "false",
    "undef",
    "static",
    "relational",
    "finite",
    "input",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Op(&'static str),
    Int(i64),
    Str(String),
    Assign,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Slash,
    Semi,
    Colon,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Op(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Assign => f.write_str("`:=`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| ParseError {
        line,
        col,
        kind: ParseErrorKind::Syntax(msg),
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let start = i;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let peek = chars.get(i + 1).copied();
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() || (c == '-' && peek.is_some_and(|d| d.is_ascii_digit())) {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s
                .parse::<i64>()
                .map_err(|_| err(line, col, format!("integer literal {s} out of range")))?;
            Tok::Int(n)
        } else if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(err(line, col, "unterminated string literal".into()))
                    }
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        let e = match chars.get(i + 1) {
                            Some('"') => '"',
                            Some('\\') => '\\',
                            Some('n') => '\n',
                            Some('t') => '\t',
                            _ => return Err(err(line, col, "invalid escape in string".into())),
                        };
                        s.push(e);
                        i += 2;
                    }
                    Some(ch) => {
                        s.push(*ch);
                        i += 1;
                    }
                }
            }
            Tok::Str(s)
        } else {
            let (tok, len) = match (c, peek) {
                (':', Some('=')) => (Tok::Assign, 2),
                ('!', Some('=')) => (Tok::Op("!="), 2),
                ('<', Some('=')) => (Tok::Op("<="), 2),
                ('<', _) => (Tok::Op("<"), 1),
                ('=', _) => (Tok::Op("="), 1),
                ('+', _) => (Tok::Op("+"), 1),
                ('-', _) => (Tok::Op("-"), 1),
                ('*', _) => (Tok::Op("*"), 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                (',', _) => (Tok::Comma, 1),
                ('/', _) => (Tok::Slash, 1),
                (';', _) => (Tok::Semi, 1),
                (':', _) => (Tok::Colon, 1),
                _ => return Err(err(line, col, format!("unexpected character `{c}`"))),
            };
            i += len;
            tok
        };
        col += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error_at(&self, pos: Pos, kind: impl Into<ParseErrorKind>) -> ParseError {
        ParseError {
            line: pos.line,
            col: pos.col,
            kind: kind.into(),
        }
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        self.error_at(self.pos(), ParseErrorKind::Syntax(msg.into()))
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.syntax(format!("expected {wanted}, found {}", self.peek()))
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    /// A function name: a non-keyword identifier or an operator symbol.
    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            Tok::Op(s) => {
                self.bump();
                Ok(s.to_string())
            }
            _ => Err(self.unexpected("a function name")),
        }
    }

    fn nat(&mut self) -> Result<usize, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) if i >= 0 => {
                self.bump();
                Ok(i as usize)
            }
            _ => Err(self.unexpected("an arity")),
        }
    }

    fn decl(&mut self) -> Result<Option<Decl>, ParseError> {
        let kind = if self.eat_keyword("static") {
            DeclKind::Static
        } else if self.eat_keyword("relational") {
            DeclKind::Relational
        } else if self.eat_keyword("finite") {
            DeclKind::Finite
        } else if self.eat_keyword("input") {
            if self.eat_keyword("positive") {
                DeclKind::InputPositive
            } else if self.eat_keyword("negative") {
                DeclKind::InputNegative
            } else {
                return Err(self.unexpected("`positive` or `negative`"));
            }
        } else {
            return Ok(None);
        };
        let name = self.name()?;
        self.expect(Tok::Slash)?;
        let arity = self.nat()?;
        Ok(Some(Decl { kind, name, arity }))
    }

    /// Parses a term, recording every application in `vocab`.
    fn term(&mut self, vocab: &mut Vocabulary) -> Result<Term, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                return Ok(Term::int(i));
            }
            Tok::Str(s) => {
                self.bump();
                return Ok(Term::str(s));
            }
            Tok::Ident(s) if s == "true" || s == "false" || s == "undef" => {
                self.bump();
                return Ok(Term::Lit(match s.as_str() {
                    "true" => Value::Bool(true),
                    "false" => Value::Bool(false),
                    _ => Value::Undef,
                }));
            }
            _ => {}
        }
        let head = self.name()?;
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            loop {
                args.push(self.term(vocab)?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        vocab
            .use_name(&head, args.len())
            .map_err(|e| self.error_at(pos, e))?;
        Ok(Term::App { head, args })
    }

    fn starts_rule(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => s == "do" || s == "if" || !KEYWORDS.contains(&s.as_str()),
            Tok::Op(_) => true,
            _ => false,
        }
    }

    fn rule(&mut self, vocab: &mut Vocabulary) -> Result<Rule, ParseError> {
        if self.eat_keyword("do") {
            let mut rules = Vec::new();
            while !self.is_keyword("enddo") {
                if !self.starts_rule() {
                    return Err(self.unexpected("a rule or `enddo`"));
                }
                rules.push(self.rule(vocab)?);
            }
            self.bump();
            return Ok(Rule::Block(rules));
        }
        if self.eat_keyword("if") {
            let mut branches = Vec::new();
            let guard = self.term(vocab)?;
            self.expect_keyword("then")?;
            branches.push((guard, self.rule(vocab)?));
            let mut else_body = None;
            loop {
                if self.eat_keyword("elseif") {
                    let guard = self.term(vocab)?;
                    self.expect_keyword("then")?;
                    branches.push((guard, self.rule(vocab)?));
                } else if self.eat_keyword("else") {
                    else_body = Some(Box::new(self.rule(vocab)?));
                    self.expect_keyword("endif")?;
                    break;
                } else {
                    self.expect_keyword("endif")?;
                    break;
                }
            }
            return Ok(Rule::Cond(Cond {
                branches,
                else_body,
            }));
        }
        let pos = self.pos();
        let lhs = self.term(vocab)?;
        let (head, args) = match lhs {
            Term::App { head, args } => (head, args),
            Term::Lit(_) => {
                return Err(self.error_at(
                    pos,
                    ParseErrorKind::Syntax("a literal cannot be updated".into()),
                ))
            }
        };
        vocab
            .check_update_target(&head)
            .map_err(|e| self.error_at(pos, e))?;
        self.expect(Tok::Assign)?;
        let rhs = self.term(vocab)?;
        Ok(Rule::Update(Update { head, args, rhs }))
    }

    fn program(&mut self, dialect: Dialect) -> Result<Program, ParseError> {
        let mut vocab = Vocabulary::new(dialect);
        let mut decls = Vec::new();
        loop {
            let pos = self.pos();
            match self.decl()? {
                Some(d) => {
                    vocab.declare(&d).map_err(|e| self.error_at(pos, e))?;
                    decls.push(d);
                }
                None => break,
            }
        }
        let mut rules = Vec::new();
        while *self.peek() != Tok::Eof {
            if !self.starts_rule() {
                return Err(self.unexpected("a rule"));
            }
            rules.push(self.rule(&mut vocab)?);
        }
        Ok(Program::from_parts(decls, rules, vocab))
    }

    /// `int | string | true | false | undef | nil | Cons(lit, lit)`.
    fn literal(&mut self) -> Result<Value, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Value::Int(i))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Value::Str(s))
            }
            Tok::Ident(s) => match s.as_str() {
                "true" | "false" | "undef" | "nil" => {
                    self.bump();
                    Ok(match s.as_str() {
                        "true" => Value::Bool(true),
                        "false" => Value::Bool(false),
                        "nil" => Value::Nil,
                        _ => Value::Undef,
                    })
                }
                "Cons" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let a = self.literal()?;
                    self.expect(Tok::Comma)?;
                    let b = self.literal()?;
                    self.expect(Tok::RParen)?;
                    Ok(Value::pair(a, b))
                }
                _ => Err(self.syntax(format!("expected a literal, found `{s}`"))),
            },
            _ => Err(self.unexpected("a literal")),
        }
    }

    /// `name ("(" literal ("," literal)* ")")? "=" literal`.
    fn location(&mut self) -> Result<(String, Vec<Value>, Value), ParseError> {
        let name = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                s
            }
            Tok::Op(s) => {
                self.bump();
                s.to_string()
            }
            _ => return Err(self.unexpected("a function name")),
        };
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            loop {
                args.push(self.literal()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        self.expect(Tok::Op("="))?;
        let value = self.literal()?;
        Ok((name, args, value))
    }
}

/// Parses a user program. `K` is rejected.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_program_in(text, Dialect::Source)
}

/// Parses a specializer output program, where `K` is an implicit nullary
/// function.
pub fn parse_residual(text: &str) -> Result<Program, ParseError> {
    parse_program_in(text, Dialect::Residual)
}

pub fn parse_program_in(text: &str, dialect: Dialect) -> Result<Program, ParseError> {
    Parser::new(text)?.program(dialect)
}

/// Parses a state file: one `name(args) = value` entry per line, all
/// arguments and values literal.
pub fn parse_state(text: &str, vocab: &Vocabulary) -> Result<State, ParseError> {
    let mut p = Parser::new(text)?;
    let mut state = State::new();
    let mut seen = std::collections::BTreeSet::new();
    while *p.peek() != Tok::Eof {
        let pos = p.pos();
        let (name, args, value) = p.location()?;
        if is_builtin(&name) || KEYWORDS.contains(&name.as_str()) {
            return Err(p.error_at(pos, ValidationError::BuiltinDeclared(name)));
        }
        match vocab.arity(&name) {
            None => return Err(p.error_at(pos, ValidationError::Unknown(name))),
            Some(n) if n != args.len() => {
                return Err(p.error_at(
                    pos,
                    ValidationError::Arity {
                        name,
                        expected: n,
                        found: args.len(),
                    },
                ))
            }
            Some(_) => {}
        }
        if !seen.insert((name.clone(), args.clone())) {
            return Err(p.error_at(
                pos,
                ParseErrorKind::Syntax(format!("location `{name}` is listed twice")),
            ));
        }
        state.set(&name, args, value);
    }
    Ok(state)
}

/// One reduced state from a `.kmap` file: its label and its locations.
pub type KmapEntry = (String, Vec<(String, Vec<Value>, Value)>);

/// Parses `"label": { name(args) = value ; ... }` lines.
pub fn parse_kmap(text: &str) -> Result<Vec<KmapEntry>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while *p.peek() != Tok::Eof {
        let label = match p.bump() {
            Tok::Str(s) => s,
            _ => {
                p.at -= 1;
                return Err(p.unexpected("a quoted label"));
            }
        };
        p.expect(Tok::Colon)?;
        p.expect(Tok::LBrace)?;
        let mut entries = Vec::new();
        while *p.peek() != Tok::RBrace {
            entries.push(p.location()?);
            if *p.peek() == Tok::Semi {
                p.bump();
            } else if *p.peek() != Tok::RBrace {
                return Err(p.unexpected("`;` or `}`"));
            }
        }
        p.bump();
        out.push((label, entries));
    }
    Ok(out)
}

/// Parses a single term against `vocab` (which records new names).
pub fn parse_term(text: &str, vocab: &mut Vocabulary) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term(vocab)?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(t)
}
