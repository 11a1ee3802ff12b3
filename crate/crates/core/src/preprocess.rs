//! Normalization into a binary decision tree over guards whose leaves are
//! update blocks.
//!
//! Three rewrites run in order: nested blocks are promoted into their parent,
//! `elseif` chains become nested two-way conditionals, and sibling updates are
//! pushed down into both arms of every conditional they sit next to.

use thiserror::Error;

use crate::term::{Cond, Rule, Term};
use crate::value::Value;
use crate::vocab::Program;

pub const DEFAULT_MAX_SIZE: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreprocessError {
    #[error("normal form exceeds the limit of {limit} rule nodes")]
    SizeLimit { limit: usize },
}

/// Promotes the members of nested blocks into the enclosing block.
pub fn flatten_blocks(r: &Rule) -> Rule {
    match r {
        Rule::Update(_) => r.clone(),
        Rule::Block(rs) => {
            let mut out = Vec::with_capacity(rs.len());
            for m in rs {
                match flatten_blocks(m) {
                    Rule::Block(inner) => out.extend(inner),
                    other => out.push(other),
                }
            }
            Rule::Block(out)
        }
        Rule::Cond(c) => Rule::Cond(Cond {
            branches: c
                .branches
                .iter()
                .map(|(g, b)| (g.clone(), flatten_blocks(b)))
                .collect(),
            else_body: c.else_body.as_ref().map(|e| Box::new(flatten_blocks(e))),
        }),
    }
}

/// Rewrites every conditional into `if g then T else E endif` form. A missing
/// else becomes the empty block; a branch guarded by literal `true` is
/// replaced by its body.
pub fn expand_elseif(r: &Rule) -> Rule {
    match r {
        Rule::Update(_) => r.clone(),
        Rule::Block(rs) => Rule::Block(rs.iter().map(expand_elseif).collect()),
        Rule::Cond(c) => {
            let mut acc = c
                .else_body
                .as_deref()
                .map_or_else(Rule::skip, expand_elseif);
            for (g, body) in c.branches.iter().rev() {
                acc = if *g == Term::Lit(Value::Bool(true)) {
                    expand_elseif(body)
                } else {
                    Rule::if_else(g.clone(), expand_elseif(body), acc)
                };
            }
            acc
        }
    }
}

struct Sinker {
    built: usize,
    limit: usize,
}

impl Sinker {
    fn count(&mut self, n: usize) -> Result<(), PreprocessError> {
        self.built += n;
        if self.built > self.limit {
            return Err(PreprocessError::SizeLimit { limit: self.limit });
        }
        Ok(())
    }

    fn rule(&mut self, r: &Rule) -> Result<Rule, PreprocessError> {
        match r {
            Rule::Update(_) => {
                self.count(1)?;
                Ok(r.clone())
            }
            Rule::Block(rs) => self.block(rs),
            Rule::Cond(c) => {
                let (g, t, e) = two_way(c);
                let t = self.rule(t)?;
                let e = self.rule(e)?;
                self.count(1)?;
                Ok(Rule::if_else(g.clone(), t, e))
            }
        }
    }

    /// `R0; if g then T else E; R3` ⇒ `if g then R0;T;R3 else R0;E;R3`,
    /// taking the leftmost conditional first.
    fn block(&mut self, members: &[Rule]) -> Result<Rule, PreprocessError> {
        if members.iter().any(|m| matches!(m, Rule::Block(_))) {
            let Rule::Block(flat) = flatten_blocks(&Rule::Block(members.to_vec())) else {
                unreachable!()
            };
            return self.block(&flat);
        }
        let Some(i) = members.iter().position(|m| matches!(m, Rule::Cond(_))) else {
            self.count(members.len() + 1)?;
            return Ok(Rule::Block(members.to_vec()));
        };
        let Rule::Cond(c) = &members[i] else {
            unreachable!()
        };
        let (g, t, e) = two_way(c);
        let (before, after) = (&members[..i], &members[i + 1..]);
        let mut arm = |branch: &Rule| -> Result<Rule, PreprocessError> {
            if before.is_empty() && after.is_empty() {
                return self.rule(branch);
            }
            let mut seq = before.to_vec();
            match branch {
                Rule::Block(rs) => seq.extend(rs.iter().cloned()),
                other => seq.push(other.clone()),
            }
            seq.extend(after.iter().cloned());
            self.block(&seq)
        };
        let t = arm(t)?;
        let e = arm(e)?;
        self.count(1)?;
        Ok(Rule::if_else(g.clone(), t, e))
    }
}

fn two_way(c: &Cond) -> (&Term, &Rule, &Rule) {
    static SKIP: Rule = Rule::Block(Vec::new());
    debug_assert_eq!(c.branches.len(), 1, "conditional not expanded");
    let (g, t) = &c.branches[0];
    (g, t, c.else_body.as_deref().unwrap_or(&SKIP))
}

/// Pushes updates into conditionals until every block holds only updates.
/// Expects flattened, expanded input.
pub fn sink_updates(r: &Rule, max_size: usize) -> Result<Rule, PreprocessError> {
    Sinker {
        built: 0,
        limit: max_size,
    }
    .rule(r)
}

/// Checks the binary-tree normal form: an update, a block of updates, or a
/// two-way conditional whose arms are in normal form.
pub fn is_normal_form(r: &Rule) -> bool {
    match r {
        Rule::Update(_) => true,
        Rule::Block(rs) => rs.iter().all(|m| matches!(m, Rule::Update(_))),
        Rule::Cond(c) => {
            c.branches.len() == 1
                && c.else_body.as_deref().is_some_and(is_normal_form)
                && is_normal_form(&c.branches[0].1)
        }
    }
}

/// Flattens, expands and sinks the program's top-level rule.
pub fn preprocess(p: &Program, max_size: usize) -> Result<Program, PreprocessError> {
    let root = sink_updates(&expand_elseif(&flatten_blocks(&p.body())), max_size)?;
    Ok(Program::from_root(p.decls.clone(), root, p.dialect())
        .expect("normalization introduces no names"))
}
