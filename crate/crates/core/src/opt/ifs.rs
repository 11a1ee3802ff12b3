//! Conditionals whose arms are identical.

use crate::specialize::{KRule, ResidualProgram};
use crate::term::{Cond, Rule};

/// `if g then R else R endif` ⇒ `R`, bottom-up. A chain collapses when
/// every branch and the else part are the same rule.
pub fn collapse_ifs(r: &Rule) -> Rule {
    match r {
        Rule::Update(_) => r.clone(),
        Rule::Block(rs) => Rule::Block(rs.iter().map(collapse_ifs).collect()),
        Rule::Cond(c) => {
            let branches: Vec<_> = c
                .branches
                .iter()
                .map(|(g, b)| (g.clone(), collapse_ifs(b)))
                .collect();
            let else_body = c.else_body.as_deref().map(collapse_ifs);
            if let Some(e) = &else_body {
                if branches.iter().all(|(_, b)| b == e) {
                    return e.clone();
                }
            }
            Rule::Cond(Cond {
                branches,
                else_body: else_body.map(Box::new),
            })
        }
    }
}

pub fn remove_redundant_ifs(rp: &ResidualProgram) -> ResidualProgram {
    ResidualProgram {
        krules: rp
            .krules
            .iter()
            .map(|k| KRule {
                body: collapse_ifs(&k.body),
                ..k.clone()
            })
            .collect(),
        ..rp.clone()
    }
}
