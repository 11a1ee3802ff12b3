//! Alias elimination: a nullary name that only carries a value from one
//! K-rule into its unique successor is replaced there by the term it copies.

use std::collections::BTreeSet;

use crate::builtins::CONTROL;
use crate::specialize::{KRule, ResidualProgram};
use crate::term::{Rule, Term, Update};

use super::{data_updates, Fired, KFlowGraph, Pass};

/// The direct update members of the block that assigns `K := target`.
fn leaf_members<'a>(r: &'a Rule, target: &str) -> Option<Vec<&'a Update>> {
    match r {
        Rule::Update(u) => (u.control_target() == Some(target)).then(|| vec![u]),
        Rule::Block(rs) => {
            let members: Vec<&Update> = rs
                .iter()
                .filter_map(|m| match m {
                    Rule::Update(u) => Some(u),
                    _ => None,
                })
                .collect();
            if members.iter().any(|u| u.control_target() == Some(target)) {
                return Some(members);
            }
            rs.iter().find_map(|m| leaf_members(m, target))
        }
        Rule::Cond(c) => c
            .branches
            .iter()
            .map(|(_, b)| b)
            .chain(c.else_body.as_deref())
            .find_map(|b| leaf_members(b, target)),
    }
}

/// Removes the member `victim` from the block that assigns `K := target`.
fn drop_from_leaf(r: &Rule, target: &str, victim: &Update) -> Rule {
    match r {
        Rule::Update(_) => r.clone(),
        Rule::Block(rs) => {
            let here = rs
                .iter()
                .any(|m| matches!(m, Rule::Update(u) if u.control_target() == Some(target)));
            if here {
                Rule::Block(
                    rs.iter()
                        .filter(|m| !matches!(m, Rule::Update(u) if u == victim))
                        .cloned()
                        .collect(),
                )
            } else {
                Rule::Block(
                    rs.iter()
                        .map(|m| drop_from_leaf(m, target, victim))
                        .collect(),
                )
            }
        }
        Rule::Cond(c) => {
            let mut c = c.clone();
            for (_, b) in &mut c.branches {
                *b = drop_from_leaf(b, target, victim);
            }
            if let Some(e) = &mut c.else_body {
                **e = drop_from_leaf(e, target, victim);
            }
            Rule::Cond(c)
        }
    }
}

fn count_reads(t: &Term, name: &str) -> usize {
    let mut n = 0;
    t.for_each_head(&mut |h, _| n += usize::from(h == name));
    n
}

fn reads_in(r: &Rule, name: &str) -> usize {
    r.read_terms()
        .into_iter()
        .map(|t| count_reads(t, name))
        .sum()
}

fn substitute(r: &Rule, name: &str, by: &Term) -> Rule {
    r.map_terms(&mut |t, _| {
        t.map_bottom_up(&mut |node| match &node {
            Term::App { head, args } if head == name && args.is_empty() => by.clone(),
            _ => node,
        })
    })
}

/// Performs the first applicable alias elimination, scanning K-rules in
/// order for a successor with a unique predecessor.
pub fn alias_step(rp: &ResidualProgram) -> Option<(ResidualProgram, Fired)> {
    let g = KFlowGraph::new(rp);
    for (j, k2) in rp.krules.iter().enumerate() {
        let Some(pred) = g.unique_predecessor(&k2.label) else {
            continue;
        };
        let Some(i) = rp.krules.iter().position(|k| k.label == pred) else {
            continue;
        };
        let k1 = &rp.krules[i];
        let Some(members) = leaf_members(&k1.body, &k2.label) else {
            continue;
        };
        let written: BTreeSet<&str> = k1.body.updates().iter().map(|u| u.head.as_str()).collect();
        for u in members {
            if !u.args.is_empty() || u.head == CONTROL {
                continue;
            }
            let b = u.head.as_str();
            let writes_of_b = data_updates(&k1.body)
                .iter()
                .filter(|w| w.head == b)
                .count();
            if writes_of_b != 1 {
                continue;
            }
            if u.rhs
                .user_names()
                .iter()
                .any(|n| written.contains(n.as_str()))
            {
                continue;
            }
            let here = reads_in(&k2.body, b);
            let elsewhere: usize = rp
                .krules
                .iter()
                .enumerate()
                .filter(|(n, _)| *n != j)
                .map(|(_, k)| reads_in(&k.body, b))
                .sum();
            if here == 0 || elsewhere > 0 {
                continue;
            }
            let new1 = drop_from_leaf(&k1.body, &k2.label, u);
            let new2 = substitute(&k2.body, b, &u.rhs);
            if new1.size() + new2.size() > k1.body.size() + k2.body.size() {
                continue;
            }
            let mut out = rp.clone();
            out.krules[i] = KRule {
                body: new1,
                ..k1.clone()
            };
            out.krules[j] = KRule {
                body: new2,
                ..k2.clone()
            };
            let fired = Fired {
                pass: Pass::Alias,
                from: k1.label.clone(),
                to: k2.label.clone(),
                alias: Some(b.to_string()),
            };
            return Some((out, fired));
        }
    }
    None
}

/// Applies alias elimination until no candidate remains.
pub fn alias_elimination(rp: &ResidualProgram) -> ResidualProgram {
    let mut cur = rp.clone();
    while let Some((next, _)) = alias_step(&cur) {
        cur = next;
    }
    cur
}
