//! Merging a K-rule into its unique predecessor when the two update blocks
//! neither read each other's writes nor touch the same location.

use crate::builtins::CONTROL;
use crate::specialize::{KRule, ResidualProgram};
use crate::term::{Rule, Update};

use super::{read_names, Fired, KFlowGraph, Pass};

/// The updates of a pure update block.
fn block_updates(r: &Rule) -> Option<Vec<&Update>> {
    match r {
        Rule::Update(u) => Some(vec![u]),
        Rule::Block(rs) => rs
            .iter()
            .map(|m| match m {
                Rule::Update(u) => Some(u),
                _ => None,
            })
            .collect(),
        Rule::Cond(_) => None,
    }
}

/// Syntactically distinct locations: different heads, or ground literal
/// argument lists that differ.
fn disjoint(a: &Update, b: &Update) -> bool {
    a.head != b.head || (a.args.iter().chain(&b.args).all(|t| t.is_lit()) && a.args != b.args)
}

/// Performs the first applicable merge, scanning K-rules in order.
pub fn merge_step(rp: &ResidualProgram) -> Option<(ResidualProgram, Fired)> {
    let g = KFlowGraph::new(rp);
    for (j, k2) in rp.krules.iter().enumerate() {
        let Some(pred) = g.unique_predecessor(&k2.label) else {
            continue;
        };
        let Some(i) = rp.krules.iter().position(|k| k.label == pred) else {
            continue;
        };
        let k1 = &rp.krules[i];
        let (Some(first), Some(second)) = (block_updates(&k1.body), block_updates(&k2.body)) else {
            continue;
        };
        let controls = |us: &[&Update]| us.iter().filter(|u| u.head == CONTROL).count();
        if controls(&first) != 1 || controls(&second) != 1 {
            continue;
        }
        let w1: Vec<&Update> = first.into_iter().filter(|u| u.head != CONTROL).collect();
        let w2: Vec<&Update> = second
            .iter()
            .copied()
            .filter(|u| u.head != CONTROL)
            .collect();
        let reads = read_names(&k2.body);
        if w1.iter().any(|u| reads.contains(&u.head)) {
            continue;
        }
        if !w1.iter().all(|a| w2.iter().all(|b| disjoint(a, b))) {
            continue;
        }
        let body = Rule::Block(
            w1.into_iter()
                .chain(second)
                .map(|u| Rule::Update(u.clone()))
                .collect(),
        );
        let mut out = rp.clone();
        out.krules[i] = KRule { body, ..k1.clone() };
        out.krules.remove(j);
        let fired = Fired {
            pass: Pass::Merge,
            from: k1.label.clone(),
            to: k2.label.clone(),
            alias: None,
        };
        return Some((out, fired));
    }
    None
}

/// Applies merging until no candidate remains.
pub fn merge_compatible(rp: &ResidualProgram) -> ResidualProgram {
    let mut cur = rp.clone();
    while let Some((next, _)) = merge_step(&cur) {
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::super::tests::residual;
    use super::*;

    #[test]
    fn independent_blocks_merge() {
        let before = residual(
            "if =(K, \"κ1\") then do a := b K := \"κ2\" enddo endif
             if =(K, \"κ2\") then do c := d K := \"κ3\" enddo endif",
        );
        let after = residual("if =(K, \"κ1\") then do a := b c := d K := \"κ3\" enddo endif");
        assert_eq!(merge_compatible(&before), after);
    }

    #[test]
    fn reading_a_write_blocks_merge() {
        let before = residual(
            "if =(K, \"κ1\") then do a := b K := \"κ2\" enddo endif
             if =(K, \"κ2\") then do c := a K := \"κ3\" enddo endif",
        );
        assert_eq!(merge_compatible(&before), before);
    }

    #[test]
    fn same_location_blocks_merge() {
        let before = residual(
            "if =(K, \"κ1\") then do M(1) := b K := \"κ2\" enddo endif
             if =(K, \"κ2\") then do M(1) := d K := \"κ3\" enddo endif",
        );
        assert_eq!(merge_compatible(&before), before);
        let before = residual(
            "if =(K, \"κ1\") then do M(x) := b K := \"κ2\" enddo endif
             if =(K, \"κ2\") then do M(2) := d K := \"κ3\" enddo endif",
        );
        assert_eq!(merge_compatible(&before), before);
        let ground = residual(
            "if =(K, \"κ1\") then do M(1) := b K := \"κ2\" enddo endif
             if =(K, \"κ2\") then do M(2) := d K := \"κ3\" enddo endif",
        );
        assert_eq!(merge_compatible(&ground).krules.len(), 1);
    }

    #[test]
    fn conditional_bodies_do_not_merge() {
        let before = residual(
            "if =(K, \"κ1\") then do a := b K := \"κ2\" enddo endif
             if =(K, \"κ2\") then if g then K := \"κ3\" else K := \"κ4\" endif endif",
        );
        assert_eq!(merge_compatible(&before), before);
    }

    #[test]
    fn chains_merge_pairwise() {
        let before = residual(
            "if =(K, \"κ1\") then do a := x K := \"κ2\" enddo endif
             if =(K, \"κ2\") then do b := y K := \"κ3\" enddo endif
             if =(K, \"κ3\") then do c := z K := \"κ4\" enddo endif",
        );
        let after =
            residual("if =(K, \"κ1\") then do a := x b := y c := z K := \"κ4\" enddo endif");
        assert_eq!(merge_compatible(&before), after);
    }
}
