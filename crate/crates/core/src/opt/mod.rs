//! Optimizer for residual K-rule programs: term rewrites, redundant-if
//! removal, alias elimination and merging of independent rules, repeated
//! until nothing changes.

mod alias;
mod ifs;
mod merge;
mod rewrite;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

pub use alias::{alias_elimination, alias_step};
pub use ifs::{collapse_ifs, remove_redundant_ifs};
pub use merge::{merge_compatible, merge_step};
pub use rewrite::{
    apply_rewrites, apply_rewrites_with, boolean_guaranteed, BoolIdentity, CarCons, CdrCons,
    ConstFold, Rewrite, RewriteSet, STANDARD_REWRITES,
};

use crate::builtins::CONTROL;
use crate::specialize::ResidualProgram;
use crate::term::{Rule, Update};

pub const DEFAULT_MAX_ITER: usize = 100;

/// Control flow between K-rules: one entry per `K := label` site.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KFlowGraph {
    initial: String,
    sites: BTreeMap<String, Vec<String>>,
    succ: BTreeMap<String, BTreeSet<String>>,
}

impl KFlowGraph {
    pub fn new(rp: &ResidualProgram) -> Self {
        let mut sites: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut succ: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for k in &rp.krules {
            succ.entry(k.label.clone()).or_default();
            for t in k.targets() {
                sites
                    .entry(t.to_string())
                    .or_default()
                    .push(k.label.clone());
                succ.entry(k.label.clone())
                    .or_default()
                    .insert(t.to_string());
            }
        }
        KFlowGraph {
            initial: rp.initial.clone(),
            sites,
            succ,
        }
    }

    /// Labels of the rules holding each `K := target` site, with repeats.
    pub fn sites(&self, target: &str) -> &[String] {
        self.sites.get(target).map_or(&[], Vec::as_slice)
    }

    /// Assignment sites plus one for the initial label.
    pub fn predecessor_count(&self, target: &str) -> usize {
        self.sites(target).len() + usize::from(target == self.initial)
    }

    /// The only rule that can transfer control to `target`, if there is
    /// exactly one assignment site, it is not in `target`'s own rule, and
    /// `target` is not the initial label.
    pub fn unique_predecessor(&self, target: &str) -> Option<&str> {
        match self.sites(target) {
            [only] if self.predecessor_count(target) == 1 && only != target => Some(only),
            _ => None,
        }
    }

    pub fn successors(&self, label: &str) -> impl Iterator<Item = &str> {
        self.succ
            .get(label)
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    pub fn reachable(&self) -> BTreeSet<String> {
        let mut seen = BTreeSet::from([self.initial.clone()]);
        let mut queue = VecDeque::from([self.initial.as_str()]);
        while let Some(l) = queue.pop_front() {
            for s in self.successors(l) {
                if seen.insert(s.to_string()) {
                    queue.push_back(s);
                }
            }
        }
        seen
    }
}

/// Updates other than control updates.
pub(crate) fn data_updates(r: &Rule) -> Vec<&Update> {
    r.updates()
        .into_iter()
        .filter(|u| u.head != CONTROL)
        .collect()
}

/// User names read anywhere in `r`.
pub(crate) fn read_names(r: &Rule) -> BTreeSet<String> {
    r.read_terms()
        .into_iter()
        .flat_map(|t| t.user_names())
        .collect()
}

/// Drops K-rules that cannot be reached from the initial label.
pub fn remove_unreachable(rp: &ResidualProgram) -> (ResidualProgram, Vec<String>) {
    let live = KFlowGraph::new(rp).reachable();
    let (keep, drop): (Vec<_>, Vec<_>) = rp
        .krules
        .iter()
        .cloned()
        .partition(|k| live.contains(&k.label));
    (
        ResidualProgram {
            krules: keep,
            ..rp.clone()
        },
        drop.into_iter().map(|k| k.label).collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pass {
    Rewrites,
    Ifs,
    Alias,
    Merge,
}

impl Pass {
    pub const ALL: [Pass; 4] = [Pass::Rewrites, Pass::Ifs, Pass::Alias, Pass::Merge];

    pub fn name(self) -> &'static str {
        match self {
            Pass::Rewrites => "rewrites",
            Pass::Ifs => "ifs",
            Pass::Alias => "alias",
            Pass::Merge => "merge",
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pass::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown pass `{s}`"))
    }
}

/// One application of alias elimination or merging.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fired {
    pub pass: Pass,
    pub from: String,
    pub to: String,
    /// The eliminated alias, for alias elimination.
    pub alias: Option<String>,
}

#[derive(Debug)]
pub struct OptConfig {
    /// Enabled passes; they always run in the order of [`Pass::ALL`].
    pub passes: BTreeSet<Pass>,
    pub max_iter: usize,
    pub rewrites: RewriteSet,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            passes: Pass::ALL.into_iter().collect(),
            max_iter: DEFAULT_MAX_ITER,
            rewrites: RewriteSet::standard(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OptReport {
    pub iterations: usize,
    pub size_before: usize,
    pub size_after: usize,
    pub changes: BTreeMap<Pass, usize>,
    pub fired: Vec<Fired>,
    pub unreachable: Vec<String>,
}

impl OptReport {
    /// Names whose defining update was removed by alias elimination.
    pub fn eliminated_aliases(&self) -> BTreeSet<String> {
        self.fired.iter().filter_map(|f| f.alias.clone()).collect()
    }

    pub fn merges(&self) -> usize {
        self.fired.iter().filter(|f| f.pass == Pass::Merge).count()
    }
}

fn run_pass(
    pass: Pass,
    rp: &ResidualProgram,
    config: &OptConfig,
    fired: &mut Vec<Fired>,
) -> ResidualProgram {
    match pass {
        Pass::Rewrites => apply_rewrites_with(rp, &config.rewrites),
        Pass::Ifs => remove_redundant_ifs(rp),
        Pass::Alias => {
            let mut cur = rp.clone();
            while let Some((next, f)) = alias_step(&cur) {
                fired.push(f);
                cur = next;
            }
            cur
        }
        Pass::Merge => {
            let mut cur = rp.clone();
            while let Some((next, f)) = merge_step(&cur) {
                fired.push(f);
                cur = next;
            }
            cur
        }
    }
}

/// Runs the enabled passes in order, dropping unreachable rules, until a
/// full round changes nothing or `max_iter` rounds have run. A pass whose
/// result would be larger than its input is discarded.
pub fn optimize_with(rp: &ResidualProgram, config: &OptConfig) -> (ResidualProgram, OptReport) {
    let mut report = OptReport {
        size_before: rp.size(),
        ..OptReport::default()
    };
    let (mut cur, dropped) = remove_unreachable(rp);
    report.unreachable.extend(dropped);
    while report.iterations < config.max_iter {
        report.iterations += 1;
        let mut changed = false;
        for pass in Pass::ALL.into_iter().filter(|p| config.passes.contains(p)) {
            let mut fired = Vec::new();
            let next = run_pass(pass, &cur, config, &mut fired);
            if next != cur && next.size() <= cur.size() {
                *report.changes.entry(pass).or_default() += 1;
                report.fired.extend(fired);
                cur = next;
                changed = true;
            }
        }
        let (next, dropped) = remove_unreachable(&cur);
        if !dropped.is_empty() {
            report.unreachable.extend(dropped);
            cur = next;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    report.size_after = cur.size();
    (cur, report)
}

pub fn optimize(rp: &ResidualProgram) -> ResidualProgram {
    optimize_with(rp, &OptConfig::default()).0
}
