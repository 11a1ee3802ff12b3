//! Binding-time analysis: the update-dependency graph and the marking
//! algorithm that splits user functions into positive and negative.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::builtins::Builtin;
use crate::kappa::{Classification, Polarity, Reason};
use crate::term::Term;
use crate::vocab::{InputMode, Program};

/// `f → g` when some update to `f` mentions `g` in its location arguments
/// or right-hand side.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    nodes: BTreeSet<String>,
    edges: BTreeMap<String, BTreeSet<String>>,
}

impl DependencyGraph {
    pub fn new() -> Self {
        DependencyGraph::default()
    }

    pub fn add_node(&mut self, n: &str) {
        self.nodes.insert(n.to_string());
    }

    pub fn add_edge(&mut self, from: &str, to: &str) {
        self.add_node(from);
        self.add_node(to);
        self.edges
            .entry(from.to_string())
            .or_default()
            .insert(to.to_string());
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    /// Direct dependencies of `f`.
    pub fn deps(&self, f: &str) -> impl Iterator<Item = &str> {
        self.edges
            .get(f)
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges.get(from).is_some_and(|s| s.contains(to))
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges
            .iter()
            .flat_map(|(f, gs)| gs.iter().map(move |g| (f.as_str(), g.as_str())))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.values().map(BTreeSet::len).sum()
    }

    /// Names from which `targets` can be reached, targets included.
    pub fn reaching(&self, targets: &BTreeSet<String>) -> BTreeSet<String> {
        let mut rev: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (f, g) in self.edges() {
            rev.entry(g).or_default().push(f);
        }
        let mut seen = targets.clone();
        let mut stack: Vec<&str> = targets.iter().map(String::as_str).collect();
        while let Some(g) = stack.pop() {
            for f in rev.get(g).into_iter().flatten() {
                if seen.insert(f.to_string()) {
                    stack.push(f);
                }
            }
        }
        seen
    }

    /// Strongly connected components, dependencies before dependents.
    pub fn components(&self) -> Vec<Vec<String>> {
        let mut g: DiGraph<&str, ()> = DiGraph::new();
        let idx: BTreeMap<&str, NodeIndex> = self
            .nodes
            .iter()
            .map(|n| (n.as_str(), g.add_node(n)))
            .collect();
        for (f, h) in self.edges() {
            g.add_edge(idx[f], idx[h], ());
        }
        tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut names: Vec<String> = c.into_iter().map(|i| g[i].to_string()).collect();
                names.sort();
                names
            })
            .collect()
    }
}

/// Builds the graph over every user function in the vocabulary.
pub fn build_dependency_graph(p: &Program) -> DependencyGraph {
    let mut g = DependencyGraph::new();
    for n in p.vocab().names() {
        g.add_node(n);
    }
    for r in &p.rules {
        r.for_each_update(&mut |u| {
            for t in u.read_terms() {
                for name in t.user_names() {
                    g.add_edge(&u.head, &name);
                }
            }
        });
    }
    g
}

/// Runs the marking algorithm. Input negatives and everything that reaches
/// them are negative; input positive statics are positive; names whose
/// dependencies are all positive follow; self-dependent groups are settled
/// by [`resolve_self_dependent`]; whatever remains is negative.
pub fn classify(p: &Program, g: &DependencyGraph) -> Classification {
    let vocab = p.vocab();
    let mut cls = Classification::new();

    let seeds: BTreeSet<String> = p.input_names(InputMode::Negative).into_iter().collect();
    for n in &seeds {
        cls.set(n.clone(), Polarity::Negative, Reason::InputNegative);
    }
    let negative = g.reaching(&seeds);
    for n in &negative {
        if seeds.contains(n) {
            continue;
        }
        let via = g
            .deps(n)
            .find(|d| negative.contains(*d))
            .unwrap_or_default()
            .to_string();
        if vocab.get(n).is_some_and(|i| i.input == InputMode::Positive) {
            cls.warnings.push(format!(
                "{n} is declared input positive but depends on negative {via}; classified negative"
            ));
        }
        cls.set(
            n.clone(),
            Polarity::Negative,
            Reason::DependsOnNegative(via),
        );
    }

    for (n, info) in vocab.iter() {
        if info.input == InputMode::Positive && info.is_static && cls.get(n).is_none() {
            cls.set(n, Polarity::Positive, Reason::InputPositiveStatic);
        }
    }

    loop {
        let ready: Vec<String> = g
            .nodes()
            .filter(|n| cls.get(n).is_none())
            .filter(|n| !g.has_edge(n, n) && g.deps(n).all(|d| cls.is_positive(d)))
            .map(str::to_string)
            .collect();
        if ready.is_empty() {
            break;
        }
        for n in ready {
            cls.set(n, Polarity::Positive, Reason::DependsOnlyOnPositive);
        }
    }

    let open: BTreeSet<String> = g
        .nodes()
        .filter(|n| cls.get(n).is_none())
        .map(str::to_string)
        .collect();
    for (n, (polarity, reason)) in resolve_self_dependent(&open, p, g, &cls) {
        cls.set(n, polarity, reason);
    }

    for n in vocab.names() {
        if cls.get(n).is_none() {
            cls.set(n, Polarity::Negative, Reason::Unresolved);
        }
    }
    cls
}

/// Settles the names left open by the earlier marking steps, one strongly
/// connected component at a time, dependencies first. A cyclic component is
/// positive when its outside dependencies are positive and each member is
/// declared `finite` or only ever updated by Cdr descent over the component.
/// Names that cannot be settled are absent from the result.
pub fn resolve_self_dependent(
    names: &BTreeSet<String>,
    p: &Program,
    g: &DependencyGraph,
    known: &Classification,
) -> BTreeMap<String, (Polarity, Reason)> {
    let mut out: BTreeMap<String, (Polarity, Reason)> = BTreeMap::new();
    let positive = |n: &str, out: &BTreeMap<String, (Polarity, Reason)>| {
        known.is_positive(n) || out.get(n).is_some_and(|(p, _)| *p == Polarity::Positive)
    };
    for comp in g.components() {
        if !comp.iter().all(|n| names.contains(n)) {
            continue;
        }
        let members: BTreeSet<&str> = comp.iter().map(String::as_str).collect();
        let cyclic = comp.len() > 1 || g.has_edge(&comp[0], &comp[0]);
        let outside_ok = comp.iter().all(|n| {
            g.deps(n)
                .filter(|d| !members.contains(d))
                .all(|d| positive(d, &out))
        });
        if !outside_ok {
            continue;
        }
        if !cyclic {
            out.insert(
                comp[0].clone(),
                (Polarity::Positive, Reason::DependsOnlyOnPositive),
            );
            continue;
        }
        let mut reasons = Vec::with_capacity(comp.len());
        for n in &comp {
            if p.vocab().get(n).is_some_and(|i| i.finite) {
                reasons.push(Reason::FiniteAnnotation);
            } else if descends_by_cdr(n, &members, p) {
                reasons.push(Reason::CdrDescent);
            } else {
                break;
            }
        }
        if reasons.len() == comp.len() {
            for (n, r) in comp.iter().zip(reasons) {
                out.insert(n.clone(), (Polarity::Positive, r));
            }
        }
    }
    out
}

/// Every update to `name` has the shape `name := Cdr(path)` where a path is
/// a nullary member of the component or `Car`/`Cdr` of a path.
fn descends_by_cdr(name: &str, members: &BTreeSet<&str>, p: &Program) -> bool {
    fn is_path(t: &Term, members: &BTreeSet<&str>) -> bool {
        match t {
            Term::App { head, args } if args.is_empty() => members.contains(head.as_str()),
            Term::App { head, args } if args.len() == 1 => {
                matches!(Builtin::lookup(head), Some(Builtin::Car | Builtin::Cdr))
                    && is_path(&args[0], members)
            }
            _ => false,
        }
    }
    let mut all = true;
    let mut any = false;
    for r in &p.rules {
        r.for_each_update(&mut |u| {
            if u.head != name {
                return;
            }
            any = true;
            all &= u.args.is_empty()
                && matches!(&u.rhs, Term::App { head, args }
                    if Builtin::lookup(head) == Some(Builtin::Cdr) && is_path(&args[0], members));
        });
    }
    any && all
}

/// Builds the graph and classifies in one call.
pub fn analyze(p: &Program) -> Classification {
    classify(p, &build_dependency_graph(p))
}
