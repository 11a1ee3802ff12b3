//! The specializer: residual terms, per-κ rule specialization, and the
//! worklist that produces the K-rule program.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::builtins::{is_builtin, CONTROL};
use crate::emit::emit_kmap;
use crate::interp::{eval_term, InterpError, UpdateSet};
use crate::kappa::{
    canonicalize_kappa, term_polarity, Classification, ClassificationError, Polarity, Reason,
    ReducedState,
};
use crate::parser::KmapEntry;
use crate::state::State;
use crate::term::{Cond, Rule, Term, Update};
use crate::value::Value;
use crate::vocab::{Decl, Dialect, Program, ValidationError};

pub const DEFAULT_MAX_KAPPAS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("more than {limit} distinct reduced states")]
    Budget { limit: usize },
    #[error("positive {0}")]
    Conflict(InterpError),
    #[error("positive function {name} is applied to negative arguments in {term}")]
    PositiveAtNegative { name: String, term: String },
    #[error("positive location {location} is assigned negative {rhs}")]
    NegativeIntoPositive { location: String, rhs: String },
    #[error(transparent)]
    Classification(#[from] ClassificationError),
}

/// Replaces every maximal positive subterm of `t` by the literal of its
/// value in `k`.
pub fn residualize_term(
    t: &Term,
    k: &ReducedState,
    cls: &Classification,
) -> Result<Term, SpecError> {
    residualize_in(t, &k.to_state(), cls)
}

fn residualize_in(t: &Term, k: &State, cls: &Classification) -> Result<Term, SpecError> {
    if term_polarity(t, cls)? == Polarity::Positive {
        return Ok(Term::from_value(&eval_term(t, k)));
    }
    match t {
        Term::Lit(_) => Ok(t.clone()),
        Term::App { head, args } => {
            if !is_builtin(head) && cls.is_positive(head) {
                return Err(SpecError::PositiveAtNegative {
                    name: head.clone(),
                    term: t.to_string(),
                });
            }
            let args = args
                .iter()
                .map(|a| residualize_in(a, k, cls))
                .collect::<Result<_, _>>()?;
            Ok(Term::App {
                head: head.clone(),
                args,
            })
        }
    }
}

/// Reduced states in first-encounter order; the i-th is labelled `κi`.
#[derive(Clone, Debug, Default)]
pub struct KappaTable {
    index: HashMap<String, usize>,
    states: Vec<ReducedState>,
}

impl KappaTable {
    pub fn new() -> Self {
        KappaTable::default()
    }

    /// Index of `k`, assigning the next one if unseen.
    pub fn intern(&mut self, k: ReducedState) -> usize {
        if let Some(&i) = self.index.get(k.id()) {
            return i;
        }
        let i = self.states.len();
        self.index.insert(k.id().to_string(), i);
        self.states.push(k);
        i
    }

    pub fn get(&self, i: usize) -> &ReducedState {
        &self.states[i]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn label(i: usize) -> String {
        format!("κ{i}")
    }
}

/// Specializes a normal-form rule at `k`. Positive guards are decided,
/// negative guards are kept with their positive parts evaluated, and every
/// leaf ends in a control update naming its successor state (itself when
/// the leaf has no positive updates). Returns the residual rule and the
/// indices of the successor states it mentions.
pub fn specialize_rule(
    r: &Rule,
    k: &ReducedState,
    cls: &Classification,
    table: &mut KappaTable,
) -> Result<(Rule, BTreeSet<usize>), SpecError> {
    let mut succ = BTreeSet::new();
    let state = k.to_state();
    let self_index = table.intern(k.clone());
    let body = Leafer {
        k,
        state: &state,
        cls,
        table,
        self_index,
        succ: &mut succ,
    }
    .rule(r)?;
    Ok((body, succ))
}

struct Leafer<'a> {
    k: &'a ReducedState,
    state: &'a State,
    cls: &'a Classification,
    table: &'a mut KappaTable,
    self_index: usize,
    succ: &'a mut BTreeSet<usize>,
}

impl Leafer<'_> {
    fn rule(&mut self, r: &Rule) -> Result<Rule, SpecError> {
        match r {
            Rule::Cond(c) => self.branches(&c.branches, c.else_body.as_deref()),
            Rule::Update(u) => self.leaf(std::slice::from_ref(u)),
            Rule::Block(rs) => {
                let mut us = Vec::with_capacity(rs.len());
                for m in rs {
                    match m {
                        Rule::Update(u) => us.push(u.clone()),
                        _ => return self.mixed_block(rs),
                    }
                }
                self.leaf(&us)
            }
        }
    }

    fn branches(
        &mut self,
        branches: &[(Term, Rule)],
        else_body: Option<&Rule>,
    ) -> Result<Rule, SpecError> {
        let Some(((g, body), rest)) = branches.split_first() else {
            return match else_body {
                Some(e) => self.rule(e),
                None => self.leaf(&[]),
            };
        };
        if term_polarity(g, self.cls)? == Polarity::Positive {
            return if eval_term(g, self.state).is_true() {
                self.rule(body)
            } else {
                self.branches(rest, else_body)
            };
        }
        let guard = residualize_in(g, self.state, self.cls)?;
        let then = self.rule(body)?;
        let otherwise = self.branches(rest, else_body)?;
        Ok(Rule::if_else(guard, then, otherwise))
    }

    /// Blocks that still contain conditionals are normalized first, so the
    /// specializer also accepts input that skipped preprocessing.
    fn mixed_block(&mut self, rs: &[Rule]) -> Result<Rule, SpecError> {
        let nf = crate::preprocess::sink_updates(
            &crate::preprocess::expand_elseif(&crate::preprocess::flatten_blocks(&Rule::Block(
                rs.to_vec(),
            ))),
            usize::MAX,
        )
        .expect("unbounded");
        self.rule(&nf)
    }

    fn leaf(&mut self, updates: &[Update]) -> Result<Rule, SpecError> {
        let mut out = Vec::with_capacity(updates.len() + 1);
        let mut positive = UpdateSet::new();
        for u in updates {
            if self.cls.is_positive(&u.head) {
                let mut args = Vec::with_capacity(u.args.len());
                for t in u.read_terms() {
                    if term_polarity(t, self.cls)? == Polarity::Negative {
                        return Err(SpecError::NegativeIntoPositive {
                            location: u.location().to_string(),
                            rhs: t.to_string(),
                        });
                    }
                }
                for a in &u.args {
                    args.push(eval_term(a, self.state));
                }
                positive
                    .insert(&u.head, args, eval_term(&u.rhs, self.state))
                    .map_err(SpecError::Conflict)?;
            } else {
                if self.cls.get(&u.head).is_none() {
                    return Err(ClassificationError::Unclassified(u.head.clone()).into());
                }
                out.push(Rule::Update(Update {
                    head: u.head.clone(),
                    args: u
                        .args
                        .iter()
                        .map(|a| residualize_in(a, self.state, self.cls))
                        .collect::<Result<_, _>>()?,
                    rhs: residualize_in(&u.rhs, self.state, self.cls)?,
                }));
            }
        }
        let next = if positive.is_empty() {
            self.self_index
        } else {
            let mut entries: Vec<(&str, Vec<Value>, Value)> = self
                .k
                .entries()
                .iter()
                .flat_map(|(n, g)| {
                    g.iter()
                        .map(move |(a, v)| (n.as_str(), a.clone(), v.clone()))
                })
                .collect();
            entries.extend(positive.iter().map(|(n, a, v)| (n, a.to_vec(), v.clone())));
            self.table.intern(canonicalize_kappa(entries, self.cls)?)
        };
        self.succ.insert(next);
        out.push(Rule::Update(Update::control(&KappaTable::label(next))));
        Ok(Rule::Block(out))
    }
}

/// `if =(K, "label") then body endif`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KRule {
    pub label: String,
    pub kappa: ReducedState,
    pub body: Rule,
}

impl KRule {
    pub fn guard(label: &str) -> Term {
        Term::app("=", vec![Term::name(CONTROL), Term::str(label)])
    }

    pub fn to_rule(&self) -> Rule {
        Rule::if_then(KRule::guard(&self.label), self.body.clone())
    }

    /// Labels assigned to `K` anywhere in the body.
    pub fn targets(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.body.for_each_update(&mut |u| {
            if let Some(t) = u.control_target() {
                out.push(t);
            }
        });
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResidualError {
    #[error("top-level rule {0} is not of the form if =(K, \"label\") then ... endif")]
    NotKRule(usize),
    #[error("label {0} has more than one K-rule")]
    DuplicateLabel(String),
    #[error("K is assigned {0}, which has no K-rule")]
    Unclosed(String),
    #[error("initial label {0} has no K-rule")]
    MissingInitial(String),
    #[error("K is assigned a non-literal value")]
    DynamicControl,
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error(transparent)]
    Kmap(#[from] ClassificationError),
}

/// The specializer's output: K-rules in generation order plus the
/// declarations of the surviving negative functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualProgram {
    pub decls: Vec<Decl>,
    pub krules: Vec<KRule>,
    pub initial: String,
}

impl ResidualProgram {
    pub fn to_program(&self) -> Program {
        Program::new(
            self.decls.clone(),
            self.krules.iter().map(KRule::to_rule).collect(),
            Dialect::Residual,
        )
        .expect("residual rules use declared names only")
    }

    /// Reads back a residual program. `kmap` supplies each label's reduced
    /// state; labels it omits get the empty state. The initial label is `κ0`
    /// when present, else the first rule's. Closure is not checked here.
    pub fn from_program(p: &Program, kmap: &[KmapEntry]) -> Result<ResidualProgram, ResidualError> {
        let mut cls = Classification::new();
        for (_, entries) in kmap {
            for (n, _, _) in entries {
                cls.set(n.clone(), Polarity::Positive, Reason::InputPositiveStatic);
            }
        }
        let mut states = BTreeMap::new();
        for (label, entries) in kmap {
            let k = canonicalize_kappa(
                entries
                    .iter()
                    .map(|(n, a, v)| (n.as_str(), a.clone(), v.clone())),
                &cls,
            )?;
            states.insert(label.clone(), k);
        }
        let empty = canonicalize_kappa(Vec::new(), &cls)?;
        let mut krules = Vec::with_capacity(p.rules.len());
        for (i, r) in p.rules.iter().enumerate() {
            let label = match r {
                Rule::Cond(Cond {
                    branches,
                    else_body: None,
                }) if branches.len() == 1 => match &branches[0].0 {
                    Term::App { head, args }
                        if head == "=" && args.len() == 2 && args[0] == Term::name(CONTROL) =>
                    {
                        match &args[1] {
                            Term::Lit(Value::Str(s)) => Some((s.clone(), &branches[0].1)),
                            _ => None,
                        }
                    }
                    _ => None,
                },
                _ => None,
            };
            let (label, body) = label.ok_or(ResidualError::NotKRule(i))?;
            krules.push(KRule {
                kappa: states.get(&label).cloned().unwrap_or_else(|| empty.clone()),
                label,
                body: body.clone(),
            });
        }
        let initial = if krules.iter().any(|k| k.label == "κ0") || krules.is_empty() {
            KappaTable::label(0)
        } else {
            krules[0].label.clone()
        };
        Ok(ResidualProgram {
            decls: p.decls.clone(),
            krules,
            initial,
        })
    }

    pub fn get(&self, label: &str) -> Option<&KRule> {
        self.krules.iter().find(|k| k.label == label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.krules.iter().map(|k| k.label.as_str())
    }

    /// Every assigned label has a K-rule, labels are unique, the initial
    /// label is present, and K is only ever assigned literals.
    pub fn check_closure(&self) -> Result<(), ResidualError> {
        let mut seen = BTreeSet::new();
        for k in &self.krules {
            if !seen.insert(k.label.as_str()) {
                return Err(ResidualError::DuplicateLabel(k.label.clone()));
            }
        }
        if !seen.contains(self.initial.as_str()) {
            return Err(ResidualError::MissingInitial(self.initial.clone()));
        }
        for k in &self.krules {
            let mut bad = false;
            k.body
                .for_each_update(&mut |u| bad |= u.head == CONTROL && u.control_target().is_none());
            if bad {
                return Err(ResidualError::DynamicControl);
            }
            for t in k.targets() {
                if !seen.contains(t) {
                    return Err(ResidualError::Unclosed(t.to_string()));
                }
            }
        }
        Ok(())
    }

    /// The start state for running the residual: `neg` plus `K = initial`.
    pub fn initial_state(&self, neg: &State) -> State {
        let mut s = neg.clone();
        s.set(CONTROL, vec![], Value::str(&self.initial));
        s
    }

    pub fn kmap_text(&self) -> String {
        emit_kmap(self.krules.iter().map(|k| (k.label.as_str(), &k.kappa)))
    }

    /// Rule and term nodes over all K-rules.
    pub fn size(&self) -> usize {
        self.krules.iter().map(|k| k.to_rule().size()).sum()
    }
}

/// Runs the worklist from `k0` in first-in first-out order until every
/// mentioned reduced state has a K-rule.
pub fn generate_krules(
    p: &Program,
    k0: &ReducedState,
    cls: &Classification,
    max_kappas: usize,
) -> Result<ResidualProgram, SpecError> {
    let root = p.root();
    let mut table = KappaTable::new();
    table.intern(k0.clone());
    let mut queue = VecDeque::from([0usize]);
    let mut done = BTreeSet::new();
    let mut krules = Vec::new();
    while let Some(i) = queue.pop_front() {
        if !done.insert(i) {
            continue;
        }
        let k = table.get(i).clone();
        let (body, succ) = specialize_rule(&root, &k, cls, &mut table)?;
        if table.len() > max_kappas {
            return Err(SpecError::Budget { limit: max_kappas });
        }
        krules.push(KRule {
            label: KappaTable::label(i),
            kappa: k,
            body,
        });
        queue.extend(succ.into_iter().filter(|j| !done.contains(j)));
    }
    let decls = p
        .decls
        .iter()
        .filter(|d| !cls.is_positive(&d.name))
        .cloned()
        .collect();
    Ok(ResidualProgram {
        decls,
        krules,
        initial: KappaTable::label(0),
    })
}

/// Specializes `p` for the positive part of `s0`.
pub fn specialize(
    p: &Program,
    s0: &State,
    cls: &Classification,
    max_kappas: usize,
) -> Result<ResidualProgram, SpecError> {
    generate_krules(p, &ReducedState::project(s0, cls), cls, max_kappas)
}
