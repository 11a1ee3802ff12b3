//! Run-equivalence checking between two programs on chosen functions.
//!
//! Lockstep comparison requires equal observed values at every step index.
//! Observational comparison drops repeated observations from both runs and
//! requires the candidate's sequence to appear, in order, within the
//! reference's; this is the right notion once rules have been merged and a
//! single step of the candidate does the work of several.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::interp::{run, HaltReason, RunTrace};
use crate::state::{fmt_location, State};
use crate::value::Value;
use crate::vocab::Program;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Lockstep,
    Observational,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lockstep" => Ok(Mode::Lockstep),
            "observational" => Ok(Mode::Observational),
            _ => Err(format!("unknown mode `{s}`")),
        }
    }
}

/// The first point where two runs disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Divergence {
    /// Observed values differ at a step index of the reference run.
    Value {
        step: usize,
        location: String,
        left: Value,
        right: Value,
    },
    /// One run stopped with an error where the other did not.
    Halt {
        step: usize,
        left: String,
        right: String,
    },
    /// A candidate observation has no counterpart later in the reference.
    Unmatched {
        step: usize,
        location: String,
        left: Value,
        right: Value,
    },
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::Value {
                step,
                location,
                left,
                right,
            } => write!(f, "step {step}: {location} is {left} vs {right}"),
            Divergence::Halt { step, left, right } => {
                write!(f, "step {step}: runs stop differently ({left} vs {right})")
            }
            Divergence::Unmatched {
                step,
                location,
                left,
                right,
            } => write!(
                f,
                "candidate step {step} is not reached by the reference: {location} is {left} vs {right}"
            ),
        }
    }
}

/// How far a successful comparison got.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Agreement {
    pub reference_steps: usize,
    pub candidate_steps: usize,
    pub reference_halt: HaltReason,
    pub candidate_halt: HaltReason,
}

fn project(s: &State, observed: &BTreeSet<String>) -> State {
    s.restrict(|n| observed.contains(n))
}

/// First location, in sorted order, whose values differ.
pub fn first_difference(a: &State, b: &State) -> Option<(String, Value, Value)> {
    let locs: BTreeSet<(&str, &[Value])> = a
        .entries()
        .chain(b.entries())
        .map(|(n, args, _)| (n, args))
        .collect();
    locs.into_iter().find_map(|(n, args)| {
        let (x, y) = (a.get(n, args), b.get(n, args));
        (x != y).then(|| {
            let mut loc = String::new();
            let _ = fmt_location(&mut loc, n, args);
            (loc, x, y)
        })
    })
}

fn is_error(h: &HaltReason) -> bool {
    matches!(h, HaltReason::Error(_))
}

/// The observed state at index `i`; a run that reached a fixpoint stays in
/// its last state, an aborted run has none.
fn at(t: &RunTrace, i: usize) -> Option<&State> {
    t.states
        .get(i)
        .or_else(|| (t.halt == HaltReason::Fixpoint).then(|| t.last()))
}

pub fn compare_traces(
    reference: &RunTrace,
    candidate: &RunTrace,
    observed: &BTreeSet<String>,
    mode: Mode,
) -> Result<(), Divergence> {
    match mode {
        Mode::Lockstep => lockstep(reference, candidate, observed),
        Mode::Observational => observational(reference, candidate, observed),
    }
}

fn lockstep(a: &RunTrace, b: &RunTrace, observed: &BTreeSet<String>) -> Result<(), Divergence> {
    let n = a.states.len().max(b.states.len());
    for i in 0..n {
        match (at(a, i), at(b, i)) {
            (Some(x), Some(y)) => {
                if let Some((location, left, right)) =
                    first_difference(&project(x, observed), &project(y, observed))
                {
                    return Err(Divergence::Value {
                        step: i,
                        location,
                        left,
                        right,
                    });
                }
            }
            (None, None) => break,
            // The shorter run stopped on an error or a step limit.
            _ => {
                if is_error(&a.halt) != is_error(&b.halt) {
                    return Err(Divergence::Halt {
                        step: i,
                        left: a.halt.to_string(),
                        right: b.halt.to_string(),
                    });
                }
                break;
            }
        }
    }
    if is_error(&a.halt) != is_error(&b.halt) && a.states.len() == b.states.len() {
        return Err(Divergence::Halt {
            step: a.states.len(),
            left: a.halt.to_string(),
            right: b.halt.to_string(),
        });
    }
    Ok(())
}

/// Observed states with consecutive repeats removed, each with the index of
/// its first occurrence.
fn stutter_free(t: &RunTrace, observed: &BTreeSet<String>) -> Vec<(usize, State)> {
    let mut out: Vec<(usize, State)> = Vec::new();
    for (i, s) in t.states.iter().enumerate() {
        let p = project(s, observed);
        if out.last().is_none_or(|(_, q)| *q != p) {
            out.push((i, p));
        }
    }
    out
}

fn observational(
    a: &RunTrace,
    b: &RunTrace,
    observed: &BTreeSet<String>,
) -> Result<(), Divergence> {
    let reference = stutter_free(a, observed);
    let candidate = stutter_free(b, observed);
    if let (Some((_, x)), Some((_, y))) = (reference.first(), candidate.first()) {
        if let Some((location, left, right)) = first_difference(x, y) {
            return Err(Divergence::Value {
                step: 0,
                location,
                left,
                right,
            });
        }
    }
    if is_error(&a.halt) != is_error(&b.halt)
        && a.halt != HaltReason::StepLimit
        && b.halt != HaltReason::StepLimit
    {
        return Err(Divergence::Halt {
            step: b.steps(),
            left: a.halt.to_string(),
            right: b.halt.to_string(),
        });
    }
    let mut r = 0;
    for (step, s) in &candidate {
        let found = reference[r..].iter().position(|(_, x)| x == s);
        match found {
            Some(off) => r += off,
            None if a.halt == HaltReason::StepLimit => return Ok(()),
            None => {
                let next = reference.get(r + 1).unwrap_or(&reference[r]);
                let (location, left, right) = first_difference(&next.1, s).expect("states differ");
                return Err(Divergence::Unmatched {
                    step: *step,
                    location,
                    left,
                    right,
                });
            }
        }
    }
    if a.halt == HaltReason::Fixpoint && b.halt == HaltReason::Fixpoint {
        let (x, y) = (&reference.last().unwrap().1, &candidate.last().unwrap().1);
        if let Some((location, left, right)) = first_difference(x, y) {
            return Err(Divergence::Value {
                step: a.steps(),
                location,
                left,
                right,
            });
        }
    }
    Ok(())
}

/// Runs both programs and compares them on `observed`.
#[allow(clippy::too_many_arguments)]
pub fn check_equivalence(
    reference: &Program,
    reference_start: &State,
    candidate: &Program,
    candidate_start: &State,
    observed: &BTreeSet<String>,
    max_steps: usize,
    mode: Mode,
) -> Result<Agreement, Divergence> {
    let a = run(reference, reference_start, max_steps);
    let b = run(candidate, candidate_start, max_steps);
    compare_traces(&a, &b, observed, mode)?;
    Ok(Agreement {
        reference_steps: a.steps(),
        candidate_steps: b.steps(),
        reference_halt: a.halt,
        candidate_halt: b.halt,
    })
}
