//! Offline partial evaluation for sequential evolving algebras.
//!
//! The pipeline is [`preprocess`] → [`bta`] → [`specialize`] → [`opt`], with
//! [`interp`] as the semantic reference for every stage and [`equiv`] as the
//! harness that compares runs.

pub mod bta;
pub mod builtins;
pub mod emit;
pub mod equiv;
pub mod gen;
pub mod interp;
pub mod kappa;
pub mod opt;
pub mod parser;
pub mod pipeline;
pub mod preprocess;
pub mod specialize;
pub mod state;
pub mod term;
pub mod value;
pub mod vocab;

pub use bta::{analyze, build_dependency_graph, classify, DependencyGraph};
pub use builtins::{Builtin, CONTROL};
pub use emit::{emit_kmap, emit_program};
pub use equiv::{check_equivalence, Divergence, Mode};
pub use interp::{collect_updates, eval_term, run, step, HaltReason, InterpError, RunTrace};
pub use kappa::{canonicalize_kappa, term_polarity, Classification, Polarity, ReducedState};
pub use opt::{optimize, optimize_with, KFlowGraph, OptConfig, OptReport, Pass};
pub use parser::{parse_kmap, parse_program, parse_residual, parse_state, ParseError};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineError, PipelineOutput};
pub use preprocess::{preprocess, PreprocessError};
pub use specialize::{
    generate_krules, residualize_term, specialize, specialize_rule, KRule, ResidualProgram,
    SpecError,
};
pub use state::State;
pub use term::{Cond, Rule, Term, Update};
pub use value::Value;
pub use vocab::{Decl, DeclKind, Dialect, InputMode, Program, Vocabulary};
