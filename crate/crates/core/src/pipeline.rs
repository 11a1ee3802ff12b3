//! The full chain: preprocess, classify, specialize, optimize.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::bta::analyze;
use crate::kappa::{Classification, Polarity};
use crate::opt::{optimize_with, OptConfig, OptReport};
use crate::preprocess::{preprocess, PreprocessError, DEFAULT_MAX_SIZE};
use crate::specialize::{specialize, ResidualProgram, SpecError, DEFAULT_MAX_KAPPAS};
use crate::state::State;
use crate::vocab::{Program, ValidationError};

#[derive(Debug)]
pub struct PipelineConfig {
    /// When set, exactly these declared inputs are positive and every other
    /// input is negative.
    pub positive: Option<Vec<String>>,
    pub max_size: usize,
    pub max_kappas: usize,
    pub opt: OptConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            positive: None,
            max_size: DEFAULT_MAX_SIZE,
            max_kappas: DEFAULT_MAX_KAPPAS,
            opt: OptConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("inputs: {0}")]
    Inputs(#[from] ValidationError),
    #[error("preprocess: {0}")]
    Preprocess(#[from] PreprocessError),
    #[error("specialize: {0}")]
    Specialize(#[from] SpecError),
}

impl PipelineError {
    /// True for size and reduced-state limits.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            PipelineError::Preprocess(PreprocessError::SizeLimit { .. })
                | PipelineError::Specialize(SpecError::Budget { .. })
        )
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub source: Program,
    pub preprocessed: Program,
    pub classification: Classification,
    pub residual: ResidualProgram,
    pub optimized: ResidualProgram,
    pub report: OptReport,
}

impl PipelineOutput {
    /// Negative functions that survive optimization: the ones to compare
    /// against the source program.
    pub fn observed(&self) -> BTreeSet<String> {
        let gone = self.report.eliminated_aliases();
        self.classification
            .with(Polarity::Negative)
            .into_iter()
            .filter(|n| !gone.contains(n))
            .collect()
    }

    /// Human-readable summary: polarities, κ count, sizes, passes.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for n in self.classification.names() {
            let arity = self.source.vocab().arity(n).unwrap_or(0);
            let _ = writeln!(
                out,
                "{n}/{arity}: {} ({})",
                self.classification.get(n).expect("classified"),
                self.classification.reason(n).expect("classified"),
            );
        }
        for w in &self.classification.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        let r = &self.report;
        let _ = writeln!(out, "kappas: {}", self.residual.krules.len());
        let _ = writeln!(
            out,
            "kappas after optimization: {}",
            self.optimized.krules.len()
        );
        let _ = writeln!(out, "size: {} -> {}", r.size_before, r.size_after);
        let _ = writeln!(out, "iterations: {}", r.iterations);
        for (pass, n) in &r.changes {
            let _ = writeln!(out, "pass {pass}: changed {n} time(s)");
        }
        let _ = writeln!(out, "merges: {}", r.merges());
        let aliases: Vec<String> = r.eliminated_aliases().into_iter().collect();
        let _ = writeln!(out, "eliminated aliases: {}", aliases.join(","));
        if !r.unreachable.is_empty() {
            let _ = writeln!(out, "unreachable: {}", r.unreachable.join(","));
        }
        out
    }
}

pub fn run_pipeline(
    p: &Program,
    s0: &State,
    config: &PipelineConfig,
) -> Result<PipelineOutput, PipelineError> {
    let source = match &config.positive {
        Some(pos) => p.with_positive_inputs(pos)?,
        None => p.clone(),
    };
    let preprocessed = preprocess(&source, config.max_size)?;
    let classification = analyze(&preprocessed);
    let residual = specialize(&preprocessed, s0, &classification, config.max_kappas)?;
    let (optimized, report) = optimize_with(&residual, &config.opt);
    Ok(PipelineOutput {
        source,
        preprocessed,
        classification,
        residual,
        optimized,
        report,
    })
}
