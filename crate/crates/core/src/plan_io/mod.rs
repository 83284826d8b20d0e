//! Compact problem/plan text format, plan validation and plan similarity.
//!
//! A problem file lists sections introduced by `<GOAL>`, `<INIT>`,
//! `<ACTION>`, `<PRE>` and `<EFFECT>`; predicates are comma separated and
//! their arguments space separated. A plan file holds one grounded action
//! per line.

mod corpus;
mod format;
mod metrics;
mod validate;

use thiserror::Error;

use crate::strips::StripsError;

pub use corpus::{optimal_length, score_corpus, CorpusEntry, CorpusReport, PLAN_EXT, PROBLEM_EXT, REFERENCE_EXT};
pub use format::{emit_plan, emit_problem, parse_plan, parse_problem, ActionSchema, Literal, PlanDocument, ProblemDocument};
pub use metrics::{bleu, rouge_l};
pub use validate::{
    hanoi_problem, init_matches, mdp_problem, plan_from_moves, validate_plan, FailingStep, ValidationVerdict,
};

#[derive(Debug, Error)]
pub enum PlanIoError {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error(transparent)]
    Strips(#[from] StripsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
