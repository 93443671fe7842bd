//! Finitary analyses over logs and explicit finite structures.

mod clopen;
mod similarity;
mod sprk;
mod twocard;

use thiserror::Error;

use crate::logic::LogicError;
use crate::scheduler::{LogError, Record, Replay};

pub use clopen::{box_measure, clopen_at, clopen_decomposition, measure, truncation_total, ClopenBox, ClopenSet};
pub use similarity::{similarity_threshold, SimilarityReport};
pub use sprk::{sprk, RankResult, RankStep, RankValue};
pub use twocard::{
    check_gamma, en_partition, en_related, gamma_instantiate, splitting_chain, splitting_chain_search, ChainSearch,
    EnPartition, TermFamily,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("formula {0} is never scheduled in this log")]
    FormulaNeverScheduled(String),
    #[error("{count} box tuples are undecided, e.g. {}", .examples.join("; "))]
    Undecided { count: usize, examples: Vec<String> },
    #[error("rank is at least {0}; raise the cap")]
    CapTooSmall(usize),
    #[error("search gave up after {0} nodes")]
    SearchSpaceExceeded(usize),
    #[error("missing interpretation: {0}")]
    MissingInterpretation(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("term file line {line}: {msg}")]
    TermFile { line: usize, msg: String },
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// Replay up to the end of round `n`.
pub(crate) fn replay_round(rp: &mut Replay, n: usize) -> Result<(), LogError> {
    let mut seen = false;
    loop {
        if seen && rp.at_round_end() {
            return Ok(());
        }
        match rp.advance()? {
            None => return Err(LogError::NoSuchStage(n)),
            Some(Record::Round(l)) if *l == n => seen = true,
            Some(_) => {}
        }
    }
}
