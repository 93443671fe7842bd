use std::fmt;

use super::AnalysisError;
use crate::logic::{Conjunct, Formula};
use crate::scheduler::{similarity_scan, ConstructionLog, Replay, SimilarityCounterexample};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityReport {
    pub formula: Formula,
    /// Round at which the formula entered the decided window.
    pub threshold: usize,
    /// Last stage exponent checked.
    pub verified_depth: usize,
    /// Tuple pairs compared.
    pub checked: usize,
    pub counterexample: Option<SimilarityCounterexample>,
}

impl SimilarityReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

impl fmt::Display for SimilarityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "formula {}", self.formula)?;
        writeln!(f, "threshold {}", self.threshold)?;
        writeln!(f, "verified-depth {}", self.verified_depth)?;
        writeln!(f, "checked {}", self.checked)?;
        match &self.counterexample {
            None => write!(f, "result pass"),
            Some(c) => {
                let show = |t: &[crate::fmac::Node]| t.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
                writeln!(f, "result FAIL")?;
                write!(
                    f,
                    "counterexample stage {} level {} ({}) {:?} vs ({}) {:?}",
                    c.stage,
                    c.level,
                    show(&c.first),
                    c.values.0,
                    show(&c.second),
                    c.values.1
                )
            }
        }
    }
}

/// N_θ is the size of θ's template, the round from which the scheduler
/// decides it. Every later round-end snapshot is scanned at every level
/// from N_θ up to the stage.
pub fn similarity_threshold(log: &ConstructionLog, theta: &Formula) -> Result<SimilarityReport, AnalysisError> {
    let cj = Conjunct::of(theta);
    let mut rp = Replay::new(log)?;
    let cat = rp.catalog().clone();
    let tid = cat.id_of(&cj.template).ok_or_else(|| AnalysisError::FormulaNeverScheduled(theta.to_string()))?;
    let t = cat.get(tid);
    let threshold = t.size;
    let mut rep = SimilarityReport { formula: theta.clone(), threshold, verified_depth: threshold, checked: 0, counterexample: None };
    for stage in threshold..=log.header.rounds {
        super::replay_round(&mut rp, stage)?;
        let c = rp.commitment();
        for level in threshold..=stage {
            let (n, bad) = similarity_scan(c, tid, t.arity, level, stage);
            rep.checked += n;
            if bad.is_some() {
                rep.counterexample = bad;
                return Ok(rep);
            }
        }
        rep.verified_depth = stage;
    }
    Ok(rep)
}
