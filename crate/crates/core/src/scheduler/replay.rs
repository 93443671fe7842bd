//! Replaying a log: the oracle is rebuilt from its journal and every step
//! is re-applied, so audits see exactly what the text says.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use super::log::{ConstructionLog, Goal, LogError, Record};
use super::window_tuples;
use crate::commitment::{split_commitment, Commitment, ConjunctSet, XMode};
use crate::fmac::{FmacError, Node, PointPrefix};
use crate::logic::{Catalog, Conjunct, Diagram, Formula, Quotient, Term, VarSym};
use crate::oracle::{self, WitnessOracle};

pub struct Replay<'a> {
    log: &'a ConstructionLog,
    pos: usize,
    catalog: Arc<Catalog>,
    oracle: Box<dyn WitnessOracle>,
    c: Option<Commitment>,
    window: Vec<VarSym>,
    round: usize,
    steps: usize,
    tuples: HashMap<usize, Vec<Vec<VarSym>>>,
    keep_before: bool,
    before: Option<Commitment>,
}

impl<'a> Replay<'a> {
    pub fn new(log: &'a ConstructionLog) -> Result<Replay<'a>, LogError> {
        let h = &log.header;
        let oracle = oracle::by_name(&h.provider, h.seed).map_err(|e| LogError::Replay { step: 0, msg: e.to_string() })?;
        if oracle.signature() != &h.signature {
            return Err(LogError::Replay { step: 0, msg: format!("provider {} has a different signature", h.provider) });
        }
        let catalog = Arc::new(Catalog::build(&h.signature, h.arity, h.rounds));
        Ok(Replay {
            log,
            pos: 0,
            catalog,
            oracle,
            c: None,
            window: Vec::new(),
            round: 0,
            steps: 0,
            tuples: HashMap::new(),
            keep_before: false,
            before: None,
        })
    }

    /// Keep a copy of the commitment before each split.
    pub fn keep_before_split(mut self) -> Self {
        self.keep_before = true;
        self
    }

    pub fn log(&self) -> &'a ConstructionLog {
        self.log
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn oracle(&self) -> &dyn WitnessOracle {
        self.oracle.as_ref()
    }

    pub fn commitment(&self) -> &Commitment {
        self.c.as_ref().expect("no step replayed yet")
    }

    pub fn has_commitment(&self) -> bool {
        self.c.is_some()
    }

    /// The commitment before the split just replayed.
    pub fn before_split(&self) -> Option<&Commitment> {
        self.before.as_ref()
    }

    pub fn window(&self) -> &[VarSym] {
        &self.window
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Steps applied so far.
    pub fn steps_done(&self) -> usize {
        self.steps
    }

    /// Ordered distinct window tuples of arity `a`.
    pub fn tuples(&mut self, a: usize) -> &[Vec<VarSym>] {
        let w = &self.window;
        self.tuples.entry(a).or_insert_with(|| window_tuples(w, a))
    }

    /// Is the next record the start of a new round (or the end)?
    pub fn at_round_end(&self) -> bool {
        matches!(self.log.records.get(self.pos), None | Some(Record::Round(_)))
    }

    fn err(&self, msg: impl Into<String>) -> LogError {
        LogError::Replay { step: self.steps, msg: msg.into() }
    }

    /// Apply the next record; `None` at the end of the log.
    pub fn advance(&mut self) -> Result<Option<&'a Record>, LogError> {
        let Some(rec) = self.log.records.get(self.pos) else { return Ok(None) };
        self.pos += 1;
        self.before = None;
        match rec {
            Record::Round(l) => self.round = *l,
            Record::Elem(e, text) => {
                if e.0 as usize != self.oracle.len() {
                    return Err(self.err(format!("element {e} out of order")));
                }
                self.oracle.apply_record(*e, text).map_err(|x| self.err(x.to_string()))?;
            }
            Record::Window(_, w) => {
                self.window = w.clone();
                self.tuples.clear();
            }
            Record::Step(s) => {
                match &s.goal {
                    Goal::Init => {
                        if self.c.is_some() {
                            return Err(self.err("second init step"));
                        }
                        self.c = Some(Commitment {
                            fmac: s.fmac.clone(),
                            conjuncts: ConjunctSet::new(Some(self.catalog.clone())),
                            cert: Default::default(),
                            x_mode: XMode::Doubly,
                        });
                    }
                    Goal::Split(a) => {
                        let c = self.c.as_mut().ok_or_else(|| LogError::Replay { step: s.n, msg: "split before init".into() })?;
                        if self.keep_before {
                            self.before = Some(c.clone());
                        }
                        split_commitment(c, *a).map_err(|e| LogError::Replay { step: s.n, msg: e.to_string() })?;
                    }
                    Goal::Decide { tid, signs } => {
                        if *tid as usize >= self.catalog.len() {
                            return Err(self.err(format!("template {tid} is not in the catalog")));
                        }
                        let a = self.catalog.get(*tid).arity;
                        let ts = self.tuples(a).to_vec();
                        let signs = ConstructionLog::fit_signs(signs, ts.len())
                            .ok_or_else(|| self.err(format!("sign string does not match {} window tuples", ts.len())))?;
                        let c = self.c.as_mut().ok_or_else(|| LogError::Replay { step: s.n, msg: "decide before init".into() })?;
                        for (t, v) in ts.iter().zip(signs) {
                            c.conjuncts.set_template(*tid, t, v);
                        }
                    }
                    Goal::Henkin { .. } | Goal::Omit { .. } | Goal::Atomize { .. } => {}
                }
                let c = self.c.as_mut().ok_or_else(|| LogError::Replay { step: s.n, msg: "step before init".into() })?;
                for (v, e) in &s.binds {
                    c.cert.insert(v.clone(), *e);
                }
                for f in &s.added {
                    c.conjuncts.insert(Conjunct::of(f));
                }
                if c.fmac != s.fmac {
                    return Err(LogError::Replay { step: s.n, msg: format!("antichain is {} but the log says {}", c.fmac, s.fmac) });
                }
                self.steps += 1;
            }
        }
        Ok(Some(rec))
    }

    pub fn run_to_end(&mut self) -> Result<(), LogError> {
        while self.advance()?.is_some() {}
        Ok(())
    }

    /// Replay through step `n` (0-based) and the journal lines around it.
    pub fn run_through_step(&mut self, n: usize) -> Result<(), LogError> {
        while self.steps <= n {
            if self.advance()?.is_none() {
                return Err(LogError::NoSuchStage(n));
            }
        }
        Ok(())
    }
}

/// Literal conjuncts of a commitment.
pub(crate) fn literal_diagram(c: &Commitment, keep: impl Fn(&VarSym) -> bool) -> Diagram {
    let mut d = Diagram::new();
    for cj in c.conjuncts.iter_where(|t| t.is_atomic()) {
        if cj.args.iter().all(&keep) {
            d.insert_literal(&cj.to_formula());
        }
    }
    d
}

/// D at stage n: every literal conjunct, closed under the certified
/// congruence.
pub fn diagram(log: &ConstructionLog, n: usize) -> Result<Diagram, LogError> {
    let mut rp = Replay::new(log)?;
    rp.run_through_step(n)?;
    Ok(literal_diagram(rp.commitment(), |_| true).closed())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaterializeError {
    #[error("no prefixes given")]
    NoPrefixes,
    #[error("prefix {0} is too short for the antichain at this stage")]
    PrefixTooShort(PointPrefix),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("diagram: {0}")]
    Diagram(String),
}

/// Quotient structure on the certified symbols of Z_s, s the nodes the
/// prefixes project to at stage n. Undecided atoms are listed in the
/// result, never guessed.
pub fn materialize(log: &ConstructionLog, n: usize, prefixes: &[PointPrefix]) -> Result<Quotient, MaterializeError> {
    if prefixes.is_empty() {
        return Err(MaterializeError::NoPrefixes);
    }
    let mut rp = Replay::new(log)?;
    rp.run_through_step(n)?;
    let c = rp.commitment();
    let mut s: BTreeSet<Node> = BTreeSet::new();
    for p in prefixes {
        match c.fmac.project(p) {
            Ok(a) => s.insert(a),
            Err(FmacError::PrefixTooShort(_)) | Err(_) => return Err(MaterializeError::PrefixTooShort(*p)),
        };
    }
    let inside = |v: &VarSym| v.nodes().iter().all(|a| s.contains(a));
    let mut d = literal_diagram(c, inside);
    for v in c.cert.keys().filter(|v| inside(v)) {
        d.insert(Formula::eq(Term::Var(v.clone()), Term::Var(v.clone())), true);
    }
    d.closed().quotient(&log.header.full_signature()).map_err(|e| MaterializeError::Diagram(e.to_string()))
}
