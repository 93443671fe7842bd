//! The construction engine: drives a density provider round by round and
//! records a replayable log.
//!
//! Round ℓ (0 ≤ ℓ ≤ R) does, in this order: split up to 2^ℓ, fix the window
//! (certified symbols with index < ℓ), decide every catalog template of size
//! ≤ ℓ on the window, witness the true ∃-templates of size ≤ ℓ − lag, omit
//! Δ_m for m < ℓ, and atomize if asked.

mod audit;
mod log;
mod replay;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::commitment::{extends_report, Commitment};
use crate::fmac::{factor_cover, Fmac};
use crate::logic::diagram::for_each_tuple;
use crate::logic::normal::slot;
use crate::logic::{Catalog, VarSym};
use crate::oracle::{ElemId, OracleAssignment};
use crate::providers::{DensityProvider, OmitType, ProviderError, StepOut};

pub use audit::{audit, AuditMode, AuditOptions, AuditReport, SimilarityCounterexample};
pub(crate) use audit::similarity_scan;
pub use log::{ConstructionLog, Goal, LogError, LogHeader, Record, Step};
pub use replay::{diagram, materialize, MaterializeError, Replay};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub rounds: usize,
    pub seed: u64,
    /// Largest template arity k.
    pub arity: usize,
    /// Henkin lag; the provider's default if unset.
    pub lag: Option<usize>,
    pub atomic: bool,
    pub omit: Vec<OmitType>,
    /// Re-validate the commitment and the extension order after every step.
    pub debug_checks: bool,
}

impl RunConfig {
    pub fn new(rounds: usize, seed: u64) -> RunConfig {
        RunConfig { rounds, seed, arity: 2, lag: None, atomic: false, omit: Vec::new(), debug_checks: false }
    }
}

/// A failed run keeps the log up to the failing step.
#[derive(Debug, Error)]
#[error("{goal} at step {step} failed: {error}")]
pub struct RunError {
    pub goal: String,
    pub step: usize,
    pub error: ProviderError,
    pub log: Box<ConstructionLog>,
}

/// Window of round ℓ: certified symbols with index < ℓ, sorted.
pub fn window_of(c: &Commitment, l: usize) -> Vec<VarSym> {
    let mut w: Vec<VarSym> = c.cert.keys().filter(|v| (v.index().unwrap_or(0) as usize) < l).cloned().collect();
    w.sort();
    w
}

/// Ordered tuples of distinct window entries of length `a`, lexicographic.
pub fn window_tuples(window: &[VarSym], a: usize) -> Vec<Vec<VarSym>> {
    let mut out = Vec::new();
    for_each_tuple(window.len(), a, |t| {
        if (1..t.len()).all(|i| !t[..i].contains(&t[i])) {
            out.push(t.iter().map(|&i| window[i].clone()).collect());
        }
    });
    out
}

/// Placeholder assignment ?w1.. ↦ elements.
pub(crate) fn slots_asg(elems: &[ElemId]) -> OracleAssignment {
    elems.iter().enumerate().map(|(j, e)| (VarSym::Bound(slot(j)), *e)).collect()
}

struct Runner<'a> {
    p: &'a mut dyn DensityProvider,
    catalog: Arc<Catalog>,
    c: Commitment,
    records: Vec<Record>,
    steps: usize,
    journaled: usize,
    debug: bool,
    memo: HashMap<(u32, Vec<u64>), bool>,
}

impl Runner<'_> {
    fn journal(&mut self) {
        let o = self.p.oracle();
        for i in self.journaled..o.len() {
            let e = ElemId(i as u32);
            self.records.push(Record::Elem(e, o.element_record(e)));
        }
        self.journaled = o.len();
    }

    fn push(&mut self, goal: Goal, out: StepOut) {
        self.journal();
        self.records.push(Record::Step(Step { n: self.steps, fmac: self.c.fmac.clone(), goal, added: out.added, binds: out.binds }));
        self.steps += 1;
    }

    fn check(&self, before: Option<&Commitment>) -> Result<(), ProviderError> {
        if !self.debug {
            return Ok(());
        }
        self.c.validate(self.p.oracle())?;
        if let Some(b) = before {
            extends_report(b, &self.c).map_err(|e| ProviderError::Failure { goal: "check".into(), reason: e.to_string() })?;
        }
        Ok(())
    }

    fn decide(&mut self, tid: u32, tuples: &[Vec<VarSym>]) -> Result<Vec<bool>, ProviderError> {
        let tpl = self.catalog.get(tid).formula.clone();
        let mut signs = Vec::with_capacity(tuples.len());
        for t in tuples {
            let elems: Vec<ElemId> = t.iter().map(|v| self.c.cert[v]).collect();
            let key = (tid, self.p.oracle().type_key(&elems));
            let v = match self.memo.get(&key) {
                Some(v) => *v,
                None => {
                    let v = self.p.oracle().eval(&tpl, &slots_asg(&elems))?;
                    self.memo.insert(key, v);
                    v
                }
            };
            self.c.conjuncts.set_template(tid, t, v);
            signs.push(v);
        }
        Ok(signs)
    }

    fn fail(self, goal: &str, error: ProviderError, header: LogHeader) -> RunError {
        RunError { goal: goal.to_string(), step: self.steps, error, log: Box::new(ConstructionLog { header, records: self.records }) }
    }
}

/// Run the construction for `config.rounds` rounds.
pub fn run(p: &mut dyn DensityProvider, config: &RunConfig) -> Result<ConstructionLog, RunError> {
    let sig = p.signature().clone();
    let header = LogHeader {
        seed: config.seed,
        provider: p.name().to_string(),
        signature: sig.clone(),
        arity: config.arity,
        lag: config.lag.unwrap_or_else(|| p.default_lag()),
        rounds: config.rounds,
        atomic: config.atomic,
        omit: config.omit.clone(),
    };
    let catalog = Arc::new(Catalog::build(&sig, config.arity, config.rounds));
    let (c, out) = match p.start(Some(catalog.clone())) {
        Ok(x) => x,
        Err(e) => {
            return Err(RunError { goal: "init".into(), step: 0, error: e, log: Box::new(ConstructionLog { header, records: Vec::new() }) })
        }
    };
    let mut r = Runner { p, catalog: catalog.clone(), c, records: vec![Record::Round(0)], steps: 0, journaled: 0, debug: config.debug_checks, memo: HashMap::new() };
    r.c.cert.extend(out.binds.iter().cloned());
    r.push(Goal::Init, out);
    macro_rules! attempt {
        ($goal:expr, $e:expr) => {
            match $e {
                Ok(v) => v,
                Err(err) => return Err(r.fail(&$goal, err.into(), header)),
            }
        };
    }
    for l in 0..=config.rounds {
        if l > 0 {
            r.records.push(Record::Round(l));
            let chain = attempt!("split", factor_cover(&r.c.fmac, &Fmac::standard(l)));
            for (_, a) in chain {
                let before = r.debug.then(|| r.c.clone());
                let out = attempt!(format!("split {a}"), r.p.split(&mut r.c, a));
                attempt!(format!("split {a}"), r.check(before.as_ref()));
                r.push(Goal::Split(a), out);
            }
        }
        let window = window_of(&r.c, l);
        r.records.push(Record::Window(l, window.clone()));
        let top = config.omit.iter().map(|d| d.arity).chain([config.arity]).max().unwrap_or(0);
        let by_arity: Vec<Vec<Vec<VarSym>>> = (0..=top).map(|a| window_tuples(&window, a)).collect();
        let tuples = |a: usize| &by_arity[a];

        for tid in catalog.up_to_size(l) {
            let ts = tuples(catalog.get(tid).arity);
            let signs = attempt!(format!("decide {tid}"), r.decide(tid, ts));
            r.push(Goal::Decide { tid, signs }, StepOut::default());
        }

        if l >= header.lag {
            for tid in catalog.up_to_size(l - header.lag) {
                let t = catalog.get(tid);
                if t.exists_body().is_none() {
                    continue;
                }
                let tpl = t.formula.clone();
                for args in tuples(t.arity) {
                    if !r.c.conjuncts.polarity(tid, args).0 {
                        continue;
                    }
                    let out = attempt!(format!("henkin {tid}"), r.p.henkin(&mut r.c, &tpl, args));
                    attempt!(format!("henkin {tid}"), r.check(None));
                    let witnesses = out.witnesses.clone();
                    r.push(Goal::Henkin { tid, args: args.clone(), witnesses }, out);
                }
            }
        }

        for (m, delta) in config.omit.iter().enumerate().filter(|(m, _)| *m < l) {
            for args in tuples(delta.arity) {
                let out = attempt!(format!("omit {m}"), r.p.omit(&mut r.c, args, delta));
                attempt!(format!("omit {m}"), r.check(None));
                let d = out.delta.unwrap_or(0);
                r.push(Goal::Omit { m, args: args.clone(), delta: d }, out);
            }
        }

        if config.atomic {
            for a in 1..=config.arity {
                for args in tuples(a) {
                    let out = attempt!("atomize", r.p.atomize(&mut r.c, args));
                    attempt!("atomize", r.check(None));
                    r.push(Goal::Atomize { args: args.clone() }, out);
                }
            }
        }
    }
    r.journal();
    Ok(ConstructionLog { header, records: r.records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commitment::inequality;
    use crate::fmac::Node;
    use crate::providers::provider_by_name;

    fn run_named(name: &str, rounds: usize, seed: u64) -> ConstructionLog {
        let mut p = provider_by_name(name, seed).unwrap();
        let mut cfg = RunConfig::new(rounds, seed);
        cfg.debug_checks = true;
        run(p.as_mut(), &cfg).unwrap()
    }

    #[test]
    fn pure_set_three_rounds() {
        let log = run_named("pure-set", 3, 1);
        assert_eq!(log.final_fmac(), Some(&Fmac::standard(3)));
        let mut rp = Replay::new(&log).unwrap();
        rp.run_to_end().unwrap();
        let c = rp.commitment();
        let leaves = Node::level(3);
        for (i, a) in leaves.iter().enumerate() {
            for b in &leaves[i + 1..] {
                let f = inequality(&VarSym::X(*a, 0), &VarSym::X(*b, 0));
                assert!(c.conjuncts.contains_formula(&f), "{f}");
            }
        }
    }

    #[test]
    fn one_round_decides_nothing_at_round_zero() {
        let log = run_named("pure-set", 1, 0);
        assert_eq!(log.final_fmac(), Some(&Fmac::standard(1)));
        assert_eq!(log.window(0), Some(&[][..]));
        let round0: Vec<_> = log.records.iter().take_while(|r| !matches!(r, Record::Round(1))).collect();
        assert!(round0.iter().all(|r| !matches!(r, Record::Step(Step { goal: Goal::Decide { .. }, .. }))));
    }

    #[test]
    fn graph_neighbour_witness_is_local() {
        let log = run_named("random-graph", 3, 2);
        let sig = log.header.signature.clone();
        let cat = Catalog::build(&sig, 2, 3);
        let f = crate::logic::parse_formula("(exists ?u1 (E ?u1 ?w1))", &sig).unwrap();
        let tid = cat.id_of(&f).unwrap();
        let mut seen = 0;
        for (t, args, wit) in log.witness_table() {
            if t == tid && args.len() == 1 && args[0].is_x() {
                seen += 1;
                assert_eq!(wit.len(), 1);
                assert_eq!(wit[0].nodes(), args[0].nodes());
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn same_seed_same_log() {
        let a = run_named("random-graph", 2, 9).to_text();
        let b = run_named("random-graph", 2, 9).to_text();
        assert_eq!(a, b);
        assert_eq!(ConstructionLog::parse(&a).unwrap().to_text(), a);
    }

    #[test]
    fn tuples_are_distinct() {
        let w: Vec<VarSym> = ["0", "1", "10"].iter().map(|a| VarSym::X(a.parse().unwrap(), 0)).collect();
        assert_eq!(window_tuples(&w, 2).len(), 6);
        assert_eq!(window_tuples(&w, 0), vec![Vec::<VarSym>::new()]);
        assert!(window_tuples(&[], 1).is_empty());
    }
}
