//! Machine-checkable audits over a replayed log. Failures are report
//! entries, never errors; only an unreadable log is an error.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::log::{ConstructionLog, Goal, LogError, Record};
use super::replay::Replay;
use super::slots_asg;
use crate::commitment::{extends_report, inequality, support, Commitment};
use crate::fmac::{covers, Fmac, Node};
use crate::logic::diagram::for_each_tuple;
use crate::logic::normal::slot;
use crate::logic::{random_formula, Conjunct, Formula, Term, VarSym};
use crate::oracle::{ElemId, Witness, WitnessOracle};
use crate::providers::body_at;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AuditMode {
    ChainValidity,
    SplittingDistinctness,
    Decidedness,
    HenkinLocality,
    ElementaryFragment,
    Similarity,
    Omit,
    Atomic,
    XIndependence,
    YClosure,
    Exchange,
}

impl AuditMode {
    pub const ALL: [AuditMode; 11] = [
        AuditMode::ChainValidity,
        AuditMode::SplittingDistinctness,
        AuditMode::Decidedness,
        AuditMode::HenkinLocality,
        AuditMode::ElementaryFragment,
        AuditMode::Similarity,
        AuditMode::Omit,
        AuditMode::Atomic,
        AuditMode::XIndependence,
        AuditMode::YClosure,
        AuditMode::Exchange,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AuditMode::ChainValidity => "chain-validity",
            AuditMode::SplittingDistinctness => "splitting-distinctness",
            AuditMode::Decidedness => "decidedness",
            AuditMode::HenkinLocality => "henkin-locality",
            AuditMode::ElementaryFragment => "elementary-fragment",
            AuditMode::Similarity => "similarity",
            AuditMode::Omit => "omit",
            AuditMode::Atomic => "atomic",
            AuditMode::XIndependence => "x-independence",
            AuditMode::YClosure => "y-closure",
            AuditMode::Exchange => "exchange",
        }
    }

    pub fn parse(s: &str) -> Option<AuditMode> {
        AuditMode::ALL.into_iter().find(|m| m.as_str() == s)
    }

    /// Modes that make sense for a log: omit needs omit types, atomic
    /// needs --atomic, the last three need a closure oracle.
    pub fn applicable(log: &ConstructionLog, closure: bool) -> Vec<AuditMode> {
        AuditMode::ALL
            .into_iter()
            .filter(|m| match m {
                AuditMode::Omit => !log.header.omit.is_empty(),
                AuditMode::Atomic => log.header.atomic,
                AuditMode::XIndependence | AuditMode::YClosure | AuditMode::Exchange => closure,
                _ => true,
            })
            .collect()
    }
}

impl fmt::Display for AuditMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditOptions {
    /// Henkin witnesses for non-empty supports must be y-symbols.
    pub strict_y: bool,
    /// Random formulas per tuple in the atomic audit.
    pub samples: usize,
    pub sample_size: usize,
    pub exchange_triples: usize,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> AuditOptions {
        AuditOptions { strict_y: false, samples: 6, sample_size: 6, exchange_triples: 200, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub mode: AuditMode,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl AuditReport {
    fn new(mode: AuditMode) -> AuditReport {
        AuditReport { mode, checked: 0, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, msg: String) {
        // long reports stay readable; the count is kept
        if self.failures.len() < 50 {
            self.failures.push(msg);
        } else if self.failures.len() == 50 {
            self.failures.push("... further failures omitted".into());
        }
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "pass" } else { "FAIL" };
        write!(f, "audit {} {verdict} checked {}", self.mode, self.checked)?;
        for x in &self.failures {
            write!(f, "\n  {x}")?;
        }
        Ok(())
    }
}

fn args_text(v: &[VarSym]) -> String {
    v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

/// Run one audit.
pub fn audit(log: &ConstructionLog, mode: AuditMode, opts: &AuditOptions) -> Result<AuditReport, LogError> {
    let mut rep = AuditReport::new(mode);
    match mode {
        AuditMode::ChainValidity => chain_validity(log, &mut rep)?,
        AuditMode::HenkinLocality => henkin_locality(log, opts, &mut rep)?,
        AuditMode::Decidedness | AuditMode::Omit | AuditMode::Similarity | AuditMode::SplittingDistinctness => {
            let mut rp = Replay::new(log)?;
            while rp.advance()?.is_some() {
                if rp.at_round_end() && rp.has_commitment() {
                    match mode {
                        AuditMode::Decidedness => decidedness(&mut rp, &mut rep),
                        AuditMode::Omit => omit(&mut rp, &mut rep),
                        AuditMode::Similarity => similarity(&rp, &mut rep),
                        _ => distinctness(&rp, &mut rep),
                    }
                }
            }
        }
        AuditMode::ElementaryFragment | AuditMode::Atomic | AuditMode::XIndependence | AuditMode::YClosure | AuditMode::Exchange => {
            let mut rp = Replay::new(log)?;
            rp.run_to_end()?;
            if !rp.has_commitment() {
                rep.fail("empty log".into());
                return Ok(rep);
            }
            match mode {
                AuditMode::ElementaryFragment => elementary_fragment(&mut rp, &mut rep),
                AuditMode::Atomic => atomic(&mut rp, opts, &mut rep),
                AuditMode::XIndependence => x_independence(&rp, &mut rep),
                AuditMode::YClosure => y_closure(&rp, &mut rep),
                _ => exchange(&rp, opts, &mut rep),
            }
        }
    }
    Ok(rep)
}

fn eval_ok(o: &dyn WitnessOracle, c: &Commitment, f: &Formula) -> Result<bool, String> {
    o.eval(f, &c.cert).map_err(|e| e.to_string())
}

fn chain_validity(log: &ConstructionLog, rep: &mut AuditReport) -> Result<(), LogError> {
    let mut rp = Replay::new(log)?.keep_before_split();
    let mut prev: Option<Fmac> = None;
    let mut memo: HashMap<(u32, Vec<u64>), bool> = HashMap::new();
    while let Some(rec) = rp.advance()? {
        let Record::Step(s) = rec else { continue };
        rep.checked += 1;
        let c = rp.commitment();
        if let Some(p) = &prev {
            if !covers(p, &c.fmac) {
                rep.fail(format!("step {}: {} does not cover {}", s.n, c.fmac, p));
            }
        }
        prev = Some(c.fmac.clone());
        if let Some(b) = rp.before_split() {
            if let Err(e) = extends_report(b, c) {
                rep.fail(format!("step {}: split does not extend: {e}", s.n));
            }
        }
        for (v, e) in &s.binds {
            if e.0 as usize >= rp.oracle().len() {
                rep.fail(format!("step {}: {v} bound to unknown {e}", s.n));
            }
        }
        for f in &s.added {
            match eval_ok(rp.oracle(), c, f) {
                Ok(true) => {}
                Ok(false) => rep.fail(format!("step {}: certificate fails {f}", s.n)),
                Err(e) => rep.fail(format!("step {}: {f}: {e}", s.n)),
            }
        }
        if let Goal::Decide { tid, .. } = &s.goal {
            let tpl = rp.catalog().get(*tid).formula.clone();
            let a = rp.catalog().get(*tid).arity;
            let tuples = rp.tuples(a).to_vec();
            let c = rp.commitment();
            for t in &tuples {
                let elems: Vec<ElemId> = t.iter().map(|v| c.cert[v]).collect();
                let key = (*tid, rp.oracle().type_key(&elems));
                let truth = match memo.get(&key) {
                    Some(v) => *v,
                    None => {
                        let v = rp.oracle().eval(&tpl, &slots_asg(&elems)).unwrap_or(false);
                        memo.insert(key, v);
                        v
                    }
                };
                let (p, n) = c.conjuncts.polarity(*tid, t);
                if (truth && !p) || (!truth && !n) {
                    rep.fail(format!("step {}: {} on ({}) recorded with the wrong sign", s.n, tpl, args_text(t)));
                }
            }
        }
        if matches!(s.goal, Goal::Split(_) | Goal::Init) {
            if let Err(e) = rp.commitment().validate_shape() {
                rep.fail(format!("step {}: {e}", s.n));
            }
        }
    }
    if rp.has_commitment() {
        let c = rp.commitment();
        if let Err(e) = c.validate_shape() {
            rep.fail(format!("final commitment: {e}"));
        }
        for x in c.conjuncts.conflicts() {
            rep.fail(format!("final commitment contains {x} and its negation"));
        }
    }
    Ok(())
}

fn distinctness(rp: &Replay, rep: &mut AuditReport) {
    let c = rp.commitment();
    let l = rp.round();
    if c.fmac != Fmac::standard(l) {
        rep.fail(format!("round {l} ends at {} instead of 2^{l}", c.fmac));
    }
    let nodes = c.fmac.nodes();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            rep.checked += 1;
            let (u, v) = (c.x_mode.base(nodes[i]), c.x_mode.base(nodes[j]));
            let present = c.conjuncts.contains_formula(&inequality(&u, &v)) || c.conjuncts.contains_formula(&inequality(&v, &u));
            if !present {
                rep.fail(format!("round {l}: {} missing", inequality(&u, &v)));
            }
            if c.cert.get(&u).is_none() || c.cert.get(&u) == c.cert.get(&v) {
                rep.fail(format!("round {l}: {u} and {v} are not certified distinct"));
            }
        }
    }
}

fn decidedness(rp: &mut Replay, rep: &mut AuditReport) {
    let l = rp.round();
    let cat = rp.catalog().clone();
    for tid in cat.up_to_size(l) {
        let tuples = rp.tuples(cat.get(tid).arity).to_vec();
        let c = rp.commitment();
        for t in &tuples {
            rep.checked += 1;
            match c.conjuncts.polarity(tid, t) {
                (true, false) | (false, true) => {}
                (false, false) => rep.fail(format!("round {l}: {} undecided on ({})", cat.get(tid).text, args_text(t))),
                (true, true) => rep.fail(format!("round {l}: {} decided both ways on ({})", cat.get(tid).text, args_text(t))),
            }
        }
    }
}

fn henkin_locality(log: &ConstructionLog, opts: &AuditOptions, rep: &mut AuditReport) -> Result<(), LogError> {
    let mut rp = Replay::new(log)?;
    while let Some(rec) = rp.advance()? {
        let Record::Step(s) = rec else { continue };
        let Goal::Henkin { tid, args, witnesses } = &s.goal else { continue };
        rep.checked += 1;
        let cat = rp.catalog().clone();
        if *tid as usize >= cat.len() {
            rep.fail(format!("step {}: template {tid} is not in the catalog", s.n));
            continue;
        }
        let t = cat.get(*tid);
        let at = format!("step {}: θ = {} on ({})", s.n, t.text, args_text(args));
        let Some(body) = t.exists_body() else {
            rep.fail(format!("{at}: not an existential template"));
            continue;
        };
        let c = rp.commitment();
        if witnesses.is_empty() {
            if !c.conjuncts.polarity(*tid, args).1 {
                rep.fail(format!("{at}: no witness and no ¬∃ conjunct"));
            }
            continue;
        }
        let support = match support(args, &c.fmac) {
            Ok(s) => s,
            Err(e) => {
                rep.fail(format!("{at}: {e}"));
                continue;
            }
        };
        let mut nodes_hit = BTreeSet::new();
        for w in witnesses {
            let local = if support.is_empty() {
                w.nodes().len() == 1 && c.fmac.contains(&w.nodes()[0])
            } else {
                w.nodes().iter().all(|a| support.contains(a))
            };
            if !local {
                rep.fail(format!("{at}: witness {w} lies outside Z_t"));
            }
            if opts.strict_y && !support.is_empty() && !w.is_y() {
                rep.fail(format!("{at}: witness {w} is not a y-symbol"));
            }
            if !c.cert.contains_key(w) {
                rep.fail(format!("{at}: witness {w} is not certified"));
            }
            let f = body_at(body, args, w);
            if !c.conjuncts.contains_formula(&f) {
                rep.fail(format!("{at}: witness conjunct {f} missing"));
            }
            nodes_hit.extend(w.nodes().iter().copied());
        }
        if support.is_empty() && c.fmac.nodes().iter().any(|a| !nodes_hit.contains(a)) {
            rep.fail(format!("{at}: sentence lacks a witness at some node of {}", c.fmac));
        }
    }
    Ok(())
}

fn elementary_fragment(rp: &mut Replay, rep: &mut AuditReport) {
    let h = &rp.log().header;
    let (rounds, lag) = (h.rounds, h.lag);
    if rounds < lag {
        return;
    }
    let cat = rp.catalog().clone();
    for tid in cat.up_to_size(rounds - lag) {
        let t = cat.get(tid);
        let Some(body) = t.exists_body() else { continue };
        let tuples = rp.tuples(t.arity).to_vec();
        let c = rp.commitment();
        let mut syms: Vec<&VarSym> = c.cert.keys().collect();
        syms.sort();
        for args in &tuples {
            if !c.conjuncts.polarity(tid, args).0 {
                continue;
            }
            rep.checked += 1;
            let sup = support(args, &c.fmac).unwrap_or_default();
            let targets: Vec<BTreeSet<Node>> =
                if sup.is_empty() { c.fmac.nodes().iter().map(|a| [*a].into_iter().collect()).collect() } else { vec![sup] };
            for tset in targets {
                let found = syms
                    .iter()
                    .filter(|s| s.nodes().iter().all(|a| tset.contains(a)))
                    .any(|s| c.conjuncts.contains_formula(&body_at(body, args, s)));
                if !found {
                    let ts: Vec<String> = tset.iter().map(|a| a.to_string()).collect();
                    rep.fail(format!("{} true on ({}) without a witness in Z_{{{}}}", t.text, args_text(args), ts.join(",")));
                }
            }
        }
    }
}

/// Decided value of a template on a tuple, if exactly one polarity is
/// present.
fn value(c: &Commitment, tid: u32, args: &[VarSym]) -> Option<bool> {
    match c.conjuncts.polarity(tid, args) {
        (true, false) => Some(true),
        (false, true) => Some(false),
        _ => None,
    }
}

/// A pair of node tuples, similar mod ℓ, with different decided values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityCounterexample {
    pub stage: usize,
    pub level: usize,
    pub first: Vec<Node>,
    pub second: Vec<Node>,
    pub values: (Option<bool>, Option<bool>),
}

/// Check template `tid` (threshold `level`) on the base x-symbols of the
/// current stage: tuples of distinct nodes whose restrictions to `level`
/// agree and are distinct must get the same decided value.
pub(crate) fn similarity_scan(c: &Commitment, tid: u32, arity: usize, level: usize, stage: usize) -> (usize, Option<SimilarityCounterexample>) {
    let nodes = c.fmac.nodes();
    let mut first: HashMap<Vec<Node>, (Vec<Node>, Option<bool>)> = HashMap::new();
    let mut checked = 0;
    let mut bad = None;
    for_each_tuple(nodes.len(), arity, |ix| {
        if bad.is_some() || (1..ix.len()).any(|i| ix[..i].contains(&ix[i])) {
            return;
        }
        let tuple: Vec<Node> = ix.iter().map(|&i| nodes[i]).collect();
        let key: Vec<Node> = tuple.iter().map(|a| a.restrict(level.min(a.len()))).collect();
        if (1..key.len()).any(|i| key[..i].contains(&key[i])) {
            return;
        }
        checked += 1;
        let args: Vec<VarSym> = tuple.iter().map(|a| c.x_mode.base(*a)).collect();
        let v = value(c, tid, &args);
        match first.get(&key) {
            None => {
                if v.is_none() {
                    bad = Some(SimilarityCounterexample { stage, level, first: tuple.clone(), second: tuple.clone(), values: (v, v) });
                }
                first.insert(key, (tuple, v));
            }
            Some((t0, v0)) => {
                if *v0 != v {
                    bad = Some(SimilarityCounterexample { stage, level, first: t0.clone(), second: tuple, values: (*v0, v) });
                }
            }
        }
    });
    (checked, bad)
}

fn similarity(rp: &Replay, rep: &mut AuditReport) {
    let l = rp.round();
    let c = rp.commitment();
    let cat = rp.catalog();
    for tid in cat.up_to_size(l) {
        let t = cat.get(tid);
        let (n, bad) = similarity_scan(c, tid, t.arity, t.size, l);
        rep.checked += n;
        if let Some(b) = bad {
            rep.fail(format!(
                "stage 2^{l}: {} differs on similar (mod {}) tuples ({}) and ({}): {:?} vs {:?}",
                t.text,
                b.level,
                b.first.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","),
                b.second.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","),
                b.values.0,
                b.values.1
            ));
        }
    }
}

fn omit(rp: &mut Replay, rep: &mut AuditReport) {
    let l = rp.round();
    let types = rp.log().header.omit.clone();
    for (m, delta) in types.iter().enumerate().filter(|(m, _)| *m < l) {
        let tuples = rp.tuples(delta.arity).to_vec();
        let c = rp.commitment();
        for z in &tuples {
            rep.checked += 1;
            let refuted = (0..delta.bound).filter_map(|j| delta.delta(j)).any(|d| c.conjuncts.contains(&Conjunct::instantiate(&d, z, false)));
            if !refuted {
                rep.fail(format!("round {l}: Δ_{m} realised on ({}): no ¬δ conjunct", args_text(z)));
            }
        }
    }
}

/// Realise a conjunction of literals over ?w1..?wk in `o`, slot by slot.
fn realize(o: &mut dyn WitnessOracle, lits: &[Formula], k: usize) -> Result<Vec<ElemId>, String> {
    let mut elems: Vec<ElemId> = Vec::new();
    for j in 0..k {
        let allowed: BTreeSet<_> = (0..=j).map(slot).collect();
        let cur = slot(j);
        let part: Vec<Formula> = lits
            .iter()
            .filter(|f| {
                let ph = f.free_placeholders();
                ph.contains(&cur) && ph.is_subset(&allowed)
            })
            .cloned()
            .collect();
        let phi = Formula::conj(part).unwrap_or_else(|| Formula::eq(Term::Var(VarSym::Bound(cur.clone())), Term::Var(VarSym::Bound(cur.clone()))));
        let asg = slots_asg(&elems);
        match o.witness(&phi, &cur, &asg, &BTreeSet::new()).map_err(|e| e.to_string())? {
            Witness::Found(e) => elems.push(e),
            Witness::Forced(r) => return Err(r),
        }
    }
    Ok(elems)
}

fn atomic(rp: &mut Replay, opts: &AuditOptions, rep: &mut AuditReport) {
    let h = &rp.log().header;
    let (k, seed) = (h.arity, h.seed);
    let sig = h.signature.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ opts.seed.rotate_left(17) ^ 0xa70d);
    let mut inst1 = rp.oracle().fresh_instance(seed.wrapping_add(1));
    let mut inst2 = rp.oracle().fresh_instance(seed.wrapping_add(2));
    for a in 1..=k {
        let tuples = rp.tuples(a).to_vec();
        for z in &tuples {
            rep.checked += 1;
            let c = rp.commitment();
            let elems: Vec<ElemId> = z.iter().map(|v| c.cert[v]).collect();
            let chi = rp.oracle().atomic_diagram(&elems);
            let lits: Vec<Formula> = chi.conjuncts().into_iter().cloned().collect();
            if let Some(missing) = lits.iter().find(|f| !c.conjuncts.contains(&Conjunct::instantiate(f, z, true))) {
                rep.fail(format!("({}): complete formula conjunct {missing} missing", args_text(z)));
                continue;
            }
            let d1 = realize(inst1.as_mut(), &lits, a);
            let d2 = realize(inst2.as_mut(), &lits, a);
            let (d1, d2) = match (d1, d2) {
                (Ok(x), Ok(y)) => (x, y),
                (Err(e), _) | (_, Err(e)) => {
                    rep.fail(format!("({}): atomic type not realisable: {e}", args_text(z)));
                    continue;
                }
            };
            for _ in 0..opts.samples {
                let phi = random_formula(&sig, a, opts.sample_size, &mut rng);
                let v0 = rp.oracle().eval(&phi, &slots_asg(&elems));
                let v1 = inst1.eval(&phi, &slots_asg(&d1));
                let v2 = inst2.eval(&phi, &slots_asg(&d2));
                match (v0, v1, v2) {
                    (Ok(x), Ok(y), Ok(w)) if x == y && y == w => {}
                    (Ok(x), Ok(y), Ok(w)) => {
                        rep.fail(format!("({}): the atomic diagram does not decide {phi} ({x}/{y}/{w})", args_text(z)))
                    }
                    _ => {} // formulas beyond the oracle's search budget are skipped
                }
            }
        }
    }
}

fn x_independence(rp: &Replay, rep: &mut AuditReport) {
    let Some(cl) = rp.oracle().as_closure() else {
        rep.fail(format!("{} has no closure operator", rp.oracle().name()));
        return;
    };
    let c = rp.commitment();
    let mut xs: Vec<(&VarSym, ElemId)> = c.cert.iter().filter(|(v, _)| v.is_x()).map(|(v, e)| (v, *e)).collect();
    xs.sort();
    for (i, (v, e)) in xs.iter().enumerate() {
        rep.checked += 1;
        let rest: Vec<ElemId> = xs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, (_, e))| *e).collect();
        if let (true, iso) = cl.cl_query(*e, &rest) {
            let how = iso.map(|(f, _)| f.to_string()).unwrap_or_default();
            rep.fail(format!("{v} lies in the closure of the other x-symbols {how}"));
        }
    }
}

/// Summands of a flat sum term of variables; `0` is the empty sum.
fn sum_vars(t: &Term) -> Option<Vec<&VarSym>> {
    match t {
        Term::Var(v) => Some(vec![v]),
        Term::App(g, args) if &**g == "0" && args.is_empty() => Some(Vec::new()),
        Term::App(g, args) if &**g == "+" => {
            let mut out = Vec::new();
            for a in args {
                out.extend(sum_vars(a)?);
            }
            Some(out)
        }
        _ => None,
    }
}

fn y_closure(rp: &Replay, rep: &mut AuditReport) {
    let c = rp.commitment();
    let mut isolated: HashMap<VarSym, Vec<Formula>> = HashMap::new();
    for cj in c.conjuncts.iter_where(|t| matches!(t, Formula::Eq(..))) {
        if !cj.positive || !cj.args.iter().any(VarSym::is_y) {
            continue;
        }
        let f = cj.to_formula();
        let Formula::Eq(l, r) = &f else { continue };
        for (lhs, rhs) in [(l, r), (r, l)] {
            let Term::Var(y) = lhs else { continue };
            if !y.is_y() {
                continue;
            }
            let Some(xs) = sum_vars(rhs) else { continue };
            let t: BTreeSet<&Node> = y.nodes().iter().collect();
            if xs.iter().all(|x| x.is_x() && x.nodes().iter().all(|a| t.contains(a))) {
                isolated.entry(y.clone()).or_default().push(f.clone());
            }
        }
    }
    let mut ys: Vec<&VarSym> = c.cert.keys().filter(|v| v.is_y()).collect();
    ys.sort();
    for y in ys {
        rep.checked += 1;
        match isolated.get(y) {
            None => rep.fail(format!("{y} has no isolating conjunct over x̄_t")),
            Some(fs) => {
                if !fs.iter().any(|f| eval_ok(rp.oracle(), c, f) == Ok(true)) {
                    rep.fail(format!("{y}: isolating conjunct {} fails in the certificate", fs[0]));
                }
            }
        }
    }
}

fn exchange(rp: &Replay, opts: &AuditOptions, rep: &mut AuditReport) {
    let Some(cl) = rp.oracle().as_closure() else {
        rep.fail(format!("{} has no closure operator", rp.oracle().name()));
        return;
    };
    let c = rp.commitment();
    let mut elems: Vec<ElemId> = c.cert.values().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if elems.len() < 2 {
        elems = (0..rp.oracle().len() as u32).map(ElemId).collect();
    }
    if elems.len() < 2 {
        rep.fail("fewer than two elements to sample".into());
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rp.log().header.seed ^ opts.seed ^ 0xe8c4);
    let mut premise = 0;
    for _ in 0..opts.exchange_triples {
        rep.checked += 1;
        let a = elems[rng.gen_range(0..elems.len())];
        let c_ = elems[rng.gen_range(0..elems.len())];
        let size = rng.gen_range(0..=4.min(elems.len()));
        let mut b: Vec<ElemId> = (0..size).map(|_| elems[rng.gen_range(0..elems.len())]).collect();
        b.sort();
        b.dedup();
        let mut bc = b.clone();
        bc.push(c_);
        let mut ba = b.clone();
        ba.push(a);
        if cl.cl_query(a, &bc).0 && !cl.cl_query(a, &b).0 {
            premise += 1;
            if !cl.cl_query(c_, &ba).0 {
                rep.fail(format!("exchange fails: {a} ∈ cl({b:?} {c_}) \\ cl({b:?}) but {c_} ∉ cl({b:?} {a})"));
            }
        }
    }
    if premise == 0 {
        rep.fail("no sampled triple met the exchange premise".into());
    }
}
