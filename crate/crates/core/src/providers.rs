//! Density providers: the five callbacks that extend a commitment toward a
//! goal. Two theory classes are covered, dcl-trivial Fraïssé limits and the
//! F₂ vector space as a sufficient pregeometry.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::commitment::{a_block, inequality, split_commitment, support, Commitment, CommitmentError, XMode};
use crate::fmac::{FmacError, Node};
use crate::logic::normal::{slot, slot_index};
use crate::logic::{lift_symbol, Catalog, Conjunct, Formula, Signature, Term, VarSym};
use crate::oracle::{self, ElemId, OracleError, Witness, WitnessOracle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("{goal} failed: {reason}")]
    Failure { goal: String, reason: String },
    #[error("every δ among the first {0} is true of the certificate")]
    OmitSearchExhausted(usize),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Commitment(#[from] CommitmentError),
    #[error(transparent)]
    Fmac(#[from] FmacError),
    #[error("unknown provider {0:?}")]
    Unknown(String),
}

fn failure(goal: &str, reason: impl Into<String>) -> ProviderError {
    ProviderError::Failure { goal: goal.to_string(), reason: reason.into() }
}

/// What a callback changed: new conjuncts (instantiated) and new bindings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepOut {
    pub added: Vec<Formula>,
    pub binds: Vec<(VarSym, ElemId)>,
    /// Henkin: the chosen witnesses (empty for ¬∃).
    pub witnesses: Vec<VarSym>,
    /// Omit: index of the refuted δ.
    pub delta: Option<usize>,
}

impl StepOut {
    fn add(&mut self, c: &mut Commitment, f: Formula) {
        if c.conjuncts.insert(Conjunct::of(&f)) {
            self.added.push(f);
        }
    }

    fn bind(&mut self, c: &mut Commitment, v: VarSym, e: ElemId) {
        c.cert.insert(v.clone(), e);
        self.binds.push((v, e));
    }
}

/// A partial type Δ(w̄) to omit, as a stream δ_0, δ_1, ... over ?w1..?wk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmitType {
    pub arity: usize,
    pub source: OmitSource,
    /// How many δ are tried per tuple.
    pub bound: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OmitSource {
    List(Vec<Formula>),
    /// δ_i = (P<i> ?w1) for a predicate prefix.
    UnaryFamily(String),
}

impl OmitType {
    pub fn list(deltas: Vec<Formula>) -> OmitType {
        let arity = deltas.iter().map(|d| d.free_placeholders().len()).max().unwrap_or(0);
        OmitType { arity, bound: deltas.len(), source: OmitSource::List(deltas) }
    }

    pub fn unary_family(prefix: &str, bound: usize) -> OmitType {
        OmitType { arity: 1, source: OmitSource::UnaryFamily(prefix.to_string()), bound }
    }

    pub fn delta(&self, j: usize) -> Option<Formula> {
        if j >= self.bound {
            return None;
        }
        match &self.source {
            OmitSource::List(v) => v.get(j).cloned(),
            OmitSource::UnaryFamily(p) => {
                Some(Formula::rel(&format!("{p}{j}"), vec![Term::Var(VarSym::Bound(slot(0)))]))
            }
        }
    }

    /// Relations the stream mentions beyond a base signature.
    pub fn extend_signature(&self, sig: &Signature) -> Signature {
        let mut s = sig.clone();
        if let OmitSource::UnaryFamily(p) = &self.source {
            for j in 0..self.bound {
                let _ = s.add_rel(&format!("{p}{j}"), 1);
            }
        }
        s
    }
}

/// Instantiate a template's slots by `args` and its outer binder ?u1 by `u`.
pub fn body_at(body: &Formula, args: &[VarSym], u: &VarSym) -> Formula {
    body.substitute(&mut |v| match v {
        VarSym::Bound(n) if &**n == "u1" => Some(Term::Var(u.clone())),
        VarSym::Bound(n) => slot_index(n).and_then(|j| args.get(j)).map(|s| Term::Var(s.clone())),
        _ => None,
    })
}

fn instantiate(template: &Formula, args: &[VarSym]) -> Formula {
    Conjunct::instantiate(template, args, true).to_formula()
}

/// Next free index i for x_{a,i}.
fn next_x(c: &Commitment, a: Node) -> u32 {
    c.cert.keys().filter_map(|v| match v {
        VarSym::X(b, i) if *b == a => Some(i + 1),
        _ => None,
    }).max().unwrap_or(0)
}

/// Next free index i for y_{t,i}.
fn next_y(c: &Commitment, t: &[Node]) -> u32 {
    c.cert.keys().filter_map(|v| match v {
        VarSym::Y(s, i) if &**s == t => Some(i + 1),
        _ => None,
    }).max().unwrap_or(0)
}

/// Symbols of Z_t bound in the certificate, sorted.
fn symbols_in(c: &Commitment, t: &BTreeSet<Node>) -> Vec<VarSym> {
    let mut v: Vec<VarSym> = c.cert.keys().filter(|s| s.nodes().iter().all(|n| t.contains(n))).cloned().collect();
    v.sort();
    v
}

/// Where Henkin witnesses for a tuple may live: Z_{t(z̄)}, or each Z_{a}
/// when the tuple is empty.
fn witness_targets(c: &Commitment, args: &[VarSym]) -> Result<Vec<BTreeSet<Node>>, ProviderError> {
    let t = support(args, &c.fmac)?;
    Ok(if t.is_empty() { c.fmac.nodes().iter().map(|a| [*a].into_iter().collect()).collect() } else { vec![t] })
}

pub trait DensityProvider {
    fn name(&self) -> &str;
    fn oracle(&self) -> &dyn WitnessOracle;
    fn oracle_mut(&mut self) -> &mut dyn WitnessOracle;
    fn x_mode(&self) -> XMode {
        XMode::Doubly
    }
    /// Henkin templates lag this many sizes behind the decided ones.
    fn default_lag(&self) -> usize;
    fn signature(&self) -> &Signature {
        self.oracle().signature()
    }

    /// The root commitment ({ε}, ⊤).
    fn start(&mut self, catalog: Option<Arc<Catalog>>) -> Result<(Commitment, StepOut), ProviderError>;

    /// Conjoin ψ or ¬ψ, whichever the certificate satisfies.
    fn complete(&mut self, c: &mut Commitment, psi: &Formula) -> Result<StepOut, ProviderError> {
        let v = self.oracle().eval(psi, &c.cert)?;
        let mut out = StepOut::default();
        out.add(c, if v { psi.clone() } else { Formula::not(psi.clone()) });
        Ok(out)
    }

    /// `exists_tpl` is a canonical (exists ?u1 θ) template over ?w1..; the
    /// result conjoins ¬∃uθ(z̄) or θ(z*, z̄) with z* ∈ Z_{t(z̄)}.
    fn henkin(&mut self, c: &mut Commitment, exists_tpl: &Formula, args: &[VarSym]) -> Result<StepOut, ProviderError>;

    /// Split node `a`, certifying a fresh copy of its block.
    fn split(&mut self, c: &mut Commitment, a: Node) -> Result<StepOut, ProviderError>;

    /// Conjoin ¬δ(z̄) for the first δ of the stream the certificate refutes.
    fn omit(&mut self, c: &mut Commitment, z: &[VarSym], delta: &OmitType) -> Result<StepOut, ProviderError> {
        let mut out = StepOut::default();
        for j in 0..delta.bound {
            let Some(d) = delta.delta(j) else { break };
            let neg = Conjunct::instantiate(&d, z, false);
            if c.conjuncts.contains(&neg) {
                out.delta = Some(j);
                return Ok(out);
            }
            if !self.oracle().eval(&instantiate(&d, z), &c.cert)? {
                out.delta = Some(j);
                out.add(c, neg.to_formula());
                return Ok(out);
            }
        }
        Err(ProviderError::OmitSearchExhausted(delta.bound))
    }

    /// Conjoin the full atomic diagram of z̄'s certificate elements.
    fn atomize(&mut self, c: &mut Commitment, z: &[VarSym]) -> Result<StepOut, ProviderError> {
        let elems = z.iter().map(|v| c.cert.get(v).copied().ok_or_else(|| CommitmentError::Unbound(v.clone()))).collect::<Result<Vec<_>, _>>()?;
        let chi = self.oracle().atomic_diagram(&elems);
        let mut out = StepOut::default();
        for lit in chi.conjuncts() {
            out.add(c, instantiate(lit, z));
        }
        Ok(out)
    }
}

/// Case two of the Henkin analysis: an existing symbol of Z_t.
fn existing_witness(
    oracle: &dyn WitnessOracle,
    c: &Commitment,
    body: &Formula,
    args: &[VarSym],
    t: &BTreeSet<Node>,
) -> Result<Option<VarSym>, ProviderError> {
    for s in symbols_in(c, t) {
        if oracle.eval(&body_at(body, args, &s), &c.cert)? {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

fn exists_parts(exists_tpl: &Formula) -> Result<&Formula, ProviderError> {
    match exists_tpl {
        Formula::Exists(u, b) if &**u == "u1" => Ok(b),
        _ => Err(failure("henkin", format!("{exists_tpl} is not an (exists ?u1 ...) template"))),
    }
}

/// Henkin step shared by both providers up to the fresh-witness case.
fn henkin_common(
    p: &mut dyn DensityProvider,
    c: &mut Commitment,
    exists_tpl: &Formula,
    args: &[VarSym],
    fresh: &mut dyn FnMut(&mut dyn WitnessOracle, &mut Commitment, &Formula, &BTreeSet<Node>, &mut StepOut) -> Result<VarSym, ProviderError>,
) -> Result<StepOut, ProviderError> {
    let body = exists_parts(exists_tpl)?;
    let mut out = StepOut::default();
    let ex = instantiate(exists_tpl, args);
    if !p.oracle().eval(&ex, &c.cert)? {
        out.add(c, Formula::not(ex));
        return Ok(out);
    }
    for t in witness_targets(c, args)? {
        let s = match existing_witness(p.oracle(), c, body, args, &t)? {
            Some(s) => s,
            None => fresh(p.oracle_mut(), c, body, &t, &mut out)?,
        };
        out.add(c, body_at(body, args, &s));
        out.witnesses.push(s);
    }
    Ok(out)
}

/// Providers for structures with trivial definable closure: every symbol
/// gets its own element, pairwise distinct.
pub struct DclTrivialProvider {
    oracle: Box<dyn WitnessOracle>,
}

impl DclTrivialProvider {
    pub fn new(oracle: Box<dyn WitnessOracle>) -> DclTrivialProvider {
        DclTrivialProvider { oracle }
    }
}

impl DensityProvider for DclTrivialProvider {
    fn name(&self) -> &str {
        self.oracle.name()
    }

    fn oracle(&self) -> &dyn WitnessOracle {
        self.oracle.as_ref()
    }

    fn oracle_mut(&mut self) -> &mut dyn WitnessOracle {
        self.oracle.as_mut()
    }

    fn default_lag(&self) -> usize {
        1
    }

    fn start(&mut self, catalog: Option<Arc<Catalog>>) -> Result<(Commitment, StepOut), ProviderError> {
        let any = Formula::eq(Term::Var(VarSym::var("h")), Term::Var(VarSym::var("h")));
        let e = match self.oracle.witness(&any, "h", &Default::default(), &BTreeSet::new())? {
            Witness::Found(e) => e,
            Witness::Forced(r) => return Err(failure("init", r)),
        };
        let mut c = Commitment::root(self.x_mode(), e, catalog);
        let v = self.x_mode().base(Node::ROOT);
        Ok((c.clone(), { let mut o = StepOut::default(); o.bind(&mut c, v, e); o }))
    }

    fn henkin(&mut self, c: &mut Commitment, exists_tpl: &Formula, args: &[VarSym]) -> Result<StepOut, ProviderError> {
        let mut fresh = |o: &mut dyn WitnessOracle, c: &mut Commitment, body: &Formula, t: &BTreeSet<Node>, out: &mut StepOut| {
            let a = *t.iter().next().expect("non-empty support");
            let h = VarSym::var("h");
            let avoid: BTreeSet<ElemId> = c.cert.values().copied().collect();
            let e = match o.witness(&body_at(body, args, &h), "h", &c.cert, &avoid)? {
                Witness::Found(e) => e,
                Witness::Forced(r) => return Err(failure("henkin", format!("no fresh witness: {r}"))),
            };
            let x = VarSym::X(a, next_x(c, a));
            let mut others: Vec<VarSym> = c.cert.keys().cloned().collect();
            others.sort();
            out.bind(c, x.clone(), e);
            for s in others {
                out.add(c, inequality(&s, &x));
            }
            Ok(x)
        };
        henkin_common(self, c, exists_tpl, args, &mut fresh)
    }

    fn split(&mut self, c: &mut Commitment, a: Node) -> Result<StepOut, ProviderError> {
        let block = a_block(c, &a);
        let mut rest: Vec<VarSym> = c.cert.keys().filter(|s| !block.contains(s)).cloned().collect();
        rest.sort();
        let block_elems: Vec<ElemId> = block.iter().map(|s| c.cert[s]).collect();
        let rest_elems: Vec<ElemId> = rest.iter().map(|s| c.cert[s]).collect();
        let copies = self.oracle.copy_tuple(&block_elems, &rest_elems).map_err(|e| failure("split", e.to_string()))?;
        let (h0, h1) = split_commitment(c, a)?;
        let mut out = StepOut::default();
        for (s, e) in block.iter().zip(copies) {
            out.bind(c, lift_symbol(s, &h1).expect("block symbol"), e);
        }
        for s in &block {
            for s2 in &block {
                let (l, r) = (lift_symbol(s, &h0).expect("block"), lift_symbol(s2, &h1).expect("block"));
                out.add(c, inequality(&l, &r));
            }
        }
        Ok(out)
    }
}

/// Provider for the vector space as a sufficient pregeometry: x-symbols
/// are independent, y_{t,i} lie in the closure of x̄_t with an isolating
/// linear equation among the conjuncts.
pub struct PregeometryProvider {
    oracle: Box<dyn WitnessOracle>,
}

impl PregeometryProvider {
    pub fn new(oracle: Box<dyn WitnessOracle>) -> Result<PregeometryProvider, ProviderError> {
        if oracle.as_closure().is_none() {
            return Err(ProviderError::Unknown(format!("{} has no closure operator", oracle.name())));
        }
        Ok(PregeometryProvider { oracle })
    }

    fn cl(&mut self) -> &mut dyn oracle::ClosureOracle {
        self.oracle.as_closure_mut().expect("checked at construction")
    }
}

/// x-symbols indexed by nodes of t, sorted.
pub fn x_basis(c: &Commitment, t: &BTreeSet<Node>) -> Vec<VarSym> {
    symbols_in(c, t).into_iter().filter(VarSym::is_x).collect()
}

/// The isolating equation y = Σ x̄ (or y = 0).
pub fn isolating(y: &VarSym, xs: &[&VarSym]) -> Formula {
    let terms = xs.iter().map(|x| Term::Var((*x).clone())).collect();
    Formula::eq(Term::Var(y.clone()), oracle::sum_term(terms))
}

impl DensityProvider for PregeometryProvider {
    fn name(&self) -> &str {
        self.oracle.name()
    }

    fn oracle(&self) -> &dyn WitnessOracle {
        self.oracle.as_ref()
    }

    fn oracle_mut(&mut self) -> &mut dyn WitnessOracle {
        self.oracle.as_mut()
    }

    fn default_lag(&self) -> usize {
        0
    }

    fn start(&mut self, catalog: Option<Arc<Catalog>>) -> Result<(Commitment, StepOut), ProviderError> {
        let e = self.cl().fresh_independent();
        let mut c = Commitment::root(self.x_mode(), e, catalog);
        let v = self.x_mode().base(Node::ROOT);
        Ok((c.clone(), { let mut o = StepOut::default(); o.bind(&mut c, v, e); o }))
    }

    fn henkin(&mut self, c: &mut Commitment, exists_tpl: &Formula, args: &[VarSym]) -> Result<StepOut, ProviderError> {
        let mut fresh = |o: &mut dyn WitnessOracle, c: &mut Commitment, body: &Formula, t: &BTreeSet<Node>, out: &mut StepOut| {
            let cl = o.as_closure_mut().expect("closure oracle");
            let h = VarSym::var("h");
            let phi = body_at(body, args, &h);
            let xs = x_basis(c, t);
            let x_elems: Vec<ElemId> = xs.iter().map(|x| c.cert[x]).collect();
            if let Some((e, coeffs)) = cl.solve_in_closure(&phi, "h", &c.cert, &x_elems)? {
                let nodes: Vec<Node> = t.iter().copied().collect();
                let y = VarSym::y(nodes.iter().copied(), next_y(c, &nodes));
                let used: Vec<&VarSym> = xs.iter().zip(&coeffs).filter(|(_, &k)| k).map(|(x, _)| x).collect();
                out.bind(c, y.clone(), e);
                out.add(c, isolating(&y, &used));
                return Ok(y);
            }
            let mut all_x: Vec<VarSym> = c.cert.keys().filter(|v| v.is_x()).cloned().collect();
            all_x.sort();
            let e_set: Vec<ElemId> = all_x.iter().map(|x| c.cert[x]).collect();
            let e = cl.independent_witness(&phi, "h", &c.cert, &e_set).map_err(|e| failure("henkin", e.to_string()))?;
            let a = *t.iter().next().expect("non-empty support");
            let x = VarSym::X(a, next_x(c, a));
            out.bind(c, x.clone(), e);
            Ok(x)
        };
        henkin_common(self, c, exists_tpl, args, &mut fresh)
    }

    fn split(&mut self, c: &mut Commitment, a: Node) -> Result<StepOut, ProviderError> {
        let block = a_block(c, &a);
        let old_cert = c.cert.clone();
        let (h0, h1) = split_commitment(c, a)?;
        let mut out = StepOut::default();
        for x in block.iter().filter(|s| s.is_x()) {
            let e = self.cl().fresh_independent();
            out.bind(c, lift_symbol(x, &h1).expect("block"), e);
        }
        for y in block.iter().filter(|s| s.is_y()) {
            let t: BTreeSet<Node> = y.nodes().iter().copied().collect();
            let mut basis: Vec<VarSym> = old_cert.keys().filter(|s| s.is_x() && t.contains(&s.nodes()[0])).cloned().collect();
            basis.sort();
            let old: Vec<ElemId> = basis.iter().map(|x| old_cert[x]).collect();
            let coeffs = self
                .cl()
                .coordinates(old_cert[y], &old)
                .ok_or_else(|| failure("split", format!("{y} is outside the closure of its x-block")))?;
            let new: Vec<ElemId> = basis.iter().map(|x| c.cert[&lift_symbol(x, &h1).expect("block")]).collect();
            let e = self.cl().combination(&new, &coeffs);
            out.bind(c, lift_symbol(y, &h1).expect("block"), e);
        }
        let base = self.x_mode();
        out.add(c, inequality(&base.base(a.child(0)), &base.base(a.child(1))));
        let _ = h0;
        Ok(out)
    }
}

/// Built-in provider by name: `pure-set`, `random-graph`, `unary-generic`
/// (dcl-trivial) or `vector-f2` (pregeometry).
pub fn provider_by_name(name: &str, seed: u64) -> Result<Box<dyn DensityProvider>, ProviderError> {
    let o = oracle::by_name(name, seed).map_err(|_| ProviderError::Unknown(name.to_string()))?;
    if o.as_closure().is_some() {
        Ok(Box::new(PregeometryProvider::new(o)?))
    } else {
        Ok(Box::new(DclTrivialProvider::new(o)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commitment::extends;
    use crate::logic::parse_formula;

    fn tpl(p: &dyn DensityProvider, s: &str) -> Formula {
        Conjunct::of(&parse_formula(s, p.signature()).unwrap()).template.as_ref().clone()
    }

    #[test]
    fn root_split_distinct() {
        let mut p = provider_by_name("pure-set", 1).unwrap();
        let (mut c, _) = p.start(None).unwrap();
        let before = c.clone();
        let out = p.split(&mut c, Node::ROOT).unwrap();
        c.validate(p.oracle()).unwrap();
        assert!(extends(&before, &c));
        assert_eq!(out.binds.len(), 1);
        assert_ne!(c.cert[&VarSym::X("0".parse().unwrap(), 0)], c.cert[&VarSym::X("1".parse().unwrap(), 0)]);
    }

    #[test]
    fn complete_polarity() {
        let mut p = provider_by_name("pure-set", 1).unwrap();
        let (mut c, _) = p.start(None).unwrap();
        p.split(&mut c, Node::ROOT).unwrap();
        let psi = parse_formula("(= x:0:0 x:1:0)", p.signature()).unwrap();
        let out = p.complete(&mut c, &psi).unwrap();
        assert!(out.added.is_empty(), "the inequality is already a conjunct");
        assert!(c.conjuncts.contains_formula(&Formula::not(psi)));
    }

    #[test]
    fn henkin_fresh_x_in_support() {
        let mut p = provider_by_name("pure-set", 2).unwrap();
        let (mut c, _) = p.start(None).unwrap();
        let t = tpl(p.as_ref(), "(exists ?u1 (not (= ?u1 ?w1)))");
        let before = c.clone();
        let out = p.henkin(&mut c, &t, &[VarSym::X(Node::ROOT, 0)]).unwrap();
        assert_eq!(out.witnesses, vec![VarSym::X(Node::ROOT, 1)]);
        c.validate(p.oracle()).unwrap();
        assert!(extends(&before, &c));
        // reused the second time
        let out = p.henkin(&mut c, &t, &[VarSym::X(Node::ROOT, 0)]).unwrap();
        assert_eq!(out.witnesses, vec![VarSym::X(Node::ROOT, 1)]);
        assert!(out.added.is_empty());
        let none = tpl(p.as_ref(), "(exists ?u1 (not (= ?u1 ?u1)))");
        let out = p.henkin(&mut c, &none, &[]).unwrap();
        assert!(out.witnesses.is_empty());
        assert_eq!(out.added[0].to_string(), "(not (exists ?u1 (not (= ?u1 ?u1))))");
    }

    #[test]
    fn graph_split_keeps_edges() {
        let mut p = provider_by_name("random-graph", 3).unwrap();
        let (mut c, _) = p.start(None).unwrap();
        p.split(&mut c, Node::ROOT).unwrap();
        let x0 = VarSym::X("0".parse().unwrap(), 0);
        let x1 = VarSym::X("1".parse().unwrap(), 0);
        let edge = tpl(p.as_ref(), "(exists ?u1 (E ?u1 ?w1))");
        p.henkin(&mut c, &edge, &[x1.clone()]).unwrap();
        let e = parse_formula("(E x:0:0 x:1:0)", p.signature()).unwrap();
        p.complete(&mut c, &e).unwrap();
        let before = c.clone();
        p.split(&mut c, "0".parse().unwrap()).unwrap();
        c.validate(p.oracle()).unwrap();
        assert!(extends(&before, &c));
        let _ = x0;
    }

    #[test]
    fn vector_closure_case_and_split() {
        let mut p = provider_by_name("vector-f2", 0).unwrap();
        let (mut c, _) = p.start(None).unwrap();
        let r = VarSym::X(Node::ROOT, 0);
        let other = tpl(p.as_ref(), "(exists ?u1 (not (= ?u1 ?w1)))");
        let out = p.henkin(&mut c, &other, &[r.clone()]).unwrap();
        // 0 ≠ x is in the closure of x
        assert!(out.witnesses[0].is_y());
        let indep = tpl(p.as_ref(), "(exists ?u1 (and (not (= ?u1 0)) (not (= ?u1 ?w1))))");
        let out = p.henkin(&mut c, &indep, &[r.clone()]).unwrap();
        assert_eq!(out.witnesses, vec![VarSym::X(Node::ROOT, 1)]);
        let sum = tpl(p.as_ref(), "(exists ?u1 (= ?u1 (+ ?w1 ?w2)))");
        let out = p.henkin(&mut c, &sum, &[r.clone(), VarSym::X(Node::ROOT, 1)]).unwrap();
        assert!(out.witnesses[0].is_y());
        assert!(out.added.iter().any(|f| f.to_string().contains("(+ x:ε:0 x:ε:1)")));
        let before = c.clone();
        p.split(&mut c, Node::ROOT).unwrap();
        c.validate(p.oracle()).unwrap();
        assert!(extends(&before, &c));
    }

    #[test]
    fn omit_and_atomize() {
        let mut p = provider_by_name("unary-generic", 0).unwrap();
        let (mut c, _) = p.start(None).unwrap();
        let z = [VarSym::X(Node::ROOT, 0)];
        let out = p.omit(&mut c, &z, &OmitType::unary_family("P", 8)).unwrap();
        assert_eq!(out.delta, Some(0));
        assert_eq!(out.added[0].to_string(), "(not (P0 x:ε:0))");
        let out = p.omit(&mut c, &z, &OmitType::unary_family("P", 8)).unwrap();
        assert!(out.added.is_empty());
        let triv = OmitType::list(vec![parse_formula("(= ?w1 ?w1)", p.signature()).unwrap()]);
        assert_eq!(p.omit(&mut c, &z, &triv), Err(ProviderError::OmitSearchExhausted(1)));

        let mut q = provider_by_name("pure-set", 0).unwrap();
        let (mut c, _) = q.start(None).unwrap();
        q.split(&mut c, Node::ROOT).unwrap();
        let z = [VarSym::X("0".parse().unwrap(), 0), VarSym::X("1".parse().unwrap(), 0)];
        q.atomize(&mut c, &z).unwrap();
        assert!(c.conjuncts.contains_formula(&parse_formula("(not (= x:0:0 x:1:0))", q.signature()).unwrap()));
    }
}
