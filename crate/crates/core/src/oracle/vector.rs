//! The countable-dimensional F₂ vector space in the signature {+, 0}.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::fraisse::pack;
use super::{free_values, ClosureOracle, ElemId, OracleAssignment, OracleError, Witness, WitnessOracle};
use crate::logic::normal::slot;
use crate::logic::{Formula, Signature, Term, VarSym};

/// Temporary basis directions used during evaluation count down from here.
const TEMP_BASIS: u32 = u32::MAX;
/// Largest span dimension an ∃ step will enumerate.
const MAX_DIM: usize = 16;

/// Sparse vector: sorted basis indices with coefficient 1.
type Vector = Vec<u32>;

fn xor(a: &[u32], b: &[u32]) -> Vector {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Row-reduced basis tracking which inputs make up each row.
#[derive(Default)]
struct Echelon {
    rows: BTreeMap<u32, (Vector, Vec<bool>)>,
    inputs: usize,
}

impl Echelon {
    /// Reduce v; returns the residue and the input combination removed.
    fn reduce(&self, v: &[u32]) -> (Vector, Vec<bool>) {
        let mut v = v.to_vec();
        let mut mask = vec![false; self.inputs];
        while let Some(&p) = v.last() {
            match self.rows.get(&p) {
                Some((r, m)) => {
                    v = xor(&v, r);
                    for (a, b) in mask.iter_mut().zip(m) {
                        *a ^= b;
                    }
                }
                None => break,
            }
        }
        (v, mask)
    }

    /// Add an input; returns whether it was independent.
    fn push(&mut self, v: &[u32]) -> bool {
        let i = self.inputs;
        self.inputs += 1;
        for (_, m) in self.rows.values_mut() {
            m.push(false);
        }
        let (r, mut mask) = self.reduce(v);
        mask[i] = true;
        match r.last() {
            Some(&p) => {
                self.rows.insert(p, (r, mask));
                true
            }
            None => false,
        }
    }

    fn span(&self) -> Result<Vec<Vector>, OracleError> {
        let rows: Vec<&Vector> = self.rows.values().map(|(r, _)| r).collect();
        if rows.len() > MAX_DIM {
            return Err(OracleError::SearchTooLarge(rows.len()));
        }
        let mut out = vec![Vec::new()];
        for r in rows {
            let more: Vec<Vector> = out.iter().map(|v| xor(v, r)).collect();
            out.extend(more);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct VectorF2Oracle {
    sig: Signature,
    seed: u64,
    elems: Vec<Vector>,
    names: HashMap<Vector, u32>,
    next_basis: u32,
}

impl VectorF2Oracle {
    pub fn new(seed: u64) -> VectorF2Oracle {
        VectorF2Oracle {
            sig: Signature::new().with_fun("+", 2).with_fun("0", 0),
            seed,
            elems: Vec::new(),
            names: HashMap::new(),
            next_basis: 0,
        }
    }

    fn vector(&self, e: ElemId) -> Result<&Vector, OracleError> {
        self.elems.get(e.0 as usize).ok_or(OracleError::UnknownElement(e))
    }

    /// Name a vector (returning the existing name if it has one).
    fn name_of(&mut self, v: Vector) -> ElemId {
        if let Some(&i) = self.names.get(&v) {
            return ElemId(i);
        }
        let i = self.elems.len() as u32;
        if let Some(&m) = v.last() {
            self.next_basis = self.next_basis.max(m + 1);
        }
        self.names.insert(v.clone(), i);
        self.elems.push(v);
        ElemId(i)
    }

    pub fn zero(&mut self) -> ElemId {
        self.name_of(Vec::new())
    }

    pub fn sum(&mut self, a: ElemId, b: ElemId) -> Result<ElemId, OracleError> {
        let v = xor(self.vector(a)?, self.vector(b)?);
        Ok(self.name_of(v))
    }

    fn base_vectors(&self, base: &[(VarSym, ElemId)]) -> Result<Vec<(VarSym, Vector)>, OracleError> {
        base.iter().map(|(s, e)| Ok((s.clone(), self.vector(*e)?.clone()))).collect()
    }

    fn eval_with(&self, phi: &Formula, env: &mut Vec<(Arc<str>, Vector)>, base: &[(VarSym, Vector)]) -> Result<bool, OracleError> {
        Ok(match phi {
            Formula::Eq(a, b) => term(a, env, base)? == term(b, env, base)?,
            Formula::Rel(r, _) => return Err(OracleError::UnsupportedSignature(format!("relation {r}"))),
            Formula::Not(g) => !self.eval_with(g, env, base)?,
            Formula::And(a, b) => self.eval_with(a, env, base)? && self.eval_with(b, env, base)?,
            Formula::Or(a, b) => self.eval_with(a, env, base)? || self.eval_with(b, env, base)?,
            Formula::Imp(a, b) => !self.eval_with(a, env, base)? || self.eval_with(b, env, base)?,
            Formula::Exists(x, g) => self.quant(x, g, true, env, base)?,
            Formula::Forall(x, g) => !self.quant(x, g, false, env, base)?,
        })
    }

    /// Candidates: the span of everything assigned, plus one fresh direction.
    fn quant(
        &self,
        x: &Arc<str>,
        g: &Formula,
        want: bool,
        env: &mut Vec<(Arc<str>, Vector)>,
        base: &[(VarSym, Vector)],
    ) -> Result<bool, OracleError> {
        let mut ech = Echelon::default();
        for v in base.iter().map(|(_, v)| v).chain(env.iter().map(|(_, v)| v)) {
            ech.push(v);
        }
        let fresh = vec![TEMP_BASIS - env.len() as u32];
        for c in ech.span()?.into_iter().chain(std::iter::once(fresh)) {
            env.push((x.clone(), c));
            let r = self.eval_with(g, env, base);
            env.pop();
            if r? == want {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn holds_at(&self, phi: &Formula, w: &str, c: Vector, base: &[(VarSym, Vector)]) -> Result<bool, OracleError> {
        self.eval_with(phi, &mut vec![(Arc::from(w), c)], base)
    }

    fn fresh_basis(&mut self) -> ElemId {
        let b = self.next_basis;
        self.name_of(vec![b])
    }
}

fn term(t: &Term, env: &[(Arc<str>, Vector)], base: &[(VarSym, Vector)]) -> Result<Vector, OracleError> {
    match t {
        Term::Var(v) => {
            if let VarSym::Bound(n) = v {
                if let Some((_, e)) = env.iter().rev().find(|(m, _)| m == n) {
                    return Ok(e.clone());
                }
            }
            base.iter().find(|(s, _)| s == v).map(|(_, e)| e.clone()).ok_or_else(|| OracleError::Unassigned(v.clone()))
        }
        Term::App(g, args) => match (&**g, args.as_slice()) {
            ("+", [a, b]) => Ok(xor(&term(a, env, base)?, &term(b, env, base)?)),
            ("0", []) => Ok(Vec::new()),
            _ => Err(OracleError::UnsupportedSignature(format!("function symbol {g}"))),
        },
    }
}

/// Right-nested sum of the given terms; `0` when empty.
pub(crate) fn sum_term(mut ts: Vec<Term>) -> Term {
    match ts.pop() {
        None => Term::App("0".into(), vec![]),
        Some(last) => ts.into_iter().rev().fold(last, |acc, t| Term::App("+".into(), vec![t, acc])),
    }
}

impl WitnessOracle for VectorF2Oracle {
    fn name(&self) -> &str {
        "vector-f2"
    }

    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn len(&self) -> usize {
        self.elems.len()
    }

    fn eval(&self, phi: &Formula, asg: &OracleAssignment) -> Result<bool, OracleError> {
        let base = self.base_vectors(&free_values(phi, asg)?)?;
        self.eval_with(phi, &mut Vec::new(), &base)
    }

    /// For each position: independent of the earlier ones, or its
    /// coordinates over the earlier independent positions.
    fn type_key(&self, elems: &[ElemId]) -> Vec<u64> {
        let mut ech = Echelon::default();
        let mut indep = 0usize;
        let mut bits = Vec::new();
        for e in elems {
            let v = self.vector(*e).cloned().unwrap_or_default();
            let (r, mask) = ech.reduce(&v);
            if r.is_empty() {
                bits.push(false);
                bits.extend(mask.iter().take(indep));
            } else {
                bits.push(true);
                ech.push(&v);
                indep += 1;
            }
        }
        pack(&bits)
    }

    fn witness(
        &mut self,
        phi: &Formula,
        w: &str,
        asg: &OracleAssignment,
        avoid: &BTreeSet<ElemId>,
    ) -> Result<Witness, OracleError> {
        let w = w.trim_start_matches('?');
        let ex = Formula::exists(w, phi.clone());
        if !self.eval(&ex, asg)? {
            return Err(OracleError::NoSolution);
        }
        let base = self.base_vectors(&free_values(&ex, asg)?)?;
        if self.holds_at(phi, w, vec![TEMP_BASIS], &base)? {
            return Ok(Witness::Found(self.fresh_basis()));
        }
        let mut ech = Echelon::default();
        for (_, v) in &base {
            ech.push(v);
        }
        let mut sols = Vec::new();
        for c in ech.span()? {
            if self.holds_at(phi, w, c.clone(), &base)? {
                sols.push(c);
            }
        }
        for c in &sols {
            match self.names.get(c) {
                Some(&i) if avoid.contains(&ElemId(i)) => {}
                _ => return Ok(Witness::Found(self.name_of(c.clone()))),
            }
        }
        Ok(Witness::Forced(if sols.len() == 1 {
            "unique solution".to_string()
        } else {
            format!("all {} solutions are avoided elements of the span", sols.len())
        }))
    }

    /// Zero status of every non-empty subset sum.
    fn atomic_diagram(&self, elems: &[ElemId]) -> Formula {
        let n = elems.len();
        let mut lits = Vec::new();
        for s in 1u64..(1u64 << n) {
            let members: Vec<usize> = (0..n).filter(|i| s >> i & 1 == 1).collect();
            let v = members.iter().fold(Vec::new(), |acc, &i| xor(&acc, self.vector(elems[i]).map(|v| v.as_slice()).unwrap_or(&[])));
            let t = sum_term(members.iter().map(|&i| Term::Var(VarSym::Bound(slot(i)))).collect());
            let atom = Formula::eq(t, sum_term(vec![]));
            lits.push(if v.is_empty() { atom } else { Formula::not(atom) });
        }
        Formula::conj(lits).unwrap_or_else(|| Formula::eq(sum_term(vec![]), sum_term(vec![])))
    }

    fn element_record(&self, e: ElemId) -> String {
        match self.elems.get(e.0 as usize) {
            Some(v) => v.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" "),
            None => String::new(),
        }
    }

    fn apply_record(&mut self, e: ElemId, rec: &str) -> Result<(), OracleError> {
        let bad = || OracleError::BadRecord(rec.to_string());
        let mut v: Vector = rec.split_whitespace().map(|t| t.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        v.sort();
        if e.0 as usize != self.elems.len() || self.names.contains_key(&v) || v.windows(2).any(|p| p[0] == p[1]) {
            return Err(bad());
        }
        self.name_of(v);
        Ok(())
    }

    fn fresh_instance(&self, seed: u64) -> Box<dyn WitnessOracle> {
        Box::new(VectorF2Oracle::new(seed))
    }

    fn as_closure(&self) -> Option<&dyn ClosureOracle> {
        Some(self)
    }

    fn as_closure_mut(&mut self) -> Option<&mut dyn ClosureOracle> {
        Some(self)
    }
}

impl ClosureOracle for VectorF2Oracle {
    fn cl_query(&self, c: ElemId, b: &[ElemId]) -> (bool, Option<(Formula, Vec<ElemId>)>) {
        let mut ech = Echelon::default();
        for e in b {
            ech.push(self.vector(*e).map(|v| v.as_slice()).unwrap_or(&[]));
        }
        let (r, mask) = ech.reduce(self.vector(c).map(|v| v.as_slice()).unwrap_or(&[]));
        if !r.is_empty() {
            return (false, None);
        }
        let used: Vec<ElemId> = b.iter().zip(&mask).filter(|(_, &m)| m).map(|(e, _)| *e).collect();
        let terms = (0..used.len()).map(|i| Term::Var(VarSym::var(&format!("x{}", i + 1)))).collect();
        let delta = Formula::eq(Term::Var(VarSym::var("w")), sum_term(terms));
        (true, Some((delta, used)))
    }

    fn independent_witness(
        &mut self,
        phi: &Formula,
        w: &str,
        asg: &OracleAssignment,
        _e: &[ElemId],
    ) -> Result<ElemId, OracleError> {
        let w = w.trim_start_matches('?');
        let base = self.base_vectors(&free_values(&Formula::exists(w, phi.clone()), asg)?)?;
        if !self.holds_at(phi, w, vec![TEMP_BASIS], &base)? {
            return Err(OracleError::AllSolutionsClosed);
        }
        // a new basis direction avoids the span of every named element
        Ok(self.fresh_basis())
    }

    fn solve_in_closure(
        &mut self,
        phi: &Formula,
        w: &str,
        asg: &OracleAssignment,
        b: &[ElemId],
    ) -> Result<Option<(ElemId, Vec<bool>)>, OracleError> {
        let w = w.trim_start_matches('?');
        let base = self.base_vectors(&free_values(&Formula::exists(w, phi.clone()), asg)?)?;
        if b.len() > MAX_DIM {
            return Err(OracleError::SearchTooLarge(b.len()));
        }
        let vs = b.iter().map(|e| self.vector(*e).cloned()).collect::<Result<Vec<_>, _>>()?;
        for mask in 0u32..(1u32 << b.len()) {
            let v = (0..b.len()).filter(|i| mask >> i & 1 == 1).fold(Vec::new(), |acc, i| xor(&acc, &vs[i]));
            if self.holds_at(phi, w, v.clone(), &base)? {
                let coeffs = (0..b.len()).map(|i| mask >> i & 1 == 1).collect();
                return Ok(Some((self.name_of(v), coeffs)));
            }
        }
        Ok(None)
    }

    fn fresh_independent(&mut self) -> ElemId {
        self.fresh_basis()
    }

    fn coordinates(&self, c: ElemId, basis: &[ElemId]) -> Option<Vec<bool>> {
        let mut ech = Echelon::default();
        for e in basis {
            ech.push(self.vector(*e).ok()?);
        }
        let (r, mask) = ech.reduce(self.vector(c).ok()?);
        r.is_empty().then_some(mask)
    }

    fn combination(&mut self, basis: &[ElemId], coeffs: &[bool]) -> ElemId {
        let mut v = Vec::new();
        for (e, &k) in basis.iter().zip(coeffs) {
            if k {
                v = xor(&v, self.vector(*e).map(|v| v.as_slice()).unwrap_or(&[]));
            }
        }
        self.name_of(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_formula;

    fn asg(pairs: &[(&str, ElemId)]) -> OracleAssignment {
        pairs.iter().map(|(n, e)| (VarSym::var(n), *e)).collect()
    }

    fn two() -> (VectorF2Oracle, ElemId, ElemId) {
        let mut o = VectorF2Oracle::new(0);
        let a = o.fresh_independent();
        let b = o.fresh_independent();
        (o, a, b)
    }

    #[test]
    fn linear_types_decide_existentials() {
        let (o, a, b) = two();
        let phi = parse_formula("(exists ?w (and (not (= ?w 0)) (= (+ ?w ?a) ?b)))", o.signature()).unwrap();
        assert!(o.eval(&phi, &asg(&[("a", a), ("b", b)])).unwrap());
        assert!(!o.eval(&phi, &asg(&[("a", a), ("b", a)])).unwrap());
        let inf = parse_formula("(forall ?w (exists ?u (not (= ?u ?w))))", o.signature()).unwrap();
        assert!(o.eval(&inf, &asg(&[])).unwrap());
        let char2 = parse_formula("(forall ?w (= (+ ?w ?w) 0))", o.signature()).unwrap();
        assert!(o.eval(&char2, &asg(&[])).unwrap());
    }

    #[test]
    fn forced_witness() {
        let (mut o, a, b) = two();
        let ab = o.sum(a, b).unwrap();
        let phi = parse_formula("(= ?w (+ ?a ?b))", o.signature()).unwrap();
        let avoid: BTreeSet<_> = [ab].into_iter().collect();
        let r = o.witness(&phi, "w", &asg(&[("a", a), ("b", b)]), &avoid).unwrap();
        assert_eq!(r, Witness::Forced("unique solution".into()));
        let r = o.witness(&phi, "w", &asg(&[("a", a), ("b", b)]), &BTreeSet::new()).unwrap();
        assert_eq!(r, Witness::Found(ab));
    }

    #[test]
    fn cl_query_examples() {
        let (mut o, b1, b2) = two();
        let c = o.sum(b1, b2).unwrap();
        let (yes, d) = o.cl_query(c, &[b1, b2]);
        assert!(yes);
        let (d, used) = d.unwrap();
        assert_eq!(d.to_string(), "(= ?w (+ ?x1 ?x2))");
        assert_eq!(used, vec![b1, b2]);
        let fresh = o.fresh_independent();
        assert_eq!(o.cl_query(fresh, &[b1]), (false, None));
        let z = o.zero();
        let (yes, d) = o.cl_query(z, &[]);
        assert!(yes);
        assert_eq!(d.unwrap().0.to_string(), "(= ?w 0)");
    }

    #[test]
    fn independent_witness_examples() {
        let (mut o, a, _) = two();
        let nz = parse_formula("(not (= ?w 0))", o.signature()).unwrap();
        let c = o.independent_witness(&nz, "w", &asg(&[]), &[a]).unwrap();
        assert!(!o.cl_query(c, &[a]).0);
        let off = parse_formula("(not (= (+ ?w ?a) 0))", o.signature()).unwrap();
        assert!(o.independent_witness(&off, "w", &asg(&[("a", a)]), &[]).is_ok());
        let eq = parse_formula("(= ?w ?a)", o.signature()).unwrap();
        assert_eq!(o.independent_witness(&eq, "w", &asg(&[("a", a)]), &[]), Err(OracleError::AllSolutionsClosed));
    }

    #[test]
    fn dependence_pattern_key() {
        let (mut o, a, b) = two();
        let c = o.fresh_independent();
        let ab = o.sum(a, b).unwrap();
        let ac = o.sum(a, c).unwrap();
        assert_eq!(o.type_key(&[a, b, ab]), o.type_key(&[a, c, ac]));
        assert_ne!(o.type_key(&[a, b, ab]), o.type_key(&[a, b, c]));
        assert_eq!(o.type_key(&[a, a]), o.type_key(&[b, b]));
    }

    #[test]
    fn diagram_and_records() {
        let (mut o, a, b) = two();
        let ab = o.sum(a, b).unwrap();
        let d = o.atomic_diagram(&[a, b, ab]);
        assert_eq!(d.conjuncts().len(), 7);
        let mut r = VectorF2Oracle::new(0);
        for e in [a, b, ab] {
            r.apply_record(e, &o.element_record(e)).unwrap();
        }
        assert_eq!(r.element_record(ab), "0 1");
        assert_eq!(r.fresh_independent(), ElemId(3));
        assert_eq!(r.element_record(ElemId(3)), "2");
    }
}
