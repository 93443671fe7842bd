//! Free-amalgamation relational Fraïssé limits: pure set, random graph,
//! generic unary predicates, or any relational age given inline.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{free_values, ElemId, OracleAssignment, OracleError, Witness, WitnessOracle};
use crate::logic::normal::slot;
use crate::logic::{Formula, Signature, Term, VarSym};

/// Above this many fact slots an ∃ step refuses to enumerate.
const MAX_SLOTS: usize = 16;
/// Temporary elements live above this id during evaluation.
const TEMP: u32 = 1 << 31;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelSpec {
    pub name: Arc<str>,
    pub arity: usize,
    /// Binary, symmetric and irreflexive (graph edges).
    pub symmetric: bool,
}

/// The class of all finite structures in a relational signature.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AgeSpec {
    pub rels: Vec<RelSpec>,
    /// Also accept unary predicates P<i> beyond `rels` (generic unary
    /// predicates, only the listed ones are enumerated).
    pub open_unary: bool,
}

impl AgeSpec {
    pub fn pure_set() -> AgeSpec {
        AgeSpec::default()
    }

    pub fn graph() -> AgeSpec {
        AgeSpec { rels: vec![RelSpec { name: "E".into(), arity: 2, symmetric: true }], open_unary: false }
    }

    /// Unary predicates P0..P{n-1}.
    pub fn unary(n: usize) -> AgeSpec {
        let rels = (0..n).map(|i| RelSpec { name: format!("P{i}").into(), arity: 1, symmetric: false }).collect();
        AgeSpec { rels, open_unary: false }
    }

    /// Accept every P<i>.
    pub fn open(mut self) -> AgeSpec {
        self.open_unary = true;
        self
    }

    fn spec(&self, r: u16) -> (usize, bool) {
        match self.rels.get(r as usize) {
            Some(s) => (s.arity, s.symmetric),
            None => (1, false),
        }
    }

    fn rel_name(&self, r: u16) -> Arc<str> {
        match self.rels.get(r as usize) {
            Some(s) => s.name.clone(),
            None => format!("P{r}").into(),
        }
    }

    /// All finite structures of a relational signature.
    pub fn from_signature(sig: &Signature) -> Result<AgeSpec, OracleError> {
        if let Some((g, _)) = sig.funs().next() {
            return Err(OracleError::UnsupportedSignature(format!("function symbol {g}")));
        }
        let mut rels = Vec::new();
        for (r, a) in sig.rels() {
            if a == 0 {
                return Err(OracleError::UnsupportedSignature(format!("nullary relation {r}")));
            }
            rels.push(RelSpec { name: r.clone(), arity: a, symmetric: false });
        }
        Ok(AgeSpec { rels, open_unary: false })
    }

    pub fn signature(&self) -> Signature {
        let mut s = Signature::new();
        for r in &self.rels {
            s = s.with_rel(&r.name, r.arity);
        }
        s
    }
}

type Fact = (u16, Vec<u32>);

#[derive(Clone, Debug)]
pub struct FraisseOracle {
    name: String,
    age: AgeSpec,
    sig: Signature,
    seed: u64,
    rng: ChaCha8Rng,
    facts: HashSet<Fact>,
    /// Facts each element was created with (only with earlier elements).
    created: Vec<Vec<Fact>>,
    /// Every stored fact mentioning the element.
    touching: Vec<Vec<Fact>>,
}

impl FraisseOracle {
    pub fn new(name: &str, age: AgeSpec, seed: u64) -> FraisseOracle {
        FraisseOracle {
            name: name.to_string(),
            sig: age.signature(),
            age,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            facts: HashSet::new(),
            created: Vec::new(),
            touching: Vec::new(),
        }
    }

    pub fn age(&self) -> &AgeSpec {
        &self.age
    }

    fn rel_index(&self, name: &str) -> Result<u16, OracleError> {
        if let Some(i) = self.age.rels.iter().position(|r| &*r.name == name) {
            return Ok(i as u16);
        }
        if self.age.open_unary {
            if let Some(i) = name.strip_prefix('P').and_then(|d| d.parse::<u16>().ok()) {
                if i as usize >= self.age.rels.len() && format!("P{i}") == name {
                    return Ok(i);
                }
            }
        }
        Err(OracleError::UnsupportedSignature(format!("relation {name} not in the age")))
    }

    pub fn holds(&self, rel: &str, tuple: &[ElemId]) -> bool {
        match self.rel_index(rel) {
            Ok(r) => self.facts.contains(&(r, tuple.iter().map(|e| e.0).collect())),
            Err(_) => false,
        }
    }

    /// Name a new element carrying the given facts (all other elements are
    /// earlier); symmetric facts are stored in both orders.
    fn create(&mut self, facts: Vec<Fact>) -> ElemId {
        let id = self.created.len() as u32;
        self.touching.push(Vec::new());
        let mut stored = Vec::new();
        for (r, t) in facts {
            let t: Vec<u32> = t.into_iter().map(|e| if e >= TEMP { id } else { e }).collect();
            if self.age.spec(r).1 {
                let mut rev = t.clone();
                rev.reverse();
                self.store((r, rev));
            }
            self.store((r, t.clone()));
            stored.push((r, t));
        }
        stored.sort();
        stored.dedup();
        self.created.push(stored);
        ElemId(id)
    }

    fn store(&mut self, f: Fact) {
        if self.facts.contains(&f) {
            return;
        }
        let mut seen: Vec<u32> = f.1.clone();
        seen.sort();
        seen.dedup();
        for e in seen {
            self.touching[e as usize].push(f.clone());
        }
        self.facts.insert(f);
    }

    fn check_elems(&self, asg: &[(VarSym, ElemId)]) -> Result<(), OracleError> {
        for (_, e) in asg {
            if e.0 as usize >= self.created.len() {
                return Err(OracleError::UnknownElement(*e));
            }
        }
        Ok(())
    }

    fn relevant(&self, phi: &Formula) -> Result<Vec<u16>, OracleError> {
        let mut out = BTreeSet::new();
        collect_rels(phi, &mut |r| {
            out.insert(r.to_string());
        });
        out.iter().map(|r| self.rel_index(r)).collect()
    }

    /// Fact slots for a new element `t` over `present`.
    fn slots(&self, rels: &[u16], present: &[u32], t: u32) -> Vec<Fact> {
        let mut out = Vec::new();
        for &r in rels {
            let (arity, symmetric) = self.age.spec(r);
            if symmetric {
                for &p in present {
                    out.push((r, vec![t, p]));
                }
                continue;
            }
            let mut pool = present.to_vec();
            pool.push(t);
            crate::logic::diagram::for_each_tuple(pool.len(), arity, |ix| {
                if ix.iter().any(|&i| i == pool.len() - 1) {
                    out.push((r, ix.iter().map(|&i| pool[i]).collect()));
                }
            });
        }
        out
    }

    fn solutions_in(&self, phi: &Formula, w: &str, base: &[(VarSym, ElemId)], cands: &[u32]) -> Result<Vec<u32>, OracleError> {
        let mut ev = Eval::new(self, phi)?;
        let mut out = Vec::new();
        for &c in cands {
            let mut env = vec![(Arc::from(w), c)];
            if ev.formula(phi, &mut env, base)? {
                out.push(c);
            }
        }
        Ok(out)
    }

    /// Fast path for conjunctions of literals: the fresh element with exactly
    /// the required positive facts, if that is consistent.
    fn direct(&self, phi: &Formula, w: &str, base: &[(VarSym, ElemId)]) -> Result<Option<Vec<Fact>>, OracleError> {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for lit in phi.conjuncts() {
            let (atom, p) = match lit {
                Formula::Not(g) if g.is_atomic() => (&**g, false),
                g if g.is_atomic() => (g, true),
                _ => return Ok(None),
            };
            let val = |t: &Term| -> Result<Option<u32>, OracleError> {
                match t {
                    Term::Var(VarSym::Bound(n)) if &**n == w => Ok(Some(TEMP)),
                    Term::Var(v) => base
                        .iter()
                        .find(|(s, _)| s == v)
                        .map(|(_, e)| Some(e.0))
                        .ok_or_else(|| OracleError::Unassigned(v.clone())),
                    Term::App(g, _) => Err(OracleError::UnsupportedSignature(format!("function symbol {g}"))),
                }
            };
            match atom {
                Formula::Eq(a, b) => {
                    let (a, b) = (val(a)?, val(b)?);
                    if (a == b) != p {
                        // an equality with w forces w onto a parameter
                        return Ok(None);
                    }
                }
                Formula::Rel(r, ts) => {
                    let r = self.rel_index(r)?;
                    let t: Vec<u32> = ts.iter().map(|t| val(t).map(Option::unwrap)).collect::<Result<_, _>>()?;
                    let mut key = t.clone();
                    if self.age.spec(r).1 {
                        if key[0] == key[1] {
                            if p {
                                return Ok(None);
                            }
                            continue;
                        }
                        key.sort();
                    }
                    if !t.contains(&TEMP) {
                        if self.facts.contains(&(r, t)) != p {
                            return Ok(None);
                        }
                        continue;
                    }
                    if p {
                        pos.push((r, key));
                    } else {
                        neg.push((r, key));
                    }
                }
                _ => unreachable!(),
            }
        }
        if pos.iter().any(|f| neg.contains(f)) {
            return Ok(None);
        }
        Ok(Some(pos))
    }
}

fn collect_rels<'a>(phi: &'a Formula, f: &mut impl FnMut(&'a str)) {
    match phi {
        Formula::Eq(..) => {}
        Formula::Rel(r, _) => f(r),
        Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => collect_rels(g, f),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            collect_rels(a, f);
            collect_rels(b, f);
        }
    }
}

struct Eval<'a> {
    o: &'a FraisseOracle,
    rels: Vec<u16>,
    temp: HashSet<Fact>,
    next: u32,
}

impl<'a> Eval<'a> {
    fn new(o: &'a FraisseOracle, phi: &Formula) -> Result<Eval<'a>, OracleError> {
        Ok(Eval { o, rels: o.relevant(phi)?, temp: HashSet::new(), next: TEMP + 1 })
    }

    fn term(&self, t: &Term, env: &[(Arc<str>, u32)], base: &[(VarSym, ElemId)]) -> Result<u32, OracleError> {
        match t {
            Term::Var(v) => {
                if let VarSym::Bound(n) = v {
                    if let Some((_, e)) = env.iter().rev().find(|(m, _)| m == n) {
                        return Ok(*e);
                    }
                }
                base.iter().find(|(s, _)| s == v).map(|(_, e)| e.0).ok_or_else(|| OracleError::Unassigned(v.clone()))
            }
            Term::App(g, _) => Err(OracleError::UnsupportedSignature(format!("function symbol {g}"))),
        }
    }

    fn holds(&self, r: u16, t: Vec<u32>) -> bool {
        if t.iter().any(|&e| e >= TEMP) {
            self.temp.contains(&(r, t))
        } else {
            self.o.facts.contains(&(r, t))
        }
    }

    fn formula(&mut self, phi: &Formula, env: &mut Vec<(Arc<str>, u32)>, base: &[(VarSym, ElemId)]) -> Result<bool, OracleError> {
        Ok(match phi {
            Formula::Eq(a, b) => self.term(a, env, base)? == self.term(b, env, base)?,
            Formula::Rel(r, ts) => {
                let r = self.o.rel_index(r)?;
                let t = ts.iter().map(|t| self.term(t, env, base)).collect::<Result<Vec<_>, _>>()?;
                self.holds(r, t)
            }
            Formula::Not(g) => !self.formula(g, env, base)?,
            Formula::And(a, b) => self.formula(a, env, base)? && self.formula(b, env, base)?,
            Formula::Or(a, b) => self.formula(a, env, base)? || self.formula(b, env, base)?,
            Formula::Imp(a, b) => !self.formula(a, env, base)? || self.formula(b, env, base)?,
            Formula::Exists(x, g) => self.quant(x, g, true, env, base)?,
            Formula::Forall(x, g) => !self.quant(x, g, false, env, base)?,
        })
    }

    /// Whether some extension type makes `g` equal to `want`.
    fn quant(
        &mut self,
        x: &Arc<str>,
        g: &Formula,
        want: bool,
        env: &mut Vec<(Arc<str>, u32)>,
        base: &[(VarSym, ElemId)],
    ) -> Result<bool, OracleError> {
        let mut present: Vec<u32> = base.iter().map(|(_, e)| e.0).chain(env.iter().map(|(_, e)| *e)).collect();
        present.sort();
        present.dedup();
        for &c in &present {
            env.push((x.clone(), c));
            let r = self.formula(g, env, base)?;
            env.pop();
            if r == want {
                return Ok(true);
            }
        }
        let t = self.next;
        self.next += 1;
        let slots = self.o.slots(&self.rels, &present, t);
        if slots.len() > MAX_SLOTS {
            return Err(OracleError::SearchTooLarge(slots.len()));
        }
        let mut found = false;
        for mask in 0u32..(1u32 << slots.len()) {
            let added = self.add_mask(&slots, mask);
            env.push((x.clone(), t));
            let r = self.formula(g, env, base);
            env.pop();
            for f in added {
                self.temp.remove(&f);
            }
            if r? == want {
                found = true;
                break;
            }
        }
        self.next -= 1;
        Ok(found)
    }

    fn add_mask(&mut self, slots: &[Fact], mask: u32) -> Vec<Fact> {
        let mut added = Vec::new();
        for (i, (r, t)) in slots.iter().enumerate() {
            if mask >> i & 1 == 1 {
                if self.o.age.spec(*r).1 {
                    let rev = vec![t[1], t[0]];
                    self.temp.insert((*r, rev.clone()));
                    added.push((*r, rev));
                }
                self.temp.insert((*r, t.clone()));
                added.push((*r, t.clone()));
            }
        }
        added
    }
}

impl WitnessOracle for FraisseOracle {
    fn name(&self) -> &str {
        &self.name
    }

    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn len(&self) -> usize {
        self.created.len()
    }

    fn eval(&self, phi: &Formula, asg: &OracleAssignment) -> Result<bool, OracleError> {
        let base = free_values(phi, asg)?;
        self.check_elems(&base)?;
        Eval::new(self, phi)?.formula(phi, &mut Vec::new(), &base)
    }

    fn type_key(&self, elems: &[ElemId]) -> Vec<u64> {
        let mut bits = Vec::new();
        for (i, e) in elems.iter().enumerate() {
            let first = elems.iter().position(|d| d == e).unwrap();
            for j in 0..i {
                bits.push(first == j);
            }
        }
        for (r, spec) in self.age.rels.iter().enumerate() {
            crate::logic::diagram::for_each_tuple(elems.len(), spec.arity, |ix| {
                bits.push(self.facts.contains(&(r as u16, ix.iter().map(|&i| elems[i].0).collect())));
            });
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
        let base = free_values(&ex, asg)?;
        self.check_elems(&base)?;
        // consistent literal sets are realised directly (free amalgamation)
        if let Some(facts) = self.direct(phi, w, &base)? {
            return Ok(Witness::Found(self.create(facts)));
        }
        if !self.eval(&ex, asg)? {
            return Err(OracleError::NoSolution);
        }
        let mut present: Vec<u32> = base.iter().map(|(_, e)| e.0).collect();
        present.sort();
        present.dedup();
        let slots = self.slots(&self.relevant(phi)?, &present, TEMP);
        if slots.len() > MAX_SLOTS {
            return Err(OracleError::SearchTooLarge(slots.len()));
        }
        let total = 1u64 << slots.len();
        let start = self.rng.gen_range(0..total);
        let mut ev = Eval::new(self, phi)?;
        let mut chosen = None;
        for i in 0..total {
            let mask = ((start + i) % total) as u32;
            let added = ev.add_mask(&slots, mask);
            let mut env = vec![(Arc::from(w), TEMP)];
            let r = ev.formula(phi, &mut env, &base);
            for f in &added {
                ev.temp.remove(f);
            }
            if r? {
                chosen = Some(slots.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, f)| f.clone()).collect());
                break;
            }
        }
        drop(ev);
        if let Some(facts) = chosen {
            return Ok(Witness::Found(self.create(facts)));
        }
        // every solution is a parameter
        let sols = self.solutions_in(phi, w, &base, &present)?;
        if let Some(&c) = sols.iter().find(|&&c| !avoid.contains(&ElemId(c))) {
            return Ok(Witness::Found(ElemId(c)));
        }
        Ok(Witness::Forced(if sols.len() == 1 {
            "unique solution".to_string()
        } else {
            format!("all {} solutions are avoided parameters", sols.len())
        }))
    }

    fn atomic_diagram(&self, elems: &[ElemId]) -> Formula {
        let var = |i: usize| Term::Var(VarSym::Bound(slot(i)));
        let mut lits = Vec::new();
        for i in 0..elems.len() {
            for j in i + 1..elems.len() {
                let eq = Formula::eq(var(i), var(j));
                lits.push(if elems[i] == elems[j] { eq } else { Formula::not(eq) });
            }
        }
        for (r, spec) in self.age.rels.iter().enumerate() {
            crate::logic::diagram::for_each_tuple(elems.len(), spec.arity, |ix| {
                let atom = Formula::Rel(spec.name.clone(), ix.iter().map(|&i| var(i)).collect());
                let h = self.facts.contains(&(r as u16, ix.iter().map(|&i| elems[i].0).collect()));
                lits.push(if h { atom } else { Formula::not(atom) });
            });
        }
        Formula::conj(lits).unwrap_or_else(|| Formula::eq(var(0), var(0)))
    }

    fn element_record(&self, e: ElemId) -> String {
        let facts = match self.created.get(e.0 as usize) {
            Some(f) => f,
            None => return String::new(),
        };
        let parts: Vec<String> = facts
            .iter()
            .map(|(r, t)| {
                let args: Vec<String> = t.iter().map(|x| format!("e{x}")).collect();
                format!("{}:{}", self.age.rel_name(*r), args.join(","))
            })
            .collect();
        parts.join(" ")
    }

    fn apply_record(&mut self, e: ElemId, rec: &str) -> Result<(), OracleError> {
        let bad = || OracleError::BadRecord(rec.to_string());
        if e.0 as usize != self.created.len() {
            return Err(bad());
        }
        let mut facts = Vec::new();
        for tok in rec.split_whitespace() {
            let (r, args) = tok.split_once(':').ok_or_else(bad)?;
            let r = self.rel_index(r)?;
            let t = args.split(',').map(|a| a.parse::<ElemId>().map(|x| x.0)).collect::<Result<Vec<_>, _>>()?;
            if t.len() != self.age.spec(r).0 || t.iter().any(|&x| x > e.0) {
                return Err(bad());
            }
            facts.push((r, t.into_iter().map(|x| if x == e.0 { TEMP } else { x }).collect()));
        }
        self.create(facts);
        Ok(())
    }

    fn copy_tuple(&mut self, block: &[ElemId], over: &[ElemId]) -> Result<Vec<ElemId>, OracleError> {
        for e in block.iter().chain(over) {
            if e.0 as usize >= self.created.len() {
                return Err(OracleError::UnknownElement(*e));
            }
        }
        let over_set: HashSet<u32> = over.iter().map(|e| e.0).collect();
        let mut image: HashMap<u32, u32> = HashMap::new();
        let mut out = Vec::with_capacity(block.len());
        for (i, c) in block.iter().enumerate() {
            if over_set.contains(&c.0) {
                out.push(*c);
                continue;
            }
            if let Some(&d) = image.get(&c.0) {
                out.push(ElemId(d));
                continue;
            }
            let earlier: HashSet<u32> = block[..i].iter().map(|e| e.0).collect();
            let mut facts = Vec::new();
            for (r, t) in &self.touching[c.0 as usize] {
                let ok = t.iter().all(|e| *e == c.0 || over_set.contains(e) || earlier.contains(e));
                if ok {
                    let mapped = t.iter().map(|e| if *e == c.0 { TEMP } else { *image.get(e).unwrap_or(e) }).collect();
                    facts.push((*r, mapped));
                }
            }
            let d = self.create(facts);
            image.insert(c.0, d.0);
            out.push(d);
        }
        Ok(out)
    }

    fn fresh_instance(&self, seed: u64) -> Box<dyn WitnessOracle> {
        Box::new(FraisseOracle::new(&self.name, self.age.clone(), seed))
    }
}

pub(crate) fn pack(bits: &[bool]) -> Vec<u64> {
    let mut out = vec![bits.len() as u64];
    for chunk in bits.chunks(64) {
        out.push(chunk.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | (b as u64) << i));
    }
    out
}
