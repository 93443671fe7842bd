//! Literal diagrams over instantiated symbols and their quotient structures.

use std::collections::{BTreeMap, BTreeSet};

use super::structure::FiniteStructure;
use super::syntax::{Formula, Signature, Term, VarSym};
use super::LogicError;

/// A set of literals: atoms over instantiated symbols with a polarity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Diagram {
    literals: BTreeSet<(Formula, bool)>,
}

/// The quotient of a diagram: structure on ~-classes plus what stayed open.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub structure: FiniteStructure,
    /// Element index of every mentioned symbol.
    pub class_of: BTreeMap<VarSym, usize>,
    /// Atoms over class representatives decided neither way.
    pub undecided: Vec<String>,
    /// Literals with nested terms, which the quotient does not interpret.
    pub skipped: Vec<String>,
}

struct Uf {
    parent: Vec<usize>,
}

impl Uf {
    fn find(&mut self, x: usize) -> usize {
        let p = self.parent[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.parent[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        // smaller index wins so representatives are the least symbols
        if a < b {
            self.parent[b] = a;
        } else {
            self.parent[a] = b;
        }
    }
}

fn flat(t: &Term) -> Option<&VarSym> {
    match t {
        Term::Var(v) => Some(v),
        _ => None,
    }
}

impl Diagram {
    pub fn new() -> Diagram {
        Diagram::default()
    }

    /// Insert a literal; `phi` must be atomic.
    pub fn insert(&mut self, atom: Formula, positive: bool) {
        debug_assert!(atom.is_atomic());
        self.literals.insert((atom, positive));
    }

    /// Insert `phi` if it is a literal (atom or negated atom).
    pub fn insert_literal(&mut self, phi: &Formula) -> bool {
        match phi {
            Formula::Not(g) if g.is_atomic() => {
                self.insert((**g).clone(), false);
                true
            }
            g if g.is_atomic() => {
                self.insert(g.clone(), true);
                true
            }
            _ => false,
        }
    }

    pub fn contains(&self, atom: &Formula, positive: bool) -> bool {
        self.literals.contains(&(atom.clone(), positive))
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn literals(&self) -> impl Iterator<Item = &(Formula, bool)> {
        self.literals.iter()
    }

    pub fn symbols(&self) -> BTreeSet<VarSym> {
        let mut out = BTreeSet::new();
        for (a, _) in &self.literals {
            out.extend(a.symbols());
        }
        out
    }

    /// First atom present with both polarities.
    pub fn inconsistency(&self) -> Option<&Formula> {
        self.literals.iter().find(|(a, p)| *p && self.literals.contains(&(a.clone(), false))).map(|(a, _)| a)
    }

    /// Congruence classes from positive equalities between symbols.
    pub fn congruence(&self) -> BTreeMap<VarSym, VarSym> {
        let syms: Vec<VarSym> = self.symbols().into_iter().collect();
        let pos = |v: &VarSym| syms.binary_search(v).unwrap();
        let mut uf = Uf { parent: (0..syms.len()).collect() };
        for (a, p) in &self.literals {
            if let (Formula::Eq(l, r), true) = (a, p) {
                if let (Some(l), Some(r)) = (flat(l), flat(r)) {
                    uf.union(pos(l), pos(r));
                }
            }
        }
        syms.iter().enumerate().map(|(i, s)| (s.clone(), syms[uf.find(i)].clone())).collect()
    }

    /// Close under the congruence: transport every flat literal to all
    /// ~-equivalent argument tuples.
    pub fn closed(&self) -> Diagram {
        let cong = self.congruence();
        let mut classes: BTreeMap<&VarSym, Vec<&VarSym>> = BTreeMap::new();
        for (s, r) in &cong {
            classes.entry(r).or_default().push(s);
        }
        let mut out = self.clone();
        for (a, p) in &self.literals {
            let syms = a.symbols();
            if syms.len() > 3 {
                continue; // keeps the closure small; quotient checks cover the rest
            }
            let choices: Vec<&Vec<&VarSym>> = syms.iter().map(|s| &classes[&cong[s]]).collect();
            let mut idx = vec![0usize; syms.len()];
            loop {
                let img: Vec<(VarSym, VarSym)> =
                    syms.iter().zip(&idx).zip(&choices).map(|((s, &i), c)| (s.clone(), c[i].clone())).collect();
                let b = a.substitute(&mut |v| img.iter().find(|(s, _)| s == v).map(|(_, t)| Term::Var(t.clone())));
                out.literals.insert((b, *p));
                let mut k = syms.len();
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < choices[k].len() {
                        break;
                    }
                    idx[k] = 0;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
        out
    }

    /// Structure on ~-classes. Relation facts come from positive literals;
    /// flat function literals `(= (f z̄) z)` give function values.
    pub fn quotient(&self, sig: &Signature) -> Result<Quotient, LogicError> {
        if let Some(a) = self.inconsistency() {
            return Err(LogicError::InconsistentDiagram(a.to_string()));
        }
        let cong = self.congruence();
        let mut m = FiniteStructure::new(sig.clone());
        let mut class_of = BTreeMap::new();
        let mut rep_elem: BTreeMap<VarSym, usize> = BTreeMap::new();
        for (s, r) in &cong {
            let e = *rep_elem.entry(r.clone()).or_insert_with(|| m.add_elem(&r.to_string()));
            class_of.insert(s.clone(), e);
        }
        let mut decided: BTreeMap<(String, Vec<usize>), (bool, String)> = BTreeMap::new();
        let mut fun_vals: BTreeMap<(String, Vec<usize>), (usize, String)> = BTreeMap::new();
        let mut skipped = Vec::new();
        for (a, p) in &self.literals {
            let (key, text) = match a {
                Formula::Rel(r, ts) => match ts.iter().map(flat).collect::<Option<Vec<_>>>() {
                    Some(vs) => ((r.to_string(), vs.iter().map(|v| class_of[*v]).collect()), a.to_string()),
                    None => {
                        skipped.push(a.to_string());
                        continue;
                    }
                },
                Formula::Eq(l, r) => {
                    match (l, r) {
                        (Term::Var(x), Term::Var(y)) => {
                            let (cx, cy) = (class_of[x], class_of[y]);
                            if !*p && cx == cy {
                                return Err(LogicError::CongruenceViolation(a.to_string(), format!("{x} ~ {y}")));
                            }
                            let k = (cx.min(cy), cx.max(cy));
                            decided.insert(("=".into(), vec![k.0, k.1]), (*p, a.to_string()));
                        }
                        (Term::App(g, args), Term::Var(z)) | (Term::Var(z), Term::App(g, args)) if *p => {
                            match args.iter().map(flat).collect::<Option<Vec<_>>>() {
                                Some(vs) => {
                                    let key = (g.to_string(), vs.iter().map(|v| class_of[*v]).collect::<Vec<_>>());
                                    let val = class_of[z];
                                    if let Some((old, txt)) = fun_vals.get(&key) {
                                        if *old != val {
                                            return Err(LogicError::CongruenceViolation(txt.clone(), a.to_string()));
                                        }
                                    }
                                    fun_vals.insert(key, (val, a.to_string()));
                                }
                                None => skipped.push(a.to_string()),
                            }
                        }
                        _ => skipped.push(a.to_string()),
                    }
                    continue;
                }
                _ => unreachable!("diagram holds atoms only"),
            };
            if let Some((q, other)) = decided.get(&key) {
                if q != p {
                    return Err(LogicError::CongruenceViolation(other.clone(), text));
                }
            }
            decided.insert(key, (*p, text));
        }
        for ((r, t), (p, _)) in &decided {
            if r != "=" && *p {
                m.add_fact(r, t)?;
            }
        }
        for ((g, args), (v, _)) in &fun_vals {
            m.set_map(g, args, *v)?;
        }
        let n = m.len();
        let mut undecided = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if !decided.contains_key(&("=".to_string(), vec![i, j])) {
                    undecided.push(format!("(= {} {})", m.name(i), m.name(j)));
                }
            }
        }
        for (r, a) in sig.rels() {
            for_each_tuple(n, a, |t| {
                if !decided.contains_key(&(r.to_string(), t.to_vec())) {
                    let names: Vec<&str> = t.iter().map(|&e| m.name(e)).collect();
                    let sep = if names.is_empty() { "" } else { " " };
                    undecided.push(format!("({r}{sep}{})", names.join(" ")));
                }
            });
        }
        Ok(Quotient { structure: m, class_of, undecided, skipped })
    }
}

/// Call `f` on every tuple in 0..n of length `a`, lexicographically.
pub fn for_each_tuple(n: usize, a: usize, mut f: impl FnMut(&[usize])) {
    if a > 0 && n == 0 {
        return;
    }
    let mut idx = vec![0usize; a];
    loop {
        f(&idx);
        let mut k = a;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_formula;

    fn sig() -> Signature {
        Signature::new().with_rel("R", 1)
    }

    fn dia(lits: &[&str]) -> Diagram {
        let mut d = Diagram::new();
        for l in lits {
            assert!(d.insert_literal(&parse_formula(l, &sig()).unwrap()));
        }
        d
    }

    #[test]
    fn quotient_examples() {
        let q = dia(&["(= x:0:0 x:1:0)", "(R x:0:0)"]).quotient(&sig()).unwrap();
        assert_eq!(q.structure.len(), 1);
        assert!(q.structure.holds("R", &[0]));

        let bad = dia(&["(= x:0:0 x:1:0)", "(R x:0:0)", "(not (R x:1:0))"]).quotient(&sig());
        assert!(matches!(bad, Err(LogicError::CongruenceViolation(..))));

        let q = dia(&["(not (= x:0:0 x:1:0))", "(not (= x:1:0 x:11:0))", "(not (= x:0:0 x:11:0))"])
            .quotient(&Signature::new())
            .unwrap();
        assert_eq!(q.structure.len(), 3);
        assert!(q.undecided.is_empty());
    }

    #[test]
    fn inconsistency_detected() {
        let d = dia(&["(R x:0:0)", "(not (R x:0:0))"]);
        assert!(matches!(d.quotient(&sig()), Err(LogicError::InconsistentDiagram(_))));
    }

    #[test]
    fn undecided_reported_not_guessed() {
        let q = dia(&["(R x:0:0)", "(not (= x:0:0 x:1:0))"]).quotient(&sig()).unwrap();
        assert_eq!(q.undecided, vec!["(R x:1:0)".to_string()]);
    }

    #[test]
    fn closure_transports_literals() {
        let d = dia(&["(= x:0:0 x:1:0)", "(R x:0:0)"]).closed();
        assert!(d.contains(&parse_formula("(R x:1:0)", &sig()).unwrap(), true));
    }
}
