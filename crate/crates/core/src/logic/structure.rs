//! Explicit finite structures: file format, builder, and Tarskian evaluation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use super::syntax::{Formula, Signature, Term, VarSym};
use super::LogicError;

/// Variable assignment into a finite structure (element indices).
pub type Assignment = HashMap<VarSym, usize>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FiniteStructure {
    sig: Signature,
    names: Vec<String>,
    index: HashMap<String, usize>,
    facts: BTreeMap<Arc<str>, BTreeSet<Vec<usize>>>,
    maps: BTreeMap<Arc<str>, BTreeMap<Vec<usize>, usize>>,
    aclcore: BTreeSet<usize>,
    usort: Option<BTreeSet<usize>>,
}

fn serr(line: usize, msg: impl Into<String>) -> LogicError {
    LogicError::Structure { line, msg: msg.into() }
}

impl FiniteStructure {
    pub fn new(sig: Signature) -> FiniteStructure {
        FiniteStructure { sig, ..Default::default() }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, e: usize) -> &str {
        &self.names[e]
    }

    pub fn elem(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn add_elem(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }

    pub fn add_fact(&mut self, rel: &str, tuple: &[usize]) -> Result<(), LogicError> {
        let a = self.sig.rel_arity(rel).ok_or_else(|| LogicError::UnknownSymbol(rel.to_string()))?;
        if a != tuple.len() {
            return Err(LogicError::ArityMismatch { symbol: rel.to_string(), expected: a, found: tuple.len() });
        }
        self.facts.entry(rel.into()).or_default().insert(tuple.to_vec());
        Ok(())
    }

    pub fn set_map(&mut self, fun: &str, args: &[usize], value: usize) -> Result<(), LogicError> {
        let a = self.sig.fun_arity(fun).ok_or_else(|| LogicError::UnknownSymbol(fun.to_string()))?;
        if a != args.len() {
            return Err(LogicError::ArityMismatch { symbol: fun.to_string(), expected: a, found: args.len() });
        }
        self.maps.entry(fun.into()).or_default().insert(args.to_vec(), value);
        Ok(())
    }

    pub fn holds(&self, rel: &str, tuple: &[usize]) -> bool {
        self.facts.get(rel).is_some_and(|s| s.contains(tuple))
    }

    pub fn apply(&self, fun: &str, args: &[usize]) -> Option<usize> {
        self.maps.get(fun).and_then(|m| m.get(args)).copied()
    }

    pub fn facts(&self, rel: &str) -> impl Iterator<Item = &Vec<usize>> {
        self.facts.get(rel).into_iter().flatten()
    }

    pub fn aclcore(&self) -> &BTreeSet<usize> {
        &self.aclcore
    }

    pub fn set_aclcore(&mut self, core: impl IntoIterator<Item = usize>) {
        self.aclcore = core.into_iter().collect();
    }

    pub fn usort(&self) -> Option<&BTreeSet<usize>> {
        self.usort.as_ref()
    }

    /// Declare the U-sort; also interpreted as the unary relation `U`.
    pub fn set_usort(&mut self, u: impl IntoIterator<Item = usize>) -> Result<(), LogicError> {
        self.sig.add_rel("U", 1)?;
        let u: BTreeSet<usize> = u.into_iter().collect();
        self.facts.insert("U".into(), u.iter().map(|&e| vec![e]).collect());
        self.usort = Some(u);
        Ok(())
    }

    /// Functions are total on the listed elements.
    pub fn check_total(&self) -> Result<(), LogicError> {
        let n = self.len();
        for (g, a) in self.sig.funs() {
            let have = self.maps.get(g).map_or(0, |m| m.len());
            let need = n.checked_pow(a as u32).unwrap_or(usize::MAX);
            if have != need {
                return Err(LogicError::Structure { line: 0, msg: format!("function {g} is not total ({have} of {need} values)") });
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<FiniteStructure, LogicError> {
        let lines: Vec<(usize, Vec<&str>)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
            .filter(|(_, t)| !t.is_empty())
            .collect();
        let mut m = FiniteStructure::default();
        let arity = |line: usize, s: &str| s.parse::<usize>().map_err(|_| serr(line, format!("bad arity {s:?}")));
        // declarations first, so the file is order-insensitive
        for (ln, t) in &lines {
            match t[0] {
                "rel" if t.len() == 3 => m.sig.add_rel(t[1], arity(*ln, t[2])?).map_err(|e| serr(*ln, e.to_string()))?,
                "fun" if t.len() == 3 => m.sig.add_fun(t[1], arity(*ln, t[2])?).map_err(|e| serr(*ln, e.to_string()))?,
                "rel" | "fun" => return Err(serr(*ln, "expected NAME ARITY")),
                "elem" => t[1..].iter().for_each(|e| {
                    m.add_elem(e);
                }),
                "fact" | "map" | "aclcore" | "usort" => {}
                other => return Err(serr(*ln, format!("unknown directive {other:?}"))),
            }
        }
        let look = |m: &FiniteStructure, ln: usize, ids: &[&str]| {
            ids.iter()
                .map(|e| m.elem(e).ok_or_else(|| serr(ln, format!("undeclared element {e:?}"))))
                .collect::<Result<Vec<_>, _>>()
        };
        let mut usort: Option<Vec<usize>> = None;
        for (ln, t) in &lines {
            match t[0] {
                "fact" => {
                    let name = t.get(1).ok_or_else(|| serr(*ln, "fact needs a relation"))?;
                    let ids = look(&m, *ln, &t[2..])?;
                    m.add_fact(name, &ids).map_err(|e| serr(*ln, e.to_string()))?;
                }
                "map" => {
                    let name = t.get(1).ok_or_else(|| serr(*ln, "map needs a function"))?;
                    let ids = look(&m, *ln, &t[2..])?;
                    let (val, args) = ids.split_last().ok_or_else(|| serr(*ln, "map needs a value"))?;
                    if m.apply(name, args).is_some_and(|old| old != *val) {
                        return Err(serr(*ln, "conflicting function value"));
                    }
                    m.set_map(name, args, *val).map_err(|e| serr(*ln, e.to_string()))?;
                }
                "aclcore" => {
                    let ids = look(&m, *ln, &t[1..])?;
                    m.aclcore.extend(ids);
                }
                "usort" => {
                    let ids = look(&m, *ln, &t[1..])?;
                    usort.get_or_insert_with(Vec::new).extend(ids);
                }
                _ => {}
            }
        }
        if let Some(u) = usort {
            m.set_usort(u).map_err(|e| serr(0, e.to_string()))?;
        }
        m.check_total()?;
        Ok(m)
    }

    /// Canonical text form, accepted by [`FiniteStructure::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (r, a) in self.sig.rels() {
            if !(self.usort.is_some() && &**r == "U") {
                let _ = writeln!(s, "rel {r} {a}");
            }
        }
        for (g, a) in self.sig.funs() {
            let _ = writeln!(s, "fun {g} {a}");
        }
        if !self.names.is_empty() {
            let _ = writeln!(s, "elem {}", self.names.join(" "));
        }
        for (r, set) in &self.facts {
            if self.usort.is_some() && &**r == "U" {
                continue;
            }
            for t in set {
                let _ = writeln!(s, "fact {r} {}", self.names_of(t));
            }
        }
        for (g, m) in &self.maps {
            for (args, v) in m {
                let sep = if args.is_empty() { "" } else { " " };
                let _ = writeln!(s, "map {g} {}{sep}{}", self.names_of(args), self.names[*v]);
            }
        }
        if !self.aclcore.is_empty() {
            let ids: Vec<usize> = self.aclcore.iter().copied().collect();
            let _ = writeln!(s, "aclcore {}", self.names_of(&ids));
        }
        if let Some(u) = &self.usort {
            let ids: Vec<usize> = u.iter().copied().collect();
            let _ = writeln!(s, "usort {}", self.names_of(&ids));
        }
        s
    }

    fn names_of(&self, t: &[usize]) -> String {
        t.iter().map(|&e| self.names[e].as_str()).collect::<Vec<_>>().join(" ")
    }

    pub fn eval_term(&self, t: &Term, asg: &Assignment) -> Result<usize, LogicError> {
        self.term(t, asg, &mut Vec::new())
    }

    fn term(&self, t: &Term, asg: &Assignment, env: &mut Vec<(Arc<str>, usize)>) -> Result<usize, LogicError> {
        match t {
            Term::Var(v) => lookup(v, asg, env),
            Term::App(g, args) => {
                let vals = args.iter().map(|a| self.term(a, asg, env)).collect::<Result<Vec<_>, _>>()?;
                self.apply(g, &vals).ok_or_else(|| LogicError::UndefinedFunctionValue(g.to_string()))
            }
        }
    }

    /// Standard satisfaction; quantifiers range over all elements.
    pub fn eval(&self, phi: &Formula, asg: &Assignment) -> Result<bool, LogicError> {
        self.go(phi, asg, &mut Vec::new())
    }

    fn go(&self, phi: &Formula, asg: &Assignment, env: &mut Vec<(Arc<str>, usize)>) -> Result<bool, LogicError> {
        Ok(match phi {
            Formula::Eq(a, b) => self.term(a, asg, env)? == self.term(b, asg, env)?,
            Formula::Rel(r, ts) => {
                let vals = ts.iter().map(|t| self.term(t, asg, env)).collect::<Result<Vec<_>, _>>()?;
                self.holds(r, &vals)
            }
            Formula::Not(g) => !self.go(g, asg, env)?,
            Formula::And(a, b) => self.go(a, asg, env)? && self.go(b, asg, env)?,
            Formula::Or(a, b) => self.go(a, asg, env)? || self.go(b, asg, env)?,
            Formula::Imp(a, b) => !self.go(a, asg, env)? || self.go(b, asg, env)?,
            Formula::Exists(x, g) | Formula::Forall(x, g) => {
                let want = matches!(phi, Formula::Exists(..));
                for e in 0..self.len() {
                    env.push((x.clone(), e));
                    let r = self.go(g, asg, env);
                    env.pop();
                    if r? == want {
                        return Ok(want);
                    }
                }
                !want
            }
        })
    }

    /// Quantifier-free type of a tuple: equalities and every atomic fact
    /// among its entries (relations only).
    pub fn qf_type(&self, tuple: &[usize]) -> Vec<bool> {
        let n = tuple.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                out.push(tuple[i] == tuple[j]);
            }
        }
        for (r, a) in self.sig.rels() {
            let mut idx = vec![0usize; a];
            if n == 0 && a > 0 {
                continue;
            }
            loop {
                let t: Vec<usize> = idx.iter().map(|&i| tuple[i]).collect();
                out.push(self.holds(r, &t));
                let mut k = a;
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < n {
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
}

fn lookup(v: &VarSym, asg: &Assignment, env: &[(Arc<str>, usize)]) -> Result<usize, LogicError> {
    if let VarSym::Bound(n) = v {
        if let Some((_, e)) = env.iter().rev().find(|(k, _)| k == n) {
            return Ok(*e);
        }
    }
    asg.get(v).copied().ok_or_else(|| LogicError::UnassignedFreeVariable(v.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_formula;

    #[test]
    fn eval_examples() {
        let mut m = FiniteStructure::new(Signature::new());
        let a = m.add_elem("a");
        let b = m.add_elem("b");
        let phi = parse_formula("(not (= ?v ?w))", m.signature()).unwrap();
        let asg: Assignment = [(VarSym::var("v"), a), (VarSym::var("w"), b)].into_iter().collect();
        assert!(m.eval(&phi, &asg).unwrap());
        let ex = parse_formula("(exists ?w (= ?w ?w))", m.signature()).unwrap();
        assert!(m.eval(&ex, &Assignment::new()).unwrap());
        assert!(matches!(m.eval(&phi, &Assignment::new()), Err(LogicError::UnassignedFreeVariable(_))));
    }

    #[test]
    fn file_round_trip() {
        let text = "# parity\nfun f 1\nelem 0 1 2 3\nusort 0 1\nmap f 0 0\nmap f 1 1\nmap f 2 0\nmap f 3 1\nrel R 2\nfact R 0 1\naclcore 3\n";
        let m = FiniteStructure::parse(text).unwrap();
        assert_eq!(m.len(), 4);
        assert!(m.holds("U", &[1]));
        assert!(!m.holds("U", &[2]));
        assert_eq!(m.apply("f", &[2]), Some(0));
        let again = FiniteStructure::parse(&m.to_text()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn file_errors() {
        assert!(FiniteStructure::parse("rel R 2\nelem a\nfact R a b\n").is_err());
        assert!(FiniteStructure::parse("fun f 1\nelem a b\nmap f a a\n").is_err());
        assert!(FiniteStructure::parse("bogus\n").is_err());
    }

    #[test]
    fn qf_type_separates_edges() {
        let mut m = FiniteStructure::new(Signature::new().with_rel("E", 2));
        let a = m.add_elem("a");
        let b = m.add_elem("b");
        let c = m.add_elem("c");
        m.add_fact("E", &[a, b]).unwrap();
        assert_ne!(m.qf_type(&[a, b]), m.qf_type(&[a, c]));
        assert_eq!(m.qf_type(&[b, c]), m.qf_type(&[c, b]));
    }
}
