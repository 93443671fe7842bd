//! Two-cardinal identities: the E_n relation on distinct tuples, the
//! finite instantiation of Γ_𝒯, and a brute-force splitting chain search.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;

use super::AnalysisError;
use crate::fmac::{split_at, Fmac, Node};
use crate::logic::normal::{slot, slot_index};
use crate::logic::{parse_term, Assignment, FiniteStructure, Formula, Signature, Term, VarSym};

/// A finite set of terms, each with the number of placeholder slots it
/// takes (?w1..?wk).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermFamily {
    pub signature: Signature,
    pub terms: Vec<(Term, usize)>,
}

fn placeholders(t: &Term) -> Vec<usize> {
    let mut out = Vec::new();
    t.visit_vars(&mut |v| {
        out.push(match v {
            VarSym::Bound(n) => slot_index(n).unwrap_or(usize::MAX),
            _ => usize::MAX,
        })
    });
    out
}

impl TermFamily {
    pub fn new(signature: Signature, terms: Vec<(Term, usize)>) -> Result<TermFamily, AnalysisError> {
        for (t, k) in &terms {
            if *k == 0 {
                return Err(AnalysisError::BadInput(format!("{t}: arity must be at least 1")));
            }
            if placeholders(t).iter().any(|&j| j >= *k) {
                return Err(AnalysisError::BadInput(format!("{t} uses a variable outside ?w1..?w{k}")));
            }
        }
        Ok(TermFamily { signature, terms })
    }

    /// Lines `fun NAME ARITY` and `term K TERM`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<TermFamily, AnalysisError> {
        let mut sig = Signature::new();
        let mut raw = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            let bad = |msg: &str| AnalysisError::TermFile { line: i + 1, msg: msg.to_string() };
            let mut parts = line.splitn(3, char::is_whitespace);
            match parts.next() {
                None | Some("") => {}
                Some("fun") => {
                    let name = parts.next().ok_or_else(|| bad("fun needs NAME ARITY"))?;
                    let a = parts.next().and_then(|a| a.trim().parse().ok()).ok_or_else(|| bad("bad arity"))?;
                    sig.add_fun(name, a).map_err(|e| bad(&e.to_string()))?;
                }
                Some("term") => {
                    let k: usize = parts.next().and_then(|a| a.parse().ok()).ok_or_else(|| bad("term needs K TERM"))?;
                    let t = parts.next().ok_or_else(|| bad("term needs K TERM"))?.trim().to_string();
                    raw.push((i + 1, k, t));
                }
                Some(other) => return Err(bad(&format!("unknown directive {other:?}"))),
            }
        }
        let mut terms = Vec::new();
        for (line, k, t) in raw {
            let t = parse_term(&t, &sig).map_err(|e| AnalysisError::TermFile { line, msg: e.to_string() })?;
            terms.push((t, k));
        }
        TermFamily::new(sig, terms)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (g, a) in self.signature.funs() {
            s += &format!("fun {g} {a}\n");
        }
        for (t, k) in &self.terms {
            s += &format!("term {k} {t}\n");
        }
        s
    }

    /// Every function symbol must be interpreted in `m` with its arity,
    /// and `m` must declare the U-sort.
    fn check(&self, m: &FiniteStructure) -> Result<(), AnalysisError> {
        if m.usort().is_none() {
            return Err(AnalysisError::MissingInterpretation("the structure declares no usort".into()));
        }
        for (g, a) in self.signature.funs() {
            if m.signature().fun_arity(g) != Some(a) {
                return Err(AnalysisError::MissingInterpretation(format!("function {g}/{a}")));
            }
        }
        Ok(())
    }
}

fn eval_on(m: &FiniteStructure, t: &Term, args: &[usize]) -> Result<usize, AnalysisError> {
    let asg: Assignment = args.iter().enumerate().map(|(j, &e)| (VarSym::Bound(slot(j)), e)).collect();
    m.eval_term(t, &asg).map_err(|e| AnalysisError::MissingInterpretation(e.to_string()))
}

/// Increasing index sequences of length k below n.
fn subsequences(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// E_n by its literal definition.
pub fn en_related(m: &FiniteStructure, fam: &TermFamily, c: &[usize], d: &[usize]) -> Result<bool, AnalysisError> {
    fam.check(m)?;
    if c.len() != d.len() {
        return Err(AnalysisError::BadInput("tuples of different lengths".into()));
    }
    let u = m.usort().expect("checked");
    for (t, k) in &fam.terms {
        for ix in subsequences(c.len(), *k) {
            let cs: Vec<usize> = ix.iter().map(|&i| c[i]).collect();
            let ds: Vec<usize> = ix.iter().map(|&i| d[i]).collect();
            let (vc, vd) = (eval_on(m, t, &cs)?, eval_on(m, t, &ds)?);
            let both_out = !u.contains(&vc) && !u.contains(&vd);
            if !both_out && vc != vd {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Class key: for each term and subsequence, the value if it lies in U.
fn en_key(m: &FiniteStructure, fam: &TermFamily, u: &BTreeSet<usize>, c: &[usize]) -> Result<Vec<Option<usize>>, AnalysisError> {
    let mut key = Vec::new();
    for (t, k) in &fam.terms {
        for ix in subsequences(c.len(), *k) {
            let cs: Vec<usize> = ix.iter().map(|&i| c[i]).collect();
            let v = eval_on(m, t, &cs)?;
            key.push(u.contains(&v).then_some(v));
        }
    }
    Ok(key)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnPartition {
    pub n: usize,
    /// Classes in order of their least member; members in lexicographic order.
    pub classes: Vec<Vec<Vec<usize>>>,
    /// (|U|+1) to the number of (term, subsequence) slots.
    pub bound: BigUint,
}

impl EnPartition {
    pub fn to_text(&self, m: &FiniteStructure) -> String {
        let mut s = format!("n {}\nclasses {}\nbound {}\n", self.n, self.classes.len(), self.bound);
        for (i, cl) in self.classes.iter().enumerate() {
            let items: Vec<String> =
                cl.iter().map(|t| t.iter().map(|&e| m.name(e)).collect::<Vec<_>>().join(",")).collect();
            s += &format!("class {i} size {} : {}\n", cl.len(), items.join(" "));
        }
        s
    }
}

/// E_n classes of the distinct n-tuples of M.
pub fn en_partition(m: &FiniteStructure, fam: &TermFamily, n: usize) -> Result<EnPartition, AnalysisError> {
    fam.check(m)?;
    let u = m.usort().expect("checked").clone();
    let slots: usize = fam.terms.iter().map(|(_, k)| subsequences(n, *k).len()).sum();
    let bound = BigUint::from(u.len() + 1).pow(slots as u32);
    let mut index: HashMap<Vec<Option<usize>>, usize> = HashMap::new();
    let mut classes: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut err = None;
    crate::logic::diagram::for_each_tuple(m.len(), n, |t| {
        if err.is_some() || (1..t.len()).any(|i| t[..i].contains(&t[i])) {
            return;
        }
        match en_key(m, fam, &u, t) {
            Ok(key) => {
                let next = classes.len();
                let i = *index.entry(key).or_insert(next);
                if i == classes.len() {
                    classes.push(Vec::new());
                }
                classes[i].push(t.to_vec());
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(EnPartition { n, classes, bound })
}

fn u_atom(t: Term) -> Formula {
    Formula::rel("U", vec![t])
}

fn x1(a: &Node) -> Term {
    Term::Var(VarSym::X1(*a))
}

fn apply_term(t: &Term, xs: &[Node]) -> Term {
    t.map_vars(&mut |v| match v {
        VarSym::Bound(n) => slot_index(n).and_then(|j| xs.get(j)).map(x1).unwrap_or_else(|| Term::Var(v.clone())),
        _ => Term::Var(v.clone()),
    })
}

/// Γ_𝒯 over the singly indexed symbols x_a, a ∈ 2^m: ¬U(x_a), pairwise
/// inequalities, and U(τ(x̄)) → τ(x̄) = τ(x̄′) for every ordered pair of
/// distinct tuples that are similar mod ℓ for some ℓ ≤ m. Duplicates are
/// dropped, first occurrence kept.
pub fn gamma_instantiate(fam: &TermFamily, m: usize) -> Vec<Formula> {
    let nodes = Node::level(m);
    let mut out = Vec::new();
    for a in &nodes {
        out.push(Formula::not(u_atom(x1(a))));
    }
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            out.push(Formula::not(Formula::eq(x1(a), x1(b))));
        }
    }
    let mut seen: HashSet<Formula> = out.iter().cloned().collect();
    for l in 0..=m {
        for (t, k) in &fam.terms {
            let mut groups: BTreeMap<Vec<Node>, Vec<Vec<Node>>> = BTreeMap::new();
            crate::logic::diagram::for_each_tuple(nodes.len(), *k, |ix| {
                let tup: Vec<Node> = ix.iter().map(|&i| nodes[i]).collect();
                let key: Vec<Node> = tup.iter().map(|a| a.restrict(l)).collect();
                if (1..key.len()).any(|i| key[..i].contains(&key[i])) {
                    return;
                }
                groups.entry(key).or_default().push(tup);
            });
            for g in groups.values() {
                for p in g {
                    for q in g {
                        if p == q {
                            continue;
                        }
                        let (tp, tq) = (apply_term(t, p), apply_term(t, q));
                        let f = Formula::imp(u_atom(tp.clone()), Formula::eq(tp, tq));
                        if seen.insert(f.clone()) {
                            out.push(f);
                        }
                    }
                }
            }
        }
    }
    out
}

fn eval_gamma(m: &FiniteStructure, u: &BTreeSet<usize>, phi: &Formula, asg: &Assignment) -> Result<bool, AnalysisError> {
    let term = |t: &Term| m.eval_term(t, asg).map_err(|e| AnalysisError::MissingInterpretation(e.to_string()));
    Ok(match phi {
        Formula::Rel(r, ts) if &**r == "U" && ts.len() == 1 && m.signature().rel_arity("U").is_none() => {
            u.contains(&term(&ts[0])?)
        }
        Formula::Not(g) => !eval_gamma(m, u, g, asg)?,
        Formula::And(a, b) => eval_gamma(m, u, a, asg)? && eval_gamma(m, u, b, asg)?,
        Formula::Or(a, b) => eval_gamma(m, u, a, asg)? || eval_gamma(m, u, b, asg)?,
        Formula::Imp(a, b) => !eval_gamma(m, u, a, asg)? || eval_gamma(m, u, b, asg)?,
        other => m.eval(other, asg)?,
    })
}

/// The first formula of Γ that fails under `asg` (x_a ↦ element), if any.
pub fn check_gamma(
    m: &FiniteStructure,
    formulas: &[Formula],
    asg: &BTreeMap<Node, usize>,
) -> Result<Option<Formula>, AnalysisError> {
    let u = m.usort().ok_or_else(|| AnalysisError::MissingInterpretation("the structure declares no usort".into()))?;
    let a: Assignment = asg.iter().map(|(n, e)| (VarSym::X1(*n), *e)).collect();
    for f in formulas {
        if !eval_gamma(m, u, f, &a)? {
            return Ok(Some(f.clone()));
        }
    }
    Ok(None)
}

/// The canonical chain from {⟨⟩} to 2^m: split the shortest, then
/// lexicographically least, node of length below m.
pub fn splitting_chain(m: usize) -> Vec<Node> {
    let mut f = Fmac::root();
    let mut out = Vec::new();
    while let Some(a) = f.nodes().iter().filter(|a| a.len() < m).min_by_key(|a| (a.len(), **a)).copied() {
        out.push(a);
        f = split_at(&f, &a).expect("node of the antichain").0;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSearch {
    pub chain: Vec<Node>,
    /// c_0..c_n in order of introduction.
    pub elements: Vec<usize>,
    pub assignment: BTreeMap<Node, usize>,
    /// Search nodes visited.
    pub visited: usize,
}

impl ChainSearch {
    pub fn to_text(&self, m: &FiniteStructure) -> String {
        let mut s = format!("visited {}\n", self.visited);
        for (a, e) in &self.assignment {
            s += &format!("x:{a} = {}\n", m.name(*e));
        }
        s
    }
}

impl fmt::Display for ChainSearch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, e) in &self.assignment {
            writeln!(f, "x:{a} = {e}")?;
        }
        Ok(())
    }
}

struct Search<'a> {
    m: &'a FiniteStructure,
    fam: &'a TermFamily,
    chain: Vec<Node>,
    gamma: Vec<Formula>,
    pool: Vec<usize>,
    bound: usize,
    visited: usize,
}

impl Search<'_> {
    /// `code[p]` is the node coded by element `cs[p]`.
    fn dfs(&mut self, cs: &mut Vec<usize>, code: &mut Vec<Node>) -> Result<Option<Vec<usize>>, AnalysisError> {
        self.visited += 1;
        if self.visited > self.bound {
            return Err(AnalysisError::SearchSpaceExceeded(self.bound));
        }
        let l = cs.len() - 1;
        if l == self.chain.len() {
            let asg: BTreeMap<Node, usize> = code.iter().copied().zip(cs.iter().copied()).collect();
            return Ok(check_gamma(self.m, &self.gamma, &asg)?.is_none().then(|| cs.clone()));
        }
        let a = self.chain[l];
        let p = code.iter().position(|n| *n == a).expect("split node is coded");
        for e in self.pool.clone() {
            if cs.contains(&e) {
                continue;
            }
            let mut star = cs.clone();
            star[p] = e;
            if !en_related(self.m, self.fam, cs, &star)? {
                continue;
            }
            code[p] = a.child(0);
            code.push(a.child(1));
            cs.push(e);
            let r = self.dfs(cs, code)?;
            cs.pop();
            code.pop();
            code[p] = a;
            if r.is_some() {
                return Ok(r);
            }
        }
        Ok(None)
    }
}

/// Elements c_a (a ∈ 2^m) outside U, built along the canonical chain:
/// splitting a keeps a's element on a0 and gives a1 the new element c_ℓ,
/// which must be E_ℓ-equivalent as a replacement for a's element. Leaves
/// are checked against Γ; failures backtrack.
pub fn splitting_chain_search(
    m: &FiniteStructure,
    fam: &TermFamily,
    depth: usize,
    bound: usize,
) -> Result<Option<ChainSearch>, AnalysisError> {
    fam.check(m)?;
    let u = m.usort().expect("checked");
    let pool: Vec<usize> = (0..m.len()).filter(|e| !u.contains(e)).collect();
    let mut s = Search { m, fam, chain: splitting_chain(depth), gamma: gamma_instantiate(fam, depth), pool, bound, visited: 0 };
    for c0 in s.pool.clone() {
        let mut cs = vec![c0];
        let mut code = vec![Node::from_value(0, 0)];
        if let Some(elements) = s.dfs(&mut cs, &mut code)? {
            let mut code = vec![Node::from_value(0, 0)];
            for (a, _) in s.chain.iter().zip(1..) {
                let p = code.iter().position(|n| n == a).expect("coded");
                code[p] = a.child(0);
                code.push(a.child(1));
            }
            let assignment = code.into_iter().zip(elements.iter().copied()).collect();
            return Ok(Some(ChainSearch { chain: s.chain, elements, assignment, visited: s.visited }));
        }
    }
    Ok(None)
}
