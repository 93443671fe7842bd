//! Terms, formulas and the instantiated variable systems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::fmac::Node;

use super::LogicError;

/// Relation and function symbols with arities. Equality is implicit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    rels: BTreeMap<Arc<str>, usize>,
    funs: BTreeMap<Arc<str>, usize>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn pure_equality() -> Signature {
        Signature::new()
    }

    pub fn with_rel(mut self, name: &str, arity: usize) -> Signature {
        self.add_rel(name, arity).expect("duplicate symbol");
        self
    }

    pub fn with_fun(mut self, name: &str, arity: usize) -> Signature {
        self.add_fun(name, arity).expect("duplicate symbol");
        self
    }

    pub fn add_rel(&mut self, name: &str, arity: usize) -> Result<(), LogicError> {
        if self.funs.contains_key(name) || self.rels.get(name).is_some_and(|&a| a != arity) {
            return Err(LogicError::DuplicateSymbol(name.to_string()));
        }
        self.rels.insert(name.into(), arity);
        Ok(())
    }

    pub fn add_fun(&mut self, name: &str, arity: usize) -> Result<(), LogicError> {
        if self.rels.contains_key(name) || self.funs.get(name).is_some_and(|&a| a != arity) {
            return Err(LogicError::DuplicateSymbol(name.to_string()));
        }
        self.funs.insert(name.into(), arity);
        Ok(())
    }

    pub fn rel_arity(&self, name: &str) -> Option<usize> {
        self.rels.get(name).copied()
    }

    pub fn fun_arity(&self, name: &str) -> Option<usize> {
        self.funs.get(name).copied()
    }

    pub fn rels(&self) -> impl Iterator<Item = (&Arc<str>, usize)> {
        self.rels.iter().map(|(k, v)| (k, *v))
    }

    pub fn funs(&self) -> impl Iterator<Item = (&Arc<str>, usize)> {
        self.funs.iter().map(|(k, v)| (k, *v))
    }

    pub fn is_relational(&self) -> bool {
        self.funs.is_empty()
    }
}

impl fmt::Display for Signature {
    /// One declaration per line, in the structure-file grammar.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, a) in &self.rels {
            writeln!(f, "rel {r} {a}")?;
        }
        for (g, a) in &self.funs {
            writeln!(f, "fun {g} {a}")?;
        }
        Ok(())
    }
}

/// Variable symbols: plain variables and the instantiated systems X and Y.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarSym {
    /// A variable `?name`, free placeholder or bound by a quantifier.
    Bound(Arc<str>),
    /// Singly indexed `x_a`.
    X1(Node),
    /// Doubly indexed `x_{a,i}`.
    X(Node, u32),
    /// `y_{t,i}`; t sorted, non-empty.
    Y(Arc<[Node]>, u32),
}

impl VarSym {
    pub fn var(name: &str) -> VarSym {
        VarSym::Bound(name.trim_start_matches('?').into())
    }

    pub fn y(nodes: impl IntoIterator<Item = Node>, i: u32) -> VarSym {
        let mut v: Vec<Node> = nodes.into_iter().collect();
        v.sort();
        v.dedup();
        assert!(!v.is_empty(), "y-symbols need a non-empty index set");
        VarSym::Y(v.into(), i)
    }

    pub fn is_instantiated(&self) -> bool {
        !matches!(self, VarSym::Bound(_))
    }

    /// Nodes this symbol is indexed by.
    pub fn nodes(&self) -> &[Node] {
        match self {
            VarSym::Bound(_) => &[],
            VarSym::X1(a) | VarSym::X(a, _) => std::slice::from_ref(a),
            VarSym::Y(t, _) => t,
        }
    }

    pub fn index(&self) -> Option<u32> {
        match self {
            VarSym::X(_, i) | VarSym::Y(_, i) => Some(*i),
            _ => None,
        }
    }

    pub fn is_x(&self) -> bool {
        matches!(self, VarSym::X(..) | VarSym::X1(_))
    }

    pub fn is_y(&self) -> bool {
        matches!(self, VarSym::Y(..))
    }

    /// Rename the indexing nodes; `None` if some node is unmapped.
    pub fn map_nodes(&self, f: impl Fn(&Node) -> Option<Node>) -> Option<VarSym> {
        Some(match self {
            VarSym::Bound(_) => self.clone(),
            VarSym::X1(a) => VarSym::X1(f(a)?),
            VarSym::X(a, i) => VarSym::X(f(a)?, *i),
            VarSym::Y(t, i) => {
                let mut v = t.iter().map(&f).collect::<Option<Vec<_>>>()?;
                v.sort();
                v.dedup();
                VarSym::Y(v.into(), *i)
            }
        })
    }
}

impl fmt::Display for VarSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarSym::Bound(n) => write!(f, "?{n}"),
            VarSym::X1(a) => write!(f, "x:{a}"),
            VarSym::X(a, i) => write!(f, "x:{a}:{i}"),
            VarSym::Y(t, i) => {
                f.write_str("y:")?;
                for (k, a) in t.iter().enumerate() {
                    if k > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ":{i}")
            }
        }
    }
}

impl fmt::Debug for VarSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(VarSym),
    /// Function application; constants have no arguments.
    App(Arc<str>, Vec<Term>),
}

impl Term {
    pub fn var(v: VarSym) -> Term {
        Term::Var(v)
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a VarSym)) {
        match self {
            Term::Var(v) => f(v),
            Term::App(_, args) => args.iter().for_each(|t| t.visit_vars(f)),
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&VarSym) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::App(g, args) => Term::App(g.clone(), args.iter().map(|t| t.map_vars(f)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(g, args) if args.is_empty() => write!(f, "{g}"),
            Term::App(g, args) => {
                write!(f, "({g}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Eq(Term, Term),
    Rel(Arc<str>, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Exists(Arc<str>, Box<Formula>),
    Forall(Arc<str>, Box<Formula>),
}

pub fn v(name: &str) -> Term {
    Term::Var(VarSym::var(name))
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn rel(r: &str, args: Vec<Term>) -> Formula {
        Formula::Rel(r.into(), args)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::Exists(var.trim_start_matches('?').into(), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::Forall(var.trim_start_matches('?').into(), Box::new(body))
    }

    /// Right-nested conjunction; `None` for an empty list.
    pub fn conj(parts: Vec<Formula>) -> Option<Formula> {
        let mut it = parts.into_iter().rev();
        let last = it.next()?;
        Some(it.fold(last, |acc, f| Formula::and(f, acc)))
    }

    /// Formula nodes plus function-application nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Eq(a, b) => 1 + a.size() + b.size(),
            Formula::Rel(_, ts) => 1 + ts.iter().map(Term::size).sum::<usize>(),
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Eq(..) | Formula::Rel(..))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Eq(..) | Formula::Rel(..) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    /// Visit every variable occurrence that is free, in print order.
    pub fn visit_free<'a>(&'a self, f: &mut impl FnMut(&'a VarSym)) {
        fn go<'a>(phi: &'a Formula, bound: &mut Vec<&'a str>, f: &mut impl FnMut(&'a VarSym)) {
            let term = |t: &'a Term, bound: &Vec<&'a str>, f: &mut dyn FnMut(&'a VarSym)| {
                t.visit_vars(&mut |v| match v {
                    VarSym::Bound(n) if bound.contains(&&**n) => {}
                    _ => f(v),
                })
            };
            match phi {
                Formula::Eq(a, b) => {
                    term(a, bound, f);
                    term(b, bound, f);
                }
                Formula::Rel(_, ts) => ts.iter().for_each(|t| term(t, bound, f)),
                Formula::Not(g) => go(g, bound, f),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                    go(a, bound, f);
                    go(b, bound, f);
                }
                Formula::Exists(x, g) | Formula::Forall(x, g) => {
                    bound.push(x);
                    go(g, bound, f);
                    bound.pop();
                }
            }
        }
        go(self, &mut Vec::new(), f)
    }

    /// Free variables and symbols, in order of first occurrence.
    pub fn free_vars(&self) -> Vec<VarSym> {
        let mut out: Vec<VarSym> = Vec::new();
        self.visit_free(&mut |v| {
            if !out.contains(v) {
                out.push(v.clone());
            }
        });
        out
    }

    /// Free plain variables (placeholders), sorted.
    pub fn free_placeholders(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.visit_free(&mut |v| {
            if let VarSym::Bound(n) = v {
                out.insert(n.clone());
            }
        });
        out
    }

    /// Instantiated symbols (x and y), in order of first occurrence.
    pub fn symbols(&self) -> Vec<VarSym> {
        self.free_vars().into_iter().filter(VarSym::is_instantiated).collect()
    }

    pub fn is_instantiated_sentence(&self) -> bool {
        self.free_placeholders().is_empty()
    }

    /// Replace free occurrences; bound occurrences are left alone.
    /// The caller guarantees no capture (images never mention bound names).
    pub fn substitute(&self, f: &mut impl FnMut(&VarSym) -> Option<Term>) -> Formula {
        fn go(phi: &Formula, bound: &mut Vec<Arc<str>>, f: &mut dyn FnMut(&VarSym) -> Option<Term>) -> Formula {
            let mut tm = |t: &Term, bound: &Vec<Arc<str>>| {
                t.map_vars(&mut |v| match v {
                    VarSym::Bound(n) if bound.contains(n) => Term::Var(v.clone()),
                    _ => f(v).unwrap_or_else(|| Term::Var(v.clone())),
                })
            };
            match phi {
                Formula::Eq(a, b) => Formula::Eq(tm(a, bound), tm(b, bound)),
                Formula::Rel(r, ts) => Formula::Rel(r.clone(), ts.iter().map(|t| tm(t, bound)).collect()),
                Formula::Not(g) => Formula::not(go(g, bound, f)),
                Formula::And(a, b) => Formula::and(go(a, bound, f), go(b, bound, f)),
                Formula::Or(a, b) => Formula::or(go(a, bound, f), go(b, bound, f)),
                Formula::Imp(a, b) => Formula::imp(go(a, bound, f), go(b, bound, f)),
                Formula::Exists(x, g) | Formula::Forall(x, g) => {
                    bound.push(x.clone());
                    let body = go(g, bound, f);
                    bound.pop();
                    match phi {
                        Formula::Exists(..) => Formula::Exists(x.clone(), Box::new(body)),
                        _ => Formula::Forall(x.clone(), Box::new(body)),
                    }
                }
            }
        }
        go(self, &mut Vec::new(), f)
    }

    /// Substitute named free placeholders by symbols.
    pub fn instantiate(&self, map: &[(&str, VarSym)]) -> Formula {
        self.substitute(&mut |v| match v {
            VarSym::Bound(n) => map.iter().find(|(k, _)| k.trim_start_matches('?') == &**n).map(|(_, s)| Term::Var(s.clone())),
            _ => None,
        })
    }

    /// Rename bound variables to ?u1, ?u2, ... by binder depth. Free
    /// placeholders named like that would be captured, so callers keep
    /// free names out of the `u<n>` family.
    pub fn normalize_bound(&self) -> Formula {
        fn go(phi: &Formula, scope: &mut Vec<(Arc<str>, Arc<str>)>) -> Formula {
            let tm = |t: &Term, scope: &Vec<(Arc<str>, Arc<str>)>| {
                t.map_vars(&mut |v| match v {
                    VarSym::Bound(n) => match scope.iter().rev().find(|(old, _)| old == n) {
                        Some((_, new)) => Term::Var(VarSym::Bound(new.clone())),
                        None => Term::Var(v.clone()),
                    },
                    _ => Term::Var(v.clone()),
                })
            };
            match phi {
                Formula::Eq(a, b) => Formula::Eq(tm(a, scope), tm(b, scope)),
                Formula::Rel(r, ts) => Formula::Rel(r.clone(), ts.iter().map(|t| tm(t, scope)).collect()),
                Formula::Not(g) => Formula::not(go(g, scope)),
                Formula::And(a, b) => Formula::and(go(a, scope), go(b, scope)),
                Formula::Or(a, b) => Formula::or(go(a, scope), go(b, scope)),
                Formula::Imp(a, b) => Formula::imp(go(a, scope), go(b, scope)),
                Formula::Exists(x, g) | Formula::Forall(x, g) => {
                    let new: Arc<str> = format!("u{}", scope.len() + 1).into();
                    scope.push((x.clone(), new.clone()));
                    let body = Box::new(go(g, scope));
                    scope.pop();
                    match phi {
                        Formula::Exists(..) => Formula::Exists(new, body),
                        _ => Formula::Forall(new, body),
                    }
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// Check symbols and arities against a signature.
    pub fn check(&self, sig: &Signature) -> Result<(), LogicError> {
        fn term(t: &Term, sig: &Signature) -> Result<(), LogicError> {
            if let Term::App(g, args) = t {
                let a = sig.fun_arity(g).ok_or_else(|| LogicError::UnknownSymbol(g.to_string()))?;
                if a != args.len() {
                    return Err(LogicError::ArityMismatch { symbol: g.to_string(), expected: a, found: args.len() });
                }
                for s in args {
                    term(s, sig)?;
                }
            }
            Ok(())
        }
        match self {
            Formula::Eq(a, b) => {
                term(a, sig)?;
                term(b, sig)
            }
            Formula::Rel(r, ts) => {
                let a = sig.rel_arity(r).ok_or_else(|| LogicError::UnknownSymbol(r.to_string()))?;
                if a != ts.len() {
                    return Err(LogicError::ArityMismatch { symbol: r.to_string(), expected: a, found: ts.len() });
                }
                ts.iter().try_for_each(|t| term(t, sig))
            }
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.check(sig),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.check(sig)?;
                b.check(sig)
            }
        }
    }

    /// Atoms occurring anywhere in the formula.
    pub fn atoms(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn go<'a>(phi: &'a Formula, out: &mut Vec<&'a Formula>) {
            match phi {
                Formula::Eq(..) | Formula::Rel(..) => out.push(phi),
                Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => go(g, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    /// Split nested positive conjunctions into their parts.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            _ => vec![self],
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Eq(a, b) => write!(f, "(= {a} {b})"),
            Formula::Rel(r, ts) => {
                write!(f, "({r}")?;
                for t in ts {
                    write!(f, " {t}")?;
                }
                f.write_str(")")
            }
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(a, b) => write!(f, "(and {a} {b})"),
            Formula::Or(a, b) => write!(f, "(or {a} {b})"),
            Formula::Imp(a, b) => write!(f, "(-> {a} {b})"),
            Formula::Exists(x, g) => write!(f, "(exists ?{x} {g})"),
            Formula::Forall(x, g) => write!(f, "(forall ?{x} {g})"),
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
