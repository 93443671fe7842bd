//! Canonical forms: a formula becomes (template, argument tuple, polarity).
//!
//! Templates have their free slots named ?w1, ?w2, ... in order of first
//! occurrence and their binders named ?u1, ?u2, ... by depth, so two
//! instantiated formulas are the same conjunct iff their canonical forms agree.

use std::fmt;
use std::sync::Arc;

use super::syntax::{Formula, Term, VarSym};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Conjunct {
    pub template: Arc<Formula>,
    pub args: Vec<VarSym>,
    pub positive: bool,
}

/// Placeholder name for slot j (0-based).
pub fn slot(j: usize) -> Arc<str> {
    format!("w{}", j + 1).into()
}

/// Canonicalise binders and free occurrences in one pass. Every free
/// occurrence (placeholder or instantiated symbol) becomes a slot.
pub fn canonicalize(phi: &Formula) -> (Formula, Vec<VarSym>) {
    let mut args: Vec<VarSym> = Vec::new();
    let f = canon(phi, &mut Vec::new(), &mut args);
    (f, args)
}

fn canon(phi: &Formula, scope: &mut Vec<(Arc<str>, Arc<str>)>, args: &mut Vec<VarSym>) -> Formula {
    let tm = |t: &Term, scope: &Vec<(Arc<str>, Arc<str>)>, args: &mut Vec<VarSym>| {
        t.map_vars(&mut |v| {
            if let VarSym::Bound(n) = v {
                if let Some((_, new)) = scope.iter().rev().find(|(old, _)| old == n) {
                    return Term::Var(VarSym::Bound(new.clone()));
                }
            }
            let j = match args.iter().position(|a| a == v) {
                Some(j) => j,
                None => {
                    args.push(v.clone());
                    args.len() - 1
                }
            };
            Term::Var(VarSym::Bound(slot(j)))
        })
    };
    match phi {
        Formula::Eq(a, b) => {
            let a = tm(a, scope, args);
            let b = tm(b, scope, args);
            Formula::Eq(a, b)
        }
        Formula::Rel(r, ts) => Formula::Rel(r.clone(), ts.iter().map(|t| tm(t, scope, args)).collect()),
        Formula::Not(g) => Formula::not(canon(g, scope, args)),
        Formula::And(a, b) => {
            let a = canon(a, scope, args);
            Formula::and(a, canon(b, scope, args))
        }
        Formula::Or(a, b) => {
            let a = canon(a, scope, args);
            Formula::or(a, canon(b, scope, args))
        }
        Formula::Imp(a, b) => {
            let a = canon(a, scope, args);
            Formula::imp(a, canon(b, scope, args))
        }
        Formula::Exists(x, g) | Formula::Forall(x, g) => {
            let new: Arc<str> = format!("u{}", scope.len() + 1).into();
            scope.push((x.clone(), new.clone()));
            let body = Box::new(canon(g, scope, args));
            scope.pop();
            match phi {
                Formula::Exists(..) => Formula::Exists(new, body),
                _ => Formula::Forall(new, body),
            }
        }
    }
}

/// Strip leading negations, returning the core and its polarity.
pub fn strip_not(mut phi: &Formula) -> (&Formula, bool) {
    let mut pos = true;
    while let Formula::Not(g) = phi {
        phi = g;
        pos = !pos;
    }
    (phi, pos)
}

impl Conjunct {
    /// Canonical form of any formula; free placeholders count as arguments.
    pub fn of(phi: &Formula) -> Conjunct {
        let (core, positive) = strip_not(phi);
        let (t, args) = canonicalize(core);
        Conjunct { template: Arc::new(t), args, positive }
    }

    /// From a template already in canonical form and distinct arguments.
    pub fn from_parts(template: Arc<Formula>, args: Vec<VarSym>, positive: bool) -> Conjunct {
        Conjunct { template, args, positive }
    }

    /// Instantiate a template whose free placeholders are ?w1..?wk in slot
    /// order by `args` (repeats allowed) and canonicalise.
    pub fn instantiate(template: &Formula, args: &[VarSym], positive: bool) -> Conjunct {
        let f = template.substitute(&mut |v| match v {
            VarSym::Bound(n) => slot_index(n).and_then(|j| args.get(j)).map(|s| Term::Var(s.clone())),
            _ => None,
        });
        let mut c = Conjunct::of(&f);
        if !positive {
            c.positive = !c.positive;
        }
        c
    }

    pub fn negated(&self) -> Conjunct {
        Conjunct { positive: !self.positive, ..self.clone() }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// The instantiated formula this conjunct stands for.
    pub fn to_formula(&self) -> Formula {
        let f = self.template.substitute(&mut |v| match v {
            VarSym::Bound(n) => slot_index(n).and_then(|j| self.args.get(j)).map(|s| Term::Var(s.clone())),
            _ => None,
        });
        if self.positive {
            f
        } else {
            Formula::not(f)
        }
    }

    pub fn map_args(&self, f: impl Fn(&VarSym) -> Option<VarSym>) -> Option<Conjunct> {
        let args = self.args.iter().map(f).collect::<Option<Vec<_>>>()?;
        Some(Conjunct { template: self.template.clone(), args, positive: self.positive })
    }
}

impl fmt::Display for Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

impl fmt::Debug for Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Slot number of a placeholder name `w<j>` (1-based in the name).
pub fn slot_index(name: &str) -> Option<usize> {
    name.strip_prefix('w')?.parse::<usize>().ok()?.checked_sub(1)
}

/// Is `phi` its own canonical template (slots in first-occurrence order,
/// binders by depth, no leading negation)?
pub fn is_canonical_template(phi: &Formula) -> bool {
    if matches!(phi, Formula::Not(_)) {
        return false;
    }
    let (t, args) = canonicalize(phi);
    t == *phi && args.iter().enumerate().all(|(j, a)| *a == VarSym::Bound(slot(j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_formula;
    use crate::logic::syntax::Signature;

    fn sig() -> Signature {
        Signature::new().with_rel("E", 2)
    }

    #[test]
    fn alpha_and_slot_normalisation() {
        let a = parse_formula("(exists ?q (E ?q x:0:0))", &sig()).unwrap();
        let b = parse_formula("(exists ?r (E ?r x:0:0))", &sig()).unwrap();
        assert_eq!(Conjunct::of(&a), Conjunct::of(&b));
        let c = Conjunct::of(&parse_formula("(not (not (E x:1:0 x:0:0)))", &sig()).unwrap());
        assert!(c.positive);
        assert_eq!(c.template.to_string(), "(E ?w1 ?w2)");
        assert_eq!(c.args[0].to_string(), "x:1:0");
        let n = Conjunct::of(&parse_formula("(not (= x:0:0 x:0:0))", &sig()).unwrap());
        assert!(!n.positive);
        assert_eq!(n.template.to_string(), "(= ?w1 ?w1)");
        assert_eq!(n.args.len(), 1);
    }

    #[test]
    fn free_u_names_are_not_captured() {
        let f = parse_formula("(exists ?w (E ?w ?u1))", &sig()).unwrap();
        let c = Conjunct::of(&f);
        assert_eq!(c.template.to_string(), "(exists ?u1 (E ?u1 ?w1))");
        assert_eq!(c.args, vec![VarSym::var("u1")]);
    }

    #[test]
    fn instantiate_merges_repeats() {
        let t = parse_formula("(E ?w1 ?w2)", &sig()).unwrap();
        let x = VarSym::X("0".parse().unwrap(), 0);
        let c = Conjunct::instantiate(&t, &[x.clone(), x.clone()], false);
        assert_eq!(c.to_string(), "(not (E x:0:0 x:0:0))");
        assert_eq!(c.args, vec![x]);
        assert!(is_canonical_template(&t));
        assert!(!is_canonical_template(&parse_formula("(E ?w2 ?w1)", &sig()).unwrap()));
    }
}
