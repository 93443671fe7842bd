//! Renaming of instantiated symbols along liftings.

use crate::fmac::Lifting;

use super::syntax::{Formula, Term, VarSym};
use super::LogicError;

/// x_{a,i} ↦ x_{h(a),i}, y_{s,i} ↦ y_{h(s),i}; plain variables untouched.
pub fn lift_symbol(v: &VarSym, h: &Lifting) -> Result<VarSym, LogicError> {
    v.map_nodes(|a| h.apply(a)).ok_or_else(|| LogicError::SymbolOutsideSource(v.clone()))
}

pub fn lift_formula(phi: &Formula, h: &Lifting) -> Result<Formula, LogicError> {
    let mut err = None;
    let out = phi.substitute(&mut |v| {
        if !v.is_instantiated() {
            return None;
        }
        match lift_symbol(v, h) {
            Ok(w) => Some(Term::Var(w)),
            Err(e) => {
                err.get_or_insert(e);
                None
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
