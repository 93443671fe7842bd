//! Witness oracles: decidable infinite structures that certify commitments
//! and hand out witnesses.

mod fraisse;
mod vector;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::logic::{Formula, Signature, VarSym};

pub use fraisse::{AgeSpec, FraisseOracle, RelSpec};
pub use vector::VectorF2Oracle;
pub(crate) use vector::sum_term;

/// A named element of an oracle's working structure.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElemId(pub u32);

impl fmt::Display for ElemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Debug for ElemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for ElemId {
    type Err = OracleError;
    fn from_str(s: &str) -> Result<ElemId, OracleError> {
        s.strip_prefix('e')
            .and_then(|n| n.parse().ok())
            .map(ElemId)
            .ok_or_else(|| OracleError::BadRecord(s.to_string()))
    }
}

/// Values of free variables and symbols.
pub type OracleAssignment = HashMap<VarSym, ElemId>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("unsupported signature: {0}")]
    UnsupportedSignature(String),
    #[error("free variable {0} has no value")]
    Unassigned(VarSym),
    #[error("no element satisfies the formula")]
    NoSolution,
    #[error("every solution lies in the span of the parameters")]
    AllSolutionsClosed,
    #[error("unknown element {0}")]
    UnknownElement(ElemId),
    #[error("extension search too large ({0} fact slots)")]
    SearchTooLarge(usize),
    #[error("bad oracle record {0:?}")]
    BadRecord(String),
    #[error("unknown oracle {0:?}")]
    UnknownOracle(String),
}

/// Outcome of a witness request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Found(ElemId),
    /// Every solution is forced into the avoided set.
    Forced(String),
}

pub trait WitnessOracle {
    /// Name used in logs: `pure-set`, `random-graph`, `unary-generic`, `vector-f2`.
    fn name(&self) -> &str;
    fn signature(&self) -> &Signature;
    fn seed(&self) -> u64;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Truth in the infinite structure.
    fn eval(&self, phi: &Formula, asg: &OracleAssignment) -> Result<bool, OracleError>;

    /// Key such that equal keys give equal truth values for every formula
    /// (quantifier-free type or linear dependence pattern).
    fn type_key(&self, elems: &[ElemId]) -> Vec<u64>;

    /// An element c ∉ avoid with φ(c) where `w` is the witness variable.
    fn witness(
        &mut self,
        phi: &Formula,
        w: &str,
        asg: &OracleAssignment,
        avoid: &BTreeSet<ElemId>,
    ) -> Result<Witness, OracleError>;

    /// Full atomic diagram of the tuple as a conjunction over ?w1..?wn.
    fn atomic_diagram(&self, elems: &[ElemId]) -> Formula;

    /// Journal line describing how element `e` was created.
    fn element_record(&self, e: ElemId) -> String;

    /// Replay a journal line; returns the element it creates.
    fn apply_record(&mut self, e: ElemId, rec: &str) -> Result<(), OracleError>;

    /// Fresh elements c̄' with the same type over `over` as `block` has,
    /// disjoint from every named element. Only homogeneous relational
    /// oracles support this.
    fn copy_tuple(&mut self, block: &[ElemId], over: &[ElemId]) -> Result<Vec<ElemId>, OracleError> {
        let _ = (block, over);
        Err(OracleError::UnsupportedSignature(format!("{} cannot copy tuples", self.name())))
    }

    /// An empty oracle of the same kind.
    fn fresh_instance(&self, seed: u64) -> Box<dyn WitnessOracle>;

    fn as_closure(&self) -> Option<&dyn ClosureOracle> {
        None
    }

    fn as_closure_mut(&mut self) -> Option<&mut dyn ClosureOracle> {
        None
    }
}

/// Oracles with a formula-based closure operator (pregeometries).
pub trait ClosureOracle: WitnessOracle {
    /// Is c in cl(B)? If so, an isolating formula over ?w and ?x1.. with
    /// the elements of B it uses, in slot order.
    fn cl_query(&self, c: ElemId, b: &[ElemId]) -> (bool, Option<(Formula, Vec<ElemId>)>);

    /// A solution of φ(w) outside cl(E).
    fn independent_witness(
        &mut self,
        phi: &Formula,
        w: &str,
        asg: &OracleAssignment,
        e: &[ElemId],
    ) -> Result<ElemId, OracleError>;

    /// Least (by coefficient mask) solution of φ(w) in cl(B), named, with
    /// its coordinates over B. `None` if cl(B) has no solution.
    fn solve_in_closure(
        &mut self,
        phi: &Formula,
        w: &str,
        asg: &OracleAssignment,
        b: &[ElemId],
    ) -> Result<Option<(ElemId, Vec<bool>)>, OracleError>;

    /// A fresh element independent from everything named so far.
    fn fresh_independent(&mut self) -> ElemId;

    /// Coordinates of c over the independent list `basis`, if c ∈ cl(basis).
    fn coordinates(&self, c: ElemId, basis: &[ElemId]) -> Option<Vec<bool>>;

    /// Name the element Σ coeffs[i]·basis[i].
    fn combination(&mut self, basis: &[ElemId], coeffs: &[bool]) -> ElemId;
}

/// Built-in oracle by name.
pub fn by_name(name: &str, seed: u64) -> Result<Box<dyn WitnessOracle>, OracleError> {
    Ok(match name {
        "pure-set" => Box::new(FraisseOracle::new(name, AgeSpec::pure_set(), seed)),
        "random-graph" => Box::new(FraisseOracle::new(name, AgeSpec::graph(), seed)),
        "unary-generic" => Box::new(FraisseOracle::new(name, AgeSpec::unary(3).open(), seed)),
        "vector-f2" => Box::new(VectorF2Oracle::new(seed)),
        other => {
            if let Some(n) = other.strip_prefix("unary-generic:").and_then(|n| n.parse().ok()) {
                Box::new(FraisseOracle::new(other, AgeSpec::unary(n).open(), seed))
            } else {
                return Err(OracleError::UnknownOracle(other.to_string()));
            }
        }
    })
}

/// Collect the assignment restricted to the free variables of φ, in order.
pub(crate) fn free_values(phi: &Formula, asg: &OracleAssignment) -> Result<Vec<(VarSym, ElemId)>, OracleError> {
    phi.free_vars()
        .into_iter()
        .map(|v| asg.get(&v).map(|e| (v.clone(), *e)).ok_or(OracleError::Unassigned(v)))
        .collect()
}
