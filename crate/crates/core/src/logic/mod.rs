//! First-order syntax, evaluation on finite structures, and enumeration.

pub mod diagram;
pub mod enumerate;
pub mod lift;
pub mod normal;
pub mod parse;
pub mod structure;
pub mod syntax;

use thiserror::Error;

pub use diagram::{Diagram, Quotient};
pub use enumerate::{enumerate_formulas, random_formula, Catalog, Template};
pub use lift::{lift_formula, lift_symbol};
pub use normal::Conjunct;
pub use parse::{parse_formula, parse_symbol, parse_term};
pub use structure::{Assignment, FiniteStructure};
pub use syntax::{Formula, Signature, Term, VarSym};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("arity mismatch for {symbol}: expected {expected}, found {found}")]
    ArityMismatch { symbol: String, expected: usize, found: usize },
    #[error("symbol {0:?} declared twice")]
    DuplicateSymbol(String),
    #[error("free variable {0} has no value")]
    UnassignedFreeVariable(VarSym),
    #[error("symbol {0} is not indexed by the lifting's source")]
    SymbolOutsideSource(VarSym),
    #[error("function {0} undefined at the arguments")]
    UndefinedFunctionValue(String),
    #[error("inconsistent diagram: {0} and its negation")]
    InconsistentDiagram(String),
    #[error("congruence violated by {0} and {1}")]
    CongruenceViolation(String, String),
    #[error("structure file line {line}: {msg}")]
    Structure { line: usize, msg: String },
}
