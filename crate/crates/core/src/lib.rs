//! Staged Henkin constructions indexed by finite maximal antichains of the
//! binary tree, with witness oracles, density providers and analyses.

pub mod fmac;
pub mod logic;
pub mod oracle;
pub mod commitment;
pub mod providers;
pub mod scheduler;
pub mod analysis;

pub use analysis::{AnalysisError, ClopenSet, RankResult, SimilarityReport, TermFamily};
pub use commitment::{Commitment, ConjunctSet, XMode};
pub use fmac::{Fmac, FmacError, Lifting, Node, PointPrefix};
pub use logic::{Catalog, Conjunct, Diagram, FiniteStructure, Formula, LogicError, Quotient, Signature, Term, VarSym};
pub use oracle::{ElemId, OracleError, WitnessOracle};
pub use providers::{provider_by_name, DensityProvider, OmitType, ProviderError};
pub use scheduler::{run, AuditMode, AuditOptions, AuditReport, ConstructionLog, LogError, RunConfig, RunError};
