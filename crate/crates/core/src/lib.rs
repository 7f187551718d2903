//! Sentential decision diagrams, OBDDs, and the constructions separating
//! compressed SDDs from OBDDs on the hidden weighted bit function.

pub mod bench;
pub mod boolfn;
pub mod constructions;
pub mod error;
pub mod obdd;
pub mod par;
pub mod sdd;
pub mod vtree;

pub use boolfn::{Assignment, FunctionOracle, FunctionSpec, PrimeId, TruthTable, VarId};
pub use error::{Error, Result};
pub use obdd::{MinObdd, Obdd};
pub use par::Execution;
pub use sdd::{SddEnv, SddNode, SddRef, SddSize};
pub use vtree::{Vtree, VtreeNodeId};
