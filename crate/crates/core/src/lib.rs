//! Counter programs, their compilation to VASS reachability instances, the
//! three hard VASS families (exponential flat 3-VASS, NP-hard flat 7-VASS
//! from Subset Sum, doubly-exponential 4-VASS) and the bounded search used
//! to check their properties at small parameters.

pub mod arith;
pub mod families;
pub mod lang;
pub mod replay;
pub mod report;
pub mod search;
pub mod vass;
pub mod verify;

pub use arith::{BigInt, Fraction};
pub use lang::{build, Artifact, CounterProgram, FlatProgram};
pub use search::{ReachResult, SearchBudget, Verdict};
pub use vass::{Configuration, Run, Transition, Vass};
