//! Semantic version calculator.
//!
//! Compares two declared interface surfaces, extracts change facts,
//! classifies them through a Datalog policy, and recommends the smallest
//! compliant version bump together with a replayable provenance record.

pub mod analysis;
pub mod contract;
pub mod datalog;
pub mod diff;
pub mod facts;
pub mod model;
pub mod policy;
pub mod provenance;
pub mod registry;
pub mod sdl;
pub mod surface;
pub mod version;

pub use analysis::{analyze, classify, Analysis};
pub use contract::{Atom, CmpOp, Contract, ContractRelation, Mode};
pub use diff::{diff, DiffConfig};
pub use facts::{ChangeFact, FactCategory, FactKind, FactSet};
pub use model::{ComponentModel, FunctionDecl, SurfaceReport, TypeDecl};
pub use policy::{optimistic, pessimistic, Policy};
pub use surface::{UsageProfile, WorldMode};
pub use version::{bump, ImpactLevel, SemVer, VersionReq};
