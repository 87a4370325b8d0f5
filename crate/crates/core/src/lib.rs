//! Workbench for Hilbert's ε-calculus in toposes.
//!
//! * [`pca`]: a combinatory algebra over `K`/`S` with budgeted application.
//! * [`realizability`]: realizer-set predicates, tracks, sentences.
//! * [`eff`]: partial equivalence relations and functional relations over
//!   finite carriers, with certified ε-term synthesis.
//! * [`finite_topos`]: decision procedures over products of finite sets.
//! * [`internal_language`]: parser and subobject semantics of the internal
//!   language, with the ε-rules.

pub mod exec;
pub mod finite_topos;
pub mod internal_language;
pub mod pca;
pub mod eff;
pub mod realizability;

pub use exec::Exec;
