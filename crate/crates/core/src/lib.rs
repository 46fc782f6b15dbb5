//! Finite-scale syntax-semantics duality for geometric theories.
//!
//! Models live on quotients of subsets of a finite index set `S = {0..n-1}`.
//! From them the crate builds the logical topologies, the topological
//! groupoid of models and isomorphisms, equivariant sheaves over it, and the
//! `Mod`/`Form` round trip over the groupoid of sets, checking each
//! construction exhaustively.

pub mod duality;
pub mod error;
pub mod groupoid;
pub mod logic;
pub mod models;
pub mod report;
pub mod sheaves;
pub mod topology;

pub use error::{Error, ParseError, Result};
