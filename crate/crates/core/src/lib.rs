//! Array content analysis over segment graphs.
//!
//! The analyzer infers universally quantified facts about contiguous array
//! segments `[i, j)` for programs written in a small control-flow-graph
//! language, and checks user-written segment assertions against them.
//!
//! The main pieces:
//!
//! - [`frontend`] parses `.acg` programs.
//! - [`scalar`] holds the pluggable numeric lattices ([`scalar::Dbm`],
//!   [`scalar::Interval`]).
//! - [`content`] is the array content graph domain: a scalar value plus a
//!   matrix of edge values indexed by segment-bound vertices, and its
//!   normalization procedure.
//! - [`transfer`] gives the abstract semantics of each instruction.
//! - [`relax`] holds the relaxation operators used by the sparse mode and the
//!   resolution procedure on general linear constraints.
//! - [`engine`] runs the fixpoint and evaluates `check` directives.
//! - [`oracle`] is the concrete semantics and brute-force checking.
//! - [`cli`] implements the `acg` command line.

pub mod cli;
pub mod content;
pub mod engine;
pub mod frontend;
pub mod oracle;
pub mod relax;
pub mod scalar;
pub mod transfer;
pub mod var;

pub use var::Var;
