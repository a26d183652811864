//! cohesive-kernel: a proof checker for spatial type theory.
//!
//! The term language is Martin-Löf type theory (pi, sigma, identity, unit,
//! explicit universes) extended with two modal operators over a dual
//! context of crisp and cohesive hypotheses: sharp, a monadic reflector
//! into codiscrete types, and flat, a comonadic coreflector into discrete
//! types. Flat can only be formed over crisp data; sharp promotes the
//! whole context. Postulates may be equipped with first-order rewrite
//! rules, which is how encoded higher inductive types compute.
//!
//! Crates layout:
//! - [`syntax`]: terms, telescopes, declarations, structural operations;
//! - [`parser`]: the `.coh` surface language and pretty-printer;
//! - [`kernel`]: typing judgments and declaration checking;
//! - [`equality`]: normalization by evaluation and conversion;
//! - [`corpus`]: the proof-file corpus runner.

pub mod corpus;
pub mod equality;
pub mod kernel;
pub mod parser;
pub mod syntax;

pub use kernel::{check, check_declaration, infer, Checker, Diagnostic, DiagnosticCode, Environment};
pub use syntax::{Declaration, Entry, Level, Polarity, Telescope, Term};
