//! Schema consequences of triplestore schemas under datalog inference rules.
//!
//! A triplestore schema describes which RDF graphs are valid: a set of
//! triple patterns acting as wildcards, the variables that may not be bound
//! to literals, and single-atom existential rules. Given such a schema and a
//! set of inference rules this crate computes the schema describing every
//! closed instance, and which existential rules the inference rules can
//! break.

pub mod bench;
pub mod budget;
pub mod cli;
pub mod consequence;
pub mod engine;
pub mod error;
pub mod eval;
pub mod format;
pub mod generator;
pub mod rdf;
pub mod schema;
pub mod shacl;

pub use error::{Error, Result};
