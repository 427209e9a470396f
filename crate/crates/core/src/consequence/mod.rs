//! Schema consequences: the schema of every closed instance of a schema
//! under a set of inference rules.

mod canonical;
mod existential;
mod rewrite;
mod simple;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub use canonical::{build_critical, build_sandbox, find_origin_patterns, CanonicalInstance};
pub use existential::{
    existential_schema_consequence, existential_schema_consequence_within, retained_existentials,
    retained_existentials_within, ExistentialOutcome, ViolationWitness,
};
pub use rewrite::{
    rewrite_antecedents, rewrite_antecedents_within, Rewriting, DEFAULT_REWRITE_DEPTH,
    MAX_REWRITINGS,
};
pub use simple::{
    applicable_rules, basic_consequence, expand_schema, filter_and_annotate,
    simple_schema_consequence, simple_schema_consequence_within, BasicOutcome, FilteredMapping,
    SimpleOutcome,
};

use crate::rdf::Term;

/// Default size limit of a critical instance, in triples.
pub const DEFAULT_CRITICAL_BUDGET: usize = 10_000_000;

/// How mappings of a rule antecedent over a schema are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    /// Evaluate the λ-rewriting of the antecedent on the sandbox graph.
    Score,
    /// Evaluate the antecedent on the critical instance.
    Critical,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Score => "score",
            Algorithm::Critical => "critical",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "score" => Ok(Algorithm::Score),
            "critical" => Ok(Algorithm::Critical),
            _ => Err(format!(
                "unknown algorithm `{s}` (expected score or critical)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConsequenceOptions {
    pub algorithm: Algorithm,
    pub critical_budget: usize,
    pub rewrite_depth: usize,
}

impl Default for ConsequenceOptions {
    fn default() -> Self {
        ConsequenceOptions {
            algorithm: Algorithm::Score,
            critical_budget: DEFAULT_CRITICAL_BUDGET,
            rewrite_depth: DEFAULT_REWRITE_DEPTH,
        }
    }
}

impl ConsequenceOptions {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        ConsequenceOptions {
            algorithm,
            ..Default::default()
        }
    }
}

/// The reserved IRI `λ`: `urn:lambda:0`, or the first `urn:lambda:N` not
/// among `used`.
pub fn choose_lambda<'a>(used: impl IntoIterator<Item = &'a Term>) -> Term {
    let used: BTreeSet<&Term> = used.into_iter().collect();
    (0..)
        .map(|i| Term::iri(format!("urn:lambda:{i}")))
        .find(|t| !used.contains(t))
        .expect("unbounded")
}
