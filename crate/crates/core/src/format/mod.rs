//! Text formats: a Turtle subset for graphs and shape documents, a
//! CONSTRUCT-shaped rule format and a sectioned schema format.
//!
//! IRIs are kept as written. `ex:a` stays the string `ex:a`; only names in
//! the `sh:`, `rdf:`, `rdfs:` and `xsd:` namespaces are rewritten to those
//! standard prefixes, whatever prefix or full IRI the input used.

mod lexer;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::engine::InferenceRule;
use crate::error::{Error, Result};
use crate::rdf::{Graph, GraphPattern, Term, Triple};
use crate::schema::{ExistentialRule, TriplestoreSchema};
use parser::{Allow, Parser};

pub(crate) const STANDARD_PREFIXES: [(&str, &str); 4] = [
    ("sh", "http://www.w3.org/ns/shacl#"),
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
];

pub(crate) fn is_plain_local(local: &str) -> bool {
    !local.is_empty()
        && local
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !local.ends_with('.')
}

/// Prefix declarations in document order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Prefixes {
    decls: Vec<(String, String)>,
}

impl Prefixes {
    /// `sh:` and `rdf:`.
    pub fn shacl() -> Self {
        let mut p = Prefixes::default();
        p.declare("rdf", STANDARD_PREFIXES[1].1);
        p.declare("sh", STANDARD_PREFIXES[0].1);
        p
    }

    pub fn declare(&mut self, name: impl Into<String>, namespace: impl Into<String>) {
        let name = name.into();
        let namespace = namespace.into();
        match self.decls.iter_mut().find(|(n, _)| *n == name) {
            Some(d) => d.1 = namespace,
            None => self.decls.push((name, namespace)),
        }
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.decls
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, ns)| ns.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.decls.iter().map(|(n, ns)| (n.as_str(), ns.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    /// Adds the declarations of `other` whose names are not declared yet.
    pub fn merge(&mut self, other: &Prefixes) {
        for (n, ns) in &other.decls {
            if self.get(n).is_none() {
                self.decls.push((n.clone(), ns.clone()));
            }
        }
    }

    /// The prefix under which names written with `prefix` are stored.
    fn canonical_prefix<'a>(&self, prefix: &'a str) -> &'a str {
        match self.get(prefix) {
            Some(ns) => STANDARD_PREFIXES
                .iter()
                .find(|(_, std_ns)| *std_ns == ns)
                .map_or(prefix, |(p, _)| p),
            None => prefix,
        }
    }

    /// Declarations as stored, with namespaces that were folded into a
    /// standard prefix declared under that prefix instead.
    fn written(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        for (n, ns) in &self.decls {
            let name = self.canonical_prefix(n).to_string();
            if !out.iter().any(|(m, _)| *m == name) {
                out.push((name, ns.clone()));
            }
        }
        out
    }

    fn write(&self, out: &mut String) {
        let decls = self.written();
        for (n, ns) in &decls {
            let _ = writeln!(out, "@prefix {n}: <{ns}> .");
        }
        if !decls.is_empty() {
            out.push('\n');
        }
    }
}

/// A parsed Turtle document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TurtleDocument {
    pub prefixes: Prefixes,
    pub graph: Graph,
}

impl TurtleDocument {
    pub fn new(prefixes: Prefixes, graph: Graph) -> Self {
        TurtleDocument { prefixes, graph }
    }
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        context: format!("cannot read {}", path.display()),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        context: format!("cannot write {}", path.display()),
        source,
    })
}

/// Parses a Turtle document: prefixed names, `a`, `;` and `,` lists, blank
/// nodes written `[ ... ]` or `_:label`, and collections. Literal datatypes
/// and language tags are accepted and dropped.
pub fn parse_turtle(src: &str, file: &Path) -> Result<TurtleDocument> {
    let mut p = Parser::new(src, file)?;
    let allow = Allow {
        vars: false,
        blank_nodes: true,
    };
    let triples = p.triples(allow, false)?;
    let mut graph = Graph::new();
    for (t, line) in triples {
        match t.to_triple() {
            Some(t) => {
                graph.insert(t);
            }
            None => return Err(p.error_at(line, format!("{t} is not a valid RDF triple"))),
        }
    }
    Ok(TurtleDocument {
        prefixes: p.prefixes,
        graph,
    })
}

pub fn read_turtle(path: &Path) -> Result<TurtleDocument> {
    parse_turtle(&read_file(path)?, path)
}

/// Prefix header, then one block per subject.
pub fn write_turtle(doc: &TurtleDocument) -> String {
    let mut out = String::new();
    doc.prefixes.write(&mut out);
    let mut by_subject: BTreeMap<&Term, Vec<&Triple>> = BTreeMap::new();
    for t in doc.graph.iter() {
        by_subject.entry(t.s()).or_default().push(t);
    }
    for (s, ts) in by_subject {
        let _ = write!(out, "{s}");
        let mut last_p: Option<&Term> = None;
        for t in ts {
            if last_p == Some(t.p()) {
                let _ = write!(out, ", {}", t.o());
            } else {
                if last_p.is_some() {
                    out.push_str(" ;");
                }
                let _ = write!(out, "\n    {} {}", t.p(), t.o());
                last_p = Some(t.p());
            }
        }
        out.push_str(" .\n");
    }
    out
}

/// Parses rule blocks `CONSTRUCT { ... } WHERE { ... }`. A preceding
/// `# name: x` comment names the rule; unnamed rules are called `r1`, `r2`,
/// ... by position, skipping names already taken.
pub fn parse_rules(src: &str, file: &Path) -> Result<Vec<InferenceRule>> {
    Ok(parse_rules_document(src, file)?.1)
}

/// [`parse_rules`], also returning the prefix declarations.
pub fn parse_rules_document(src: &str, file: &Path) -> Result<(Prefixes, Vec<InferenceRule>)> {
    let mut p = Parser::new(src, file)?;
    let allow = Allow {
        vars: true,
        blank_nodes: false,
    };
    let mut rules = Vec::new();
    let mut names = BTreeSet::new();
    loop {
        p.prefix_declarations()?;
        let comments = p.take_comments();
        if p.at_end() {
            break;
        }
        let line = p.line();
        p.expect_word("CONSTRUCT")?;
        p.expect_punct("{")?;
        let consequent: GraphPattern = p
            .triples(allow, true)?
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        p.expect_punct("}")?;
        p.expect_word("WHERE")?;
        p.expect_punct("{")?;
        let antecedent: GraphPattern = p
            .triples(allow, true)?
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        p.expect_punct("}")?;
        let name = comments
            .iter()
            .rev()
            .find_map(|c| c.strip_prefix("name:").map(|n| n.trim().to_string()))
            .unwrap_or_else(|| {
                (rules.len() + 1..)
                    .map(|i| format!("r{i}"))
                    .find(|n| !names.contains(n))
                    .expect("unbounded range")
            });
        if !names.insert(name.clone()) {
            return Err(p.error_at(line, format!("duplicate rule name `{name}`")));
        }
        let rule = InferenceRule::new(name, antecedent, consequent)
            .map_err(|e| p.error_at(line, e.to_string()))?;
        rules.push(rule);
    }
    Ok((p.prefixes, rules))
}

pub fn read_rules(path: &Path) -> Result<Vec<InferenceRule>> {
    parse_rules(&read_file(path)?, path)
}

pub fn read_rules_document(path: &Path) -> Result<(Prefixes, Vec<InferenceRule>)> {
    parse_rules_document(&read_file(path)?, path)
}

pub fn write_rules(rules: &[InferenceRule]) -> String {
    let mut out = String::new();
    for (i, r) in rules.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "# name: {}", r.name);
        out.push_str("CONSTRUCT {\n");
        for t in &r.consequent {
            let _ = writeln!(out, "  {t} .");
        }
        out.push_str("} WHERE {\n");
        for t in &r.antecedent {
            let _ = writeln!(out, "  {t} .");
        }
        out.push_str("}\n");
    }
    out
}

/// Parses `GRAPH { ... }`, `NOLIT { ?v ... }` and `EXISTS { a => c ; ... }`
/// sections, in any order. Only `GRAPH` is required. Subject and predicate
/// variables are added to the no-literal set whether listed or not.
pub fn parse_schema(src: &str, file: &Path) -> Result<TriplestoreSchema> {
    Ok(parse_schema_document(src, file)?.1)
}

/// [`parse_schema`], also returning the prefix declarations.
pub fn parse_schema_document(src: &str, file: &Path) -> Result<(Prefixes, TriplestoreSchema)> {
    let mut p = Parser::new(src, file)?;
    let allow = Allow {
        vars: true,
        blank_nodes: false,
    };
    p.prefix_declarations()?;
    let start = p.line();
    let mut graph: Option<GraphPattern> = None;
    let mut delta: BTreeSet<Arc<str>> = BTreeSet::new();
    let mut existentials: Vec<ExistentialRule> = Vec::new();
    let mut seen = BTreeSet::new();
    while !p.at_end() {
        let line = p.line();
        let section = ["GRAPH", "NOLIT", "EXISTS"]
            .into_iter()
            .find(|w| p.is_word(w))
            .ok_or_else(|| {
                p.error(format!(
                    "expected GRAPH, NOLIT or EXISTS, found {}",
                    p.describe()
                ))
            })?;
        if !seen.insert(section) {
            return Err(p.error_at(line, format!("duplicate {section} section")));
        }
        p.expect_word(section)?;
        p.expect_punct("{")?;
        match section {
            "GRAPH" => {
                let mut g = GraphPattern::new();
                for (t, l) in p.triples(allow, true)? {
                    if !g.insert(t.clone()) {
                        return Err(p.error_at(l, format!("duplicate pattern {t}")));
                    }
                }
                graph = Some(g);
            }
            "NOLIT" => {
                while p.is_var() {
                    delta.insert(Arc::from(p.variable()?));
                }
            }
            _ => {
                while !p.is_punct("}") {
                    let l = p.line();
                    let a = p.single_pattern(allow)?;
                    p.expect_punct("=>")?;
                    let c = p.single_pattern(allow)?;
                    let e = ExistentialRule::new(a, c).map_err(|e| p.error_at(l, e.to_string()))?;
                    existentials.push(e);
                    if !p.eat_punct(";") && !p.eat_punct(".") {
                        break;
                    }
                }
            }
        }
        p.expect_punct("}")?;
    }
    let graph = graph.ok_or_else(|| p.error_at(start, "missing GRAPH section"))?;
    for t in &graph {
        delta.extend(t.s.as_var().cloned());
        delta.extend(t.p.as_var().cloned());
    }
    let schema = TriplestoreSchema::new(graph, delta, existentials)
        .map_err(|e| p.error_at(start, e.to_string()))?;
    Ok((p.prefixes, schema))
}

pub fn read_schema(path: &Path) -> Result<TriplestoreSchema> {
    parse_schema(&read_file(path)?, path)
}

pub fn read_schema_document(path: &Path) -> Result<(Prefixes, TriplestoreSchema)> {
    parse_schema_document(&read_file(path)?, path)
}

pub fn write_schema(s: &TriplestoreSchema) -> String {
    write_schema_document(&Prefixes::default(), s)
}

/// A prefix header followed by the schema sections.
pub fn write_schema_document(prefixes: &Prefixes, s: &TriplestoreSchema) -> String {
    let mut out = String::new();
    prefixes.write(&mut out);
    out.push_str("GRAPH {\n");
    for t in s.graph() {
        let _ = writeln!(out, "  {t} .");
    }
    out.push_str("}\nNOLIT {");
    for v in s.no_literal() {
        let _ = write!(out, " ?{v}");
    }
    out.push_str(" }\n");
    if !s.existentials().is_empty() {
        out.push_str("EXISTS {\n");
        for e in s.existentials() {
            let _ = writeln!(out, "  {} => {} ;", e.antecedent, e.consequent);
        }
        out.push_str("}\n");
    }
    out
}
