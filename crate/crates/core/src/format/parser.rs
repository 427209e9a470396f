use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use super::lexer::{tokenize, Tok, Token};
use super::{Prefixes, STANDARD_PREFIXES};
use crate::error::{Error, Result};
use crate::rdf::{Term, TriplePattern, RDF_TYPE};

/// What may appear in a triples block.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Allow {
    pub vars: bool,
    pub blank_nodes: bool,
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    file: PathBuf,
    pub prefixes: Prefixes,
    used_labels: BTreeSet<String>,
    next_bnode: usize,
    /// Comments skipped since the last call to `take_comments`.
    comments: Vec<String>,
}

impl Parser {
    pub fn new(src: &str, file: &Path) -> Result<Self> {
        let toks = tokenize(src, file)?;
        let used_labels = toks
            .iter()
            .filter_map(|t| match &t.tok {
                Tok::PName(n) if n.starts_with("_:") => Some(n.clone()),
                _ => None,
            })
            .collect();
        Ok(Parser {
            toks,
            pos: 0,
            file: file.to_path_buf(),
            prefixes: Prefixes::default(),
            used_labels,
            next_bnode: 0,
            comments: Vec::new(),
        })
    }

    pub fn line(&self) -> usize {
        self.toks[self.pos.min(self.toks.len())..]
            .iter()
            .find(|t| !matches!(t.tok, Tok::Comment(_)))
            .or_else(|| self.toks.last())
            .map_or(1, |t| t.line)
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.file.clone(), self.line(), msg)
    }

    pub fn error_at(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.file.clone(), line, msg)
    }

    fn skip_comments(&mut self) {
        while let Some(Token {
            tok: Tok::Comment(c),
            ..
        }) = self.toks.get(self.pos)
        {
            self.comments.push(c.clone());
            self.pos += 1;
        }
    }

    pub fn take_comments(&mut self) -> Vec<String> {
        self.skip_comments();
        std::mem::take(&mut self.comments)
    }

    pub fn peek(&mut self) -> Option<&Tok> {
        self.skip_comments();
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn next(&mut self) -> Option<Tok> {
        self.skip_comments();
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn is_punct(&mut self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    pub fn is_word(&mut self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x.eq_ignore_ascii_case(w))
    }

    pub fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, p: &str) -> Result<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{p}`, found {}", self.describe())))
        }
    }

    pub fn expect_word(&mut self, w: &str) -> Result<()> {
        if self.is_word(w) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{w}`, found {}", self.describe())))
        }
    }

    pub fn describe(&self) -> String {
        let next = self.toks[self.pos.min(self.toks.len())..]
            .iter()
            .map(|t| &t.tok)
            .find(|t| !matches!(t, Tok::Comment(_)));
        match next {
            None => "end of input".into(),
            Some(Tok::IriRef(s)) => format!("<{s}>"),
            Some(Tok::PName(s)) | Some(Tok::Word(s)) => format!("`{s}`"),
            Some(Tok::Var(s)) => format!("`?{s}`"),
            Some(Tok::Literal(s)) => format!("literal \"{s}\""),
            Some(Tok::Directive(s)) => format!("`@{s}`"),
            Some(Tok::Punct(p)) => format!("`{p}`"),
            Some(Tok::Comment(_)) => unreachable!("comments are skipped"),
        }
    }

    /// Consumes any number of `@prefix`/`PREFIX` declarations.
    pub fn prefix_declarations(&mut self) -> Result<()> {
        loop {
            let sparql_style = self.is_word("PREFIX");
            let turtle_style = matches!(self.peek(), Some(Tok::Directive(d)) if d == "prefix");
            if !sparql_style && !turtle_style {
                if matches!(self.peek(), Some(Tok::Directive(_))) {
                    return Err(self.error(format!("unsupported directive {}", self.describe())));
                }
                return Ok(());
            }
            self.pos += 1;
            let name = match self.next() {
                Some(Tok::PName(n)) if n.ends_with(':') && n.matches(':').count() == 1 => {
                    n[..n.len() - 1].to_string()
                }
                _ => return Err(self.error("expected a prefix name such as `ex:`")),
            };
            let ns = match self.next() {
                Some(Tok::IriRef(i)) => i,
                _ => return Err(self.error("expected a namespace IRI")),
            };
            if turtle_style {
                self.expect_punct(".")?;
            }
            self.prefixes.declare(name, ns);
        }
    }

    fn fresh_bnode(&mut self) -> Term {
        loop {
            let label = format!("_:g{}", self.next_bnode);
            self.next_bnode += 1;
            if !self.used_labels.contains(&label) {
                return Term::iri(label);
            }
        }
    }

    fn iri_from_ref(&self, iri: &str) -> Term {
        for (p, ns) in STANDARD_PREFIXES {
            if let Some(local) = iri.strip_prefix(ns) {
                let candidate = format!("{p}:{local}");
                if super::is_plain_local(local) {
                    return Term::iri(candidate);
                }
            }
        }
        Term::iri(iri)
    }

    fn iri_from_pname(&self, name: &str) -> Term {
        let (prefix, local) = name
            .split_once(':')
            .expect("prefixed names contain a colon");
        Term::iri(format!(
            "{}:{local}",
            self.prefixes.canonical_prefix(prefix)
        ))
    }

    /// A single term. `[` and `(` are handled by callers that can emit
    /// nested triples.
    fn simple_term(&mut self, allow: Allow, predicate: bool) -> Result<Term> {
        let line = self.line();
        match self.next() {
            Some(Tok::IriRef(i)) => Ok(self.iri_from_ref(&i)),
            Some(Tok::PName(n)) => {
                if n.starts_with("_:") && !allow.blank_nodes {
                    return Err(self.error_at(line, "blank nodes are not allowed here"));
                }
                Ok(self.iri_from_pname(&n))
            }
            Some(Tok::Word(w)) if w == "a" && predicate => Ok(Term::iri(RDF_TYPE)),
            Some(Tok::Word(w)) if w == "true" || w == "false" => Ok(Term::literal(w)),
            Some(Tok::Var(v)) if allow.vars => Ok(Term::var(v)),
            Some(Tok::Var(v)) => {
                Err(self.error_at(line, format!("variable ?{v} is not allowed here")))
            }
            Some(Tok::Literal(l)) => Ok(Term::literal(l)),
            Some(_) => {
                self.pos -= 1;
                Err(self.error_at(line, format!("expected a term, found {}", self.describe())))
            }
            None => Err(self.error_at(line, "expected a term, found end of input")),
        }
    }

    /// A subject or object, possibly a `[ ... ]` blank node or a `( ... )`
    /// collection whose triples are appended to `out`.
    fn node(&mut self, allow: Allow, out: &mut Vec<(TriplePattern, usize)>) -> Result<Term> {
        if self.is_punct("[") {
            if !allow.blank_nodes {
                return Err(self.error("blank nodes are not allowed here"));
            }
            self.pos += 1;
            let b = self.fresh_bnode();
            if !self.eat_punct("]") {
                self.predicate_object_list(&b, allow, out)?;
                self.expect_punct("]")?;
            }
            return Ok(b);
        }
        if self.is_punct("(") {
            if !allow.blank_nodes {
                return Err(self.error("collections are not allowed here"));
            }
            self.pos += 1;
            let mut items = Vec::new();
            while !self.eat_punct(")") {
                if self.at_end() {
                    return Err(self.error("unterminated collection"));
                }
                items.push((self.node(allow, out)?, self.line()));
            }
            let mut head = Term::iri("rdf:nil");
            for (item, line) in items.into_iter().rev() {
                let cell = self.fresh_bnode();
                out.push((
                    TriplePattern::new(cell.clone(), Term::iri("rdf:first"), item),
                    line,
                ));
                out.push((
                    TriplePattern::new(cell.clone(), Term::iri("rdf:rest"), head),
                    line,
                ));
                head = cell;
            }
            return Ok(head);
        }
        self.simple_term(allow, false)
    }

    fn predicate_object_list(
        &mut self,
        s: &Term,
        allow: Allow,
        out: &mut Vec<(TriplePattern, usize)>,
    ) -> Result<()> {
        loop {
            let line = self.line();
            let p = self.simple_term(allow, true)?;
            loop {
                let o = self.node(allow, out)?;
                out.push((TriplePattern::new(s.clone(), p.clone(), o), line));
                if !self.eat_punct(",") {
                    break;
                }
            }
            if !self.eat_punct(";") {
                return Ok(());
            }
            // trailing `;` before `.`, `]` or `}`
            while self.eat_punct(";") {}
            if self.is_punct(".") || self.is_punct("]") || self.is_punct("}") || self.at_end() {
                return Ok(());
            }
        }
    }

    /// Triples up to `}` (not consumed) or end of input. The final `.` of a
    /// braced block is optional. Each pattern carries its source line.
    pub fn triples(&mut self, allow: Allow, braced: bool) -> Result<Vec<(TriplePattern, usize)>> {
        let mut out = Vec::new();
        loop {
            if braced && self.is_punct("}") {
                return Ok(out);
            }
            if !braced {
                self.prefix_declarations()?;
            }
            if self.at_end() {
                if braced {
                    return Err(self.error("missing `}`"));
                }
                return Ok(out);
            }
            let bracketed_subject = self.is_punct("[");
            let s = self.node(allow, &mut out)?;
            let bare = bracketed_subject && (self.is_punct(".") || (braced && self.is_punct("}")));
            if !bare {
                self.predicate_object_list(&s, allow, &mut out)?;
            }
            if self.eat_punct(".") {
                continue;
            }
            if braced && self.is_punct("}") {
                return Ok(out);
            }
            return Err(self.error(format!("expected `.`, found {}", self.describe())));
        }
    }

    /// One triple pattern `s p o` with no abbreviations.
    pub fn single_pattern(&mut self, allow: Allow) -> Result<TriplePattern> {
        let s = self.simple_term(allow, false)?;
        let p = self.simple_term(allow, true)?;
        let o = self.simple_term(allow, false)?;
        Ok(TriplePattern::new(s, p, o))
    }

    pub fn variable(&mut self) -> Result<String> {
        let line = self.line();
        match self.next() {
            Some(Tok::Var(v)) => Ok(v),
            _ => {
                self.pos -= 1;
                Err(self.error_at(
                    line,
                    format!("expected a variable, found {}", self.describe()),
                ))
            }
        }
    }

    pub fn is_var(&mut self) -> bool {
        matches!(self.peek(), Some(Tok::Var(_)))
    }
}
