use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    /// `<...>` without the brackets.
    IriRef(String),
    /// `prefix:local`, `:local`, `_:label`.
    PName(String),
    Var(String),
    /// A quoted string or a bare number, as its lexical form.
    Literal(String),
    /// Bare word: `a`, `true`, keywords.
    Word(String),
    /// `@prefix`, `@base`.
    Directive(String),
    /// A `#` comment, without the `#` and surrounding whitespace.
    Comment(String),
    Punct(&'static str),
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '%')
}

pub(crate) fn tokenize(src: &str, file: &Path) -> Result<Vec<Token>> {
    let err = |line: usize, msg: String| Error::parse(PathBuf::from(file), line, msg);
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start_line = line;
        let push = |out: &mut Vec<Token>, tok: Tok| {
            out.push(Token {
                tok,
                line: start_line,
            })
        };
        match c {
            '#' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '\n' {
                    j += 1;
                }
                let text: String = chars[i + 1..j].iter().collect();
                push(&mut out, Tok::Comment(text.trim().to_string()));
                i = j;
            }
            '<' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '>' {
                    if chars[j] == '\n' || chars[j].is_whitespace() {
                        return Err(err(line, "unterminated IRI".into()));
                    }
                    j += 1;
                }
                if j >= chars.len() {
                    return Err(err(line, "unterminated IRI".into()));
                }
                let iri: String = chars[i + 1..j].iter().collect();
                if iri.is_empty() {
                    return Err(err(line, "empty IRI".into()));
                }
                push(&mut out, Tok::IriRef(iri));
                i = j + 1;
            }
            '"' | '\'' => {
                let quote = c;
                let mut j = i + 1;
                let mut s = String::new();
                loop {
                    if j >= chars.len() {
                        return Err(err(start_line, "unterminated string".into()));
                    }
                    match chars[j] {
                        ch if ch == quote => break,
                        '\\' => {
                            j += 1;
                            let esc = chars.get(j).copied().unwrap_or(' ');
                            s.push(match esc {
                                'n' => '\n',
                                't' => '\t',
                                'r' => '\r',
                                '"' => '"',
                                '\'' => '\'',
                                '\\' => '\\',
                                other => {
                                    return Err(err(line, format!("unknown escape \\{other}")))
                                }
                            });
                        }
                        '\n' => return Err(err(line, "newline in string".into())),
                        ch => s.push(ch),
                    }
                    j += 1;
                }
                i = j + 1;
                // datatypes and language tags are read and dropped
                if i < chars.len() && chars[i] == '@' {
                    while i < chars.len()
                        && (chars[i] == '@' || chars[i].is_alphanumeric() || chars[i] == '-')
                    {
                        i += 1;
                    }
                } else if i + 1 < chars.len() && chars[i] == '^' && chars[i + 1] == '^' {
                    i += 2;
                    if i < chars.len() && chars[i] == '<' {
                        while i < chars.len() && chars[i] != '>' {
                            i += 1;
                        }
                        i += 1;
                    } else {
                        while i < chars.len() && is_name_char(chars[i]) {
                            i += 1;
                        }
                    }
                }
                push(&mut out, Tok::Literal(s));
            }
            '?' | '$' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(err(line, "empty variable name".into()));
                }
                push(&mut out, Tok::Var(chars[i + 1..j].iter().collect()));
                i = j;
            }
            '@' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_alphabetic() {
                    j += 1;
                }
                push(&mut out, Tok::Directive(chars[i + 1..j].iter().collect()));
                i = j;
            }
            '=' if chars.get(i + 1) == Some(&'>') => {
                push(&mut out, Tok::Punct("=>"));
                i += 2;
            }
            '{' | '}' | '[' | ']' | '(' | ')' | ';' | ',' => {
                push(
                    &mut out,
                    Tok::Punct(match c {
                        '{' => "{",
                        '}' => "}",
                        '[' => "[",
                        ']' => "]",
                        '(' => "(",
                        ')' => ")",
                        ';' => ";",
                        _ => ",",
                    }),
                );
                i += 1;
            }
            '.' if !chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) => {
                push(&mut out, Tok::Punct("."));
                i += 1;
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut j = i + 1;
                while j < chars.len()
                    && (chars[j].is_ascii_digit()
                        || chars[j] == '.'
                        || chars[j] == 'e'
                        || chars[j] == 'E')
                {
                    j += 1;
                }
                // a trailing dot ends the statement
                if chars[j - 1] == '.' {
                    j -= 1;
                }
                push(&mut out, Tok::Literal(chars[i..j].iter().collect()));
                i = j;
            }
            c if is_name_char(c) => {
                let mut j = i;
                while j < chars.len() && is_name_char(chars[j]) {
                    j += 1;
                }
                // a trailing dot ends the statement
                while j > i + 1 && chars[j - 1] == '.' {
                    j -= 1;
                }
                let word: String = chars[i..j].iter().collect();
                if word.contains(':') {
                    push(&mut out, Tok::PName(word));
                } else {
                    push(&mut out, Tok::Word(word));
                }
                i = j;
            }
            other => return Err(err(line, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}
