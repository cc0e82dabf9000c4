//! A Turtle subset: prefixes, IRIs, labeled and anonymous blank nodes,
//! string/numeric/boolean literals with datatypes and language tags, and
//! `;` / `,` lists. Collections, graphs and base-relative resolution are
//! rejected.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const XSD_DATE: &str = "http://www.w3.org/2001/XMLSchema#date";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Option<String>,
    pub language: Option<String>,
}

impl Literal {
    pub fn plain(s: impl Into<String>) -> Self {
        Literal {
            lexical: s.into(),
            datatype: None,
            language: None,
        }
    }

    pub fn typed(s: impl Into<String>, datatype: impl Into<String>) -> Self {
        Literal {
            lexical: s.into(),
            datatype: Some(datatype.into()),
            language: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Iri(String),
    Blank(String),
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Node,
    pub predicate: String,
    pub object: Node,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleDocument {
    pub prefixes: BTreeMap<String, String>,
    pub triples: Vec<Triple>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurtleErrorKind {
    Syntax,
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct TurtleError {
    pub kind: TurtleErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for TurtleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            TurtleErrorKind::Syntax => "syntax error",
            TurtleErrorKind::Unsupported => "unsupported construct",
        };
        write!(f, "{what} at {}:{}: {}", self.line, self.column, self.message)
    }
}

// Prefix for anonymous blank nodes until they get a real label.
const ANON: char = '\u{0}';

pub fn parse_turtle(text: &str) -> Result<TripleDocument, TurtleError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        doc: TripleDocument::default(),
        anon: 0,
    };
    p.document()?;
    let mut doc = p.doc;
    relabel_anonymous(&mut doc);
    Ok(doc)
}

fn relabel_anonymous(doc: &mut TripleDocument) {
    let explicit: HashSet<String> = doc
        .triples
        .iter()
        .flat_map(|t| [&t.subject, &t.object])
        .filter_map(|n| match n {
            Node::Blank(l) if !l.starts_with(ANON) => Some(l.clone()),
            _ => None,
        })
        .collect();
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    let mut next = 0usize;
    let mut fresh = |old: &str, names: &mut BTreeMap<String, String>| -> String {
        if let Some(n) = names.get(old) {
            return n.clone();
        }
        let name = loop {
            let candidate = format!("b{next}");
            next += 1;
            if !explicit.contains(&candidate) {
                break candidate;
            }
        };
        names.insert(old.to_string(), name.clone());
        name
    };
    for t in &mut doc.triples {
        for node in [&mut t.subject, &mut t.object] {
            if let Node::Blank(l) = node {
                if l.starts_with(ANON) {
                    *l = fresh(l, &mut names);
                }
            }
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    doc: TripleDocument,
    anon: usize,
}

impl Parser {
    fn err(&self, message: impl Into<String>) -> TurtleError {
        TurtleError {
            kind: TurtleErrorKind::Syntax,
            line: self.line,
            column: self.col,
            message: message.into(),
        }
    }

    fn unsupported(&self, message: impl Into<String>) -> TurtleError {
        TurtleError {
            kind: TurtleErrorKind::Unsupported,
            ..self.err(message)
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.chars.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn starts_with_keyword(&self, kw: &str) -> bool {
        let n = kw.chars().count();
        kw.chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i).map(|x| x.eq_ignore_ascii_case(&c)) == Some(true))
            && !self.peek_at(n).is_some_and(|c| c.is_alphanumeric() || c == ':' || c == '_')
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, c: char) -> Result<(), TurtleError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`, found {}", self.found())))
        }
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(c) => format!("`{c}`"),
            None => "end of input".to_string(),
        }
    }

    fn document(&mut self) -> Result<(), TurtleError> {
        loop {
            self.skip_ws();
            let Some(c) = self.peek() else {
                return Ok(());
            };
            if c == '@' {
                if self.starts_with("@prefix") {
                    for _ in 0..7 {
                        self.bump();
                    }
                    self.prefix_decl()?;
                    self.expect('.')?;
                } else if self.starts_with("@base") {
                    return Err(self.unsupported("@base declarations"));
                } else {
                    return Err(self.err("unknown directive"));
                }
            } else if self.starts_with_keyword("PREFIX") {
                for _ in 0..6 {
                    self.bump();
                }
                self.prefix_decl()?;
            } else if self.starts_with_keyword("BASE") {
                return Err(self.unsupported("BASE declarations"));
            } else if self.starts_with_keyword("GRAPH") || c == '{' {
                return Err(self.unsupported("named graphs"));
            } else {
                self.triples()?;
                self.expect('.')?;
            }
        }
    }

    fn prefix_decl(&mut self) -> Result<(), TurtleError> {
        self.skip_ws();
        let mut prefix = String::new();
        while let Some(c) = self.peek() {
            if c == ':' {
                break;
            }
            if !is_pn_char(c) && c != '.' {
                return Err(self.err(format!("invalid prefix character `{c}`")));
            }
            prefix.push(c);
            self.bump();
        }
        self.expect(':')?;
        self.skip_ws();
        let iri = self.iri_ref()?;
        self.doc.prefixes.insert(prefix, iri);
        Ok(())
    }

    fn triples(&mut self) -> Result<(), TurtleError> {
        self.skip_ws();
        if self.peek() == Some('[') {
            let subject = self.blank_property_list()?;
            self.skip_ws();
            if self.peek() != Some('.') {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = self.subject()?;
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> Result<Node, TurtleError> {
        self.skip_ws();
        match self.peek() {
            Some('<') => Ok(Node::Iri(self.iri_ref()?)),
            Some('_') => Ok(Node::Blank(self.blank_label()?)),
            Some('(') => Err(self.unsupported("RDF collections")),
            Some('{') => Err(self.unsupported("named graphs")),
            Some(_) => Ok(Node::Iri(self.prefixed_name()?)),
            None => Err(self.err("expected a subject, found end of input")),
        }
    }

    fn predicate_object_list(&mut self, subject: &Node) -> Result<(), TurtleError> {
        loop {
            self.skip_ws();
            let predicate = self.verb()?;
            self.object_list(subject, &predicate)?;
            self.skip_ws();
            if self.peek() != Some(';') {
                return Ok(());
            }
            while self.peek() == Some(';') {
                self.bump();
                self.skip_ws();
            }
            if matches!(self.peek(), Some('.') | Some(']') | None) {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> Result<String, TurtleError> {
        self.skip_ws();
        if self.peek() == Some('a')
            && self
                .peek_at(1)
                .is_some_and(|c| c.is_whitespace() || c == '<' || c == '[' || c == '"')
        {
            self.bump();
            return Ok(RDF_TYPE.to_string());
        }
        match self.peek() {
            Some('<') => self.iri_ref(),
            Some('[') | Some('_') | Some('"') | Some('\'') => {
                Err(self.err("predicates must be IRIs"))
            }
            Some(_) => self.prefixed_name(),
            None => Err(self.err("expected a predicate, found end of input")),
        }
    }

    fn object_list(&mut self, subject: &Node, predicate: &str) -> Result<(), TurtleError> {
        loop {
            let object = self.object()?;
            self.doc.triples.push(Triple {
                subject: subject.clone(),
                predicate: predicate.to_string(),
                object,
            });
            self.skip_ws();
            if self.peek() == Some(',') {
                self.bump();
            } else {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Node, TurtleError> {
        self.skip_ws();
        match self.peek() {
            Some('<') => Ok(Node::Iri(self.iri_ref()?)),
            Some('_') if self.peek_at(1) == Some(':') => Ok(Node::Blank(self.blank_label()?)),
            Some('[') => self.blank_property_list(),
            Some('(') => Err(self.unsupported("RDF collections")),
            Some('"') | Some('\'') => self.string_literal(),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' || c == '.' => self.numeric(),
            Some(_) if self.starts_with_keyword("true") => {
                for _ in 0..4 {
                    self.bump();
                }
                Ok(Node::Literal(Literal::typed("true", XSD_BOOLEAN)))
            }
            Some(_) if self.starts_with_keyword("false") => {
                for _ in 0..5 {
                    self.bump();
                }
                Ok(Node::Literal(Literal::typed("false", XSD_BOOLEAN)))
            }
            Some(_) => Ok(Node::Iri(self.prefixed_name()?)),
            None => Err(self.err("expected an object, found end of input")),
        }
    }

    fn blank_property_list(&mut self) -> Result<Node, TurtleError> {
        self.expect('[')?;
        let node = Node::Blank(format!("{ANON}{}", self.anon));
        self.anon += 1;
        self.skip_ws();
        if self.peek() != Some(']') {
            self.predicate_object_list(&node)?;
        }
        self.expect(']')?;
        Ok(node)
    }

    fn blank_label(&mut self) -> Result<String, TurtleError> {
        self.bump();
        if self.bump() != Some(':') {
            return Err(self.err("expected `_:` blank node label"));
        }
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if is_pn_char(c) || (c == '.' && self.peek_at(1).is_some_and(is_pn_char)) {
                label.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if label.is_empty() {
            return Err(self.err("empty blank node label"));
        }
        Ok(label)
    }

    fn iri_ref(&mut self) -> Result<String, TurtleError> {
        if self.peek() != Some('<') {
            return Err(self.err(format!("expected `<`, found {}", self.found())));
        }
        self.bump();
        let mut iri = String::new();
        loop {
            match self.bump() {
                Some('>') => return Ok(iri),
                Some('\\') => match self.bump() {
                    Some('u') => iri.push(self.hex_escape(4)?),
                    Some('U') => iri.push(self.hex_escape(8)?),
                    _ => return Err(self.err("invalid escape in IRI")),
                },
                Some(c) if c <= ' ' || "<\"{}|^`".contains(c) => {
                    return Err(self.err(format!("character {c:?} is not allowed in an IRI")))
                }
                Some(c) => iri.push(c),
                None => return Err(self.err("unterminated IRI")),
            }
        }
    }

    fn hex_escape(&mut self, n: usize) -> Result<char, TurtleError> {
        let mut code = 0u32;
        for _ in 0..n {
            let d = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.err("invalid hex escape"))?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| self.err("escape is not a valid code point"))
    }

    fn prefixed_name(&mut self) -> Result<String, TurtleError> {
        let (line, col) = (self.line, self.col);
        let mut prefix = String::new();
        while let Some(c) = self.peek() {
            if c == ':' {
                break;
            }
            if !(is_pn_char(c) || c == '.') {
                return Err(self.err(format!("unexpected {}", self.found())));
            }
            prefix.push(c);
            self.bump();
        }
        if self.bump() != Some(':') {
            return Err(self.err("expected a prefixed name"));
        }
        let mut local = String::new();
        while let Some(c) = self.peek() {
            let dot_inside = c == '.' && self.peek_at(1).is_some_and(|n| is_pn_char(n) || n == ':');
            if is_pn_char(c) || c == ':' || c == '%' || dot_inside {
                local.push(c);
                self.bump();
            } else if c == '\\' {
                self.bump();
                match self.bump() {
                    Some(e) if "_~.-!$&'()*+,;=/?#@%".contains(e) => local.push(e),
                    _ => return Err(self.err("invalid escape in local name")),
                }
            } else {
                break;
            }
        }
        match self.doc.prefixes.get(&prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => Err(TurtleError {
                kind: TurtleErrorKind::Syntax,
                line,
                column: col,
                message: format!("undeclared prefix `{prefix}:`"),
            }),
        }
    }

    fn string_literal(&mut self) -> Result<Node, TurtleError> {
        let quote = self.peek().unwrap_or('"');
        let long = self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote);
        let lexical = if long {
            for _ in 0..3 {
                self.bump();
            }
            self.string_body(quote, true)?
        } else {
            self.bump();
            self.string_body(quote, false)?
        };
        let mut lit = Literal::plain(lexical);
        if self.peek() == Some('@') {
            self.bump();
            let mut tag = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || (c == '-' && !tag.is_empty()) {
                    tag.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            if tag.is_empty() {
                return Err(self.err("empty language tag"));
            }
            lit.language = Some(tag);
        } else if self.starts_with("^^") {
            self.bump();
            self.bump();
            let dt = if self.peek() == Some('<') {
                self.iri_ref()?
            } else {
                self.prefixed_name()?
            };
            lit.datatype = Some(dt);
        }
        Ok(Node::Literal(lit))
    }

    fn string_body(&mut self, quote: char, long: bool) -> Result<String, TurtleError> {
        let mut out = String::new();
        loop {
            if long && self.peek() == Some(quote) && self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote) {
                // A long string may end with up to two extra quote characters.
                while self.peek_at(3) == Some(quote) {
                    out.push(quote);
                    self.bump();
                }
                for _ in 0..3 {
                    self.bump();
                }
                return Ok(out);
            }
            match self.bump() {
                None => return Err(self.err("unterminated string")),
                Some(c) if c == quote && !long => return Ok(out),
                Some('\n') | Some('\r') if !long => {
                    return Err(self.err("line break in short string"))
                }
                Some('\\') => match self.bump() {
                    Some('t') => out.push('\t'),
                    Some('b') => out.push('\u{8}'),
                    Some('n') => out.push('\n'),
                    Some('r') => out.push('\r'),
                    Some('f') => out.push('\u{c}'),
                    Some('"') => out.push('"'),
                    Some('\'') => out.push('\''),
                    Some('\\') => out.push('\\'),
                    Some('u') => out.push(self.hex_escape(4)?),
                    Some('U') => out.push(self.hex_escape(8)?),
                    _ => return Err(self.err("invalid string escape")),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn numeric(&mut self) -> Result<Node, TurtleError> {
        let mut s = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            s.push(c);
            self.bump();
        }
        let digits = |p: &mut Self, s: &mut String| {
            let mut n = 0;
            while let Some(c) = p.peek().filter(char::is_ascii_digit) {
                s.push(c);
                p.bump();
                n += 1;
            }
            n
        };
        let int_digits = digits(self, &mut s);
        let mut frac_digits = 0;
        let mut datatype = XSD_INTEGER;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            s.push('.');
            self.bump();
            frac_digits = digits(self, &mut s);
            datatype = XSD_DECIMAL;
        }
        if int_digits + frac_digits == 0 {
            return Err(self.err("malformed number"));
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            s.push(e);
            self.bump();
            if let Some(c @ ('+' | '-')) = self.peek() {
                s.push(c);
                self.bump();
            }
            if digits(self, &mut s) == 0 {
                return Err(self.err("malformed exponent"));
            }
            datatype = XSD_DOUBLE;
        }
        Ok(Node::Literal(Literal::typed(s, datatype)))
    }
}

fn is_pn_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '\u{b7}'
}

/// Writes one triple per line with full IRIs. Parsing the output yields the
/// same prefixes and the same triple multiset.
pub fn write_turtle(doc: &TripleDocument) -> String {
    let mut out = String::new();
    for (prefix, iri) in &doc.prefixes {
        out.push_str(&format!("@prefix {prefix}: {} .\n", iri_ref(iri)));
    }
    if !doc.prefixes.is_empty() && !doc.triples.is_empty() {
        out.push('\n');
    }
    for t in &doc.triples {
        out.push_str(&format!(
            "{} {} {} .\n",
            write_node(&t.subject),
            iri_ref(&t.predicate),
            write_node(&t.object)
        ));
    }
    out
}

pub(crate) fn write_node(node: &Node) -> String {
    match node {
        Node::Iri(iri) => iri_ref(iri),
        Node::Blank(label) => format!("_:{label}"),
        Node::Literal(lit) => write_literal(lit),
    }
}

pub(crate) fn write_literal(lit: &Literal) -> String {
    let mut s = quote_string(&lit.lexical);
    if let Some(lang) = &lit.language {
        s.push('@');
        s.push_str(lang);
    } else if let Some(dt) = &lit.datatype {
        s.push_str("^^");
        s.push_str(&iri_ref(dt));
    }
    s
}

pub(crate) fn iri_ref(iri: &str) -> String {
    let mut s = String::with_capacity(iri.len() + 2);
    s.push('<');
    for c in iri.chars() {
        if c <= ' ' || "<>\"{}|^`\\".contains(c) {
            s.push_str(&format!("\\u{:04X}", c as u32));
        } else {
            s.push(c);
        }
    }
    s.push('>');
    s
}

pub(crate) fn quote_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
