//! Lexer and recursive-descent parser for the ACEL text syntax.
//!
//! Grammar, loosest to tightest: OR, AND, sequencing (";" and ":" at one
//! level, left-associative), AS / FILTER postfixes, iteration postfixes
//! ("+" and "(+)"), primaries (identifier, parentheses, PROJ, AGG, NEXT).
//! "--" starts a line comment. Identifiers beginning with "$" are reserved
//! for engine-generated names and rejected.

use std::collections::BTreeSet;

use crate::error::ParseError;
use crate::model::{CmpOp, MultisetPredicate, Predicate, Value, TYPE_ATTR};

use super::ast::{AggBinding, FilterExpr, FilterKind, Formula};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semicolon,
    Colon,
    Plus,
    PlusContig,
    Arrow,
    Cmp(CmpOp),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Int(n) => format!("number {n}"),
            Tok::Float(x) => format!("number {x}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Semicolon => "';'".into(),
            Tok::Colon => "':'".into(),
            Tok::Plus => "'+'".into(),
            Tok::PlusContig => "'(+)'".into(),
            Tok::Arrow => "'<-'".into(),
            Tok::Cmp(op) => format!("'{}'", op.symbol()),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    column: usize,
}

type Spanned = (Tok, usize, usize);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, column: 1 }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.column, message: message.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, ahead: usize) -> Option<u8> {
        self.src.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c.is_ascii_whitespace() {
                    self.bump();
                } else if c == b'-' && self.peek_at(1) == Some(b'-') {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                } else {
                    break;
                }
            }
            let (line, column) = (self.line, self.column);
            let tok = match self.peek() {
                None => Tok::Eof,
                Some(c) => self.next_token(c)?,
            };
            let done = tok == Tok::Eof;
            out.push((tok, line, column));
            if done {
                return Ok(out);
            }
        }
    }

    fn next_token(&mut self, c: u8) -> Result<Tok, ParseError> {
        match c {
            b'(' => {
                // "(+)" is a single iteration token; "(" followed by "+"
                // cannot open a grouped formula, so the lookahead is safe.
                if self.peek_at(1) == Some(b'+') && self.peek_at(2) == Some(b')') {
                    self.bump();
                    self.bump();
                    self.bump();
                    Ok(Tok::PlusContig)
                } else {
                    self.bump();
                    Ok(Tok::LParen)
                }
            }
            b')' => {
                self.bump();
                Ok(Tok::RParen)
            }
            b'[' => {
                self.bump();
                Ok(Tok::LBracket)
            }
            b']' => {
                self.bump();
                Ok(Tok::RBracket)
            }
            b',' => {
                self.bump();
                Ok(Tok::Comma)
            }
            b';' => {
                self.bump();
                Ok(Tok::Semicolon)
            }
            b':' => {
                self.bump();
                Ok(Tok::Colon)
            }
            b'+' => {
                self.bump();
                Ok(Tok::Plus)
            }
            b'=' => {
                self.bump();
                Ok(Tok::Cmp(CmpOp::Eq))
            }
            b'!' => {
                self.bump();
                if self.peek() == Some(b'=') {
                    self.bump();
                    Ok(Tok::Cmp(CmpOp::Ne))
                } else {
                    Err(self.error("expected '=' after '!'"))
                }
            }
            b'<' => {
                self.bump();
                match self.peek() {
                    Some(b'=') => {
                        self.bump();
                        Ok(Tok::Cmp(CmpOp::Le))
                    }
                    Some(b'-') => {
                        self.bump();
                        Ok(Tok::Arrow)
                    }
                    _ => Ok(Tok::Cmp(CmpOp::Lt)),
                }
            }
            b'>' => {
                self.bump();
                if self.peek() == Some(b'=') {
                    self.bump();
                    Ok(Tok::Cmp(CmpOp::Ge))
                } else {
                    Ok(Tok::Cmp(CmpOp::Gt))
                }
            }
            b'"' => self.string(),
            b'-' => self.number(),
            c if c.is_ascii_digit() => self.number(),
            c if c.is_ascii_alphabetic() || c == b'_' => Ok(self.ident()),
            b'$' => Err(self.error("identifiers starting with '$' are reserved")),
            other => Err(self.error(format!("unexpected character {:?}", other as char))),
        }
    }

    fn string(&mut self) -> Result<Tok, ParseError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                Some(b'"') => return Ok(Tok::Str(s)),
                Some(c) => s.push(c as char),
                None => return Err(self.error("unterminated string literal")),
            }
        }
    }

    fn number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.bump();
        }
        let mut is_float = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                self.bump();
            } else if c == b'.' && !is_float && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())
            {
                is_float = true;
                self.bump();
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if text == "-" {
            return Err(self.error("expected a digit after '-'"));
        }
        if is_float {
            text.parse::<f64>()
                .map(Tok::Float)
                .map_err(|e| self.error(format!("bad number {text:?}: {e}")))
        } else {
            text.parse::<i64>()
                .map(Tok::Int)
                .map_err(|e| self.error(format!("bad number {text:?}: {e}")))
        }
    }

    fn ident(&mut self) -> Tok {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.bump();
            } else {
                break;
            }
        }
        Tok::Ident(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(s) => Some(s.as_str()),
            _ => None,
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let (_, line, column) = self.toks[self.pos];
        ParseError { line, column, message: message.into() }
    }

    fn expect(&mut self, want: &Tok) -> Result<(), ParseError> {
        if self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!(
                "expected {}, found {}",
                want.describe(),
                self.peek().describe()
            )))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek_ident() == Some(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_name(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            other => Err(self.error_here(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.and_level()?;
        while self.eat_keyword("OR") {
            f = f.or(self.and_level()?);
        }
        Ok(f)
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.seq_level()?;
        while self.eat_keyword("AND") {
            f = f.and(self.seq_level()?);
        }
        Ok(f)
    }

    fn seq_level(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.contig_level()?;
        loop {
            match self.peek() {
                Tok::Semicolon => {
                    self.bump();
                    f = f.then(self.contig_level()?);
                }
                Tok::Colon => {
                    self.bump();
                    f = f.then_contig(self.contig_level()?);
                }
                _ => return Ok(f),
            }
        }
    }

    fn contig_level(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.postfix_level()?;
        loop {
            if self.eat_keyword("AS") {
                let var = self.expect_name("variable name")?;
                f = f.as_var(var);
            } else if self.eat_keyword("FILTER") {
                // A bare atom or a parenthesized expression; AND/OR chains
                // must be parenthesized so they cannot be confused with the
                // formula-level connectives that follow.
                let fe = self.filter_term()?;
                f = match fe {
                    FilterExpr::Atom(var, kinds) if kinds.len() == 1 => {
                        f.filter(var, kinds.into_iter().next().unwrap())
                    }
                    fe => Formula::FilterConnective(Box::new(f), fe),
                };
            } else {
                return Ok(f);
            }
        }
    }

    fn postfix_level(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.primary()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    f = f.iterate();
                }
                Tok::PlusContig => {
                    self.bump();
                    f = f.iterate_contig();
                }
                _ => return Ok(f),
            }
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(kw) if kw == "PROJ" => {
                self.bump();
                self.projection()
            }
            Tok::Ident(kw) if kw == "AGG" => {
                self.bump();
                self.aggregation()
            }
            Tok::Ident(kw) if kw == "NEXT" => {
                self.bump();
                self.expect(&Tok::LParen)?;
                let r = self.expect_name("event type")?;
                self.expect(&Tok::RParen)?;
                Ok(Formula::Next(r))
            }
            Tok::Ident(_) => Ok(Formula::EventType(self.expect_name("event type")?)),
            other => Err(self.error_here(format!("expected a formula, found {}", other.describe()))),
        }
    }

    fn projection(&mut self) -> Result<Formula, ParseError> {
        if self.peek() == &Tok::LBracket {
            self.bump();
            let mut vars = BTreeSet::new();
            vars.insert(self.expect_name("variable name")?);
            while self.peek() == &Tok::Comma {
                self.bump();
                vars.insert(self.expect_name("variable name")?);
            }
            self.expect(&Tok::RBracket)?;
            self.expect(&Tok::LParen)?;
            let f = self.formula()?;
            self.expect(&Tok::RParen)?;
            Ok(Formula::ProjectVars(Box::new(f), vars))
        } else {
            let var = self.expect_name("variable name")?;
            self.expect(&Tok::LParen)?;
            let mut attrs = BTreeSet::new();
            attrs.insert(self.expect_name("attribute name")?);
            while self.peek() == &Tok::Comma {
                self.bump();
                attrs.insert(self.expect_name("attribute name")?);
            }
            self.expect(&Tok::RParen)?;
            self.expect(&Tok::LParen)?;
            let f = self.formula()?;
            self.expect(&Tok::RParen)?;
            Ok(Formula::ProjectAttrs(Box::new(f), var, attrs))
        }
    }

    fn aggregation(&mut self) -> Result<Formula, ParseError> {
        let target = self.expect_name("aggregation target variable")?;
        self.expect(&Tok::LBracket)?;
        let mut bindings = vec![self.binding()?];
        while self.peek() == &Tok::Comma {
            self.bump();
            bindings.push(self.binding()?);
        }
        self.expect(&Tok::RBracket)?;
        let mut seen = BTreeSet::new();
        for b in &bindings {
            if !seen.insert(b.target.as_str()) {
                return Err(self.error_here(format!(
                    "duplicate aggregation target attribute {:?}",
                    b.target
                )));
            }
        }
        self.expect(&Tok::LParen)?;
        let f = self.formula()?;
        self.expect(&Tok::RParen)?;
        Ok(Formula::Agg(Box::new(f), target, bindings))
    }

    fn binding(&mut self) -> Result<AggBinding, ParseError> {
        let target = self.expect_name("target attribute")?;
        self.expect(&Tok::Arrow)?;
        let aggregate = self.expect_name("aggregate name")?;
        if crate::agg::lookup(&aggregate).is_none() {
            return Err(self.error_here(format!("unknown aggregate {aggregate:?}")));
        }
        let source_var = self.expect_name("source variable")?;
        self.expect(&Tok::LParen)?;
        let source_attr = self.expect_name("source attribute")?;
        self.expect(&Tok::RParen)?;
        Ok(AggBinding { target, aggregate, source_var, source_attr })
    }

    fn filter_expr(&mut self) -> Result<FilterExpr, ParseError> {
        let mut fe = self.filter_term()?;
        loop {
            if self.eat_keyword("AND") {
                fe = FilterExpr::And(Box::new(fe), Box::new(self.filter_term()?));
            } else if self.eat_keyword("OR") {
                fe = FilterExpr::Or(Box::new(fe), Box::new(self.filter_term()?));
            } else {
                return Ok(fe);
            }
        }
    }

    fn filter_term(&mut self) -> Result<FilterExpr, ParseError> {
        if self.peek() == &Tok::LParen {
            self.bump();
            let fe = self.filter_expr()?;
            self.expect(&Tok::RParen)?;
            Ok(fe)
        } else {
            let var = self.expect_name("filter variable")?;
            self.expect(&Tok::LBracket)?;
            let kinds = self.bracket_predicate()?;
            self.expect(&Tok::RBracket)?;
            Ok(FilterExpr::Atom(var, kinds))
        }
    }

    /// Parses the bracket body of `X[…]` into normal form: all per-event
    /// atoms conjoined into one leading Event payload, multiset atoms in
    /// source order after it.
    fn bracket_predicate(&mut self) -> Result<Vec<FilterKind>, ParseError> {
        if self.eat_keyword("NOT") {
            let inner = self.bracket_predicate()?;
            return match inner.as_slice() {
                [FilterKind::Event(p)] => Ok(vec![FilterKind::Event(Predicate::not(p.clone()))]),
                _ => Err(self.error_here("NOT cannot negate a multiset predicate")),
            };
        }
        let mut event = Predicate::True;
        let mut multiset = Vec::new();
        let mut saw_event = false;
        loop {
            match self.atom()? {
                FilterKind::Event(p) => {
                    event = Predicate::and(event, p);
                    saw_event = true;
                }
                FilterKind::Multiset(m) => multiset.push(FilterKind::Multiset(m)),
            }
            if !self.eat_keyword("AND") {
                break;
            }
        }
        let mut out = Vec::new();
        if saw_event || multiset.is_empty() {
            out.push(FilterKind::Event(event));
        }
        out.extend(multiset);
        Ok(out)
    }

    fn atom(&mut self) -> Result<FilterKind, ParseError> {
        if self.eat_keyword("TRUE") {
            return Ok(FilterKind::Event(Predicate::True));
        }
        if self.peek_ident() == Some("increasing") || self.peek_ident() == Some("decreasing") {
            let Tok::Ident(kw) = self.bump() else { unreachable!() };
            self.expect(&Tok::LParen)?;
            let attr = self.expect_name("attribute name")?;
            self.expect(&Tok::RParen)?;
            let m = if kw == "increasing" {
                MultisetPredicate::Increasing(attr)
            } else {
                MultisetPredicate::Decreasing(attr)
            };
            return Ok(FilterKind::Multiset(m));
        }
        let attr = self.expect_name("attribute name")?;
        let op = match self.peek() {
            Tok::Cmp(op) => {
                let op = *op;
                self.bump();
                op
            }
            // A bare attribute name is the same-value multiset predicate.
            _ => return Ok(FilterKind::Multiset(MultisetPredicate::SameAttr(attr))),
        };
        match self.bump() {
            Tok::Ident(name) if !is_keyword(&name) => {
                if attr == TYPE_ATTR {
                    let p = Predicate::TypeIs(name);
                    match op {
                        CmpOp::Eq => Ok(FilterKind::Event(p)),
                        CmpOp::Ne => Ok(FilterKind::Event(Predicate::not(p))),
                        _ => Err(self.error_here("type supports only '=' and '!='")),
                    }
                } else {
                    Ok(FilterKind::Event(Predicate::AttrAttrCmp(attr, op, name)))
                }
            }
            Tok::Int(n) => Ok(FilterKind::Event(Predicate::AttrCmp(attr, op, Value::Int(n)))),
            Tok::Float(x) => Ok(FilterKind::Event(Predicate::AttrCmp(attr, op, Value::Float(x)))),
            Tok::Str(s) => {
                if attr == TYPE_ATTR {
                    let p = Predicate::TypeIs(s);
                    match op {
                        CmpOp::Eq => Ok(FilterKind::Event(p)),
                        CmpOp::Ne => Ok(FilterKind::Event(Predicate::not(p))),
                        _ => Err(self.error_here("type supports only '=' and '!='")),
                    }
                } else {
                    Ok(FilterKind::Event(Predicate::AttrCmp(attr, op, Value::Text(s))))
                }
            }
            other => Err(self.error_here(format!(
                "expected a comparison operand, found {}",
                other.describe()
            ))),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "AS" | "FILTER" | "OR" | "AND" | "PROJ" | "AGG" | "NEXT" | "NOT" | "TRUE"
            | "increasing"
            | "decreasing"
    )
}

/// Parses one ACEL formula from query text.
pub fn parse_query(text: &str) -> Result<Formula, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.formula()?;
    if p.peek() != &Tok::Eof {
        return Err(p.error_here(format!("unexpected {}", p.peek().describe())));
    }
    Ok(f)
}
