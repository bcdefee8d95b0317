//! Parser and canonical renderer for the surface description language.
//!
//! The language is line-comment (`#`) and whitespace insensitive. A file
//! declares one component: its metadata, an optional export list, and a
//! sequence of type and function declarations with optional attributes
//! (`@pure`, `@deprecated`, `@impl(token)`, `@cost(...)`, `@pre(...)`,
//! `@post(...)`).

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use thiserror::Error;

use crate::contract::{parse_decimal, render_decimal, Atom, CmpOp, Contract};
use crate::model::{
    ComponentModel, CostProfile, Dependency, ExportSpec, FunctionDecl, LicenseClass, Metadata,
    Param, TypeDecl, TypeKind, TypeRef, Visibility,
};
use crate::version::{SemVer, VersionReq};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SdlError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: duplicate {what} `{name}`")]
    Duplicate {
        line: usize,
        col: usize,
        what: &'static str,
        name: String,
    },
    #[error("{line}:{col}: export `{name}` does not resolve to a declaration")]
    UnresolvedExport {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: contract atom references `{var}`, which is not {allowed}")]
    BadContractVar {
        line: usize,
        col: usize,
        var: String,
        allowed: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Arrow,
    At,
    Question,
    Star,
    Assign,
    Cmp(CmpOp),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Number(text) => format!("number `{text}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::At => "`@`".into(),
            Tok::Question => "`?`".into(),
            Tok::Star => "`*`".into(),
            Tok::Assign => "`=`".into(),
            Tok::Cmp(op) => format!("`{op}`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            bytes: text.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.bytes.get(self.pos + offset).copied()
    }

    fn advance(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn error(&self, message: String) -> SdlError {
        SdlError::Syntax {
            line: self.line,
            col: self.col,
            message,
        }
    }

    fn lex(mut self) -> Result<Vec<Token>, SdlError> {
        let mut tokens = Vec::new();
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.advance();
                continue;
            }
            if b == b'#' {
                while let Some(c) = self.peek() {
                    if c == b'\n' {
                        break;
                    }
                    self.advance();
                }
                continue;
            }
            let (line, col) = (self.line, self.col);
            let tok = match b {
                b'{' => {
                    self.advance();
                    Tok::LBrace
                }
                b'}' => {
                    self.advance();
                    Tok::RBrace
                }
                b'(' => {
                    self.advance();
                    Tok::LParen
                }
                b')' => {
                    self.advance();
                    Tok::RParen
                }
                b',' => {
                    self.advance();
                    Tok::Comma
                }
                b':' => {
                    self.advance();
                    Tok::Colon
                }
                b'@' => {
                    self.advance();
                    Tok::At
                }
                b'?' => {
                    self.advance();
                    Tok::Question
                }
                b'*' => {
                    self.advance();
                    Tok::Star
                }
                b'=' => {
                    self.advance();
                    if self.peek() == Some(b'=') {
                        self.advance();
                        Tok::Cmp(CmpOp::Eq)
                    } else {
                        Tok::Assign
                    }
                }
                b'<' => {
                    self.advance();
                    if self.peek() == Some(b'=') {
                        self.advance();
                        Tok::Cmp(CmpOp::Le)
                    } else {
                        Tok::Cmp(CmpOp::Lt)
                    }
                }
                b'>' => {
                    self.advance();
                    if self.peek() == Some(b'=') {
                        self.advance();
                        Tok::Cmp(CmpOp::Ge)
                    } else {
                        Tok::Cmp(CmpOp::Gt)
                    }
                }
                b'!' => {
                    self.advance();
                    if self.peek() == Some(b'=') {
                        self.advance();
                        Tok::Cmp(CmpOp::Ne)
                    } else {
                        return Err(self.error("expected `=` after `!`".into()));
                    }
                }
                b'-' => {
                    self.advance();
                    match self.peek() {
                        Some(b'>') => {
                            self.advance();
                            Tok::Arrow
                        }
                        Some(c) if c.is_ascii_digit() => Tok::Number(self.lex_number(true)),
                        _ => return Err(self.error("expected `>` or digit after `-`".into())),
                    }
                }
                c if c.is_ascii_digit() => {
                    let text = self.lex_number(false);
                    // A digit run flowing straight into letters is one
                    // opaque word (an impl hash like 0a3f), not a number.
                    if self
                        .peek()
                        .is_some_and(|c| c.is_ascii_alphabetic() || c == b'_')
                    {
                        let mut name = text;
                        while let Some(c) = self.peek() {
                            if c.is_ascii_alphanumeric() || c == b'_' {
                                name.push(c as char);
                                self.advance();
                            } else {
                                break;
                            }
                        }
                        Tok::Ident(name)
                    } else {
                        Tok::Number(text)
                    }
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let mut name = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == b'_' {
                            name.push(c as char);
                            self.advance();
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(name)
                }
                other => {
                    return Err(self.error(format!("unexpected character `{}`", other as char)))
                }
            };
            tokens.push(Token { tok, line, col });
        }
        Ok(tokens)
    }

    /// Consumes digits and embedded dots, including a trailing `.*` so
    /// that wildcard requirements lex as one token.
    fn lex_number(&mut self, negative: bool) -> String {
        let mut text = String::new();
        if negative {
            text.push('-');
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                text.push(c as char);
                self.advance();
                continue;
            }
            if c == b'.' {
                match self.peek_at(1) {
                    Some(d) if d.is_ascii_digit() => {
                        text.push('.');
                        self.advance();
                        continue;
                    }
                    Some(b'*') => {
                        text.push_str(".*");
                        self.advance();
                        self.advance();
                        break;
                    }
                    _ => break,
                }
            }
            break;
        }
        text
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

/// An identifier together with the position it was read at.
type Spanned = (String, usize, usize);

/// Attributes collected ahead of a function declaration, with locations
/// for duplicate reporting.
#[derive(Default)]
struct Attrs {
    pure: bool,
    deprecated: bool,
    impl_hash: Option<String>,
    cost: Option<CostProfile>,
    pre: Vec<(Atom, usize, usize)>,
    post: Vec<(Atom, usize, usize)>,
    any: bool,
}

impl Parser {
    fn new(tokens: Vec<Token>, end: (usize, usize)) -> Parser {
        Parser {
            tokens,
            pos: 0,
            end,
        }
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or(self.end)
    }

    fn error(&self, message: String) -> SdlError {
        let (line, col) = self.here();
        SdlError::Syntax { line, col, message }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self, expected: &str) -> Result<Token, SdlError> {
        let token = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.error(format!("expected {expected}, found end of input")))?;
        self.pos += 1;
        Ok(token)
    }

    fn expect(&mut self, want: Tok, expected: &str) -> Result<Token, SdlError> {
        let token = self.next(expected)?;
        if token.tok == want {
            Ok(token)
        } else {
            Err(SdlError::Syntax {
                line: token.line,
                col: token.col,
                message: format!("expected {expected}, found {}", token.tok.describe()),
            })
        }
    }

    fn expect_ident(&mut self, expected: &str) -> Result<Spanned, SdlError> {
        let token = self.next(expected)?;
        match token.tok {
            Tok::Ident(name) => Ok((name, token.line, token.col)),
            other => Err(SdlError::Syntax {
                line: token.line,
                col: token.col,
                message: format!("expected {expected}, found {}", other.describe()),
            }),
        }
    }

    fn expect_keyword(&mut self, keyword: &str) -> Result<(), SdlError> {
        let (name, line, col) = self.expect_ident(&format!("`{keyword}`"))?;
        if name == keyword {
            Ok(())
        } else {
            Err(SdlError::Syntax {
                line,
                col,
                message: format!("expected `{keyword}`, found identifier `{name}`"),
            })
        }
    }

    fn eat_ident(&mut self, keyword: &str) -> bool {
        if let Some(Tok::Ident(name)) = self.peek() {
            if name == keyword {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn expect_version(&mut self) -> Result<SemVer, SdlError> {
        let token = self.next("a version `X.Y.Z`")?;
        let text = match &token.tok {
            Tok::Number(text) => text,
            other => {
                return Err(SdlError::Syntax {
                    line: token.line,
                    col: token.col,
                    message: format!("expected a version `X.Y.Z`, found {}", other.describe()),
                })
            }
        };
        text.parse().map_err(|e| SdlError::Syntax {
            line: token.line,
            col: token.col,
            message: format!("invalid version: {e}"),
        })
    }

    fn expect_decimal(&mut self) -> Result<(Rational64, usize, usize), SdlError> {
        let token = self.next("a number")?;
        let text = match &token.tok {
            Tok::Number(text) => text,
            other => {
                return Err(SdlError::Syntax {
                    line: token.line,
                    col: token.col,
                    message: format!("expected a number, found {}", other.describe()),
                })
            }
        };
        let value = parse_decimal(text).ok_or(SdlError::Syntax {
            line: token.line,
            col: token.col,
            message: format!("malformed number `{text}`"),
        })?;
        Ok((value, token.line, token.col))
    }

    fn parse_req(&mut self) -> Result<VersionReq, SdlError> {
        if self.peek() == Some(&Tok::Cmp(CmpOp::Ge)) {
            self.pos += 1;
            let (line, col) = self.here();
            let lower = self.expect_version()?;
            self.expect(Tok::Cmp(CmpOp::Lt), "`<`")?;
            let upper = self.expect_version()?;
            return VersionReq::range(lower, upper).map_err(|e| SdlError::Syntax {
                line,
                col,
                message: e.to_string(),
            });
        }
        let token = self.next("a version requirement")?;
        let text = match &token.tok {
            Tok::Number(text) => text.clone(),
            other => {
                return Err(SdlError::Syntax {
                    line: token.line,
                    col: token.col,
                    message: format!("expected a version requirement, found {}", other.describe()),
                })
            }
        };
        text.parse().map_err(|e| SdlError::Syntax {
            line: token.line,
            col: token.col,
            message: format!("invalid version requirement: {e}"),
        })
    }

    fn parse_metadata(&mut self) -> Result<Metadata, SdlError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut metadata = Metadata::default();
        let mut license_seen = false;
        let mut dep_names: BTreeSet<String> = BTreeSet::new();
        loop {
            if self.peek() == Some(&Tok::RBrace) {
                self.pos += 1;
                return Ok(metadata);
            }
            let (entry, line, col) = self.expect_ident("a metadata entry")?;
            match entry.as_str() {
                "license" => {
                    if license_seen {
                        return Err(SdlError::Duplicate {
                            line,
                            col,
                            what: "metadata entry",
                            name: "license".into(),
                        });
                    }
                    license_seen = true;
                    let (class, line, col) = self.expect_ident("a license class")?;
                    metadata.license = LicenseClass::from_name(&class).ok_or(SdlError::Syntax {
                        line,
                        col,
                        message: format!("unknown license class `{class}`"),
                    })?;
                }
                "platform" => {
                    let (name, line, col) = self.expect_ident("a platform name")?;
                    let version = self.expect_version()?;
                    if metadata.platforms.insert(name.clone(), version).is_some() {
                        return Err(SdlError::Duplicate {
                            line,
                            col,
                            what: "platform",
                            name,
                        });
                    }
                }
                "dep" => {
                    let (name, line, col) = self.expect_ident("a dependency name")?;
                    let req = self.parse_req()?;
                    if !dep_names.insert(name.clone()) {
                        return Err(SdlError::Duplicate {
                            line,
                            col,
                            what: "dependency",
                            name,
                        });
                    }
                    metadata.dependencies.push(Dependency { name, req });
                }
                other => {
                    return Err(SdlError::Syntax {
                        line,
                        col,
                        message: format!(
                            "expected `license`, `platform`, or `dep`, found `{other}`"
                        ),
                    })
                }
            }
        }
    }

    fn parse_exports(&mut self) -> Result<(ExportSpec, Vec<Spanned>), SdlError> {
        if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            return Ok((ExportSpec::AllPublic, Vec::new()));
        }
        self.expect(Tok::LBrace, "`{` or `*`")?;
        let mut names = BTreeSet::new();
        let mut located = Vec::new();
        loop {
            let (name, line, col) = self.expect_ident("an export name")?;
            located.push((name.clone(), line, col));
            names.insert(name);
            match self.next("`,` or `}`")? {
                Token {
                    tok: Tok::Comma, ..
                } => continue,
                Token {
                    tok: Tok::RBrace, ..
                } => break,
                token => {
                    return Err(SdlError::Syntax {
                        line: token.line,
                        col: token.col,
                        message: format!("expected `,` or `}}`, found {}", token.tok.describe()),
                    })
                }
            }
        }
        Ok((ExportSpec::Named(names), located))
    }

    fn parse_atom(&mut self) -> Result<(Atom, usize, usize), SdlError> {
        let (first, line, col) = self.expect_ident("a contract atom")?;
        match self.peek() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let (var, ..) = self.expect_ident("a variable name")?;
                self.expect(Tok::RParen, "`)`")?;
                let atom = if first == "nonnull" {
                    Atom::NonNull(var)
                } else {
                    Atom::Opaque { pred: first, var }
                };
                Ok((atom, line, col))
            }
            Some(Tok::Cmp(op)) => {
                let op = *op;
                self.pos += 1;
                let (k, ..) = self.expect_decimal()?;
                Ok((Atom::Cmp { var: first, op, k }, line, col))
            }
            _ => Err(self.error(
                "malformed contract atom: expected a comparison or a predicate application".into(),
            )),
        }
    }

    fn parse_atom_list(&mut self) -> Result<Vec<(Atom, usize, usize)>, SdlError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut atoms = vec![self.parse_atom()?];
        loop {
            match self.next("`,` or `)`")? {
                Token {
                    tok: Tok::Comma, ..
                } => atoms.push(self.parse_atom()?),
                Token {
                    tok: Tok::RParen, ..
                } => return Ok(atoms),
                token => {
                    return Err(SdlError::Syntax {
                        line: token.line,
                        col: token.col,
                        message: format!("expected `,` or `)`, found {}", token.tok.describe()),
                    })
                }
            }
        }
    }

    fn parse_attrs(&mut self) -> Result<Attrs, SdlError> {
        let mut attrs = Attrs::default();
        while self.peek() == Some(&Tok::At) {
            self.pos += 1;
            attrs.any = true;
            let (name, line, col) = self.expect_ident("an attribute name")?;
            let duplicate = |name: String| SdlError::Duplicate {
                line,
                col,
                what: "attribute",
                name,
            };
            match name.as_str() {
                "pure" => {
                    if attrs.pure {
                        return Err(duplicate(name));
                    }
                    attrs.pure = true;
                }
                "deprecated" => {
                    if attrs.deprecated {
                        return Err(duplicate(name));
                    }
                    attrs.deprecated = true;
                }
                "impl" => {
                    if attrs.impl_hash.is_some() {
                        return Err(duplicate(name));
                    }
                    self.expect(Tok::LParen, "`(`")?;
                    let token = self.next("an implementation token")?;
                    let text = match token.tok {
                        Tok::Ident(text) => text,
                        Tok::Number(text) => text,
                        other => {
                            return Err(SdlError::Syntax {
                                line: token.line,
                                col: token.col,
                                message: format!(
                                    "expected an implementation token, found {}",
                                    other.describe()
                                ),
                            })
                        }
                    };
                    self.expect(Tok::RParen, "`)`")?;
                    attrs.impl_hash = Some(text);
                }
                "cost" => {
                    if attrs.cost.is_some() {
                        return Err(duplicate(name));
                    }
                    self.expect(Tok::LParen, "`(`")?;
                    self.expect_keyword("runtime_ms")?;
                    self.expect(Tok::Assign, "`=`")?;
                    let (runtime_ms, rline, rcol) = self.expect_decimal()?;
                    self.expect(Tok::Comma, "`,`")?;
                    self.expect_keyword("memory_kb")?;
                    self.expect(Tok::Assign, "`=`")?;
                    let (memory_kb, mline, mcol) = self.expect_decimal()?;
                    self.expect(Tok::RParen, "`)`")?;
                    let zero = Rational64::from_integer(0);
                    if runtime_ms < zero {
                        return Err(SdlError::Syntax {
                            line: rline,
                            col: rcol,
                            message: "cost values must be non-negative".into(),
                        });
                    }
                    if memory_kb < zero {
                        return Err(SdlError::Syntax {
                            line: mline,
                            col: mcol,
                            message: "cost values must be non-negative".into(),
                        });
                    }
                    attrs.cost = Some(CostProfile {
                        runtime_ms,
                        memory_kb,
                    });
                }
                "pre" => attrs.pre.extend(self.parse_atom_list()?),
                "post" => attrs.post.extend(self.parse_atom_list()?),
                other => {
                    return Err(SdlError::Syntax {
                        line,
                        col,
                        message: format!("unknown attribute `@{other}`"),
                    })
                }
            }
        }
        Ok(attrs)
    }

    fn parse_typeref(&mut self) -> Result<TypeRef, SdlError> {
        let (base, ..) = self.expect_ident("a type name")?;
        let nullable = if self.peek() == Some(&Tok::Question) {
            self.pos += 1;
            true
        } else {
            false
        };
        Ok(TypeRef { base, nullable })
    }

    fn parse_function(
        &mut self,
        attrs: Attrs,
        visibility: Visibility,
    ) -> Result<FunctionDecl, SdlError> {
        let (name, ..) = self.expect_ident("a function name")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut params: Vec<Param> = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                let (pname, line, col) = self.expect_ident("a parameter name")?;
                if params.iter().any(|p| p.name == pname) {
                    return Err(SdlError::Duplicate {
                        line,
                        col,
                        what: "parameter",
                        name: pname,
                    });
                }
                self.expect(Tok::Colon, "`:`")?;
                let ty = self.parse_typeref()?;
                params.push(Param { name: pname, ty });
                match self.next("`,` or `)`")? {
                    Token {
                        tok: Tok::Comma, ..
                    } => continue,
                    Token {
                        tok: Tok::RParen, ..
                    } => break,
                    token => {
                        return Err(SdlError::Syntax {
                            line: token.line,
                            col: token.col,
                            message: format!("expected `,` or `)`, found {}", token.tok.describe()),
                        })
                    }
                }
            }
        } else {
            self.pos += 1;
        }
        self.expect(Tok::Arrow, "`->`")?;
        let return_type = self.parse_typeref()?;

        let param_names: BTreeSet<&str> = params.iter().map(|p| p.name.as_str()).collect();
        for (atom, line, col) in &attrs.pre {
            if !param_names.contains(atom.var()) {
                return Err(SdlError::BadContractVar {
                    line: *line,
                    col: *col,
                    var: atom.var().to_string(),
                    allowed: "a parameter of this function".into(),
                });
            }
        }
        for (atom, line, col) in &attrs.post {
            if atom.var() != "result" && !param_names.contains(atom.var()) {
                return Err(SdlError::BadContractVar {
                    line: *line,
                    col: *col,
                    var: atom.var().to_string(),
                    allowed: "a parameter or `result`".into(),
                });
            }
        }

        Ok(FunctionDecl {
            name,
            params,
            return_type,
            visibility,
            pure: attrs.pure,
            deprecated: attrs.deprecated,
            impl_hash: attrs.impl_hash,
            cost: attrs.cost,
            precondition: Contract::new(attrs.pre.into_iter().map(|(a, ..)| a)),
            postcondition: Contract::new(attrs.post.into_iter().map(|(a, ..)| a)),
        })
    }

    fn parse_component(&mut self) -> Result<ComponentModel, SdlError> {
        self.expect_keyword("component")?;
        let (name, ..) = self.expect_ident("a component name")?;
        let version = self.expect_version()?;
        self.expect(Tok::LBrace, "`{`")?;

        let mut model = ComponentModel::new(&name, version);
        let mut export_locations = Vec::new();
        if self.eat_ident("meta") {
            model.metadata = self.parse_metadata()?;
        }
        if self.eat_ident("exports") {
            let (spec, located) = self.parse_exports()?;
            model.exports = spec;
            export_locations = located;
        }

        let mut decl_names: BTreeMap<String, ()> = BTreeMap::new();
        loop {
            if self.peek() == Some(&Tok::RBrace) {
                self.pos += 1;
                break;
            }
            let attrs = self.parse_attrs()?;
            let visibility = if self.eat_ident("public") {
                Visibility::Public
            } else if self.eat_ident("internal") {
                Visibility::Internal
            } else {
                Visibility::Public
            };
            let (word, line, col) = self.expect_ident("a declaration")?;
            let kind = match word.as_str() {
                "fn" => None,
                "interface" => Some(TypeKind::Interface),
                "abstract" => Some(TypeKind::Abstract),
                "concrete" => Some(TypeKind::Concrete),
                "enum" => Some(TypeKind::Enum),
                other => {
                    return Err(SdlError::Syntax {
                        line,
                        col,
                        message: format!("expected `fn` or a type kind, found `{other}`"),
                    })
                }
            };
            let decl_name;
            if let Some(kind) = kind {
                if attrs.any {
                    return Err(SdlError::Syntax {
                        line,
                        col,
                        message: "attributes apply only to function declarations".into(),
                    });
                }
                self.expect_keyword("type")?;
                let (tname, ..) = self.expect_ident("a type name")?;
                decl_name = tname.clone();
                model.types.push(TypeDecl {
                    name: tname,
                    kind,
                    visibility,
                });
            } else {
                let func = self.parse_function(attrs, visibility)?;
                decl_name = func.name.clone();
                model.functions.push(func);
            }
            if decl_names.insert(decl_name.clone(), ()).is_some() {
                return Err(SdlError::Duplicate {
                    line,
                    col,
                    what: "declaration",
                    name: decl_name,
                });
            }
        }

        if self.pos < self.tokens.len() {
            return Err(self.error("unexpected input after component body".into()));
        }

        if let ExportSpec::Named(_) = &model.exports {
            for (name, line, col) in export_locations {
                if model.function(&name).is_none() && model.type_decl(&name).is_none() {
                    return Err(SdlError::UnresolvedExport { line, col, name });
                }
            }
        }
        Ok(model)
    }
}

/// Parses one component description.
pub fn parse_sdl(text: &str) -> Result<ComponentModel, SdlError> {
    let lexer = Lexer::new(text);
    let end = {
        let lines = text.lines().count().max(1);
        let last_len = text.lines().last().map(|l| l.len()).unwrap_or(0);
        (lines, last_len + 1)
    };
    let tokens = lexer.lex()?;
    Parser::new(tokens, end).parse_component()
}

fn write_contract(out: &mut String, keyword: &str, contract: &Contract) {
    if contract.is_empty() {
        return;
    }
    let atoms: Vec<String> = contract.atoms.iter().map(Atom::to_string).collect();
    out.push_str(&format!("  @{keyword}({})\n", atoms.join(", ")));
}

/// Renders a model as canonical SDL text. Parsing the result yields the
/// same model, and two equal models render identically, which makes the
/// output suitable for content digests.
pub fn render(model: &ComponentModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("component {} {} {{\n", model.name, model.version));
    out.push_str("  meta {\n");
    out.push_str(&format!("    license {}\n", model.metadata.license));
    for (platform, version) in &model.metadata.platforms {
        out.push_str(&format!("    platform {platform} {version}\n"));
    }
    for dep in &model.metadata.dependencies {
        out.push_str(&format!("    dep {} {}\n", dep.name, dep.req));
    }
    out.push_str("  }\n");
    match &model.exports {
        ExportSpec::AllPublic => out.push_str("  exports *\n"),
        ExportSpec::Named(names) => {
            let list: Vec<&str> = names.iter().map(String::as_str).collect();
            out.push_str(&format!("  exports {{ {} }}\n", list.join(", ")));
        }
    }
    for ty in &model.types {
        let vis = match ty.visibility {
            Visibility::Public => "",
            Visibility::Internal => "internal ",
        };
        out.push_str(&format!("  {vis}{} type {}\n", ty.kind, ty.name));
    }
    for func in &model.functions {
        if func.pure {
            out.push_str("  @pure\n");
        }
        if func.deprecated {
            out.push_str("  @deprecated\n");
        }
        if let Some(hash) = &func.impl_hash {
            out.push_str(&format!("  @impl({hash})\n"));
        }
        if let Some(cost) = &func.cost {
            out.push_str(&format!(
                "  @cost(runtime_ms={}, memory_kb={})\n",
                render_decimal(cost.runtime_ms),
                render_decimal(cost.memory_kb)
            ));
        }
        write_contract(&mut out, "pre", &func.precondition);
        write_contract(&mut out, "post", &func.postcondition);
        let vis = match func.visibility {
            Visibility::Public => "",
            Visibility::Internal => "internal ",
        };
        let params: Vec<String> = func
            .params
            .iter()
            .map(|p| format!("{}: {}", p.name, p.ty))
            .collect();
        out.push_str(&format!(
            "  {vis}fn {}({}) -> {}\n",
            func.name,
            params.join(", "),
            func.return_type
        ));
    }
    out.push_str("}\n");
    out
}
