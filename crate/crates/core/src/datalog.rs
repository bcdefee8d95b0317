//! A small stratified Datalog engine. Rules are parsed from `.pol` text,
//! checked for safety and stratifiability, and evaluated bottom-up with
//! semi-naive iteration. Every derived fact carries a derivation tree so
//! a verdict can be replayed and audited later.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::contract::parse_decimal;
use crate::version::ImpactLevel;

/// The only builtin predicate: `gt(A, B)` over decimal constants.
pub const GT: &str = "gt";

pub const IMPACT_PREDICATES: &[(&str, ImpactLevel)] = &[
    ("impact_major", ImpactLevel::Major),
    ("impact_minor", ImpactLevel::Minor),
    ("impact_patch", ImpactLevel::Patch),
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Constant(String),
    /// Identifier starting with an uppercase letter.
    Variable(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(text) => f.write_str(&render_constant(text)),
            Term::Variable(name) => f.write_str(name),
        }
    }
}

/// Renders a constant so the fact-file reader can read it back: bare when
/// it is a plain identifier, number, or version-shaped token, quoted
/// otherwise.
pub fn render_constant(text: &str) -> String {
    let bare = !text.is_empty()
        && text
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-' | '*'));
    if bare {
        text.to_string()
    } else {
        let escaped = text.replace('\\', "\\\\").replace('"', "\\\"");
        format!("\"{escaped}\"")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub predicate: String,
    pub args: Vec<Term>,
    pub negated: bool,
}

impl Literal {
    pub fn fact(predicate: &str, args: &[&str]) -> Literal {
        Literal {
            predicate: predicate.to_string(),
            args: args.iter().map(|a| Term::Constant(a.to_string())).collect(),
            negated: false,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Constant(_)))
    }

    fn key(&self) -> GroundKey {
        debug_assert!(self.is_ground() && !self.negated);
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Constant(c) => c.clone(),
                Term::Variable(v) => v.clone(),
            })
            .collect();
        (self.predicate.clone(), args)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "not ")?;
        }
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, arg) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{arg}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub head: Literal,
    pub body: Vec<Literal>,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            for (i, lit) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{lit}")?;
            }
        }
        write!(f, ".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    /// Verdict-bearing head predicates and the level each one asserts.
    pub impact_map: BTreeMap<String, ImpactLevel>,
    arities: BTreeMap<String, usize>,
    strata: BTreeMap<String, usize>,
}

impl RuleSet {
    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("line {line}, col {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}: duplicate rule id `{id}`")]
    DuplicateRuleId { line: usize, id: String },
    #[error("line {line}: rule `{id}` is marked {declared} but its head is `{head}`")]
    LevelMismatch {
        line: usize,
        id: String,
        declared: String,
        head: String,
    },
    #[error("line {line}: `{predicate}` used with arity {got}, but arity {expected} elsewhere")]
    ArityConflict {
        line: usize,
        predicate: String,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: rule `{id}` is unsafe: {message}")]
    UnsafeRule {
        line: usize,
        id: String,
        message: String,
    },
    #[error(
        "not stratifiable: `{head}` depends negatively on `{body}`, which feeds back into `{head}`"
    )]
    Unstratifiable { head: String, body: String },
    #[error("input fact {fact}: {message}")]
    InputFact { fact: String, message: String },
}

struct Lexer<'t> {
    chars: std::iter::Peekable<std::str::Chars<'t>>,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    Quoted(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    ColonDash,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(s) => write!(f, "`{s}`"),
            Tok::Quoted(_) => write!(f, "quoted string"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::ColonDash => write!(f, "`:-`"),
        }
    }
}

type Spanned = (Tok, usize, usize);

impl<'t> Lexer<'t> {
    fn new(text: &'t str) -> Lexer<'t> {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, PolicyError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.chars.peek(), Some(c) if c.is_whitespace()) {
                self.bump();
            }
            if self.chars.peek() == Some(&'%') {
                while !matches!(self.chars.peek(), None | Some('\n')) {
                    self.bump();
                }
                continue;
            }
            let (line, col) = (self.line, self.col);
            let Some(&c) = self.chars.peek() else { break };
            let tok = match c {
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                ':' => {
                    self.bump();
                    if self.chars.peek() == Some(&'-') {
                        self.bump();
                        Tok::ColonDash
                    } else {
                        Tok::Colon
                    }
                }
                '"' => {
                    self.bump();
                    let mut value = String::new();
                    loop {
                        match self.bump() {
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some(escaped @ ('"' | '\\')) => value.push(escaped),
                                _ => {
                                    return Err(PolicyError::Syntax {
                                        line,
                                        col,
                                        message: "invalid escape in quoted constant".into(),
                                    })
                                }
                            },
                            Some(other) => value.push(other),
                            None => {
                                return Err(PolicyError::Syntax {
                                    line,
                                    col,
                                    message: "unterminated quoted constant".into(),
                                })
                            }
                        }
                    }
                    Tok::Quoted(value)
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut name = String::new();
                    while matches!(self.chars.peek(), Some(c) if c.is_ascii_alphanumeric() || *c == '_')
                    {
                        name.push(self.bump().unwrap());
                    }
                    Tok::Ident(name)
                }
                c if c.is_ascii_digit() || c == '-' => {
                    let mut text = String::new();
                    text.push(self.bump().unwrap());
                    let mut seen_dot = false;
                    loop {
                        match self.chars.peek() {
                            Some(d) if d.is_ascii_digit() => text.push(self.bump().unwrap()),
                            Some('.') if !seen_dot => {
                                // Only consume the dot when a digit follows;
                                // otherwise it terminates the rule.
                                let mut ahead = self.chars.clone();
                                ahead.next();
                                if matches!(ahead.peek(), Some(d) if d.is_ascii_digit()) {
                                    seen_dot = true;
                                    text.push(self.bump().unwrap());
                                } else {
                                    break;
                                }
                            }
                            _ => break,
                        }
                    }
                    if text == "-" {
                        return Err(PolicyError::Syntax {
                            line,
                            col,
                            message: "expected digits after `-`".into(),
                        });
                    }
                    Tok::Number(text)
                }
                '.' => {
                    self.bump();
                    Tok::Dot
                }
                other => {
                    return Err(PolicyError::Syntax {
                        line,
                        col,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
            out.push((tok, line, col));
        }
        Ok(out)
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _, _)| t)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + offset).map(|(t, _, _)| t)
    }

    fn location(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or((1, 1))
    }

    fn error(&self, message: String) -> PolicyError {
        let (line, col) = self.location();
        PolicyError::Syntax { line, col, message }
    }

    fn next(&mut self, expected: &str) -> Result<Tok, PolicyError> {
        match self.tokens.get(self.pos) {
            Some((tok, _, _)) => {
                let tok = tok.clone();
                self.pos += 1;
                Ok(tok)
            }
            None => Err(self.error(format!("expected {expected}, found end of input"))),
        }
    }

    fn ident(&mut self, expected: &str) -> Result<String, PolicyError> {
        match self.next(expected)? {
            Tok::Ident(name) => Ok(name),
            found => {
                self.pos -= 1;
                Err(self.error(format!("expected {expected}, found {found}")))
            }
        }
    }

    /// Optional `level ruleid:` or `ruleid:` prefix.
    fn parse_prefix(&mut self) -> Result<Option<(Option<String>, String)>, PolicyError> {
        if let (Some(Tok::Ident(first)), Some(second)) = (self.peek(), self.peek_at(1)) {
            if second == &Tok::Colon {
                let id = first.clone();
                self.pos += 2;
                return Ok(Some((None, id)));
            }
            if matches!(first.as_str(), "major" | "minor" | "patch")
                && matches!(second, Tok::Ident(_))
                && self.peek_at(2) == Some(&Tok::Colon)
            {
                let level = first.clone();
                let Some(Tok::Ident(id)) = self.peek_at(1).cloned() else {
                    unreachable!()
                };
                self.pos += 3;
                return Ok(Some((Some(level), id)));
            }
        }
        Ok(None)
    }

    fn parse_literal(&mut self, allow_not: bool) -> Result<Literal, PolicyError> {
        let mut negated = false;
        if self.peek() == Some(&Tok::Ident("not".to_string())) {
            if !allow_not {
                return Err(self.error("a rule head cannot be negated".into()));
            }
            self.pos += 1;
            negated = true;
        }
        let predicate = self.ident("a predicate name")?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                let term = match self.next("a term")? {
                    Tok::Ident(name) => {
                        if name.starts_with(|c: char| c.is_ascii_uppercase()) {
                            Term::Variable(name)
                        } else {
                            Term::Constant(name)
                        }
                    }
                    Tok::Number(text) => Term::Constant(text),
                    Tok::Quoted(text) => Term::Constant(text),
                    found => {
                        self.pos -= 1;
                        return Err(self.error(format!("expected a term, found {found}")));
                    }
                };
                args.push(term);
                match self.next("`,` or `)`")? {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    found => {
                        self.pos -= 1;
                        return Err(self.error(format!("expected `,` or `)`, found {found}")));
                    }
                }
            }
        }
        Ok(Literal {
            predicate,
            args,
            negated,
        })
    }
}

/// Parses rule text, enforcing unique ids, level prefixes consistent with
/// heads, arity consistency, rule safety, and stratifiability.
pub fn parse_rules(text: &str) -> Result<RuleSet, PolicyError> {
    let tokens = Lexer::new(text).tokens()?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut rules = Vec::new();

    while parser.peek().is_some() {
        let (line, _) = parser.location();
        let prefix = parser.parse_prefix()?;
        let head = parser.parse_literal(false)?;
        let mut body = Vec::new();
        match parser.next("`.` or `:-`")? {
            Tok::Dot => {}
            Tok::ColonDash => loop {
                body.push(parser.parse_literal(true)?);
                match parser.next("`,` or `.`")? {
                    Tok::Comma => continue,
                    Tok::Dot => break,
                    found => {
                        parser.pos -= 1;
                        return Err(parser.error(format!("expected `,` or `.`, found {found}")));
                    }
                }
            },
            found => {
                parser.pos -= 1;
                return Err(parser.error(format!("expected `.` or `:-`, found {found}")));
            }
        }

        let id = match &prefix {
            Some((_, id)) => id.clone(),
            None => format!("rule_{}", rules.len() + 1),
        };
        if let Some((Some(level), _)) = &prefix {
            let expected = format!("impact_{level}");
            if head.predicate != expected {
                return Err(PolicyError::LevelMismatch {
                    line,
                    id,
                    declared: level.clone(),
                    head: head.predicate.clone(),
                });
            }
        }
        rules.push((line, Rule { id, head, body }));
    }

    validate(rules)
}

fn validate(spanned_rules: Vec<(usize, Rule)>) -> Result<RuleSet, PolicyError> {
    let mut seen_ids = BTreeSet::new();
    let mut arities: BTreeMap<String, usize> = BTreeMap::new();
    arities.insert(GT.to_string(), 2);

    let mut check_arity = |lit: &Literal, line: usize| -> Result<(), PolicyError> {
        let expected = *arities
            .entry(lit.predicate.clone())
            .or_insert(lit.args.len());
        if expected != lit.args.len() {
            return Err(PolicyError::ArityConflict {
                line,
                predicate: lit.predicate.clone(),
                expected,
                got: lit.args.len(),
            });
        }
        Ok(())
    };

    for (line, rule) in &spanned_rules {
        if !seen_ids.insert(rule.id.clone()) {
            return Err(PolicyError::DuplicateRuleId {
                line: *line,
                id: rule.id.clone(),
            });
        }
        if rule.head.predicate == GT {
            return Err(PolicyError::UnsafeRule {
                line: *line,
                id: rule.id.clone(),
                message: format!("the builtin predicate `{GT}` cannot be defined by rules"),
            });
        }
        check_arity(&rule.head, *line)?;
        for lit in &rule.body {
            if lit.predicate == GT && lit.negated {
                return Err(PolicyError::UnsafeRule {
                    line: *line,
                    id: rule.id.clone(),
                    message: format!("the builtin predicate `{GT}` cannot be negated"),
                });
            }
            check_arity(lit, *line)?;
        }

        let mut positive_vars = BTreeSet::new();
        for lit in &rule.body {
            if lit.negated || lit.predicate == GT {
                continue;
            }
            for term in &lit.args {
                if let Term::Variable(v) = term {
                    positive_vars.insert(v.clone());
                }
            }
        }
        let demand = |lit: &Literal, role: &str| -> Result<(), PolicyError> {
            for term in &lit.args {
                if let Term::Variable(v) = term {
                    if !positive_vars.contains(v) {
                        return Err(PolicyError::UnsafeRule {
                            line: *line,
                            id: rule.id.clone(),
                            message: format!(
                                "variable {v} in {role} does not occur in a positive body literal"
                            ),
                        });
                    }
                }
            }
            Ok(())
        };
        demand(&rule.head, "the head")?;
        for lit in &rule.body {
            if lit.negated {
                demand(lit, "a negated literal")?;
            } else if lit.predicate == GT {
                demand(lit, format!("`{GT}`").as_str())?;
            }
        }
    }

    let rules: Vec<Rule> = spanned_rules.into_iter().map(|(_, r)| r).collect();
    let strata = stratify(&rules)?;
    let impact_map = IMPACT_PREDICATES
        .iter()
        .map(|(p, l)| (p.to_string(), *l))
        .collect();
    Ok(RuleSet {
        rules,
        impact_map,
        arities,
        strata,
    })
}

/// Assigns each predicate a stratum such that positive dependencies stay
/// within a stratum or below and negative dependencies point strictly
/// below. Fails exactly when the dependency graph has a cycle through a
/// negative edge.
fn stratify(rules: &[Rule]) -> Result<BTreeMap<String, usize>, PolicyError> {
    let mut strata: BTreeMap<String, usize> = BTreeMap::new();
    for rule in rules {
        strata.entry(rule.head.predicate.clone()).or_insert(0);
        for lit in &rule.body {
            if lit.predicate != GT {
                strata.entry(lit.predicate.clone()).or_insert(0);
            }
        }
    }
    let limit = strata.len();
    loop {
        let mut changed = false;
        for rule in rules {
            let mut head_stratum = strata[&rule.head.predicate];
            for lit in &rule.body {
                if lit.predicate == GT {
                    continue;
                }
                let need = strata[&lit.predicate] + usize::from(lit.negated);
                if need > head_stratum {
                    head_stratum = need;
                    changed = true;
                }
            }
            if head_stratum > limit {
                let (head, body) = find_negative_cycle(rules)
                    .unwrap_or_else(|| (rule.head.predicate.clone(), rule.head.predicate.clone()));
                return Err(PolicyError::Unstratifiable { head, body });
            }
            strata.insert(rule.head.predicate.clone(), head_stratum);
        }
        if !changed {
            return Ok(strata);
        }
    }
}

/// Names one negative edge that lies on a dependency cycle, for the
/// unstratifiable-program diagnostic.
fn find_negative_cycle(rules: &[Rule]) -> Option<(String, String)> {
    let mut edges: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut negative: Vec<(&str, &str)> = Vec::new();
    for rule in rules {
        let head = rule.head.predicate.as_str();
        for lit in &rule.body {
            if lit.predicate == GT {
                continue;
            }
            edges
                .entry(head)
                .or_default()
                .insert(lit.predicate.as_str());
            if lit.negated {
                negative.push((head, lit.predicate.as_str()));
            }
        }
    }
    let reaches = |from: &str, to: &str| -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(p) = stack.pop() {
            if p == to {
                return true;
            }
            if seen.insert(p) {
                if let Some(next) = edges.get(p) {
                    stack.extend(next.iter().copied());
                }
            }
        }
        false
    };
    negative
        .into_iter()
        .find(|(head, body)| reaches(body, head))
        .map(|(head, body)| (head.to_string(), body.to_string()))
}

type GroundKey = (String, Vec<String>);

/// How one fact came to hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub fact: Literal,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    /// Supplied as an input fact.
    Input,
    ByRule {
        rule_id: String,
        /// Derivations of the positive body facts, in body order.
        premises: Vec<Derivation>,
        /// Ground builtin checks that held, in body order.
        builtins: Vec<Literal>,
        /// Ground facts whose absence the rule relied on, in body order.
        absent: Vec<Literal>,
    },
}

/// The least model of a rule set over some input facts, with one
/// derivation per fact (the first found, under a deterministic order).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Evaluation {
    facts: BTreeMap<GroundKey, Derivation>,
}

impl Evaluation {
    pub fn contains(&self, predicate: &str, args: &[&str]) -> bool {
        let key = (
            predicate.to_string(),
            args.iter().map(|a| a.to_string()).collect(),
        );
        self.facts.contains_key(&key)
    }

    pub fn derivation(&self, predicate: &str, args: &[&str]) -> Option<&Derivation> {
        let key = (
            predicate.to_string(),
            args.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        );
        self.facts.get(&key)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Derivation> {
        self.facts.values()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    fn keys(&self) -> impl Iterator<Item = &GroundKey> {
        self.facts.keys()
    }
}

struct Split<'r> {
    positives: Vec<&'r Literal>,
    builtins: Vec<&'r Literal>,
    negatives: Vec<&'r Literal>,
}

fn split_body(rule: &Rule) -> Split<'_> {
    let mut split = Split {
        positives: Vec::new(),
        builtins: Vec::new(),
        negatives: Vec::new(),
    };
    for lit in &rule.body {
        if lit.predicate == GT {
            split.builtins.push(lit);
        } else if lit.negated {
            split.negatives.push(lit);
        } else {
            split.positives.push(lit);
        }
    }
    split
}

type Env = BTreeMap<String, String>;

fn unify(pattern: &Literal, args: &[String], env: &mut Env) -> Option<Vec<String>> {
    let mut bound = Vec::new();
    for (term, value) in pattern.args.iter().zip(args) {
        match term {
            Term::Constant(c) => {
                if c != value {
                    undo(env, &bound);
                    return None;
                }
            }
            Term::Variable(v) => match env.get(v) {
                Some(existing) if existing != value => {
                    undo(env, &bound);
                    return None;
                }
                Some(_) => {}
                None => {
                    env.insert(v.clone(), value.clone());
                    bound.push(v.clone());
                }
            },
        }
    }
    Some(bound)
}

fn undo(env: &mut Env, bound: &[String]) {
    for v in bound {
        env.remove(v);
    }
}

fn ground(lit: &Literal, env: &Env) -> Literal {
    Literal {
        predicate: lit.predicate.clone(),
        args: lit
            .args
            .iter()
            .map(|t| match t {
                Term::Constant(c) => Term::Constant(c.clone()),
                Term::Variable(v) => Term::Constant(env[v].clone()),
            })
            .collect(),
        negated: false,
    }
}

fn builtin_holds(lit: &Literal) -> bool {
    debug_assert!(lit.is_ground());
    let value = |t: &Term| match t {
        Term::Constant(c) => parse_decimal(c),
        Term::Variable(_) => None,
    };
    match (value(&lit.args[0]), value(&lit.args[1])) {
        (Some(a), Some(b)) => a > b,
        _ => false,
    }
}

/// Computes the stratified least model. Facts must be ground, positive,
/// and arity-consistent with the rule set.
pub fn evaluate(rules: &RuleSet, facts: &[Literal]) -> Result<Evaluation, PolicyError> {
    let mut arities = rules.arities.clone();
    let mut db: BTreeMap<GroundKey, Derivation> = BTreeMap::new();
    let mut by_pred: BTreeMap<String, BTreeSet<Vec<String>>> = BTreeMap::new();

    for fact in facts {
        let reject = |message: String| PolicyError::InputFact {
            fact: fact.to_string(),
            message,
        };
        if fact.negated {
            return Err(reject("input facts cannot be negated".into()));
        }
        if !fact.is_ground() {
            return Err(reject("input facts must be ground".into()));
        }
        if fact.predicate == GT {
            return Err(reject(format!(
                "`{GT}` is a builtin and cannot be asserted"
            )));
        }
        let expected = *arities
            .entry(fact.predicate.clone())
            .or_insert(fact.args.len());
        if expected != fact.args.len() {
            return Err(reject(format!(
                "arity {} conflicts with arity {expected} used elsewhere",
                fact.args.len()
            )));
        }
        let key = fact.key();
        by_pred
            .entry(key.0.clone())
            .or_default()
            .insert(key.1.clone());
        db.entry(key).or_insert(Derivation {
            fact: fact.clone(),
            source: Source::Input,
        });
    }

    let max_stratum = rules.strata.values().copied().max().unwrap_or(0);
    for stratum in 0..=max_stratum {
        let layer: Vec<&Rule> = rules
            .rules
            .iter()
            .filter(|r| rules.strata[&r.head.predicate] == stratum)
            .collect();
        if layer.is_empty() {
            continue;
        }

        let mut delta: BTreeMap<String, BTreeSet<Vec<String>>> = by_pred.clone();
        let mut first_pass = true;
        loop {
            let mut fresh: BTreeMap<GroundKey, Derivation> = BTreeMap::new();
            for rule in &layer {
                let split = split_body(rule);
                // On the first pass the delta is the whole database, so a
                // single seeding position covers every instantiation.
                let positions: Vec<Option<usize>> = if split.positives.is_empty() {
                    if first_pass {
                        vec![None]
                    } else {
                        vec![]
                    }
                } else if first_pass {
                    vec![Some(0)]
                } else {
                    (0..split.positives.len()).map(Some).collect()
                };
                for seed in positions {
                    let mut env = Env::new();
                    let mut matched: Vec<GroundKey> = Vec::new();
                    join(
                        rule,
                        &split,
                        seed,
                        0,
                        &mut env,
                        &mut matched,
                        &db,
                        &by_pred,
                        &delta,
                        &mut fresh,
                    );
                }
            }

            fresh.retain(|key, _| !db.contains_key(key));
            if fresh.is_empty() {
                break;
            }
            delta.clear();
            for (key, derivation) in fresh {
                delta
                    .entry(key.0.clone())
                    .or_default()
                    .insert(key.1.clone());
                by_pred
                    .entry(key.0.clone())
                    .or_default()
                    .insert(key.1.clone());
                db.insert(key, derivation);
            }
            first_pass = false;
        }
    }

    Ok(Evaluation { facts: db })
}

#[allow(clippy::too_many_arguments)]
fn join(
    rule: &Rule,
    split: &Split<'_>,
    seed: Option<usize>,
    index: usize,
    env: &mut Env,
    matched: &mut Vec<GroundKey>,
    db: &BTreeMap<GroundKey, Derivation>,
    by_pred: &BTreeMap<String, BTreeSet<Vec<String>>>,
    delta: &BTreeMap<String, BTreeSet<Vec<String>>>,
    fresh: &mut BTreeMap<GroundKey, Derivation>,
) {
    if index == split.positives.len() {
        for lit in &split.builtins {
            if !builtin_holds(&ground(lit, env)) {
                return;
            }
        }
        for lit in &split.negatives {
            if db.contains_key(&ground(lit, env).key()) {
                return;
            }
        }
        let head = ground(&rule.head, env);
        let key = head.key();
        if db.contains_key(&key) || fresh.contains_key(&key) {
            return;
        }
        let derivation = Derivation {
            fact: head,
            source: Source::ByRule {
                rule_id: rule.id.clone(),
                premises: matched.iter().map(|k| db[k].clone()).collect(),
                builtins: split.builtins.iter().map(|l| ground(l, env)).collect(),
                absent: split.negatives.iter().map(|l| ground(l, env)).collect(),
            },
        };
        fresh.insert(key, derivation);
        return;
    }

    let lit = split.positives[index];
    let source = if seed == Some(index) { delta } else { by_pred };
    let Some(rows) = source.get(&lit.predicate) else {
        return;
    };
    for args in rows {
        if args.len() != lit.args.len() {
            continue;
        }
        if let Some(bound) = unify(lit, args, env) {
            matched.push((lit.predicate.clone(), args.clone()));
            join(
                rule,
                split,
                seed,
                index + 1,
                env,
                matched,
                db,
                by_pred,
                delta,
                fresh,
            );
            matched.pop();
            undo(env, &bound);
        }
    }
}

/// Joins the levels of all derived impact facts; returns those facts'
/// derivations at the winning level, in fact order.
pub fn verdict(evaluation: &Evaluation, rules: &RuleSet) -> (ImpactLevel, Vec<Derivation>) {
    let mut level = ImpactLevel::None;
    for derivation in evaluation.iter() {
        if let Some(fact_level) = rules.impact_map.get(&derivation.fact.predicate) {
            level = level.join(*fact_level);
        }
    }
    if level == ImpactLevel::None {
        return (level, Vec::new());
    }
    let supporting = evaluation
        .iter()
        .filter(|d| rules.impact_map.get(&d.fact.predicate) == Some(&level))
        .cloned()
        .collect();
    (level, supporting)
}

/// Checks a derivation tree bottom-up against a rule set: inputs must be
/// listed, every ByRule step must be a valid instantiation of its rule,
/// and absence notes must hold against `universe` (the full derived set).
pub fn replay(
    derivation: &Derivation,
    rules: &RuleSet,
    inputs: &BTreeSet<GroundKey>,
    universe: &BTreeSet<GroundKey>,
) -> bool {
    if !derivation.fact.is_ground() || derivation.fact.negated {
        return false;
    }
    match &derivation.source {
        Source::Input => inputs.contains(&derivation.fact.key()),
        Source::ByRule {
            rule_id,
            premises,
            builtins,
            absent,
        } => {
            let Some(rule) = rules.rule(rule_id) else {
                return false;
            };
            let split = split_body(rule);
            if premises.len() != split.positives.len()
                || builtins.len() != split.builtins.len()
                || absent.len() != split.negatives.len()
            {
                return false;
            }
            let mut env = Env::new();
            for (lit, premise) in split.positives.iter().zip(premises) {
                if premise.fact.predicate != lit.predicate
                    || unify(lit, &premise.fact.key().1, &mut env).is_none()
                {
                    return false;
                }
            }
            for (lit, recorded) in split.builtins.iter().zip(builtins) {
                let expected = ground(lit, &env);
                if expected != *recorded || !builtin_holds(&expected) {
                    return false;
                }
            }
            for (lit, recorded) in split.negatives.iter().zip(absent) {
                let expected = ground(lit, &env);
                if expected != *recorded || universe.contains(&expected.key()) {
                    return false;
                }
            }
            if ground(&rule.head, &env) != derivation.fact {
                return false;
            }
            premises.iter().all(|p| replay(p, rules, inputs, universe))
        }
    }
}

/// The ground keys of an evaluation, for replay checks.
pub fn fact_keys(evaluation: &Evaluation) -> BTreeSet<GroundKey> {
    evaluation.keys().cloned().collect()
}
