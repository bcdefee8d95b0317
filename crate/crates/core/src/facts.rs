//! Change facts: the vocabulary produced by diffing two component models
//! and consumed by classification policies, plus the line-oriented file
//! format used to pass facts between tools.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::datalog::{render_constant, Literal, Term};

/// Broad grouping of fact kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactCategory {
    Structural,
    Behavioural,
    Resourcing,
    Auxiliary,
}

macro_rules! fact_kinds {
    ($(($variant:ident, $pred:literal, $category:ident, $arity:literal),)*) => {
        /// Every kind of change fact the differ can emit.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum FactKind {
            $($variant,)*
        }

        impl FactKind {
            pub const ALL: &'static [FactKind] = &[$(FactKind::$variant,)*];

            /// The predicate name used in fact files and policy rules.
            pub fn predicate(self) -> &'static str {
                match self {
                    $(FactKind::$variant => $pred,)*
                }
            }

            pub fn category(self) -> FactCategory {
                match self {
                    $(FactKind::$variant => FactCategory::$category,)*
                }
            }

            /// Number of detail arguments following the subject.
            pub fn detail_arity(self) -> usize {
                match self {
                    $(FactKind::$variant => $arity,)*
                }
            }

            pub fn from_predicate(name: &str) -> Option<FactKind> {
                match name {
                    $($pred => Some(FactKind::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

fact_kinds! {
    (FunctionAdded, "functionAdded", Structural, 0),
    (FunctionRemoved, "functionRemoved", Structural, 0),
    (ParamAdded, "paramAdded", Structural, 1),
    (ParamRemoved, "paramRemoved", Structural, 1),
    (ParamOrderChanged, "paramOrderChanged", Structural, 0),
    (ParamTypeChanged, "paramTypeChanged", Structural, 3),
    (ReturnTypeChanged, "returnTypeChanged", Structural, 2),
    (ReturnNullabilityDropped, "returnNullabilityDropped", Structural, 0),
    (TypeKindChanged, "typeKindChanged", Structural, 2),
    (ExportRemoved, "exportRemoved", Structural, 0),
    (ExportAdded, "exportAdded", Structural, 0),
    (DeprecatedAdded, "deprecatedAdded", Structural, 0),
    (ImplChanged, "implChanged", Structural, 0),
    (PreStrengthened, "preStrengthened", Behavioural, 0),
    (PreWeakened, "preWeakened", Behavioural, 0),
    (PreIncomparable, "preIncomparable", Behavioural, 0),
    (PostStrengthened, "postStrengthened", Behavioural, 0),
    (PostWeakened, "postWeakened", Behavioural, 0),
    (PostIncomparable, "postIncomparable", Behavioural, 0),
    (SideEffectAdded, "sideEffectAdded", Behavioural, 0),
    (SideEffectRemoved, "sideEffectRemoved", Behavioural, 0),
    (RuntimeIncreased, "runtimeIncreased", Resourcing, 1),
    (MemoryIncreased, "memoryIncreased", Resourcing, 1),
    (LicenseRelaxed, "licenseRelaxed", Auxiliary, 2),
    (LicenseTightened, "licenseTightened", Auxiliary, 2),
    (PlatformStrengthened, "platformStrengthened", Auxiliary, 2),
    (PlatformWeakened, "platformWeakened", Auxiliary, 2),
    (DependencyAdded, "dependencyAdded", Auxiliary, 1),
    (DependencyRemoved, "dependencyRemoved", Auxiliary, 1),
    (DependencyReqChanged, "dependencyReqChanged", Auxiliary, 2),
}

/// One observed change. `subject` names the declaration, platform,
/// dependency, or component the fact is about; `detail` carries the
/// kind-specific arguments (old type, new type, ratio, and so on) in the
/// arity documented for the kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChangeFact {
    pub kind: FactKind,
    pub subject: String,
    pub detail: Vec<String>,
}

impl ChangeFact {
    pub fn new<S: Into<String>>(kind: FactKind, subject: S, detail: Vec<String>) -> ChangeFact {
        debug_assert_eq!(detail.len(), kind.detail_arity());
        ChangeFact {
            kind,
            subject: subject.into(),
            detail,
        }
    }

    pub fn to_literal(&self) -> Literal {
        let mut args = vec![Term::Constant(self.subject.clone())];
        args.extend(self.detail.iter().cloned().map(Term::Constant));
        Literal {
            predicate: self.kind.predicate().to_string(),
            args,
            negated: false,
        }
    }
}

impl fmt::Display for ChangeFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}",
            self.kind.predicate(),
            render_constant(&self.subject)
        )?;
        for arg in &self.detail {
            write!(f, ", {}", render_constant(arg))?;
        }
        write!(f, ")")
    }
}

pub const IN_SURFACE: &str = "inSurface";

/// The complete fact input for one classification run: change facts plus
/// the names the chosen world mode places in the API surface.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactSet {
    pub changes: BTreeSet<ChangeFact>,
    pub surface: BTreeSet<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FactsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown fact predicate `{predicate}`")]
    UnknownPredicate { line: usize, predicate: String },
    #[error("line {line}: `{predicate}` takes {expected} argument(s), found {got}")]
    Arity {
        line: usize,
        predicate: String,
        expected: usize,
        got: usize,
    },
}

impl FactSet {
    pub fn new(changes: BTreeSet<ChangeFact>, surface: BTreeSet<String>) -> FactSet {
        FactSet { changes, surface }
    }

    /// Ground literals for evaluation: every change fact followed by one
    /// `inSurface(name)` literal per surface name.
    pub fn to_literals(&self) -> Vec<Literal> {
        let mut literals: Vec<Literal> = self.changes.iter().map(ChangeFact::to_literal).collect();
        literals.extend(self.surface.iter().map(|name| Literal {
            predicate: IN_SURFACE.to_string(),
            args: vec![Term::Constant(name.clone())],
            negated: false,
        }));
        literals
    }

    /// Canonical fact-file text: one fact per line, change facts first,
    /// then the surface facts.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for fact in &self.changes {
            out.push_str(&fact.to_string());
            out.push('\n');
        }
        for name in &self.surface {
            out.push_str(&format!("{IN_SURFACE}({})\n", render_constant(name)));
        }
        out
    }

    pub fn parse(text: &str) -> Result<FactSet, FactsError> {
        let mut set = FactSet::default();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (predicate, args) = parse_fact_line(trimmed, line)?;
            if predicate == IN_SURFACE {
                if args.len() != 1 {
                    return Err(FactsError::Arity {
                        line,
                        predicate,
                        expected: 1,
                        got: args.len(),
                    });
                }
                set.surface.insert(args.into_iter().next().unwrap());
                continue;
            }
            let kind =
                FactKind::from_predicate(&predicate).ok_or(FactsError::UnknownPredicate {
                    line,
                    predicate: predicate.clone(),
                })?;
            let expected = kind.detail_arity() + 1;
            if args.len() != expected {
                return Err(FactsError::Arity {
                    line,
                    predicate,
                    expected,
                    got: args.len(),
                });
            }
            let mut iter = args.into_iter();
            let subject = iter.next().unwrap();
            set.changes
                .insert(ChangeFact::new(kind, subject, iter.collect()));
        }
        Ok(set)
    }
}

/// Parses `pred(arg, "quoted arg", 1.5)` into its predicate and argument
/// texts.
pub(crate) fn parse_fact_line(
    text: &str,
    line: usize,
) -> Result<(String, Vec<String>), FactsError> {
    let syntax = |message: &str| FactsError::Syntax {
        line,
        message: message.to_string(),
    };
    let open = text
        .find('(')
        .ok_or_else(|| syntax("expected `(` after predicate"))?;
    let predicate = text[..open].trim();
    if predicate.is_empty()
        || !predicate
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
        || predicate.starts_with(|c: char| c.is_ascii_digit())
    {
        return Err(syntax(&format!("malformed predicate name `{predicate}`")));
    }
    let rest = text[open + 1..].trim_end();
    let body = rest
        .strip_suffix(')')
        .ok_or_else(|| syntax("expected `)` at end of fact"))?;
    let mut args = Vec::new();
    let mut chars = body.char_indices().peekable();
    loop {
        while matches!(chars.peek(), Some((_, c)) if c.is_whitespace()) {
            chars.next();
        }
        let (start, first) = match chars.next() {
            Some(pair) => pair,
            None => {
                if args.is_empty() {
                    break;
                }
                return Err(syntax("expected an argument after `,`"));
            }
        };
        if first == '"' {
            let mut value = String::new();
            let mut closed = false;
            while let Some((_, c)) = chars.next() {
                match c {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => match chars.next() {
                        Some((_, escaped @ ('"' | '\\'))) => value.push(escaped),
                        _ => return Err(syntax("invalid escape in quoted argument")),
                    },
                    other => value.push(other),
                }
            }
            if !closed {
                return Err(syntax("unterminated quoted argument"));
            }
            args.push(value);
        } else {
            let mut end = start + first.len_utf8();
            while let Some((i, c)) = chars.peek().copied() {
                if c == ',' {
                    break;
                }
                chars.next();
                end = i + c.len_utf8();
            }
            let token = body[start..end].trim();
            if token.is_empty()
                || !token
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-' | '*'))
            {
                return Err(syntax(&format!("malformed bare argument `{token}`")));
            }
            args.push(token.to_string());
        }
        while matches!(chars.peek(), Some((_, c)) if c.is_whitespace()) {
            chars.next();
        }
        match chars.next() {
            None => break,
            Some((_, ',')) => continue,
            Some((_, other)) => {
                return Err(syntax(&format!("expected `,` or `)`, found `{other}`")))
            }
        }
    }
    Ok((predicate.to_string(), args))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicates_round_trip() {
        for kind in FactKind::ALL {
            assert_eq!(FactKind::from_predicate(kind.predicate()), Some(*kind));
        }
    }

    #[test]
    fn categories_cover_the_taxonomy() {
        assert_eq!(
            FactKind::FunctionRemoved.category(),
            FactCategory::Structural
        );
        assert_eq!(
            FactKind::PreStrengthened.category(),
            FactCategory::Behavioural
        );
        assert_eq!(
            FactKind::RuntimeIncreased.category(),
            FactCategory::Resourcing
        );
        assert_eq!(FactKind::LicenseRelaxed.category(), FactCategory::Auxiliary);
    }

    #[test]
    fn renders_bare_and_quoted_arguments() {
        let fact = ChangeFact::new(
            FactKind::DependencyReqChanged,
            "serde",
            vec![">=1.0.0 <2.0.0".into(), "1.2.*".into()],
        );
        assert_eq!(
            fact.to_string(),
            "dependencyReqChanged(serde, \">=1.0.0 <2.0.0\", 1.2.*)"
        );
        let ratio = ChangeFact::new(FactKind::RuntimeIncreased, "f", vec!["1.5".into()]);
        assert_eq!(ratio.to_string(), "runtimeIncreased(f, 1.5)");
    }

    #[test]
    fn fact_file_round_trips() {
        let mut set = FactSet::default();
        set.changes
            .insert(ChangeFact::new(FactKind::FunctionRemoved, "f", vec![]));
        set.changes.insert(ChangeFact::new(
            FactKind::ReturnTypeChanged,
            "g",
            vec!["Int".into(), "Str".into()],
        ));
        set.changes.insert(ChangeFact::new(
            FactKind::DependencyAdded,
            "serde",
            vec![">=1.0.0 <2.0.0".into()],
        ));
        set.surface.insert("f".into());
        set.surface.insert("g".into());
        let text = set.to_text();
        assert_eq!(FactSet::parse(&text).unwrap(), set);
    }

    #[test]
    fn parser_skips_comments_and_blanks() {
        let text = "# extracted facts\n\nfunctionRemoved(f)\n  # done\n";
        let set = FactSet::parse(text).unwrap();
        assert_eq!(set.changes.len(), 1);
    }

    #[test]
    fn parser_enforces_arity() {
        let err = FactSet::parse("functionRemoved(f, extra)\n").unwrap_err();
        assert_eq!(
            err,
            FactsError::Arity {
                line: 1,
                predicate: "functionRemoved".into(),
                expected: 1,
                got: 2
            }
        );
        let err = FactSet::parse("returnTypeChanged(f, Int)\n").unwrap_err();
        assert!(matches!(
            err,
            FactsError::Arity {
                expected: 3,
                got: 2,
                ..
            }
        ));
        let err = FactSet::parse("inSurface(a, b)\n").unwrap_err();
        assert!(matches!(err, FactsError::Arity { .. }));
    }

    #[test]
    fn parser_rejects_unknown_predicates() {
        let err = FactSet::parse("mystery(f)\n").unwrap_err();
        assert_eq!(
            err,
            FactsError::UnknownPredicate {
                line: 1,
                predicate: "mystery".into()
            }
        );
    }

    #[test]
    fn parser_rejects_malformed_lines() {
        assert!(matches!(
            FactSet::parse("functionRemoved f\n").unwrap_err(),
            FactsError::Syntax { .. }
        ));
        assert!(matches!(
            FactSet::parse("functionRemoved(\"f\n").unwrap_err(),
            FactsError::Syntax { .. }
        ));
        assert!(matches!(
            FactSet::parse("functionRemoved(f))\n").unwrap_err(),
            FactsError::Syntax { .. }
        ));
    }

    #[test]
    fn quoted_arguments_support_escapes() {
        let text = "returnTypeChanged(f, \"a \\\"b\\\" c\", \"d\\\\e\")\n";
        let set = FactSet::parse(text).unwrap();
        let fact = set.changes.iter().next().unwrap();
        assert_eq!(
            fact.detail,
            vec!["a \"b\" c".to_string(), "d\\e".to_string()]
        );
        let rendered = FactSet {
            changes: set.changes.clone(),
            surface: BTreeSet::new(),
        }
        .to_text();
        assert_eq!(FactSet::parse(&rendered).unwrap().changes, set.changes);
    }
}
