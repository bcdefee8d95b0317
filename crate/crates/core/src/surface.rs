//! World assumptions: which names count as the component's API surface.
//! Policies scope their per-declaration rules with the `inSurface` facts
//! produced here, so the same diff can be breaking for the world at large
//! yet harmless for a known set of clients.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::datalog::{Literal, Term};
use crate::facts::IN_SURFACE;
use crate::model::ComponentModel;

/// Names a client (or a union of clients) and the declarations it uses.
/// Unknown names are allowed and simply never intersect anything.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageProfile {
    pub client_name: String,
    pub used: BTreeSet<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UsageError {
    #[error("line {line}: `{text}` is not an identifier")]
    NotAnIdentifier { line: usize, text: String },
}

impl UsageProfile {
    pub fn new(client_name: &str, used: BTreeSet<String>) -> UsageProfile {
        UsageProfile {
            client_name: client_name.to_string(),
            used,
        }
    }

    /// Reads a `.use` file: one identifier per line, `#` comments.
    pub fn parse(client_name: &str, text: &str) -> Result<UsageProfile, UsageError> {
        let mut used = BTreeSet::new();
        for (index, raw) in text.lines().enumerate() {
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let ident = trimmed
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && trimmed
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ident {
                return Err(UsageError::NotAnIdentifier {
                    line: index + 1,
                    text: trimmed.to_string(),
                });
            }
            used.insert(trimmed.to_string());
        }
        Ok(UsageProfile::new(client_name, used))
    }

    /// Union of several client profiles.
    pub fn merge<I: IntoIterator<Item = UsageProfile>>(profiles: I) -> UsageProfile {
        let mut names = Vec::new();
        let mut used = BTreeSet::new();
        for profile in profiles {
            names.push(profile.client_name);
            used.extend(profile.used);
        }
        UsageProfile {
            client_name: names.join("+"),
            used,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WorldMode {
    /// Every public name is assumed reachable by some client.
    OpenWorld,
    /// Only the names the component declares as exports count.
    DeclaredExports,
    /// Only exported names known to be used by the given clients count.
    ClosedWorld(UsageProfile),
}

impl WorldMode {
    pub fn tag(&self) -> &'static str {
        match self {
            WorldMode::OpenWorld => "open",
            WorldMode::DeclaredExports => "exports",
            WorldMode::ClosedWorld(_) => "closed",
        }
    }
}

/// The surface under `mode`, unioned over both models so that a
/// declaration removed in `new` is still in scope for reporting.
pub fn surface_names(
    old: &ComponentModel,
    new: &ComponentModel,
    mode: &WorldMode,
) -> BTreeSet<String> {
    let union = |f: fn(&ComponentModel) -> BTreeSet<String>| -> BTreeSet<String> {
        let mut names = f(old);
        names.extend(f(new));
        names
    };
    match mode {
        WorldMode::OpenWorld => union(ComponentModel::public_names),
        WorldMode::DeclaredExports => union(ComponentModel::exported_names),
        WorldMode::ClosedWorld(usage) => union(ComponentModel::exported_names)
            .intersection(&usage.used)
            .cloned()
            .collect(),
    }
}

/// One `inSurface(name)` ground literal per surface name.
pub fn surface_facts(old: &ComponentModel, new: &ComponentModel, mode: &WorldMode) -> Vec<Literal> {
    surface_names(old, new, mode)
        .into_iter()
        .map(|name| Literal {
            predicate: IN_SURFACE.to_string(),
            args: vec![Term::Constant(name)],
            negated: false,
        })
        .collect()
}
