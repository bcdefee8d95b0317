//! A policy is a parsed rule set plus an identity: a human-readable id
//! and a digest of the exact rule text, so provenance records can pin the
//! policy a verdict was computed under.

use sha2::{Digest, Sha256};

use crate::datalog::{parse_rules, PolicyError, RuleSet};

pub const PESSIMISTIC_POLICY_ID: &str = "pessimistic-default";
pub const OPTIMISTIC_POLICY_ID: &str = "optimistic-default";

pub const PESSIMISTIC_POLICY_TEXT: &str = include_str!("../policies/pessimistic.pol");
pub const OPTIMISTIC_POLICY_TEXT: &str = include_str!("../policies/optimistic.pol");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub id: String,
    pub text: String,
    pub rules: RuleSet,
}

impl Policy {
    pub fn parse(id: &str, text: &str) -> Result<Policy, PolicyError> {
        Ok(Policy {
            id: id.to_string(),
            text: text.to_string(),
            rules: parse_rules(text)?,
        })
    }

    /// Hex SHA-256 of the rule text exactly as loaded.
    pub fn digest(&self) -> String {
        sha256_hex(&self.text)
    }
}

/// The pessimistic policy bundled with the tool; the default everywhere.
pub fn pessimistic() -> Policy {
    Policy::parse(PESSIMISTIC_POLICY_ID, PESSIMISTIC_POLICY_TEXT)
        .expect("bundled pessimistic policy parses")
}

/// The bundled optimistic counterpart.
pub fn optimistic() -> Policy {
    Policy::parse(OPTIMISTIC_POLICY_ID, OPTIMISTIC_POLICY_TEXT)
        .expect("bundled optimistic policy parses")
}

pub fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|byte| format!("{byte:02x}"))
        .collect()
}
