//! Provenance records: the machine-checkable account of how a verdict
//! was reached. A record pins its inputs by content digest, lists every
//! fact the evaluation saw, and carries the derivation trees behind the
//! verdict, so the reasoning can be replayed without the original SDL.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::Analysis;
use crate::contract::Mode;
use crate::datalog::{self, Derivation, Literal, PolicyError, Source, Term};
use crate::diff::DiffConfig;
use crate::facts::{parse_fact_line, FactSet, FactsError};
use crate::model::ComponentModel;
use crate::policy::{sha256_hex, Policy};
use crate::sdl::render;
use crate::surface::WorldMode;
use crate::version::{bump, ImpactLevel, SemVer};

pub const FORMAT: &str = "semvercalc-prov-1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub format: String,
    pub component: String,
    pub old_version: SemVer,
    pub new_version_recommended: SemVer,
    pub verdict: ImpactLevel,
    pub world_mode: String,
    pub policy: PolicyRef,
    pub checks_performed: Vec<CheckStep>,
    /// Every fact the evaluation saw, one canonical line per fact.
    pub facts: Vec<String>,
    pub supporting_derivations: Vec<DerivationNode>,
    /// Free-form notes (reviewer, ticket, build id); never interpreted.
    pub annotations: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyRef {
    pub id: String,
    /// Hex SHA-256 of the policy rule text.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckStep {
    pub step: String,
    pub inputs: Vec<InputDigest>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: String,
    /// Hex SHA-256 of the canonicalized input text.
    pub digest: String,
}

/// A derivation tree in serializable form. `source` is `input` for
/// supplied facts and `rule` for derived ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationNode {
    pub fact: String,
    pub source: String,
    pub rule_id: Option<String>,
    pub premises: Vec<DerivationNode>,
    pub builtins: Vec<String>,
    pub absent: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ProvenanceError {
    #[error("inconsistent record: {0}")]
    Inconsistent(String),
    #[error("malformed structured record: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("policy digest mismatch: record pins {pinned}, supplied text hashes to {supplied}")]
    PolicyDigestMismatch { pinned: String, supplied: String },
    #[error("malformed fact in record: {0}")]
    Facts(#[from] FactsError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Text,
    Structured,
}

impl DerivationNode {
    /// Serializable view of an in-memory derivation tree.
    pub fn from_derivation(derivation: &Derivation) -> DerivationNode {
        match &derivation.source {
            Source::Input => DerivationNode {
                fact: derivation.fact.to_string(),
                source: "input".to_string(),
                rule_id: None,
                premises: Vec::new(),
                builtins: Vec::new(),
                absent: Vec::new(),
            },
            Source::ByRule {
                rule_id,
                premises,
                builtins,
                absent,
            } => DerivationNode {
                fact: derivation.fact.to_string(),
                source: "rule".to_string(),
                rule_id: Some(rule_id.clone()),
                premises: premises
                    .iter()
                    .map(DerivationNode::from_derivation)
                    .collect(),
                builtins: builtins.iter().map(|l| l.to_string()).collect(),
                absent: absent.iter().map(|l| l.to_string()).collect(),
            },
        }
    }

    /// Indented tree text, starting at `depth` indent levels.
    pub fn render_text(&self, depth: usize) -> String {
        let mut out = String::new();
        render_node(self, depth, &mut out);
        out
    }
}

fn parse_literal_text(text: &str) -> Result<Literal, FactsError> {
    let (predicate, args) = parse_fact_line(text, 1)?;
    Ok(Literal {
        predicate,
        args: args.into_iter().map(Term::Constant).collect(),
        negated: false,
    })
}

fn derivation_from_node(node: &DerivationNode) -> Result<Derivation, ProvenanceError> {
    let fact = parse_literal_text(&node.fact)?;
    let source = match node.source.as_str() {
        "input" => Source::Input,
        "rule" => {
            let rule_id = node.rule_id.clone().ok_or_else(|| {
                ProvenanceError::Inconsistent(format!(
                    "derivation of {} cites no rule id",
                    node.fact
                ))
            })?;
            let premises = node
                .premises
                .iter()
                .map(derivation_from_node)
                .collect::<Result<_, _>>()?;
            let builtins = node
                .builtins
                .iter()
                .map(|t| parse_literal_text(t))
                .collect::<Result<_, _>>()?;
            let absent = node
                .absent
                .iter()
                .map(|t| parse_literal_text(t))
                .collect::<Result<_, _>>()?;
            Source::ByRule {
                rule_id,
                premises,
                builtins,
                absent,
            }
        }
        other => {
            return Err(ProvenanceError::Inconsistent(format!(
                "unknown derivation source `{other}`"
            )))
        }
    };
    Ok(Derivation { fact, source })
}

fn config_text(config: &DiffConfig) -> String {
    let mode = match config.mode {
        Mode::Pessimistic => "pessimistic",
        Mode::Optimistic => "optimistic",
    };
    format!(
        "mode={mode}\nruntime_ratio_threshold={}\nmemory_ratio_threshold={}\n",
        config.runtime_ratio_threshold, config.memory_ratio_threshold
    )
}

fn usage_text(mode: &WorldMode) -> Option<String> {
    match mode {
        WorldMode::ClosedWorld(usage) => {
            let mut text = String::new();
            for name in &usage.used {
                text.push_str(name);
                text.push('\n');
            }
            Some(text)
        }
        _ => None,
    }
}

/// Builds the record for one analysis, verifying internal consistency:
/// the verdict must equal the join of derived impact facts, and every
/// supporting derivation must replay against the policy and fact list.
pub fn assemble(
    old: &ComponentModel,
    new: &ComponentModel,
    analysis: &Analysis,
    policy: &Policy,
    mode: &WorldMode,
    config: &DiffConfig,
) -> Result<ProvenanceRecord, ProvenanceError> {
    let mut rejoined = ImpactLevel::None;
    for derivation in analysis.evaluation.iter() {
        if let Some(level) = policy.rules.impact_map.get(&derivation.fact.predicate) {
            rejoined = rejoined.join(*level);
        }
    }
    if rejoined != analysis.verdict {
        return Err(ProvenanceError::Inconsistent(format!(
            "verdict {} does not match the derived impact facts ({rejoined})",
            analysis.verdict
        )));
    }
    if analysis.verdict != ImpactLevel::None && analysis.supporting.is_empty() {
        return Err(ProvenanceError::Inconsistent(
            "non-trivial verdict with no supporting derivations".to_string(),
        ));
    }

    let inputs: BTreeSet<(String, Vec<String>)> = analysis
        .facts
        .to_literals()
        .iter()
        .map(literal_key)
        .collect();
    let universe = datalog::fact_keys(&analysis.evaluation);
    for derivation in &analysis.supporting {
        if policy.rules.impact_map.get(&derivation.fact.predicate) != Some(&analysis.verdict) {
            return Err(ProvenanceError::Inconsistent(format!(
                "supporting derivation {} is not at the verdict level",
                derivation.fact
            )));
        }
        if !datalog::replay(derivation, &policy.rules, &inputs, &universe) {
            return Err(ProvenanceError::Inconsistent(format!(
                "supporting derivation {} does not replay",
                derivation.fact
            )));
        }
    }

    let old_digest = InputDigest {
        name: "old.sdl".to_string(),
        digest: sha256_hex(&render(old)),
    };
    let new_digest = InputDigest {
        name: "new.sdl".to_string(),
        digest: sha256_hex(&render(new)),
    };
    let facts_text = analysis.facts.to_text();
    let mut surface_inputs = vec![InputDigest {
        name: "mode".to_string(),
        digest: sha256_hex(mode.tag()),
    }];
    if let Some(usage) = usage_text(mode) {
        surface_inputs.push(InputDigest {
            name: "usage".to_string(),
            digest: sha256_hex(&usage),
        });
    }
    let checks_performed = vec![
        CheckStep {
            step: "parse".to_string(),
            inputs: vec![old_digest.clone(), new_digest.clone()],
        },
        CheckStep {
            step: "diff".to_string(),
            inputs: vec![
                old_digest,
                new_digest,
                InputDigest {
                    name: "config".to_string(),
                    digest: sha256_hex(&config_text(config)),
                },
            ],
        },
        CheckStep {
            step: "surface".to_string(),
            inputs: surface_inputs,
        },
        CheckStep {
            step: "evaluate".to_string(),
            inputs: vec![
                InputDigest {
                    name: "facts".to_string(),
                    digest: sha256_hex(&facts_text),
                },
                InputDigest {
                    name: "policy".to_string(),
                    digest: policy.digest(),
                },
            ],
        },
    ];

    Ok(ProvenanceRecord {
        format: FORMAT.to_string(),
        component: old.name.clone(),
        old_version: old.version,
        new_version_recommended: bump(old.version, analysis.verdict),
        verdict: analysis.verdict,
        world_mode: mode.tag().to_string(),
        policy: PolicyRef {
            id: policy.id.clone(),
            digest: policy.digest(),
        },
        checks_performed,
        facts: facts_text.lines().map(str::to_string).collect(),
        supporting_derivations: analysis
            .supporting
            .iter()
            .map(DerivationNode::from_derivation)
            .collect(),
        annotations: BTreeMap::new(),
    })
}

fn literal_key(literal: &Literal) -> (String, Vec<String>) {
    let args = literal
        .args
        .iter()
        .map(|t| match t {
            Term::Constant(c) => c.clone(),
            Term::Variable(v) => v.clone(),
        })
        .collect();
    (literal.predicate.clone(), args)
}

/// Renders a record. The structured form is stable JSON: the same record
/// always produces the same bytes, and it parses back with
/// [`parse_structured`]. The text form is for humans.
pub fn render_record(record: &ProvenanceRecord, format: RenderFormat) -> String {
    match format {
        RenderFormat::Structured => {
            let mut text =
                serde_json::to_string_pretty(record).expect("provenance records serialize");
            text.push('\n');
            text
        }
        RenderFormat::Text => render_text(record),
    }
}

pub fn parse_structured(text: &str) -> Result<ProvenanceRecord, ProvenanceError> {
    Ok(serde_json::from_str(text)?)
}

fn render_text(record: &ProvenanceRecord) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "component: {}", record.component);
    let _ = writeln!(out, "old version: {}", record.old_version);
    let _ = writeln!(out, "verdict: {}", record.verdict);
    let _ = writeln!(
        out,
        "recommended version: {}",
        record.new_version_recommended
    );
    let _ = writeln!(out, "world mode: {}", record.world_mode);
    let _ = writeln!(
        out,
        "policy: {} sha256 {}",
        record.policy.id, record.policy.digest
    );
    let _ = writeln!(out, "checks performed:");
    for check in &record.checks_performed {
        let inputs: Vec<String> = check
            .inputs
            .iter()
            .map(|i| format!("{} sha256 {}", i.name, i.digest))
            .collect();
        let _ = writeln!(out, "  {}: {}", check.step, inputs.join(", "));
    }
    let _ = writeln!(out, "facts ({}):", record.facts.len());
    for fact in &record.facts {
        let _ = writeln!(out, "  {fact}");
    }
    let _ = writeln!(out, "supporting derivations:");
    for node in &record.supporting_derivations {
        render_node(node, 1, &mut out);
    }
    if !record.annotations.is_empty() {
        let _ = writeln!(out, "annotations:");
        for (key, value) in &record.annotations {
            let _ = writeln!(out, "  {key}: {value}");
        }
    }
    out
}

fn render_node(node: &DerivationNode, depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    let origin = match (&node.source[..], &node.rule_id) {
        ("rule", Some(id)) => format!("[rule {id}]"),
        _ => "[input]".to_string(),
    };
    out.push_str(&format!("{indent}{} {origin}\n", node.fact));
    for premise in &node.premises {
        render_node(premise, depth + 1, out);
    }
    for check in &node.builtins {
        out.push_str(&format!("{indent}  {check} [builtin]\n"));
    }
    for gone in &node.absent {
        out.push_str(&format!("{indent}  {gone} [absent]\n"));
    }
}

/// Re-evaluates the record's facts under the supplied policy text, which
/// must hash to the digest pinned in the record. Returns the recomputed
/// verdict; callers compare it with `record.verdict`.
pub fn replay(
    record: &ProvenanceRecord,
    policy_text: &str,
) -> Result<ImpactLevel, ProvenanceError> {
    let supplied = sha256_hex(policy_text);
    if supplied != record.policy.digest {
        return Err(ProvenanceError::PolicyDigestMismatch {
            pinned: record.policy.digest.clone(),
            supplied,
        });
    }
    let rules = datalog::parse_rules(policy_text)?;
    let facts = FactSet::parse(&record.facts.join("\n"))?;
    let evaluation = datalog::evaluate(&rules, &facts.to_literals())?;
    let (level, _) = datalog::verdict(&evaluation, &rules);
    Ok(level)
}

/// Checks the recorded derivation trees against the record's own fact
/// list and policy: each tree must replay step by step.
pub fn verify_derivations(
    record: &ProvenanceRecord,
    policy_text: &str,
) -> Result<(), ProvenanceError> {
    let supplied = sha256_hex(policy_text);
    if supplied != record.policy.digest {
        return Err(ProvenanceError::PolicyDigestMismatch {
            pinned: record.policy.digest.clone(),
            supplied,
        });
    }
    let rules = datalog::parse_rules(policy_text)?;
    let facts = FactSet::parse(&record.facts.join("\n"))?;
    let literals = facts.to_literals();
    let inputs: BTreeSet<(String, Vec<String>)> = literals.iter().map(literal_key).collect();
    let evaluation = datalog::evaluate(&rules, &literals)?;
    let universe = datalog::fact_keys(&evaluation);
    for node in &record.supporting_derivations {
        let derivation = derivation_from_node(node)?;
        if !datalog::replay(&derivation, &rules, &inputs, &universe) {
            return Err(ProvenanceError::Inconsistent(format!(
                "recorded derivation of {} does not replay",
                node.fact
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::model::{FunctionDecl, TypeRef};
    use crate::policy::pessimistic;

    fn scenario() -> (ComponentModel, ComponentModel) {
        let mut old = ComponentModel::new("demo", SemVer::new(1, 2, 3));
        old.functions
            .push(FunctionDecl::new("f", vec![], TypeRef::new("Int")));
        old.functions
            .push(FunctionDecl::new("g", vec![], TypeRef::new("Int")));
        let mut new = old.clone();
        new.functions.retain(|f| f.name != "f");
        (old, new)
    }

    fn record_for(old: &ComponentModel, new: &ComponentModel) -> ProvenanceRecord {
        let policy = pessimistic();
        let mode = WorldMode::OpenWorld;
        let config = DiffConfig::default();
        let analysis = analyze(old, new, &policy, &mode, &config).unwrap();
        assemble(old, new, &analysis, &policy, &mode, &config).unwrap()
    }

    #[test]
    fn record_carries_the_pipeline() {
        let (old, new) = scenario();
        let record = record_for(&old, &new);
        assert_eq!(record.component, "demo");
        assert_eq!(record.verdict, ImpactLevel::Major);
        assert_eq!(record.new_version_recommended, SemVer::new(2, 0, 0));
        assert_eq!(record.world_mode, "open");
        assert!(record.facts.iter().any(|f| f == "functionRemoved(f)"));
        assert!(record.facts.iter().any(|f| f == "inSurface(f)"));
        let steps: Vec<&str> = record
            .checks_performed
            .iter()
            .map(|c| c.step.as_str())
            .collect();
        assert_eq!(steps, ["parse", "diff", "surface", "evaluate"]);
        let derivation = &record.supporting_derivations[0];
        assert_eq!(derivation.rule_id.as_deref(), Some("s1"));
        assert_eq!(derivation.premises.len(), 2);
    }

    #[test]
    fn empty_diff_recommends_the_old_version() {
        let (old, _) = scenario();
        let record = record_for(&old, &old);
        assert_eq!(record.verdict, ImpactLevel::None);
        assert_eq!(record.new_version_recommended, old.version);
        assert!(record.supporting_derivations.is_empty());
        // Surface facts are still listed: the evaluation saw them.
        assert!(record.facts.iter().any(|f| f == "inSurface(f)"));
        let text = render_record(&record, RenderFormat::Text);
        assert!(text.contains("verdict: none"));
    }

    #[test]
    fn structured_render_round_trips_byte_identically() {
        let (old, new) = scenario();
        let record = record_for(&old, &new);
        let first = render_record(&record, RenderFormat::Structured);
        let second = render_record(&record, RenderFormat::Structured);
        assert_eq!(first, second);
        let reparsed = parse_structured(&first).unwrap();
        assert_eq!(reparsed, record);
        assert_eq!(render_record(&reparsed, RenderFormat::Structured), first);
    }

    #[test]
    fn replay_reproduces_the_verdict() {
        let (old, new) = scenario();
        let record = record_for(&old, &new);
        let policy = pessimistic();
        let level = replay(&record, &policy.text).unwrap();
        assert_eq!(level, record.verdict);
        verify_derivations(&record, &policy.text).unwrap();

        let err = replay(&record, "% altered\n").unwrap_err();
        assert!(matches!(err, ProvenanceError::PolicyDigestMismatch { .. }));
    }

    #[test]
    fn assemble_rejects_inconsistent_input() {
        let (old, new) = scenario();
        let policy = pessimistic();
        let mode = WorldMode::OpenWorld;
        let config = DiffConfig::default();
        let mut analysis = analyze(&old, &new, &policy, &mode, &config).unwrap();
        analysis.verdict = ImpactLevel::Minor;
        let err = assemble(&old, &new, &analysis, &policy, &mode, &config).unwrap_err();
        assert!(matches!(err, ProvenanceError::Inconsistent(_)));

        let mut analysis = analyze(&old, &new, &policy, &mode, &config).unwrap();
        analysis.supporting.clear();
        let err = assemble(&old, &new, &analysis, &policy, &mode, &config).unwrap_err();
        assert!(matches!(err, ProvenanceError::Inconsistent(_)));
    }

    #[test]
    fn tampered_recorded_derivations_fail_verification() {
        let (old, new) = scenario();
        let mut record = record_for(&old, &new);
        record.supporting_derivations[0].premises[0].fact = "functionRemoved(g)".to_string();
        let policy = pessimistic();
        let err = verify_derivations(&record, &policy.text).unwrap_err();
        assert!(matches!(err, ProvenanceError::Inconsistent(_)));
    }

    #[test]
    fn text_render_shows_the_derivation_tree() {
        let (old, new) = scenario();
        let record = record_for(&old, &new);
        let text = render_record(&record, RenderFormat::Text);
        assert!(text.contains("verdict: major"));
        assert!(text.contains("impact_major(f) [rule s1]"));
        assert!(text.contains("functionRemoved(f) [input]"));
    }
}
