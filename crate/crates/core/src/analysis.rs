//! The end-to-end pipeline shared by the CLI and the registry advisor:
//! diff two models, scope the surface, evaluate the policy, join the
//! verdict, and compute the compliant next version.

use crate::datalog::{evaluate, verdict, Derivation, Evaluation, PolicyError, RuleSet};
use crate::diff::{diff, DiffConfig};
use crate::facts::FactSet;
use crate::model::ComponentModel;
use crate::policy::Policy;
use crate::surface::{surface_names, WorldMode};
use crate::version::{bump, ImpactLevel, SemVer};

/// Outcome of evaluating a fact set under a policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub evaluation: Evaluation,
    pub verdict: ImpactLevel,
    pub supporting: Vec<Derivation>,
}

pub fn classify(facts: &FactSet, rules: &RuleSet) -> Result<Classification, PolicyError> {
    let evaluation = evaluate(rules, &facts.to_literals())?;
    let (level, supporting) = verdict(&evaluation, rules);
    Ok(Classification {
        evaluation,
        verdict: level,
        supporting,
    })
}

/// Everything `check` needs to report: the fact set, the evaluation with
/// its derivations, the verdict, and the recommended next version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub facts: FactSet,
    pub evaluation: Evaluation,
    pub verdict: ImpactLevel,
    pub supporting: Vec<Derivation>,
    pub recommended: SemVer,
}

pub fn analyze(
    old: &ComponentModel,
    new: &ComponentModel,
    policy: &Policy,
    mode: &WorldMode,
    config: &DiffConfig,
) -> Result<Analysis, PolicyError> {
    let facts = FactSet::new(diff(old, new, config), surface_names(old, new, mode));
    let classification = classify(&facts, &policy.rules)?;
    Ok(Analysis {
        facts,
        recommended: bump(old.version, classification.verdict),
        evaluation: classification.evaluation,
        verdict: classification.verdict,
        supporting: classification.supporting,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FunctionDecl, TypeRef};
    use crate::policy::{optimistic, pessimistic};

    fn model_with(names: &[&str]) -> ComponentModel {
        let mut m = ComponentModel::new("demo", SemVer::new(1, 2, 3));
        for name in names {
            m.functions
                .push(FunctionDecl::new(name, vec![], TypeRef::new("Int")));
        }
        m
    }

    #[test]
    fn removal_is_major_under_the_default_policy() {
        let old = model_with(&["f", "g"]);
        let new = model_with(&["g"]);
        let analysis = analyze(
            &old,
            &new,
            &pessimistic(),
            &WorldMode::OpenWorld,
            &DiffConfig::default(),
        )
        .unwrap();
        assert_eq!(analysis.verdict, ImpactLevel::Major);
        assert_eq!(analysis.recommended, SemVer::new(2, 0, 0));
        assert!(!analysis.supporting.is_empty());
        assert!(analysis.evaluation.contains("impact_major", &["f"]));
    }

    #[test]
    fn addition_is_minor_and_no_change_is_none() {
        let old = model_with(&["f"]);
        let new = model_with(&["f", "g"]);
        let analysis = analyze(
            &old,
            &new,
            &pessimistic(),
            &WorldMode::OpenWorld,
            &DiffConfig::default(),
        )
        .unwrap();
        assert_eq!(analysis.verdict, ImpactLevel::Minor);
        assert_eq!(analysis.recommended, SemVer::new(1, 3, 0));

        let analysis = analyze(
            &old,
            &old,
            &optimistic(),
            &WorldMode::OpenWorld,
            &DiffConfig::default(),
        )
        .unwrap();
        assert_eq!(analysis.verdict, ImpactLevel::None);
        assert_eq!(analysis.recommended, old.version);
        assert!(analysis.facts.changes.is_empty());
    }

    #[test]
    fn classify_matches_analyze_on_the_same_facts() {
        let old = model_with(&["f", "g"]);
        let new = model_with(&["g"]);
        let policy = pessimistic();
        let analysis = analyze(
            &old,
            &new,
            &policy,
            &WorldMode::OpenWorld,
            &DiffConfig::default(),
        )
        .unwrap();
        let reparsed = FactSet::parse(&analysis.facts.to_text()).unwrap();
        let classification = classify(&reparsed, &policy.rules).unwrap();
        assert_eq!(classification.verdict, analysis.verdict);
        assert_eq!(classification.evaluation, analysis.evaluation);
    }
}
