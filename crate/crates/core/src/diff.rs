//! Structural comparison of two component models. Produces the change
//! facts that policies classify; carries no severity judgement itself.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;

use crate::contract::{compare_post, compare_pre, render_decimal, ContractRelation, Mode};
use crate::facts::{ChangeFact, FactKind};
use crate::model::{ComponentModel, FunctionDecl, LicenseClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiffConfig {
    pub mode: Mode,
    pub runtime_ratio_threshold: Rational64,
    pub memory_ratio_threshold: Rational64,
}

impl Default for DiffConfig {
    fn default() -> DiffConfig {
        DiffConfig {
            mode: Mode::Pessimistic,
            runtime_ratio_threshold: Rational64::new(5, 4),
            memory_ratio_threshold: Rational64::new(5, 4),
        }
    }
}

impl DiffConfig {
    /// Both ratio thresholds must exceed 1: a cost fact should mean the
    /// cost grew by a margin, not that it wobbled.
    pub fn validate(&self) -> Result<(), String> {
        let one = Rational64::from_integer(1);
        if self.runtime_ratio_threshold <= one {
            return Err(format!(
                "runtime ratio threshold must exceed 1, got {}",
                render_decimal(self.runtime_ratio_threshold)
            ));
        }
        if self.memory_ratio_threshold <= one {
            return Err(format!(
                "memory ratio threshold must exceed 1, got {}",
                render_decimal(self.memory_ratio_threshold)
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LicenseDirection {
    Relaxed,
    Tightened,
    Same,
}

/// Where `new` sits relative to `old` on the protectiveness order
/// public_domain < permissive < weak_copyleft < strong_copyleft < proprietary.
pub fn license_direction(old: LicenseClass, new: LicenseClass) -> LicenseDirection {
    match new.cmp(&old) {
        std::cmp::Ordering::Less => LicenseDirection::Relaxed,
        std::cmp::Ordering::Greater => LicenseDirection::Tightened,
        std::cmp::Ordering::Equal => LicenseDirection::Same,
    }
}

/// Compares two models and returns every observable change as a fact.
/// Declarations match by name; a rename therefore reads as a removal
/// plus an addition. The result is independent of `config.mode`: modes
/// only affect how policies later classify Incomparable contract facts.
pub fn diff(
    old: &ComponentModel,
    new: &ComponentModel,
    config: &DiffConfig,
) -> BTreeSet<ChangeFact> {
    let mut facts = BTreeSet::new();

    let old_fns: BTreeMap<&str, &FunctionDecl> =
        old.functions.iter().map(|f| (f.name.as_str(), f)).collect();
    let new_fns: BTreeMap<&str, &FunctionDecl> =
        new.functions.iter().map(|f| (f.name.as_str(), f)).collect();

    for name in old_fns.keys() {
        if !new_fns.contains_key(name) {
            facts.insert(ChangeFact::new(FactKind::FunctionRemoved, *name, vec![]));
        }
    }
    for name in new_fns.keys() {
        if !old_fns.contains_key(name) {
            facts.insert(ChangeFact::new(FactKind::FunctionAdded, *name, vec![]));
        }
    }

    let mut impl_candidates: Vec<String> = Vec::new();
    for (name, old_fn) in &old_fns {
        let Some(new_fn) = new_fns.get(name) else {
            continue;
        };
        diff_function(old_fn, new_fn, config, &mut facts);
        if let (Some(old_hash), Some(new_hash)) = (&old_fn.impl_hash, &new_fn.impl_hash) {
            if old_hash != new_hash {
                impl_candidates.push((*name).to_string());
            }
        }
    }

    diff_types(old, new, &mut facts);
    diff_exports(old, new, &mut facts);
    diff_metadata(old, new, &mut facts);

    // A body-only change is a patch-level signal; it stands only when
    // nothing else was observed about the same function.
    for name in impl_candidates {
        if facts.iter().all(|f| f.subject != name) {
            facts.insert(ChangeFact::new(FactKind::ImplChanged, name, vec![]));
        }
    }

    facts
}

fn diff_function(
    old: &FunctionDecl,
    new: &FunctionDecl,
    config: &DiffConfig,
    facts: &mut BTreeSet<ChangeFact>,
) {
    let name = old.name.as_str();
    let old_names: Vec<&str> = old.params.iter().map(|p| p.name.as_str()).collect();
    let new_names: Vec<&str> = new.params.iter().map(|p| p.name.as_str()).collect();
    let old_set: BTreeSet<&str> = old_names.iter().copied().collect();
    let new_set: BTreeSet<&str> = new_names.iter().copied().collect();

    for param in new_set.difference(&old_set) {
        facts.insert(ChangeFact::new(
            FactKind::ParamAdded,
            name,
            vec![(*param).to_string()],
        ));
    }
    for param in old_set.difference(&new_set) {
        facts.insert(ChangeFact::new(
            FactKind::ParamRemoved,
            name,
            vec![(*param).to_string()],
        ));
    }
    if old_set == new_set && old_names != new_names {
        facts.insert(ChangeFact::new(FactKind::ParamOrderChanged, name, vec![]));
    }
    for (old_param, new_param) in old.params.iter().zip(&new.params) {
        if old_param.name == new_param.name && old_param.ty.base != new_param.ty.base {
            facts.insert(ChangeFact::new(
                FactKind::ParamTypeChanged,
                name,
                vec![
                    old_param.name.clone(),
                    old_param.ty.to_string(),
                    new_param.ty.to_string(),
                ],
            ));
        }
    }

    if old.return_type.base != new.return_type.base {
        facts.insert(ChangeFact::new(
            FactKind::ReturnTypeChanged,
            name,
            vec![old.return_type.to_string(), new.return_type.to_string()],
        ));
    }
    if !old.return_type.nullable && new.return_type.nullable {
        facts.insert(ChangeFact::new(
            FactKind::ReturnNullabilityDropped,
            name,
            vec![],
        ));
    }

    if old.pure && !new.pure {
        facts.insert(ChangeFact::new(FactKind::SideEffectAdded, name, vec![]));
    }
    if !old.pure && new.pure {
        facts.insert(ChangeFact::new(FactKind::SideEffectRemoved, name, vec![]));
    }
    if !old.deprecated && new.deprecated {
        facts.insert(ChangeFact::new(FactKind::DeprecatedAdded, name, vec![]));
    }

    let pre_kind = match compare_pre(&old.precondition, &new.precondition) {
        ContractRelation::Equal => None,
        ContractRelation::Strengthened => Some(FactKind::PreStrengthened),
        ContractRelation::Weakened => Some(FactKind::PreWeakened),
        ContractRelation::Incomparable => Some(FactKind::PreIncomparable),
    };
    if let Some(kind) = pre_kind {
        facts.insert(ChangeFact::new(kind, name, vec![]));
    }
    let post_kind = match compare_post(&old.postcondition, &new.postcondition) {
        ContractRelation::Equal => None,
        ContractRelation::Strengthened => Some(FactKind::PostStrengthened),
        ContractRelation::Weakened => Some(FactKind::PostWeakened),
        ContractRelation::Incomparable => Some(FactKind::PostIncomparable),
    };
    if let Some(kind) = post_kind {
        facts.insert(ChangeFact::new(kind, name, vec![]));
    }

    if let (Some(old_cost), Some(new_cost)) = (&old.cost, &new.cost) {
        // A zero baseline has no meaningful growth ratio, so nothing is
        // emitted for it.
        if let Some(ratio) = growth(old_cost.runtime_ms, new_cost.runtime_ms) {
            if ratio > config.runtime_ratio_threshold {
                facts.insert(ChangeFact::new(
                    FactKind::RuntimeIncreased,
                    name,
                    vec![render_ratio(ratio)],
                ));
            }
        }
        if let Some(ratio) = growth(old_cost.memory_kb, new_cost.memory_kb) {
            if ratio > config.memory_ratio_threshold {
                facts.insert(ChangeFact::new(
                    FactKind::MemoryIncreased,
                    name,
                    vec![render_ratio(ratio)],
                ));
            }
        }
    }
}

fn growth(old: Rational64, new: Rational64) -> Option<Rational64> {
    if old == Rational64::from_integer(0) {
        None
    } else {
        Some(new / old)
    }
}

fn diff_types(old: &ComponentModel, new: &ComponentModel, facts: &mut BTreeSet<ChangeFact>) {
    for old_ty in &old.types {
        let Some(new_ty) = new.types.iter().find(|t| t.name == old_ty.name) else {
            continue;
        };
        if old_ty.kind != new_ty.kind {
            facts.insert(ChangeFact::new(
                FactKind::TypeKindChanged,
                old_ty.name.as_str(),
                vec![old_ty.kind.to_string(), new_ty.kind.to_string()],
            ));
        }
    }
}

fn diff_exports(old: &ComponentModel, new: &ComponentModel, facts: &mut BTreeSet<ChangeFact>) {
    let old_exports = old.exported_names();
    let new_exports = new.exported_names();
    for name in old_exports.difference(&new_exports) {
        facts.insert(ChangeFact::new(
            FactKind::ExportRemoved,
            name.as_str(),
            vec![],
        ));
    }
    for name in new_exports.difference(&old_exports) {
        facts.insert(ChangeFact::new(
            FactKind::ExportAdded,
            name.as_str(),
            vec![],
        ));
    }
}

fn diff_metadata(old: &ComponentModel, new: &ComponentModel, facts: &mut BTreeSet<ChangeFact>) {
    let old_meta = &old.metadata;
    let new_meta = &new.metadata;

    let license_detail = vec![
        old_meta.license.as_str().to_string(),
        new_meta.license.as_str().to_string(),
    ];
    match license_direction(old_meta.license, new_meta.license) {
        LicenseDirection::Relaxed => {
            facts.insert(ChangeFact::new(
                FactKind::LicenseRelaxed,
                old.name.as_str(),
                license_detail,
            ));
        }
        LicenseDirection::Tightened => {
            facts.insert(ChangeFact::new(
                FactKind::LicenseTightened,
                old.name.as_str(),
                license_detail,
            ));
        }
        LicenseDirection::Same => {}
    }

    // Platform entries state the minimum supported platform version.
    // Raising a minimum or dropping a platform narrows where the
    // component runs; lowering a minimum or adding a platform widens it.
    for (platform, old_min) in &old_meta.platforms {
        match new_meta.platforms.get(platform) {
            None => {
                facts.insert(ChangeFact::new(
                    FactKind::PlatformStrengthened,
                    platform.as_str(),
                    vec![old_min.to_string(), "none".to_string()],
                ));
            }
            Some(new_min) if new_min > old_min => {
                facts.insert(ChangeFact::new(
                    FactKind::PlatformStrengthened,
                    platform.as_str(),
                    vec![old_min.to_string(), new_min.to_string()],
                ));
            }
            Some(new_min) if new_min < old_min => {
                facts.insert(ChangeFact::new(
                    FactKind::PlatformWeakened,
                    platform.as_str(),
                    vec![old_min.to_string(), new_min.to_string()],
                ));
            }
            Some(_) => {}
        }
    }
    for (platform, new_min) in &new_meta.platforms {
        if !old_meta.platforms.contains_key(platform) {
            facts.insert(ChangeFact::new(
                FactKind::PlatformWeakened,
                platform.as_str(),
                vec!["none".to_string(), new_min.to_string()],
            ));
        }
    }

    let old_deps: BTreeMap<&str, &crate::model::Dependency> = old_meta
        .dependencies
        .iter()
        .map(|d| (d.name.as_str(), d))
        .collect();
    let new_deps: BTreeMap<&str, &crate::model::Dependency> = new_meta
        .dependencies
        .iter()
        .map(|d| (d.name.as_str(), d))
        .collect();
    for (name, dep) in &old_deps {
        match new_deps.get(name) {
            None => {
                facts.insert(ChangeFact::new(
                    FactKind::DependencyRemoved,
                    *name,
                    vec![dep.req.to_string()],
                ));
            }
            Some(new_dep) if new_dep.req != dep.req => {
                facts.insert(ChangeFact::new(
                    FactKind::DependencyReqChanged,
                    *name,
                    vec![dep.req.to_string(), new_dep.req.to_string()],
                ));
            }
            Some(_) => {}
        }
    }
    for (name, dep) in &new_deps {
        if !old_deps.contains_key(name) {
            facts.insert(ChangeFact::new(
                FactKind::DependencyAdded,
                *name,
                vec![dep.req.to_string()],
            ));
        }
    }
}

/// Ratio detail text: exact when the denominator allows a finite
/// decimal, otherwise rounded to six places.
fn render_ratio(ratio: Rational64) -> String {
    let exact = render_decimal(ratio);
    if !exact.contains('/') {
        return exact;
    }
    let numer = *ratio.numer() as i128 * 1_000_000;
    let denom = *ratio.denom() as i128;
    let rounded = if numer >= 0 {
        (numer + denom / 2) / denom
    } else {
        -((-numer + denom / 2) / denom)
    };
    let sign = if rounded < 0 { "-" } else { "" };
    let units = rounded.abs() / 1_000_000;
    let frac = rounded.abs() % 1_000_000;
    if frac == 0 {
        return format!("{sign}{units}");
    }
    let mut frac_text = format!("{frac:06}");
    while frac_text.ends_with('0') {
        frac_text.pop();
    }
    format!("{sign}{units}.{frac_text}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::{Atom, CmpOp};
    use crate::model::{
        CostProfile, Dependency, ExportSpec, Param, TypeDecl, TypeKind, TypeRef, Visibility,
    };
    use crate::version::{SemVer, VersionReq};

    fn base_model() -> ComponentModel {
        let mut model = ComponentModel::new("demo", SemVer::new(1, 0, 0));
        model.functions.push(FunctionDecl::new(
            "f",
            vec![Param {
                name: "a".into(),
                ty: TypeRef::new("Int"),
            }],
            TypeRef::new("Int"),
        ));
        model
    }

    fn fact(kind: FactKind, subject: &str, detail: &[&str]) -> ChangeFact {
        ChangeFact::new(
            kind,
            subject,
            detail.iter().map(|s| s.to_string()).collect(),
        )
    }

    #[test]
    fn identical_models_produce_no_facts() {
        let model = base_model();
        assert!(diff(&model, &model, &DiffConfig::default()).is_empty());
    }

    #[test]
    fn removal_and_addition() {
        let old = base_model();
        let mut new = base_model();
        new.functions[0].name = "g".into();
        let facts = diff(&old, &new, &DiffConfig::default());
        // The rename also moves the name in and out of the exported set.
        assert!(facts.contains(&fact(FactKind::FunctionRemoved, "f", &[])));
        assert!(facts.contains(&fact(FactKind::FunctionAdded, "g", &[])));
        assert!(facts.contains(&fact(FactKind::ExportRemoved, "f", &[])));
        assert!(facts.contains(&fact(FactKind::ExportAdded, "g", &[])));
        assert_eq!(facts.len(), 4);
    }

    #[test]
    fn param_facts() {
        let old = base_model();
        let mut new = base_model();
        new.functions[0].params.push(Param {
            name: "b".into(),
            ty: TypeRef::new("Str"),
        });
        let facts = diff(&old, &new, &DiffConfig::default());
        assert_eq!(facts.len(), 1);
        assert!(facts.contains(&fact(FactKind::ParamAdded, "f", &["b"])));

        let facts = diff(&new, &old, &DiffConfig::default());
        assert!(facts.contains(&fact(FactKind::ParamRemoved, "f", &["b"])));
    }

    #[test]
    fn param_reorder_and_retype() {
        let mut old = base_model();
        old.functions[0].params.push(Param {
            name: "b".into(),
            ty: TypeRef::new("Str"),
        });
        let mut new = old.clone();
        new.functions[0].params.reverse();
        let facts = diff(&old, &new, &DiffConfig::default());
        assert_eq!(facts.len(), 1);
        assert!(facts.contains(&fact(FactKind::ParamOrderChanged, "f", &[])));

        let mut retyped = old.clone();
        retyped.functions[0].params[1].ty = TypeRef::nullable("Bytes");
        let facts = diff(&old, &retyped, &DiffConfig::default());
        assert_eq!(facts.len(), 1);
        assert!(facts.contains(&fact(
            FactKind::ParamTypeChanged,
            "f",
            &["b", "Str", "Bytes?"]
        )));
    }

    #[test]
    fn return_type_and_nullability() {
        let old = base_model();
        let mut new = base_model();
        new.functions[0].return_type = TypeRef::nullable("Int");
        let facts = diff(&old, &new, &DiffConfig::default());
        assert_eq!(facts.len(), 1);
        assert!(facts.contains(&fact(FactKind::ReturnNullabilityDropped, "f", &[])));
        // Regaining the guarantee is not a reportable hazard.
        assert!(diff(&new, &old, &DiffConfig::default()).is_empty());

        let mut widened = base_model();
        widened.functions[0].return_type = TypeRef::new("Str");
        let facts = diff(&old, &widened, &DiffConfig::default());
        assert!(facts.contains(&fact(FactKind::ReturnTypeChanged, "f", &["Int", "Str"])));
    }

    #[test]
    fn purity_and_deprecation() {
        let mut old = base_model();
        old.functions[0].pure = true;
        let mut new = base_model();
        new.functions[0].deprecated = true;
        let facts = diff(&old, &new, &DiffConfig::default());
        assert!(facts.contains(&fact(FactKind::SideEffectAdded, "f", &[])));
        assert!(facts.contains(&fact(FactKind::DeprecatedAdded, "f", &[])));
        let reverse = diff(&new, &old, &DiffConfig::default());
        assert!(reverse.contains(&fact(FactKind::SideEffectRemoved, "f", &[])));
        assert_eq!(reverse.len(), 1);
    }

    #[test]
    fn contract_relations_become_facts() {
        let mut old = base_model();
        old.functions[0]
            .precondition
            .atoms
            .insert(Atom::cmp("a", CmpOp::Ge, 0));
        let mut new = base_model();
        new.functions[0]
            .precondition
            .atoms
            .insert(Atom::cmp("a", CmpOp::Ge, 1));
        let facts = diff(&old, &new, &DiffConfig::default());
        assert_eq!(facts.len(), 1);
        assert!(facts.contains(&fact(FactKind::PreStrengthened, "f", &[])));
        assert!(diff(&new, &old, &DiffConfig::default()).contains(&fact(
            FactKind::PreWeakened,
            "f",
            &[]
        )));

        let mut dropped = base_model();
        let mut promised = base_model();
        promised.functions[0]
            .postcondition
            .atoms
            .insert(Atom::NonNull("result".into()));
        let facts = diff(&promised, &dropped, &DiffConfig::default());
        assert!(facts.contains(&fact(FactKind::PostWeakened, "f", &[])));
        dropped.functions[0]
            .precondition
            .atoms
            .insert(Atom::opaque("valid", "a"));
        promised.functions[0]
            .precondition
            .atoms
            .insert(Atom::opaque("sorted", "a"));
        let facts = diff(&promised, &dropped, &DiffConfig::default());
        assert!(facts.contains(&fact(FactKind::PreIncomparable, "f", &[])));
    }

    #[test]
    fn cost_ratio_thresholds() {
        let mut old = base_model();
        old.functions[0].cost = Some(CostProfile {
            runtime_ms: Rational64::from_integer(10),
            memory_kb: Rational64::from_integer(64),
        });
        let mut new = base_model();
        new.functions[0].cost = Some(CostProfile {
            runtime_ms: Rational64::from_integer(15),
            memory_kb: Rational64::from_integer(70),
        });
        let facts = diff(&old, &new, &DiffConfig::default());
        // 1.5x runtime crosses the default 1.25 threshold; 70/64 does not.
        assert_eq!(facts.len(), 1);
        assert!(facts.contains(&fact(FactKind::RuntimeIncreased, "f", &["1.5"])));

        let strict = DiffConfig {
            memory_ratio_threshold: Rational64::new(21, 20),
            ..DiffConfig::default()
        };
        let facts = diff(&old, &new, &strict);
        assert!(facts.contains(&fact(FactKind::MemoryIncreased, "f", &["1.09375"])));

        // No facts when either profile is missing or the baseline is zero.
        let mut unmeasured = base_model();
        unmeasured.functions[0].cost = None;
        assert!(diff(&unmeasured, &new, &DiffConfig::default()).is_empty());
        let mut zero = base_model();
        zero.functions[0].cost = Some(CostProfile {
            runtime_ms: Rational64::from_integer(0),
            memory_kb: Rational64::from_integer(64),
        });
        assert!(diff(&zero, &zero, &DiffConfig::default()).is_empty());
    }

    #[test]
    fn inexact_ratio_rounds_to_six_places() {
        assert_eq!(render_ratio(Rational64::new(4, 3)), "1.333333");
        assert_eq!(render_ratio(Rational64::new(5, 3)), "1.666667");
        assert_eq!(render_ratio(Rational64::new(3, 2)), "1.5");
        assert_eq!(render_ratio(Rational64::from_integer(2)), "2");
    }

    #[test]
    fn impl_change_stands_alone() {
        let mut old = base_model();
        old.functions[0].impl_hash = Some("h1".into());
        let mut new = base_model();
        new.functions[0].impl_hash = Some("h2".into());
        let facts = diff(&old, &new, &DiffConfig::default());
        assert_eq!(facts.len(), 1);
        assert!(facts.contains(&fact(FactKind::ImplChanged, "f", &[])));

        // Any co-occurring fact about the same function suppresses it.
        new.functions[0].deprecated = true;
        let facts = diff(&old, &new, &DiffConfig::default());
        assert_eq!(facts.len(), 1);
        assert!(facts.contains(&fact(FactKind::DeprecatedAdded, "f", &[])));

        // A hash appearing or disappearing is not a body change.
        let mut unhashed = base_model();
        unhashed.functions[0].impl_hash = None;
        assert!(diff(&unhashed, &old, &DiffConfig::default()).is_empty());
    }

    #[test]
    fn type_kind_changes() {
        let mut old = base_model();
        old.types.push(TypeDecl {
            name: "ClassVisitor".into(),
            kind: TypeKind::Interface,
            visibility: Visibility::Public,
        });
        let mut new = old.clone();
        new.types[0].kind = TypeKind::Abstract;
        let facts = diff(&old, &new, &DiffConfig::default());
        assert_eq!(facts.len(), 1);
        assert!(facts.contains(&fact(
            FactKind::TypeKindChanged,
            "ClassVisitor",
            &["interface", "abstract"]
        )));
    }

    #[test]
    fn export_set_changes() {
        let mut old = base_model();
        old.functions
            .push(FunctionDecl::new("g", vec![], TypeRef::new("Int")));
        old.exports = ExportSpec::Named(["f".to_string()].into());
        let mut new = old.clone();
        new.exports = ExportSpec::Named(["f".to_string(), "g".to_string()].into());
        let facts = diff(&old, &new, &DiffConfig::default());
        assert_eq!(facts.len(), 1);
        assert!(facts.contains(&fact(FactKind::ExportAdded, "g", &[])));
        assert!(diff(&new, &old, &DiffConfig::default()).contains(&fact(
            FactKind::ExportRemoved,
            "g",
            &[]
        )));
    }

    #[test]
    fn license_facts_and_direction() {
        assert_eq!(
            license_direction(LicenseClass::WeakCopyleft, LicenseClass::Permissive),
            LicenseDirection::Relaxed
        );
        assert_eq!(
            license_direction(LicenseClass::Permissive, LicenseClass::StrongCopyleft),
            LicenseDirection::Tightened
        );
        assert_eq!(
            license_direction(LicenseClass::Permissive, LicenseClass::Permissive),
            LicenseDirection::Same
        );

        let mut old = base_model();
        old.metadata.license = LicenseClass::WeakCopyleft;
        let new = base_model();
        let facts = diff(&old, &new, &DiffConfig::default());
        assert_eq!(facts.len(), 1);
        assert!(facts.contains(&fact(
            FactKind::LicenseRelaxed,
            "demo",
            &["weak_copyleft", "permissive"]
        )));
    }

    #[test]
    fn platform_facts() {
        let mut old = base_model();
        old.metadata
            .platforms
            .insert("linux".into(), SemVer::new(3, 0, 0));
        let mut raised = old.clone();
        raised
            .metadata
            .platforms
            .insert("linux".into(), SemVer::new(4, 0, 0));
        let facts = diff(&old, &raised, &DiffConfig::default());
        assert!(facts.contains(&fact(
            FactKind::PlatformStrengthened,
            "linux",
            &["3.0.0", "4.0.0"]
        )));
        assert!(diff(&raised, &old, &DiffConfig::default()).contains(&fact(
            FactKind::PlatformWeakened,
            "linux",
            &["4.0.0", "3.0.0"]
        )));

        // Dropping a platform narrows support; adding one widens it.
        let bare = base_model();
        let facts = diff(&old, &bare, &DiffConfig::default());
        assert!(facts.contains(&fact(
            FactKind::PlatformStrengthened,
            "linux",
            &["3.0.0", "none"]
        )));
        let facts = diff(&bare, &old, &DiffConfig::default());
        assert!(facts.contains(&fact(
            FactKind::PlatformWeakened,
            "linux",
            &["none", "3.0.0"]
        )));
    }

    #[test]
    fn dependency_facts() {
        let mut old = base_model();
        old.metadata.dependencies.push(Dependency {
            name: "serde".into(),
            req: VersionReq::range(SemVer::new(1, 0, 0), SemVer::new(2, 0, 0)).unwrap(),
        });
        let bare = base_model();
        let facts = diff(&bare, &old, &DiffConfig::default());
        assert!(facts.contains(&fact(
            FactKind::DependencyAdded,
            "serde",
            &[">=1.0.0 <2.0.0"]
        )));
        let facts = diff(&old, &bare, &DiffConfig::default());
        assert!(facts.contains(&fact(
            FactKind::DependencyRemoved,
            "serde",
            &[">=1.0.0 <2.0.0"]
        )));

        let mut retargeted = old.clone();
        retargeted.metadata.dependencies[0].req = "2.*".parse().unwrap();
        let facts = diff(&old, &retargeted, &DiffConfig::default());
        assert_eq!(facts.len(), 1);
        assert!(facts.contains(&fact(
            FactKind::DependencyReqChanged,
            "serde",
            &[">=1.0.0 <2.0.0", "2.*"]
        )));
    }

    #[test]
    fn config_validation() {
        assert!(DiffConfig::default().validate().is_ok());
        let bad = DiffConfig {
            runtime_ratio_threshold: Rational64::from_integer(1),
            ..DiffConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
