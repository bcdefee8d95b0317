//! The declared surface of one component version: functions, named types,
//! metadata, and an export specification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;

use crate::contract::Contract;
use crate::version::{SemVer, VersionReq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Visibility {
    Public,
    Internal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeKind {
    Interface,
    Abstract,
    Concrete,
    Enum,
}

impl TypeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TypeKind::Interface => "interface",
            TypeKind::Abstract => "abstract",
            TypeKind::Concrete => "concrete",
            TypeKind::Enum => "enum",
        }
    }
}

impl fmt::Display for TypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A reference to a type by name, possibly admitting null.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeRef {
    pub base: String,
    pub nullable: bool,
}

impl TypeRef {
    pub fn new(base: &str) -> TypeRef {
        TypeRef {
            base: base.to_string(),
            nullable: false,
        }
    }

    pub fn nullable(base: &str) -> TypeRef {
        TypeRef {
            base: base.to_string(),
            nullable: true,
        }
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.base, if self.nullable { "?" } else { "" })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: String,
    pub ty: TypeRef,
}

/// Observed runtime and memory cost, in milliseconds and kilobytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CostProfile {
    pub runtime_ms: Rational64,
    pub memory_kb: Rational64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: TypeRef,
    pub visibility: Visibility,
    pub pure: bool,
    pub deprecated: bool,
    pub impl_hash: Option<String>,
    pub cost: Option<CostProfile>,
    pub precondition: Contract,
    pub postcondition: Contract,
}

impl FunctionDecl {
    pub fn new(name: &str, params: Vec<Param>, return_type: TypeRef) -> FunctionDecl {
        FunctionDecl {
            name: name.to_string(),
            params,
            return_type,
            visibility: Visibility::Public,
            pure: false,
            deprecated: false,
            impl_hash: None,
            cost: None,
            precondition: Contract::default(),
            postcondition: Contract::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub kind: TypeKind,
    pub visibility: Visibility,
}

/// License classes ordered from least to most protective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LicenseClass {
    PublicDomain,
    Permissive,
    WeakCopyleft,
    StrongCopyleft,
    Proprietary,
}

impl LicenseClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LicenseClass::PublicDomain => "public_domain",
            LicenseClass::Permissive => "permissive",
            LicenseClass::WeakCopyleft => "weak_copyleft",
            LicenseClass::StrongCopyleft => "strong_copyleft",
            LicenseClass::Proprietary => "proprietary",
        }
    }

    pub fn from_name(text: &str) -> Option<LicenseClass> {
        Some(match text {
            "public_domain" => LicenseClass::PublicDomain,
            "permissive" => LicenseClass::Permissive,
            "weak_copyleft" => LicenseClass::WeakCopyleft,
            "strong_copyleft" => LicenseClass::StrongCopyleft,
            "proprietary" => LicenseClass::Proprietary,
            _ => return None,
        })
    }
}

impl fmt::Display for LicenseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dependency {
    pub name: String,
    pub req: VersionReq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metadata {
    pub license: LicenseClass,
    /// Platform name to minimum supported version.
    pub platforms: BTreeMap<String, SemVer>,
    pub dependencies: Vec<Dependency>,
}

impl Default for Metadata {
    fn default() -> Metadata {
        Metadata {
            license: LicenseClass::Permissive,
            platforms: BTreeMap::new(),
            dependencies: Vec::new(),
        }
    }
}

/// Which declarations the component offers to clients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExportSpec {
    AllPublic,
    Named(BTreeSet<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentModel {
    pub name: String,
    pub version: SemVer,
    pub metadata: Metadata,
    pub functions: Vec<FunctionDecl>,
    pub types: Vec<TypeDecl>,
    pub exports: ExportSpec,
}

impl ComponentModel {
    pub fn new(name: &str, version: SemVer) -> ComponentModel {
        ComponentModel {
            name: name.to_string(),
            version,
            metadata: Metadata::default(),
            functions: Vec::new(),
            types: Vec::new(),
            exports: ExportSpec::AllPublic,
        }
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn type_decl(&self, name: &str) -> Option<&TypeDecl> {
        self.types.iter().find(|t| t.name == name)
    }

    /// Names of all public declarations, functions and types alike.
    pub fn public_names(&self) -> BTreeSet<String> {
        self.functions
            .iter()
            .filter(|f| f.visibility == Visibility::Public)
            .map(|f| f.name.clone())
            .chain(
                self.types
                    .iter()
                    .filter(|t| t.visibility == Visibility::Public)
                    .map(|t| t.name.clone()),
            )
            .collect()
    }

    /// The effective export set: named exports restricted to public
    /// declarations, or every public declaration under `AllPublic`.
    /// Exporting an internal declaration has no effect (the `lint`
    /// command flags it).
    pub fn exported_names(&self) -> BTreeSet<String> {
        let public = self.public_names();
        match &self.exports {
            ExportSpec::AllPublic => public,
            ExportSpec::Named(names) => names.intersection(&public).cloned().collect(),
        }
    }
}

/// Size measures of a component's surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfaceReport {
    pub total_functions: usize,
    pub public_functions: usize,
    pub exported_functions: usize,
    pub used_functions: Option<usize>,
}

/// Counts the model's functions by visibility and export status, plus how
/// many a usage set touches when one is supplied. Usage names that match
/// no declared function count as zero uses.
pub fn surface_report(model: &ComponentModel, usage: Option<&BTreeSet<String>>) -> SurfaceReport {
    let exported = model.exported_names();
    let public_functions = model
        .functions
        .iter()
        .filter(|f| f.visibility == Visibility::Public)
        .count();
    let exported_functions = model
        .functions
        .iter()
        .filter(|f| exported.contains(&f.name))
        .count();
    let used_functions = usage.map(|used| {
        model
            .functions
            .iter()
            .filter(|f| used.contains(&f.name))
            .count()
    });
    SurfaceReport {
        total_functions: model.functions.len(),
        public_functions,
        exported_functions,
        used_functions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_model() -> ComponentModel {
        let mut model = ComponentModel::new("demo", SemVer::new(1, 0, 0));
        for name in ["f", "g", "h"] {
            model.functions.push(FunctionDecl::new(
                name,
                vec![Param {
                    name: "a".into(),
                    ty: TypeRef::new("Int"),
                }],
                TypeRef::new("Int"),
            ));
        }
        let mut internal = FunctionDecl::new("helper", vec![], TypeRef::new("Int"));
        internal.visibility = Visibility::Internal;
        model.functions.push(internal);
        model
    }

    #[test]
    fn named_exports_restrict_the_count() {
        let mut model = sample_model();
        model.exports = ExportSpec::Named(["f".to_string()].into());
        let report = surface_report(&model, None);
        assert_eq!(report.total_functions, 4);
        assert_eq!(report.public_functions, 3);
        assert_eq!(report.exported_functions, 1);
        assert_eq!(report.used_functions, None);
    }

    #[test]
    fn all_public_exports_every_public_function() {
        let model = sample_model();
        let report = surface_report(&model, None);
        assert_eq!(report.exported_functions, 3);
        assert!(report.exported_functions <= report.public_functions);
        assert!(report.public_functions <= report.total_functions);
    }

    #[test]
    fn usage_counts_only_declared_functions() {
        let model = sample_model();
        let usage: BTreeSet<String> =
            ["f".to_string(), "g".to_string(), "absent".to_string()].into();
        let report = surface_report(&model, Some(&usage));
        assert_eq!(report.used_functions, Some(2));
    }

    #[test]
    fn exported_names_ignore_internal_entries() {
        let mut model = sample_model();
        model.exports = ExportSpec::Named(["f".to_string(), "helper".to_string()].into());
        assert_eq!(model.exported_names(), ["f".to_string()].into());
    }

    #[test]
    fn license_order_tracks_protectiveness() {
        assert!(LicenseClass::PublicDomain < LicenseClass::Permissive);
        assert!(LicenseClass::Permissive < LicenseClass::WeakCopyleft);
        assert!(LicenseClass::WeakCopyleft < LicenseClass::StrongCopyleft);
        assert!(LicenseClass::StrongCopyleft < LicenseClass::Proprietary);
    }

    #[test]
    fn public_names_include_types() {
        let mut model = sample_model();
        model.types.push(TypeDecl {
            name: "Node".into(),
            kind: TypeKind::Interface,
            visibility: Visibility::Public,
        });
        model.types.push(TypeDecl {
            name: "Hidden".into(),
            kind: TypeKind::Concrete,
            visibility: Visibility::Internal,
        });
        let names = model.public_names();
        assert!(names.contains("Node"));
        assert!(!names.contains("Hidden"));
        assert!(names.contains("f"));
    }
}
