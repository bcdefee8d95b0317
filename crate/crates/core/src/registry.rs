//! Local registry: a directory tree of `<name>-<major>.<minor>.<patch>.sdl`
//! files. The index maps each component to its versions, `resolve` picks
//! the greatest version matching a requirement, and `advise` pre-classifies
//! candidate upgrades so a consumer can see whether the declared version
//! jump agrees with the computed one.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::analysis::classify;
use crate::datalog::{PolicyError, RuleSet};
use crate::diff::{diff, DiffConfig};
use crate::facts::FactSet;
use crate::model::ComponentModel;
use crate::sdl::{parse_sdl, SdlError};
use crate::surface::{surface_names, WorldMode};
use crate::version::{ImpactLevel, SemVer, VersionReq};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryIndex {
    pub root: PathBuf,
    pub components: BTreeMap<String, BTreeMap<SemVer, PathBuf>>,
    /// `.sdl` files whose names do not fit the layout, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("cannot read registry directory {path}: {source}")]
    RootRead { path: String, source: io::Error },
    #[error("duplicate version: {first} and {second} both provide {name} {version}")]
    DuplicateVersion {
        name: String,
        version: SemVer,
        first: String,
        second: String,
    },
    #[error("component `{0}` is not in the registry")]
    UnknownComponent(String),
    #[error("no version of {name} matches {req}")]
    NoMatch { name: String, req: VersionReq },
    #[error("{name} {version} is not in the registry")]
    MissingVersion { name: String, version: SemVer },
    #[error("cannot read {path}: {source}")]
    FileRead { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Sdl { path: String, source: SdlError },
    #[error("{path}: file claims {expected_name} {expected_version} but declares {found_name} {found_version}")]
    Declaration {
        path: String,
        expected_name: String,
        expected_version: SemVer,
        found_name: String,
        found_version: SemVer,
    },
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

fn walk(dir: &Path, files: &mut Vec<PathBuf>) -> Result<(), RegistryError> {
    let read = |e: io::Error| RegistryError::RootRead {
        path: dir.display().to_string(),
        source: e,
    };
    let mut entries = Vec::new();
    for entry in fs::read_dir(dir).map_err(read)? {
        entries.push(entry.map_err(read)?.path());
    }
    entries.sort();
    for path in entries {
        if path.is_dir() {
            walk(&path, files)?;
        } else {
            files.push(path);
        }
    }
    Ok(())
}

/// Splits a file stem like `lib-1.2.3` into name and version. The version
/// is everything after the last `-`, so hyphenated names work.
fn split_stem(stem: &str) -> Option<(String, SemVer)> {
    let (name, version_text) = stem.rsplit_once('-')?;
    if name.is_empty() {
        return None;
    }
    let version = SemVer::from_str(version_text).ok()?;
    Some((name.to_string(), version))
}

/// Indexes every `.sdl` file under `root` (recursively). Files that are
/// not `.sdl` are ignored; `.sdl` files that do not look like
/// `<name>-<version>.sdl` are recorded as skipped. Two files providing the
/// same component version are an error.
pub fn load_index(root: &Path) -> Result<RegistryIndex, RegistryError> {
    let mut files = Vec::new();
    walk(root, &mut files)?;
    let mut components: BTreeMap<String, BTreeMap<SemVer, PathBuf>> = BTreeMap::new();
    let mut skipped = Vec::new();
    for path in files {
        if path.extension().and_then(|e| e.to_str()) != Some("sdl") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
        let Some((name, version)) = split_stem(stem) else {
            skipped.push((
                path,
                "file name is not <component>-<major>.<minor>.<patch>.sdl".to_string(),
            ));
            continue;
        };
        let versions = components.entry(name.clone()).or_default();
        if let Some(first) = versions.get(&version) {
            return Err(RegistryError::DuplicateVersion {
                name,
                version,
                first: first.display().to_string(),
                second: path.display().to_string(),
            });
        }
        versions.insert(version, path);
    }
    Ok(RegistryIndex {
        root: root.to_path_buf(),
        components,
        skipped,
    })
}

impl RegistryIndex {
    pub fn versions(&self, name: &str) -> Result<&BTreeMap<SemVer, PathBuf>, RegistryError> {
        self.components
            .get(name)
            .ok_or_else(|| RegistryError::UnknownComponent(name.to_string()))
    }

    /// The greatest indexed version matching `req`.
    pub fn resolve(&self, name: &str, req: &VersionReq) -> Result<SemVer, RegistryError> {
        self.versions(name)?
            .keys()
            .rev()
            .find(|v| req.matches(**v))
            .copied()
            .ok_or_else(|| RegistryError::NoMatch {
                name: name.to_string(),
                req: req.clone(),
            })
    }

    pub fn path_of(&self, name: &str, version: SemVer) -> Result<&Path, RegistryError> {
        self.versions(name)?
            .get(&version)
            .map(PathBuf::as_path)
            .ok_or_else(|| RegistryError::MissingVersion {
                name: name.to_string(),
                version,
            })
    }

    /// Loads and parses one indexed file, checking that the component
    /// declares the name and version its file name promises.
    pub fn load_model(&self, name: &str, version: SemVer) -> Result<ComponentModel, RegistryError> {
        let path = self.path_of(name, version)?;
        let text = fs::read_to_string(path).map_err(|e| RegistryError::FileRead {
            path: path.display().to_string(),
            source: e,
        })?;
        let model = parse_sdl(&text).map_err(|e| RegistryError::Sdl {
            path: path.display().to_string(),
            source: e,
        })?;
        if model.name != name || model.version != version {
            return Err(RegistryError::Declaration {
                path: path.display().to_string(),
                expected_name: name.to_string(),
                expected_version: version,
                found_name: model.name,
                found_version: model.version,
            });
        }
        Ok(model)
    }

    /// Classifies every indexed upgrade candidate: versions above
    /// `current` that match `req`, in ascending order. Each candidate is
    /// diffed against the current model and evaluated under `rules`;
    /// `agreement` says whether the computed impact stays within the bump
    /// the version numbers declare.
    pub fn advise(
        &self,
        name: &str,
        current: SemVer,
        req: &VersionReq,
        rules: &RuleSet,
        mode: &WorldMode,
        config: &DiffConfig,
    ) -> Result<Vec<UpgradeAdvice>, RegistryError> {
        let current_model = self.load_model(name, current)?;
        let candidates: Vec<SemVer> = self
            .versions(name)?
            .keys()
            .filter(|v| **v > current && req.matches(**v))
            .copied()
            .collect();
        let mut advice = Vec::with_capacity(candidates.len());
        for to in candidates {
            let candidate = self.load_model(name, to)?;
            let facts = FactSet::new(
                diff(&current_model, &candidate, config),
                surface_names(&current_model, &candidate, mode),
            );
            let classification = classify(&facts, rules)?;
            let declared = declared_bump(current, to);
            advice.push(UpgradeAdvice {
                from: current,
                to,
                verdict: classification.verdict,
                declared_bump: declared,
                agreement: classification.verdict <= declared,
            });
        }
        Ok(advice)
    }
}

/// What a version jump claims about its impact, read the way a consumer
/// reads it: any major change claims Major, else minor claims Minor, else
/// Patch.
pub fn declared_bump(from: SemVer, to: SemVer) -> ImpactLevel {
    if from.major != to.major {
        ImpactLevel::Major
    } else if from.minor != to.minor {
        ImpactLevel::Minor
    } else {
        ImpactLevel::Patch
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpgradeAdvice {
    pub from: SemVer,
    pub to: SemVer,
    pub verdict: ImpactLevel,
    pub declared_bump: ImpactLevel,
    pub agreement: bool,
}
