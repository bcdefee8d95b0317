//! Version triples, requirement matching, and the change-impact lattice.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VersionError {
    #[error("missing {segment} segment in `{input}`")]
    MissingSegment {
        segment: &'static str,
        input: String,
    },
    #[error("invalid {segment} segment `{text}` in `{input}`")]
    InvalidSegment {
        segment: &'static str,
        text: String,
        input: String,
    },
    #[error("trailing `{text}` after patch segment in `{input}`")]
    TrailingInput { text: String, input: String },
    #[error("unrecognized version requirement `{0}`")]
    MalformedReq(String),
    #[error("requirement lower bound {lower} is not below upper bound {upper}")]
    EmptyRange { lower: SemVer, upper: SemVer },
}

/// A `major.minor.patch` version triple, ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SemVer {
    pub major: u64,
    pub minor: u64,
    pub patch: u64,
}

impl SemVer {
    pub fn new(major: u64, minor: u64, patch: u64) -> Self {
        SemVer {
            major,
            minor,
            patch,
        }
    }
}

impl fmt::Display for SemVer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.major, self.minor, self.patch)
    }
}

const SEGMENTS: [&str; 3] = ["major", "minor", "patch"];

fn parse_segment(text: &str, segment: &'static str, input: &str) -> Result<u64, VersionError> {
    // u64::from_str accepts a leading '+', so validate digits explicitly.
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(VersionError::InvalidSegment {
            segment,
            text: text.to_string(),
            input: input.to_string(),
        });
    }
    text.parse().map_err(|_| VersionError::InvalidSegment {
        segment,
        text: text.to_string(),
        input: input.to_string(),
    })
}

impl FromStr for SemVer {
    type Err = VersionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('.');
        let mut values = [0u64; 3];
        for (i, segment) in SEGMENTS.iter().enumerate() {
            let part = parts.next().ok_or(VersionError::MissingSegment {
                segment,
                input: s.to_string(),
            })?;
            values[i] = parse_segment(part, segment, s)?;
        }
        if let Some(rest) = parts.next() {
            return Err(VersionError::TrailingInput {
                text: rest.to_string(),
                input: s.to_string(),
            });
        }
        Ok(SemVer::new(values[0], values[1], values[2]))
    }
}

impl Serialize for SemVer {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SemVer {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(D::Error::custom)
    }
}

/// A version requirement in one of four textual forms: an exact triple
/// `1.2.3`, a patch wildcard `1.2.*`, a minor wildcard `1.*`, or a
/// half-open range `>=1.0.0 <2.0.0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VersionReq {
    Exact(SemVer),
    WildcardPatch { major: u64, minor: u64 },
    WildcardMinor { major: u64 },
    Range { lower: SemVer, upper: SemVer },
}

impl VersionReq {
    /// Builds a half-open `[lower, upper)` range, rejecting empty ranges.
    pub fn range(lower: SemVer, upper: SemVer) -> Result<Self, VersionError> {
        if lower < upper {
            Ok(VersionReq::Range { lower, upper })
        } else {
            Err(VersionError::EmptyRange { lower, upper })
        }
    }

    pub fn matches(&self, v: SemVer) -> bool {
        match *self {
            VersionReq::Exact(exact) => v == exact,
            VersionReq::WildcardPatch { major, minor } => v.major == major && v.minor == minor,
            VersionReq::WildcardMinor { major } => v.major == major,
            VersionReq::Range { lower, upper } => lower <= v && v < upper,
        }
    }
}

impl fmt::Display for VersionReq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VersionReq::Exact(v) => write!(f, "{v}"),
            VersionReq::WildcardPatch { major, minor } => write!(f, "{major}.{minor}.*"),
            VersionReq::WildcardMinor { major } => write!(f, "{major}.*"),
            VersionReq::Range { lower, upper } => write!(f, ">={lower} <{upper}"),
        }
    }
}

impl FromStr for VersionReq {
    type Err = VersionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix(">=") {
            let mut parts = rest.trim_start().splitn(2, char::is_whitespace);
            let lower_text = parts.next().unwrap_or("");
            let upper_text = parts
                .next()
                .map(str::trim_start)
                .and_then(|t| t.strip_prefix('<'))
                .ok_or_else(|| VersionError::MalformedReq(s.to_string()))?;
            let lower = lower_text.parse()?;
            let upper = upper_text.parse()?;
            return VersionReq::range(lower, upper);
        }
        if let Some(prefix) = s.strip_suffix(".*") {
            let numbers: Vec<&str> = prefix.split('.').collect();
            return match numbers.as_slice() {
                [major] => Ok(VersionReq::WildcardMinor {
                    major: parse_segment(major, "major", s)?,
                }),
                [major, minor] => Ok(VersionReq::WildcardPatch {
                    major: parse_segment(major, "major", s)?,
                    minor: parse_segment(minor, "minor", s)?,
                }),
                _ => Err(VersionError::MalformedReq(s.to_string())),
            };
        }
        Ok(VersionReq::Exact(s.parse()?))
    }
}

/// How far-reaching a change is. The variants form a lattice ordered
/// `None < Patch < Minor < Major`; `join` is the least upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ImpactLevel {
    None,
    Patch,
    Minor,
    Major,
}

impl ImpactLevel {
    pub fn join(self, other: ImpactLevel) -> ImpactLevel {
        self.max(other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ImpactLevel::None => "none",
            ImpactLevel::Patch => "patch",
            ImpactLevel::Minor => "minor",
            ImpactLevel::Major => "major",
        }
    }
}

impl fmt::Display for ImpactLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ImpactLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(ImpactLevel::None),
            "patch" => Ok(ImpactLevel::Patch),
            "minor" => Ok(ImpactLevel::Minor),
            "major" => Ok(ImpactLevel::Major),
            other => Err(format!("unknown impact level `{other}`")),
        }
    }
}

impl Serialize for ImpactLevel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ImpactLevel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(D::Error::custom)
    }
}

/// The smallest version strictly above `old` that complies with `level`,
/// or `old` itself when the level is `None`.
pub fn bump(old: SemVer, level: ImpactLevel) -> SemVer {
    match level {
        ImpactLevel::None => old,
        ImpactLevel::Patch => SemVer::new(old.major, old.minor, old.patch + 1),
        ImpactLevel::Minor => SemVer::new(old.major, old.minor + 1, 0),
        ImpactLevel::Major => SemVer::new(old.major + 1, 0, 0),
    }
}

/// Least upper bound of a collection of levels; `None` for an empty one.
pub fn join_levels<I: IntoIterator<Item = ImpactLevel>>(levels: I) -> ImpactLevel {
    levels
        .into_iter()
        .fold(ImpactLevel::None, ImpactLevel::join)
}
