//! Scenario files.
//!
//! A scenario is a TOML document naming exactly one subject (`[chart]`,
//! `[map]`, `[immersion]` or `[family]`) plus the checks to run on it. See the
//! README for the full grammar.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, IntoDeserializer, MapAccess, Visitor};
use serde::{Deserialize, Deserializer};
use thiserror::Error;

use crate::expr::ParseError;

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed TOML or a field of the wrong shape. The message carries the
    /// line and column.
    #[error("{0}")]
    Syntax(String),

    #[error("{field}: {message}")]
    Field { field: String, message: String },

    #[error("{field}: unknown entry `{name}`")]
    UnknownEntry { field: String, name: String },

    #[error("{field}: {source}")]
    Expr {
        field: String,
        #[source]
        source: ParseError,
    },

    #[error("{field}: {source}")]
    Model {
        field: String,
        #[source]
        source: statvar_core::Error,
    },
}

impl ConfigError {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Field {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Attaches a field path to a core error, keeping unknown names distinct.
    pub(crate) fn model(field: impl Into<String>, source: statvar_core::Error) -> Self {
        let field = field.into();
        match source {
            statvar_core::Error::UnknownEntry(name) => ConfigError::UnknownEntry { field, name },
            source => ConfigError::Model { field, source },
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuadSpec {
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_panels")]
    pub panels: usize,
}

fn default_order() -> usize {
    16
}

fn default_panels() -> usize {
    8
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            order: default_order(),
            panels: default_panels(),
        }
    }
}

/// A chart, either `catalog = "<name>"` with `params`, or inline with
/// `domain`, `metric` and optionally `connection` (Levi-Civita when absent).
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub catalog: Option<String>,
    #[serde(default)]
    pub params: Params,
    pub name: Option<String>,
    pub domain: Option<BoxSpec>,
    /// `metric[i][j]`.
    pub metric: Option<Vec<Vec<String>>>,
    /// `connection[k][i][j] = Γ^k_ij`.
    pub connection: Option<Vec<Vec<Vec<String>>>>,
}

/// A map, either from the catalog or inline with `source`, `target` and
/// one component expression per target coordinate.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub catalog: Option<String>,
    #[serde(default)]
    pub params: Params,
    pub name: Option<String>,
    pub source: Option<ChartSpec>,
    pub target: Option<ChartSpec>,
    pub components: Option<Vec<String>>,
}

/// A graph immersion, from the catalog or inline as `graph` over `domain`.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ImmersionSpec {
    pub catalog: Option<String>,
    #[serde(default)]
    pub params: Params,
    pub name: Option<String>,
    pub graph: Option<String>,
    pub domain: Option<BoxSpec>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Mollifier,
    PolyWindow,
}

/// An additive family `u + tV`, from the catalog or inline. Inline section
/// components are multiplied by a `window` bump on `support`.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub catalog: Option<String>,
    #[serde(default)]
    pub params: Params,
    pub base: Option<MapSpec>,
    pub section: Option<Vec<String>>,
    pub support: Option<BoxSpec>,
    pub window: Option<Window>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Classify,
    Codazzi,
    Biharmonicity,
    FirstVariation,
    SecondVariation,
    OracleCompare,
    StabilityProbe,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::Classify => "classify",
            CheckKind::Codazzi => "codazzi",
            CheckKind::Biharmonicity => "biharmonicity",
            CheckKind::FirstVariation => "first_variation",
            CheckKind::SecondVariation => "second_variation",
            CheckKind::OracleCompare => "oracle_compare",
            CheckKind::StabilityProbe => "stability_probe",
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Source,
    Target,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Statistical,
    ConjugateSymmetric,
    ConstantSectional,
    Hessian,
    Chc,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    General,
    ConjugateSymmetric,
    Hessian,
    Chc,
    ChcConjugate,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Mollifier,
    PolyWindow,
}

/// Expected outcomes. Which keys apply depends on the check.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    pub structure: Option<Vec<Structure>>,
    pub chc: Option<f64>,
    pub sectional: Option<f64>,
    pub metric_sectional: Option<f64>,
    pub biharmonic: Option<bool>,
    pub stable: Option<bool>,
}

/// One check. In the file it is either a bare kind (`"codazzi"`) or a table
/// with `kind` and options.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub kind: CheckKind,
    /// Record name; defaults to the kind.
    pub label: Option<String>,
    /// Which chart `classify` and `codazzi` look at.
    pub on: Option<Side>,
    /// Sample points per axis for grid-based checks.
    pub grid: Option<usize>,
    #[serde(default)]
    pub expect: Expect,
    pub mode: Option<ModeName>,
    /// Constant for the `chc` and `chc_conjugate` modes.
    pub c: Option<f64>,
    pub probes: Option<usize>,
    pub profile: Option<Profile>,
    /// Exponents `μ` of kernel-shaped probes `t^μ · bump`.
    #[serde(default)]
    pub exponents: Vec<f64>,
}

impl CheckSpec {
    pub fn of(kind: CheckKind) -> Self {
        CheckSpec {
            kind,
            label: None,
            on: None,
            grid: None,
            expect: Expect::default(),
            mode: None,
            c: None,
            probes: None,
            profile: None,
            exponents: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        self.label.as_deref().unwrap_or(self.kind.as_str())
    }
}

/// Accepts a bare kind string or a table.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckEntry(pub CheckSpec);

impl<'de> Deserialize<'de> for CheckEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = CheckEntry;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a check kind or a table with `kind`")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<CheckEntry, E> {
                let kind = CheckKind::deserialize(s.into_deserializer())?;
                Ok(CheckEntry(CheckSpec::of(kind)))
            }

            fn visit_map<A: MapAccess<'de>>(self, m: A) -> Result<CheckEntry, A::Error> {
                CheckSpec::deserialize(de::value::MapAccessDeserializer::new(m)).map(CheckEntry)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: Option<String>,
    pub chart: Option<ChartSpec>,
    pub map: Option<MapSpec>,
    pub immersion: Option<ImmersionSpec>,
    pub family: Option<FamilySpec>,
    #[serde(default)]
    pub checks: Vec<CheckEntry>,
    pub omega: Option<BoxSpec>,
    #[serde(default)]
    pub quadrature: QuadSpec,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

/// Default tolerances by name.
pub const DEFAULT_TOLERANCES: [(&str, f64); 4] = [
    ("codazzi", 1e-8),
    ("classification", 1e-6),
    ("biharmonicity", 1e-5),
    ("oracle", 1e-3),
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub codazzi: f64,
    pub classification: f64,
    pub biharmonicity: f64,
    /// Relative gap between a formula and its finite-difference oracle.
    pub oracle: f64,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, toml::Table), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let raw: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        Ok((Self::from_toml(&text)?, raw))
    }

    pub fn checks(&self) -> impl Iterator<Item = &CheckSpec> {
        self.checks.iter().map(|c| &c.0)
    }

    /// Defaults overridden by `[tolerances]`. Unknown names and non-positive
    /// values are rejected.
    pub fn tolerances(&self) -> Result<Tolerances, ConfigError> {
        let mut t: BTreeMap<&str, f64> = DEFAULT_TOLERANCES.into_iter().collect();
        for (k, &v) in &self.tolerances {
            let Some(slot) = t.get_mut(k.as_str()) else {
                let known: Vec<_> = DEFAULT_TOLERANCES.iter().map(|p| p.0).collect();
                return Err(ConfigError::field(
                    format!("tolerances.{k}"),
                    format!("unknown tolerance (expected one of {})", known.join(", ")),
                ));
            };
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError::field(
                    format!("tolerances.{k}"),
                    format!("must be positive and finite, got {v}"),
                ));
            }
            *slot = v;
        }
        Ok(Tolerances {
            codazzi: t["codazzi"],
            classification: t["classification"],
            biharmonicity: t["biharmonicity"],
            oracle: t["oracle"],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_accept_strings_and_tables() {
        let s = Scenario::from_toml(
            r#"
            checks = ["codazzi", { kind = "classify", expect = { chc = 2.0 } }]
            [chart]
            catalog = "normal_distributions"
            "#,
        )
        .unwrap();
        let kinds: Vec<_> = s.checks().map(|c| c.kind).collect();
        assert_eq!(kinds, [CheckKind::Codazzi, CheckKind::Classify]);
        assert_eq!(s.checks().nth(1).unwrap().expect.chc, Some(2.0));
        assert_eq!(s.quadrature, QuadSpec::default());
        assert_eq!(s.seed, 0);
    }

    #[test]
    fn syntax_errors_name_the_line() {
        let e = Scenario::from_toml("seed = 1\nchecks = [\"codazi\"]\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("codazi"), "{msg}");
        let e = Scenario::from_toml("sed = 1\n").unwrap_err();
        assert!(e.to_string().contains("sed"), "{e}");
        let e = Scenario::from_toml("[chart]\ncatalog = 3\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn tolerances_default_and_validate() {
        let s = Scenario::from_toml("[tolerances]\noracle = 1e-2\n").unwrap();
        let t = s.tolerances().unwrap();
        assert_eq!((t.codazzi, t.classification, t.biharmonicity, t.oracle), (1e-8, 1e-6, 1e-5, 1e-2));
        let bad = Scenario::from_toml("[tolerances]\ncodazzi = -1.0\n").unwrap();
        let e = bad.tolerances().unwrap_err().to_string();
        assert!(e.starts_with("tolerances.codazzi"), "{e}");
        let unknown = Scenario::from_toml("[tolerances]\nfoo = 1.0\n").unwrap();
        assert!(unknown.tolerances().is_err());
    }
}
