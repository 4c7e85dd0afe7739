//! Domain types for chart-description evaluation.
//!
//! The unit of all matching and scoring is the [`DataFact`]: an atomic
//! analytical insight expressed as a 6-tuple of type, parameters, measures,
//! context, breakdowns, and focus. Each fact type belongs to exactly one of
//! four semantic levels (L1 chart construction, L2 statistical summaries,
//! L3 perceptual and cognitive observations, L4 domain-specific insights).
//!
//! `N/A` is a distinguished sentinel (JSON `null`), not an empty list or
//! string, so "inapplicable" and "present but empty" stay distinguishable
//! for weight reallocation during matching.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Directional states allowed in `trend` fact parameters, in no particular
/// order; the parameter *sequence* of a trend fact is order-semantic.
pub const TREND_STATES: [&str; 6] = [
    "Increase",
    "Decrease",
    "Peak",
    "Valley",
    "Stable",
    "Fluctuate",
];

/// Relation directions for `comparison` and `correlation` facts.
pub const RELATION_DIRECTIONS: [&str; 5] = ["Positive", "Negative", "Greater", "Less", "Equal"];

/// Degree modifiers for `distribution` facts, ordered from weakest to
/// strongest; adjacency in this list earns partial credit during matching.
pub const DISTRIBUTION_DEGREES: [&str; 3] = ["Slightly", "Moderately", "Highly"];

/// Distribution states for `distribution` facts.
pub const DISTRIBUTION_STATES: [&str; 5] =
    ["Clustered", "Dispersed", "Skewed", "Uniform", "Bimodal"];

/// Polarity tokens recognized in `extrema` fact parameters.
pub const EXTREMA_POLARITIES: [&str; 2] = ["Maximum", "Minimum"];

/// Position token for "ranked last" in `rank` fact parameters.
pub const RANK_LAST: &str = "Last";

/// Closed taxonomy of insight categories. Parsing any other string is an
/// error; extending the taxonomy is a code change, not configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FactType {
    #[serde(rename = "chart-construction")]
    ChartConstruction,
    #[serde(rename = "value")]
    Value,
    #[serde(rename = "distribution")]
    Distribution,
    #[serde(rename = "extrema")]
    Extrema,
    #[serde(rename = "range")]
    Range,
    #[serde(rename = "outlier")]
    Outlier,
    #[serde(rename = "proportion")]
    Proportion,
    #[serde(rename = "comparison")]
    Comparison,
    #[serde(rename = "trend")]
    Trend,
    #[serde(rename = "correlation")]
    Correlation,
    #[serde(rename = "rank")]
    Rank,
    #[serde(rename = "hierarchy")]
    Hierarchy,
    #[serde(rename = "domain-specific")]
    DomainSpecific,
}

impl FactType {
    pub const ALL: [FactType; 13] = [
        FactType::ChartConstruction,
        FactType::Value,
        FactType::Distribution,
        FactType::Extrema,
        FactType::Range,
        FactType::Outlier,
        FactType::Proportion,
        FactType::Comparison,
        FactType::Trend,
        FactType::Correlation,
        FactType::Rank,
        FactType::Hierarchy,
        FactType::DomainSpecific,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FactType::ChartConstruction => "chart-construction",
            FactType::Value => "value",
            FactType::Distribution => "distribution",
            FactType::Extrema => "extrema",
            FactType::Range => "range",
            FactType::Outlier => "outlier",
            FactType::Proportion => "proportion",
            FactType::Comparison => "comparison",
            FactType::Trend => "trend",
            FactType::Correlation => "correlation",
            FactType::Rank => "rank",
            FactType::Hierarchy => "hierarchy",
            FactType::DomainSpecific => "domain-specific",
        }
    }

    /// The semantic level a fact type always belongs to: chart construction
    /// is L1; value, distribution, extrema, outlier, proportion, and range
    /// are L2; comparison, trend, correlation, rank, and hierarchy are L3;
    /// domain-specific is L4.
    pub fn semantic_level(&self) -> SemanticLevel {
        match self {
            FactType::ChartConstruction => SemanticLevel::L1,
            FactType::Value
            | FactType::Distribution
            | FactType::Extrema
            | FactType::Outlier
            | FactType::Proportion
            | FactType::Range => SemanticLevel::L2,
            FactType::Comparison
            | FactType::Trend
            | FactType::Correlation
            | FactType::Rank
            | FactType::Hierarchy => SemanticLevel::L3,
            FactType::DomainSpecific => SemanticLevel::L4,
        }
    }

    /// Types whose parameters are numeric quantities and/or entity names,
    /// compared under the numeric-tolerance rule.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            FactType::Value
                | FactType::Rank
                | FactType::Proportion
                | FactType::Range
                | FactType::Extrema
        )
    }

    /// Whether parameter order carries meaning (trend state sequences,
    /// comparison/correlation entity pairs). Order-insensitive parameter
    /// lists are sorted during canonical serialization.
    pub fn parameters_order_semantic(&self) -> bool {
        matches!(
            self,
            FactType::Trend | FactType::Comparison | FactType::Correlation
        )
    }
}

impl fmt::Display for FactType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FactType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FactType::ALL
            .iter()
            .find(|t| t.as_str() == s)
            .copied()
            .ok_or_else(|| Error::validation("type", format!("unknown fact type `{s}`")))
    }
}

/// Total order L1 < L2 < L3 < L4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SemanticLevel {
    L1,
    L2,
    L3,
    L4,
}

impl SemanticLevel {
    pub const ALL: [SemanticLevel; 4] = [
        SemanticLevel::L1,
        SemanticLevel::L2,
        SemanticLevel::L3,
        SemanticLevel::L4,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SemanticLevel::L1 => "L1",
            SemanticLevel::L2 => "L2",
            SemanticLevel::L3 => "L3",
            SemanticLevel::L4 => "L4",
        }
    }

    fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for SemanticLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps every [`FactType`] to its [`SemanticLevel`]; total on the taxonomy.
pub fn semantic_level_of(t: FactType) -> SemanticLevel {
    t.semantic_level()
}

/// A single parameter of a data fact: either a controlled-vocabulary token
/// (also used for numeric quantities and entity names, kept as strings) or
/// a structured (degree, state) pair for distribution facts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum Param {
    Token(String),
    Pair(String, String),
}

impl Param {
    pub fn token(s: impl Into<String>) -> Self {
        Param::Token(s.into())
    }

    pub fn pair(degree: impl Into<String>, state: impl Into<String>) -> Self {
        Param::Pair(degree.into(), state.into())
    }

    pub fn as_token(&self) -> Option<&str> {
        match self {
            Param::Token(s) => Some(s),
            Param::Pair(..) => None,
        }
    }

    /// Numeric reading of a token parameter, when it parses as a number.
    pub fn as_number(&self) -> Option<f64> {
        self.as_token().and_then(|s| s.trim().parse::<f64>().ok())
    }

    fn canonical_json(&self) -> String {
        match self {
            Param::Token(s) => json_string(s),
            Param::Pair(a, b) => format!("[{},{}]", json_string(a), json_string(b)),
        }
    }
}

impl<'de> Deserialize<'de> for Param {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Scalar {
            Text(String),
            Number(serde_json::Number),
        }
        impl Scalar {
            fn into_string(self) -> String {
                match self {
                    Scalar::Text(s) => s,
                    Scalar::Number(n) => n.to_string(),
                }
            }
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            One(Scalar),
            Many(Vec<Scalar>),
        }
        match Raw::deserialize(deserializer)? {
            Raw::One(s) => Ok(Param::Token(s.into_string())),
            Raw::Many(items) => {
                if items.len() != 2 {
                    return Err(D::Error::custom(
                        "structured parameter must be a [degree, state] pair",
                    ));
                }
                let mut it = items.into_iter();
                Ok(Param::Pair(
                    it.next().unwrap().into_string(),
                    it.next().unwrap().into_string(),
                ))
            }
        }
    }
}

/// Atomic insight as a validated 6-tuple. Construct with [`DataFact::new`];
/// the semantic level is always derived from the type. Equality and hashing
/// follow the canonical serialization, so order of non-semantic lists does
/// not distinguish facts.
#[derive(Debug, Clone, Serialize)]
pub struct DataFact {
    #[serde(rename = "type")]
    fact_type: FactType,
    parameters: Option<Vec<Param>>,
    measures: Option<Vec<String>>,
    context: Option<String>,
    breakdowns: Option<Vec<String>>,
    focus: Option<Vec<String>>,
    level: SemanticLevel,
}

impl DataFact {
    pub fn new(
        fact_type: FactType,
        parameters: Option<Vec<Param>>,
        measures: Option<Vec<String>>,
        context: Option<String>,
        breakdowns: Option<Vec<String>>,
        focus: Option<Vec<String>>,
    ) -> Result<Self> {
        let parameters = validate_parameters(fact_type, parameters)?;
        Ok(DataFact {
            fact_type,
            parameters,
            measures,
            context,
            breakdowns,
            focus,
            level: fact_type.semantic_level(),
        })
    }

    pub fn fact_type(&self) -> FactType {
        self.fact_type
    }

    pub fn level(&self) -> SemanticLevel {
        self.level
    }

    pub fn parameters(&self) -> Option<&[Param]> {
        self.parameters.as_deref()
    }

    pub fn measures(&self) -> Option<&[String]> {
        self.measures.as_deref()
    }

    pub fn context(&self) -> Option<&str> {
        self.context.as_deref()
    }

    pub fn breakdowns(&self) -> Option<&[String]> {
        self.breakdowns.as_deref()
    }

    pub fn focus(&self) -> Option<&[String]> {
        self.focus.as_deref()
    }

    /// Rebuilds this fact under a different type, keeping every other field.
    /// Used by cross-type conversion; revalidates the parameter vocabulary.
    pub fn with_type_and_parameters(
        &self,
        fact_type: FactType,
        parameters: Option<Vec<Param>>,
    ) -> Result<Self> {
        DataFact::new(
            fact_type,
            parameters,
            self.measures.clone(),
            self.context.clone(),
            self.breakdowns.clone(),
            self.focus.clone(),
        )
    }

    /// Byte-deterministic serialization: fields in fixed order, `N/A` as
    /// `null`, list elements sorted wherever order is not semantic.
    /// Two facts are equal iff their canonical serializations are equal;
    /// the string doubles as a tie-break key and a cache key.
    pub fn canonical_serialize(&self) -> String {
        let mut out = String::with_capacity(128);
        out.push_str("{\"type\":");
        out.push_str(&json_string(self.fact_type.as_str()));
        out.push_str(",\"parameters\":");
        match &self.parameters {
            None => out.push_str("null"),
            Some(params) => {
                let mut encoded: Vec<String> =
                    params.iter().map(|p| p.canonical_json()).collect();
                if !self.fact_type.parameters_order_semantic() {
                    encoded.sort();
                }
                out.push('[');
                out.push_str(&encoded.join(","));
                out.push(']');
            }
        }
        for (name, field) in [
            ("measures", &self.measures),
            ("context", &self.context.clone().map(|c| vec![c])),
            ("breakdowns", &self.breakdowns),
            ("focus", &self.focus),
        ] {
            out.push(',');
            out.push_str(&json_string(name));
            out.push(':');
            match field {
                None => out.push_str("null"),
                Some(items) if name == "context" => out.push_str(&json_string(&items[0])),
                Some(items) => {
                    let mut encoded: Vec<String> =
                        items.iter().map(|s| json_string(s)).collect();
                    encoded.sort();
                    out.push('[');
                    out.push_str(&encoded.join(","));
                    out.push(']');
                }
            }
        }
        out.push('}');
        out
    }
}

impl PartialEq for DataFact {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_serialize() == other.canonical_serialize()
    }
}

impl Eq for DataFact {}

impl std::hash::Hash for DataFact {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.canonical_serialize().hash(state);
    }
}

impl<'de> Deserialize<'de> for DataFact {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum StringOrList {
            One(String),
            Many(Vec<String>),
        }
        impl StringOrList {
            fn into_vec(self) -> Vec<String> {
                match self {
                    StringOrList::One(s) => vec![s],
                    StringOrList::Many(v) => v,
                }
            }
        }
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "type")]
            fact_type: FactType,
            #[serde(default)]
            parameters: Option<Vec<Param>>,
            #[serde(default)]
            measures: Option<StringOrList>,
            #[serde(default)]
            context: Option<String>,
            #[serde(default)]
            breakdowns: Option<StringOrList>,
            #[serde(default)]
            focus: Option<StringOrList>,
            #[serde(default)]
            level: Option<SemanticLevel>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if let Some(level) = raw.level {
            if level != raw.fact_type.semantic_level() {
                return Err(D::Error::custom(format!(
                    "level {} does not match the {} fact type (expected {})",
                    level,
                    raw.fact_type,
                    raw.fact_type.semantic_level()
                )));
            }
        }
        DataFact::new(
            raw.fact_type,
            raw.parameters,
            raw.measures.map(StringOrList::into_vec),
            raw.context,
            raw.breakdowns.map(StringOrList::into_vec),
            raw.focus.map(StringOrList::into_vec),
        )
        .map_err(D::Error::custom)
    }
}

fn canon_vocab(token: &str, vocab: &[&'static str]) -> Option<&'static str> {
    let t = token.trim();
    vocab.iter().find(|v| v.eq_ignore_ascii_case(t)).copied()
}

fn validate_parameters(
    fact_type: FactType,
    parameters: Option<Vec<Param>>,
) -> Result<Option<Vec<Param>>> {
    let Some(params) = parameters else {
        return Ok(None);
    };
    let err = |message: String| Error::validation("parameters", message);
    let mut out = Vec::with_capacity(params.len());
    match fact_type {
        FactType::Trend => {
            for p in &params {
                let token = p.as_token().ok_or_else(|| {
                    err("trend parameters must be directional state tokens".into())
                })?;
                let state = canon_vocab(token, &TREND_STATES).ok_or_else(|| {
                    err(format!(
                        "`{token}` is not a trend state (expected one of {})",
                        TREND_STATES.join(", ")
                    ))
                })?;
                out.push(Param::token(state));
            }
        }
        FactType::Comparison | FactType::Correlation => {
            if params.len() != 3 {
                return Err(err(format!(
                    "{fact_type} parameters must be [direction, entity, entity], got {} elements",
                    params.len()
                )));
            }
            let direction = params[0]
                .as_token()
                .and_then(|t| canon_vocab(t, &RELATION_DIRECTIONS))
                .ok_or_else(|| {
                    err(format!(
                        "first {fact_type} parameter must be a relation direction (one of {})",
                        RELATION_DIRECTIONS.join(", ")
                    ))
                })?;
            out.push(Param::token(direction));
            for p in &params[1..] {
                let entity = p
                    .as_token()
                    .ok_or_else(|| err(format!("{fact_type} entities must be plain tokens")))?;
                out.push(Param::token(entity));
            }
        }
        FactType::Distribution => {
            for p in &params {
                let Param::Pair(degree, state) = p else {
                    return Err(err(
                        "distribution parameters must be [degree, state] pairs".into(),
                    ));
                };
                let degree = canon_vocab(degree, &DISTRIBUTION_DEGREES).ok_or_else(|| {
                    err(format!(
                        "`{degree}` is not a distribution degree (expected one of {})",
                        DISTRIBUTION_DEGREES.join(", ")
                    ))
                })?;
                let state = canon_vocab(state, &DISTRIBUTION_STATES).ok_or_else(|| {
                    err(format!(
                        "`{state}` is not a distribution state (expected one of {})",
                        DISTRIBUTION_STATES.join(", ")
                    ))
                })?;
                out.push(Param::pair(degree, state));
            }
        }
        _ => {
            for p in &params {
                let token = p.as_token().ok_or_else(|| {
                    err(format!(
                        "structured pairs are only valid for distribution facts, not {fact_type}"
                    ))
                })?;
                // Canonicalize the tokens that matching treats as keywords.
                if fact_type == FactType::Extrema {
                    if let Some(polarity) = canon_vocab(token, &EXTREMA_POLARITIES) {
                        out.push(Param::token(polarity));
                        continue;
                    }
                }
                if fact_type == FactType::Rank && token.trim().eq_ignore_ascii_case(RANK_LAST) {
                    out.push(Param::token(RANK_LAST));
                    continue;
                }
                out.push(Param::token(token));
            }
        }
    }
    Ok(Some(out))
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization is infallible")
}

/// Canonical variable names extracted from a chart, used to normalize fact
/// field tokens before comparison.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChartSchema {
    #[serde(default)]
    pub axis_labels: Vec<String>,
    #[serde(default)]
    pub legend_entries: Vec<String>,
    #[serde(default)]
    pub categories: Vec<String>,
    #[serde(default)]
    pub title: Option<String>,
}

impl ChartSchema {
    /// All variable-name entries (axes, legends, categories); the title is
    /// not a variable name and is excluded from normalization.
    pub fn canonical_entries(&self) -> impl Iterator<Item = &str> {
        self.axis_labels
            .iter()
            .chain(self.legend_entries.iter())
            .chain(self.categories.iter())
            .map(String::as_str)
    }

    /// Drops empty entries and case-insensitive duplicates, keeping the
    /// first occurrence of each.
    pub fn deduplicated(self) -> ChartSchema {
        fn dedup(list: Vec<String>) -> Vec<String> {
            let mut seen = std::collections::HashSet::new();
            list.into_iter()
                .filter(|s| !s.trim().is_empty())
                .filter(|s| seen.insert(s.trim().to_lowercase()))
                .collect()
        }
        ChartSchema {
            axis_labels: dedup(self.axis_labels),
            legend_entries: dedup(self.legend_entries),
            categories: dedup(self.categories),
            title: self.title.filter(|t| !t.trim().is_empty()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.axis_labels.is_empty() && self.legend_entries.is_empty() && self.categories.is_empty()
    }
}

/// A value per semantic level. Serializes as a `{"L1": .., "L4": ..}` map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelMap<T>(pub [T; 4]);

impl<T: Copy> LevelMap<T> {
    pub fn from_fn(mut f: impl FnMut(SemanticLevel) -> T) -> Self {
        LevelMap(SemanticLevel::ALL.map(&mut f))
    }

    pub fn get(&self, level: SemanticLevel) -> T {
        self.0[level.index()]
    }

    pub fn set(&mut self, level: SemanticLevel, value: T) {
        self.0[level.index()] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (SemanticLevel, T)> + '_ {
        SemanticLevel::ALL.iter().map(|&l| (l, self.get(l)))
    }
}

impl<T: Copy + Serialize> Serialize for LevelMap<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(4))?;
        for (level, value) in self.iter() {
            map.serialize_entry(level.as_str(), &value)?;
        }
        map.end()
    }
}

impl<'de, T: Copy + Default + Deserialize<'de>> Deserialize<'de> for LevelMap<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw: HashMap<SemanticLevel, T> = HashMap::deserialize(deserializer)?;
        let mut out = LevelMap([T::default(); 4]);
        for (level, value) in raw {
            out.set(level, value);
        }
        Ok(out)
    }
}

/// Per-level weighting state for the informativeness metric: base weights
/// `b_l`, reference level proportions `p_l`, and the normalized weights
/// `w_l = b_l exp(p_l) / sum_k b_k exp(p_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelWeights {
    pub base: LevelMap<f64>,
    pub proportions: LevelMap<f64>,
    pub normalized: LevelMap<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trend_fact(states: &[&str]) -> DataFact {
        DataFact::new(
            FactType::Trend,
            Some(states.iter().map(Param::token).collect()),
            Some(vec!["accuracy".into()]),
            None,
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn level_mapping_is_total_and_matches_taxonomy() {
        use FactType::*;
        use SemanticLevel::*;
        let expected = [
            (ChartConstruction, L1),
            (Value, L2),
            (Distribution, L2),
            (Extrema, L2),
            (Outlier, L2),
            (Proportion, L2),
            (Range, L2),
            (Comparison, L3),
            (Trend, L3),
            (Correlation, L3),
            (Rank, L3),
            (Hierarchy, L3),
            (DomainSpecific, L4),
        ];
        assert_eq!(expected.len(), FactType::ALL.len());
        for (t, level) in expected {
            assert_eq!(semantic_level_of(t), level, "{t}");
        }
    }

    #[test]
    fn fact_type_parses_taxonomy_and_rejects_others() {
        for t in FactType::ALL {
            assert_eq!(t.as_str().parse::<FactType>().unwrap(), t);
        }
        assert!("anomaly".parse::<FactType>().is_err());
        assert!("Trend".parse::<FactType>().is_err());
    }

    #[test]
    fn canonical_serialization_sorts_non_semantic_lists() {
        let a = DataFact::new(
            FactType::Value,
            Some(vec![Param::token("0.91")]),
            Some(vec!["f1".into(), "accuracy".into()]),
            Some("validation split".into()),
            None,
            None,
        )
        .unwrap();
        let b = DataFact::new(
            FactType::Value,
            Some(vec![Param::token("0.91")]),
            Some(vec!["accuracy".into(), "f1".into()]),
            Some("validation split".into()),
            None,
            None,
        )
        .unwrap();
        assert_eq!(a.canonical_serialize(), b.canonical_serialize());
        assert_eq!(a, b);
    }

    #[test]
    fn canonical_serialization_preserves_trend_order() {
        let a = trend_fact(&["Increase", "Decrease"]);
        let b = trend_fact(&["Decrease", "Increase"]);
        assert_ne!(a.canonical_serialize(), b.canonical_serialize());
        assert_ne!(a, b);
        assert_eq!(a, trend_fact(&["Increase", "Decrease"]));
    }

    #[test]
    fn na_and_empty_list_are_distinct() {
        let na = DataFact::new(FactType::Value, Some(vec![]), None, None, None, None).unwrap();
        let empty =
            DataFact::new(FactType::Value, Some(vec![]), Some(vec![]), None, None, None).unwrap();
        assert_ne!(na.canonical_serialize(), empty.canonical_serialize());
    }

    #[test]
    fn vocabulary_violations_name_the_field() {
        let bad = DataFact::new(
            FactType::Trend,
            Some(vec![Param::token("Sideways")]),
            None,
            None,
            None,
            None,
        );
        match bad {
            Err(Error::Validation { field, message }) => {
                assert_eq!(field, "parameters");
                assert!(message.contains("Sideways"));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
        assert!(DataFact::new(
            FactType::Comparison,
            Some(vec![Param::token("Greater"), Param::token("A")]),
            None,
            None,
            None,
            None,
        )
        .is_err());
        assert!(DataFact::new(
            FactType::Distribution,
            Some(vec![Param::token("Highly Clustered")]),
            None,
            None,
            None,
            None,
        )
        .is_err());
    }

    #[test]
    fn vocabulary_tokens_are_canonicalized() {
        let f = trend_fact(&["increase", "PEAK"]);
        assert_eq!(
            f.parameters().unwrap(),
            &[Param::token("Increase"), Param::token("Peak")]
        );
    }

    #[test]
    fn json_round_trip_uses_null_for_na() {
        let f = DataFact::new(
            FactType::Distribution,
            Some(vec![Param::pair("Highly", "Clustered")]),
            Some(vec!["density".into()]),
            None,
            None,
            None,
        )
        .unwrap();
        let json = serde_json::to_value(&f).unwrap();
        assert_eq!(json["type"], "distribution");
        assert_eq!(json["context"], serde_json::Value::Null);
        assert_eq!(json["parameters"][0][0], "Highly");
        assert_eq!(json["level"], "L2");
        let back: DataFact = serde_json::from_value(json).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn deserialization_accepts_numbers_and_derives_level() {
        let f: DataFact = serde_json::from_str(
            r#"{"type":"value","parameters":[0.92,"modelA"],"measures":"accuracy"}"#,
        )
        .unwrap();
        assert_eq!(f.level(), SemanticLevel::L2);
        assert_eq!(f.parameters().unwrap()[0], Param::token("0.92"));
        assert_eq!(f.measures().unwrap(), &["accuracy".to_string()]);

        let wrong_level: std::result::Result<DataFact, _> =
            serde_json::from_str(r#"{"type":"value","level":"L3"}"#);
        assert!(wrong_level.is_err());
    }

    #[test]
    fn schema_dedup_is_case_insensitive() {
        let schema = ChartSchema {
            axis_labels: vec!["Epoch".into(), "Accuracy".into()],
            legend_entries: vec!["mAP".into(), "map".into(), "  ".into()],
            categories: vec![],
            title: None,
        }
        .deduplicated();
        assert_eq!(schema.legend_entries, vec!["mAP".to_string()]);
        assert_eq!(schema.canonical_entries().count(), 3);
    }
}
