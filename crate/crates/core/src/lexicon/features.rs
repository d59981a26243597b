//! Agreement feature bundles and their unification.
//!
//! A [`FeatureStructure`] is either the inconsistent element ⊥ or a flat term
//! with up to four features (`gen`, `num`, `pers`, `case`). Each defined
//! feature carries a non-empty [`ValueSet`]; an undefined feature places no
//! constraint under unification but extracts to ⊥.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::FormatError;

/// One of the four agreement/case features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Gen,
    Num,
    Pers,
    Case,
}

impl Feature {
    pub const ALL: [Feature; 4] = [Feature::Gen, Feature::Num, Feature::Pers, Feature::Case];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Gen => "gen",
            Feature::Num => "num",
            Feature::Pers => "pers",
            Feature::Case => "case",
        }
    }

    /// Atomic values of the feature, in bit order.
    pub fn domain(self) -> &'static [&'static str] {
        match self {
            Feature::Gen => &["masc", "fem", "neut"],
            Feature::Num => &["sg", "pl"],
            Feature::Pers => &["1", "2", "3"],
            Feature::Case => &["nom", "gen", "dat", "acc"],
        }
    }

    pub fn full(self) -> ValueSet {
        ValueSet((1u8 << self.domain().len()) - 1)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Feature {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gen" => Ok(Feature::Gen),
            "num" => Ok(Feature::Num),
            "pers" => Ok(Feature::Pers),
            "case" => Ok(Feature::Case),
            other => Err(FormatError::new(format!("unknown feature `{other}`"))),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A set of atomic values of one feature, stored as a bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ValueSet(u8);

impl ValueSet {
    pub const EMPTY: ValueSet = ValueSet(0);

    pub fn from_bits(bits: u8) -> Self {
        ValueSet(bits)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersect(self, other: ValueSet) -> ValueSet {
        ValueSet(self.0 & other.0)
    }

    pub fn union(self, other: ValueSet) -> ValueSet {
        ValueSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: ValueSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn contains(self, feature: Feature, value: &str) -> bool {
        feature
            .domain()
            .iter()
            .position(|v| *v == value)
            .is_some_and(|i| self.0 & (1 << i) != 0)
    }

    /// Parses `nom/acc` style lists for the given feature.
    pub fn parse(feature: Feature, text: &str) -> Result<ValueSet, FormatError> {
        let mut bits = 0u8;
        for part in text.split('/') {
            let part = part.trim();
            let idx = feature
                .domain()
                .iter()
                .position(|v| *v == part)
                .ok_or_else(|| FormatError::new(format!("`{part}` is not a value of {feature}")))?;
            bits |= 1 << idx;
        }
        if bits == 0 {
            return Err(FormatError::new(format!("empty value set for {feature}")));
        }
        Ok(ValueSet(bits))
    }

    pub fn names(self, feature: Feature) -> Vec<&'static str> {
        feature
            .domain()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.0 & (1 << i) != 0)
            .map(|(_, v)| *v)
            .collect()
    }

    pub fn render(self, feature: Feature) -> String {
        self.names(feature).join("/")
    }

    /// Every non-empty value set of a feature.
    pub fn all_nonempty(feature: Feature) -> impl Iterator<Item = ValueSet> {
        (1..=feature.full().0).map(ValueSet)
    }
}

/// Flat agreement term or ⊥.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureStructure {
    Bottom,
    Term([Option<ValueSet>; 4]),
}

impl Default for FeatureStructure {
    fn default() -> Self {
        FeatureStructure::Term([None; 4])
    }
}

impl FeatureStructure {
    /// The term with no defined features.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Sets `feature` to `values`; an empty set collapses the whole term to ⊥.
    pub fn with(self, feature: Feature, values: ValueSet) -> Self {
        match self {
            FeatureStructure::Bottom => FeatureStructure::Bottom,
            _ if values.is_empty() => FeatureStructure::Bottom,
            FeatureStructure::Term(mut slots) => {
                slots[feature.index()] = Some(values);
                FeatureStructure::Term(slots)
            }
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, FeatureStructure::Bottom)
    }

    /// `u \ l`: the value of `feature`, or `None` (⊥) when the term is ⊥ or
    /// the feature is undefined.
    pub fn extract(&self, feature: Feature) -> Option<ValueSet> {
        match self {
            FeatureStructure::Bottom => None,
            FeatureStructure::Term(slots) => slots[feature.index()],
        }
    }

    /// `a ⊔ b`.
    pub fn unify(&self, other: &FeatureStructure) -> FeatureStructure {
        let (FeatureStructure::Term(a), FeatureStructure::Term(b)) = (self, other) else {
            return FeatureStructure::Bottom;
        };
        let mut out = [None; 4];
        for i in 0..4 {
            out[i] = match (a[i], b[i]) {
                (Some(x), Some(y)) => {
                    let meet = x.intersect(y);
                    if meet.is_empty() {
                        return FeatureStructure::Bottom;
                    }
                    Some(meet)
                }
                (Some(x), None) | (None, Some(x)) => Some(x),
                (None, None) => None,
            };
        }
        FeatureStructure::Term(out)
    }

    /// Whether the extracted values of `feature` unify to something other
    /// than ⊥. An undefined feature on either side fails.
    pub fn agrees_on(&self, other: &FeatureStructure, feature: Feature) -> bool {
        unify_values(self.extract(feature), other.extract(feature)).is_some()
    }
}

/// Unification of two extracted values, where `None` is ⊥.
pub fn unify_values(a: Option<ValueSet>, b: Option<ValueSet>) -> Option<ValueSet> {
    let meet = a?.intersect(b?);
    (!meet.is_empty()).then_some(meet)
}

impl fmt::Display for FeatureStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureStructure::Bottom => f.write_str("⊥"),
            FeatureStructure::Term(slots) => {
                let parts: Vec<String> = Feature::ALL
                    .iter()
                    .filter_map(|feat| {
                        slots[feat.index()].map(|v| format!("{}={}", feat, v.render(*feat)))
                    })
                    .collect();
                if parts.is_empty() {
                    f.write_str("_")
                } else {
                    f.write_str(&parts.join(","))
                }
            }
        }
    }
}

impl FromStr for FeatureStructure {
    type Err = FormatError;

    /// Parses `gen=fem,num=sg,case=nom/acc`; `_` is the empty term and `⊥`
    /// (or `bottom`) the inconsistent element.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "_" | "" => return Ok(FeatureStructure::empty()),
            "⊥" | "bottom" => return Ok(FeatureStructure::Bottom),
            _ => {}
        }
        let mut fs = FeatureStructure::empty();
        let mut seen = [false; 4];
        for item in s.split(',') {
            let (name, values) = item
                .split_once('=')
                .ok_or_else(|| FormatError::new(format!("expected feature=value, got `{item}`")))?;
            let feature: Feature = name.trim().parse()?;
            if std::mem::replace(&mut seen[feature.index()], true) {
                return Err(FormatError::new(format!("feature {feature} given twice")));
            }
            fs = fs.with(feature, ValueSet::parse(feature, values)?);
        }
        Ok(fs)
    }
}
