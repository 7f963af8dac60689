//! The ten-value taxonomy and binary label vectors.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One of the ten research values tracked by the toolkit.
///
/// The declaration order here is the fixed taxonomy order used everywhere a
/// stable ordering matters (file headers, matrix axes, report columns).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResearchValue {
    Performance,
    Novelty,
    Efficiency,
    Generalizability,
    Openness,
    Simplicity,
    Understanding,
    Integrity,
    Society,
    Usability,
}

impl ResearchValue {
    /// All ten values in fixed taxonomy order.
    pub const ALL: [ResearchValue; 10] = [
        ResearchValue::Performance,
        ResearchValue::Novelty,
        ResearchValue::Efficiency,
        ResearchValue::Generalizability,
        ResearchValue::Openness,
        ResearchValue::Simplicity,
        ResearchValue::Understanding,
        ResearchValue::Integrity,
        ResearchValue::Society,
        ResearchValue::Usability,
    ];

    pub const COUNT: usize = 10;

    /// Position in the fixed taxonomy order (0..10).
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ResearchValue> {
        Self::ALL.get(i).copied()
    }

    /// Stable lowercase identifier used in files and CLI flags.
    pub fn id(self) -> &'static str {
        match self {
            ResearchValue::Performance => "performance",
            ResearchValue::Novelty => "novelty",
            ResearchValue::Efficiency => "efficiency",
            ResearchValue::Generalizability => "generalizability",
            ResearchValue::Openness => "openness",
            ResearchValue::Simplicity => "simplicity",
            ResearchValue::Understanding => "understanding",
            ResearchValue::Integrity => "integrity",
            ResearchValue::Society => "society",
            ResearchValue::Usability => "usability",
        }
    }

    /// Short codebook definition shown in prompts and reports.
    pub fn definition(self) -> &'static str {
        match self {
            ResearchValue::Performance => {
                "The sentence presents strong results, accuracy, or effectiveness as the reason \
                 the work matters (e.g. beating baselines or benchmarks)."
            }
            ResearchValue::Novelty => {
                "The sentence frames the contribution as new, original, or the first of its kind \
                 (new methods, tasks, datasets, or perspectives)."
            }
            ResearchValue::Efficiency => {
                "The sentence values using less time, computation, memory, energy, data, or cost."
            }
            ResearchValue::Generalizability => {
                "The sentence values working across tasks, domains, settings, or distributions \
                 beyond the ones studied."
            }
            ResearchValue::Openness => {
                "The sentence values released artifacts, reproducibility, collaboration, or \
                 enabling future work by others."
            }
            ResearchValue::Simplicity => {
                "The sentence values being simple, lightweight, or easy to implement or analyze."
            }
            ResearchValue::Understanding => {
                "The sentence values explaining a phenomenon, providing theory, analysis, or \
                 insight into why something works."
            }
            ResearchValue::Integrity => {
                "The sentence values fairness, mitigating bias, privacy, safety, or ethical \
                 conduct of the research."
            }
            ResearchValue::Society => {
                "The sentence values benefits or harms to society, real-world communities, or \
                 application domains outside computing."
            }
            ResearchValue::Usability => {
                "The sentence values being easy to use, accessible, or practical for end users \
                 or practitioners."
            }
        }
    }
}

impl fmt::Display for ResearchValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Error returned when a string does not name one of the ten values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownValueError(pub String);

impl fmt::Display for UnknownValueError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown research value: {:?}", self.0)
    }
}

impl std::error::Error for UnknownValueError {}

impl FromStr for ResearchValue {
    type Err = UnknownValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let needle = s.trim().to_ascii_lowercase();
        ResearchValue::ALL
            .iter()
            .copied()
            .find(|v| v.id() == needle)
            .ok_or_else(|| UnknownValueError(s.to_string()))
    }
}

impl Serialize for ResearchValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.id())
    }
}

impl<'de> Deserialize<'de> for ResearchValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Ten binary flags, one per research value.
///
/// Serializes as a map from value id to 0/1 in fixed taxonomy order, so the
/// on-disk form is self-describing and byte-stable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ValueLabelVector {
    flags: [bool; ResearchValue::COUNT],
}

impl ValueLabelVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from per-value bits in fixed taxonomy order.
    pub fn from_flags(flags: [bool; ResearchValue::COUNT]) -> Self {
        ValueLabelVector { flags }
    }

    pub fn get(&self, value: ResearchValue) -> bool {
        self.flags[value.index()]
    }

    pub fn set(&mut self, value: ResearchValue, flag: bool) {
        self.flags[value.index()] = flag;
    }

    pub fn with(mut self, value: ResearchValue) -> Self {
        self.set(value, true);
        self
    }

    /// Elementwise OR, used to lift sentence labels to the abstract level.
    pub fn or_with(&mut self, other: &ValueLabelVector) {
        for i in 0..ResearchValue::COUNT {
            self.flags[i] |= other.flags[i];
        }
    }

    pub fn any(&self) -> bool {
        self.flags.iter().any(|&f| f)
    }

    pub fn count_set(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ResearchValue, bool)> + '_ {
        ResearchValue::ALL.iter().map(move |&v| (v, self.get(v)))
    }
}

impl Serialize for ValueLabelVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(ResearchValue::COUNT))?;
        for (value, flag) in self.iter() {
            map.serialize_entry(value.id(), &u8::from(flag))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ValueLabelVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct VectorVisitor;

        impl<'de> Visitor<'de> for VectorVisitor {
            type Value = ValueLabelVector;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from research value id to 0 or 1")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut out = ValueLabelVector::new();
                while let Some((key, raw)) = access.next_entry::<String, u8>()? {
                    let value: ResearchValue = key.parse().map_err(de::Error::custom)?;
                    let flag = match raw {
                        0 => false,
                        1 => true,
                        other => {
                            return Err(de::Error::custom(format!(
                                "label for {key} must be 0 or 1, got {other}"
                            )))
                        }
                    };
                    out.set(value, flag);
                }
                Ok(out)
            }
        }

        deserializer.deserialize_map(VectorVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taxonomy_has_ten_unique_ids() {
        let mut ids: Vec<&str> = ResearchValue::ALL.iter().map(|v| v.id()).collect();
        assert_eq!(ids.len(), 10);
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 10, "value ids must be unique");
    }

    #[test]
    fn index_round_trips() {
        for v in ResearchValue::ALL {
            assert_eq!(ResearchValue::from_index(v.index()), Some(v));
            assert_eq!(v.id().parse::<ResearchValue>().unwrap(), v);
        }
        assert!("velocity".parse::<ResearchValue>().is_err());
    }

    #[test]
    fn label_vector_or_and_serde() {
        let a = ValueLabelVector::new().with(ResearchValue::Novelty);
        let b = ValueLabelVector::new().with(ResearchValue::Efficiency);
        let mut both = a;
        both.or_with(&b);
        assert!(both.get(ResearchValue::Novelty));
        assert!(both.get(ResearchValue::Efficiency));
        assert_eq!(both.count_set(), 2);

        let json = serde_json::to_string(&both).unwrap();
        assert!(json.starts_with("{\"performance\":0,\"novelty\":1"));
        let back: ValueLabelVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, both);
    }

    #[test]
    fn label_vector_rejects_non_binary() {
        let err = serde_json::from_str::<ValueLabelVector>("{\"novelty\":2}");
        assert!(err.is_err());
    }
}
