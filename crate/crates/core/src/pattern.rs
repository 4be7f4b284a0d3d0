use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid pattern character {found:?} at position {position}; only '0' and '1' are allowed")]
pub struct PatternError {
    pub position: usize,
    pub found: char,
}

/// A harakah/sukun sequence: `1` for a voweled letter, `0` for a quiescent one.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryPattern(String);

impl BinaryPattern {
    pub fn new(bits: impl Into<String>) -> Result<Self, PatternError> {
        let bits = bits.into();
        if let Some((position, found)) = bits.chars().enumerate().find(|&(_, c)| c != '0' && c != '1') {
            return Err(PatternError { position, found });
        }
        Ok(BinaryPattern(bits))
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        BinaryPattern(bits.into_iter().map(|b| if b { '1' } else { '0' }).collect())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a BinaryPattern>) -> Self {
        BinaryPattern(parts.into_iter().map(|p| p.as_str()).collect())
    }
}

impl fmt::Display for BinaryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for BinaryPattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BinaryPattern::new(s)
    }
}

impl Serialize for BinaryPattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for BinaryPattern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        BinaryPattern::new(s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_other_digits() {
        let err = BinaryPattern::new("1102").unwrap_err();
        assert_eq!(err, PatternError { position: 3, found: '2' });
        assert!(serde_json::from_str::<BinaryPattern>("\"10a\"").is_err());
    }

    #[test]
    fn concat_and_display() {
        let a: BinaryPattern = "110".parse().unwrap();
        let b: BinaryPattern = "10".parse().unwrap();
        assert_eq!(BinaryPattern::concat([&a, &b]).to_string(), "11010");
        assert_eq!(BinaryPattern::from_bits([true, false]).as_str(), "10");
    }
}
