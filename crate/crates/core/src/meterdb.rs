//! Database of the sixteen meters and their permissible foot variants.
//!
//! Each meter is a hemistich-level template: an ordered list of foot slots,
//! every slot holding its canonical tafeelah and the set of variant patterns
//! (ziḥāf/ʿilla substitutions) allowed in that position. Full-hemistich
//! variants are the cartesian product of the slot sets.

use std::collections::HashSet;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pattern::BinaryPattern;

pub const METER_COUNT: usize = 16;
pub const MAX_VARIANTS: u64 = 1_000_000;
pub const TAWEEL: usize = 0;

/// The bundled seed database.
pub const SEED_JSON: &str = include_str!("../data/meters.json");

const TAWEEL_CANONICAL: &str = "11010110101011010110110";

#[derive(Debug, Error)]
pub enum MeterDbError {
    #[error("failed to read meter database: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("validation failed ({invariant}): {detail}")]
    Validation { invariant: &'static str, detail: String },
    #[error("unknown meter index {0}")]
    UnknownMeter(usize),
    #[error("meter {meter} has {count} variants, more than the limit of {MAX_VARIANTS}")]
    VariantExplosion { meter: usize, count: u64 },
}

fn invalid(invariant: &'static str, detail: impl Into<String>) -> MeterDbError {
    MeterDbError::Validation { invariant, detail: detail.into() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tafeelah {
    /// Diacritized Arabic name; scanning it reproduces `canonical`.
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub translit: String,
    pub canonical: BinaryPattern,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FootSlot {
    pub foot: Tafeelah,
    pub variants: Vec<BinaryPattern>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeterTemplate {
    pub index: usize,
    pub name_ar: String,
    pub name_translit: String,
    pub slots: Vec<FootSlot>,
}

impl MeterTemplate {
    pub fn canonical_pattern(&self) -> BinaryPattern {
        BinaryPattern::concat(self.slots.iter().map(|s| &s.foot.canonical))
    }

    pub fn variant_count(&self) -> u64 {
        self.slots
            .iter()
            .map(|s| s.variants.len() as u64)
            .try_fold(1u64, |acc, n| acc.checked_mul(n))
            .unwrap_or(u64::MAX)
    }
}

// On-disk records.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FootRecord {
    name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    translit: String,
    canonical: BinaryPattern,
    variants: Vec<BinaryPattern>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeterRecord {
    index: usize,
    name_ar: String,
    name_translit: String,
    feet: Vec<FootRecord>,
}

/// Validated, immutable meter database.
#[derive(Debug, Clone)]
pub struct PatternDb {
    templates: Vec<MeterTemplate>,
    checksum: String,
    variants: Vec<OnceLock<Vec<BinaryPattern>>>,
}

impl PartialEq for PatternDb {
    fn eq(&self, other: &Self) -> bool {
        self.templates == other.templates && self.checksum == other.checksum
    }
}

impl Eq for PatternDb {}

impl PatternDb {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, MeterDbError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// The database shipped with the crate.
    pub fn seed() -> Self {
        Self::from_json(SEED_JSON).expect("bundled meter database is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, MeterDbError> {
        let records: Vec<MeterRecord> = serde_json::from_str(text).map_err(|e| MeterDbError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut templates: Vec<MeterTemplate> = records
            .into_iter()
            .map(|r| MeterTemplate {
                index: r.index,
                name_ar: r.name_ar,
                name_translit: r.name_translit,
                slots: r
                    .feet
                    .into_iter()
                    .map(|f| FootSlot {
                        foot: Tafeelah { name: f.name, translit: f.translit, canonical: f.canonical },
                        variants: f.variants,
                    })
                    .collect(),
            })
            .collect();
        validate(&templates)?;
        templates.sort_by_key(|t| t.index);
        let checksum = hex::encode(Sha256::digest(text.as_bytes()));
        let variants = templates.iter().map(|_| OnceLock::new()).collect();
        Ok(PatternDb { templates, checksum, variants })
    }

    pub fn to_json(&self) -> String {
        let records: Vec<MeterRecord> = self
            .templates
            .iter()
            .map(|t| MeterRecord {
                index: t.index,
                name_ar: t.name_ar.clone(),
                name_translit: t.name_translit.clone(),
                feet: t
                    .slots
                    .iter()
                    .map(|s| FootRecord {
                        name: s.foot.name.clone(),
                        translit: s.foot.translit.clone(),
                        canonical: s.foot.canonical.clone(),
                        variants: s.variants.clone(),
                    })
                    .collect(),
            })
            .collect();
        serde_json::to_string_pretty(&records).expect("records serialize")
    }

    /// SHA-256 of the source JSON.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn templates(&self) -> &[MeterTemplate] {
        &self.templates
    }

    pub fn template(&self, meter: usize) -> Result<&MeterTemplate, MeterDbError> {
        self.templates.get(meter).ok_or(MeterDbError::UnknownMeter(meter))
    }

    pub fn meters(&self) -> Vec<(usize, &str)> {
        self.templates.iter().map(|t| (t.index, t.name_translit.as_str())).collect()
    }

    pub fn name(&self, meter: usize) -> Option<&str> {
        self.templates.get(meter).map(|t| t.name_translit.as_str())
    }

    /// Looks a meter up by transliterated or Arabic name, case-insensitively.
    pub fn find(&self, name: &str) -> Option<usize> {
        self.templates.iter().find(|t| t.name_translit.eq_ignore_ascii_case(name) || t.name_ar == name).map(|t| t.index)
    }

    pub fn canonical_pattern(&self, meter: usize) -> Result<BinaryPattern, MeterDbError> {
        Ok(self.template(meter)?.canonical_pattern())
    }

    pub fn enumerate_variants(&self, meter: usize) -> Result<VariantIter<'_>, MeterDbError> {
        let template = self.template(meter)?;
        let count = template.variant_count();
        if count > MAX_VARIANTS {
            return Err(MeterDbError::VariantExplosion { meter, count });
        }
        Ok(VariantIter {
            slots: &template.slots,
            odometer: vec![0; template.slots.len()],
            done: template.slots.is_empty(),
            seen: HashSet::new(),
        })
    }
}

impl PatternDb {
    /// All variants of a meter in enumeration order, materialized on first use.
    pub fn variants(&self, meter: usize) -> Result<&[BinaryPattern], MeterDbError> {
        let iter = self.enumerate_variants(meter)?;
        Ok(self.variants[meter].get_or_init(|| iter.collect()))
    }
}

fn validate(templates: &[MeterTemplate]) -> Result<(), MeterDbError> {
    if templates.len() != METER_COUNT {
        return Err(invalid("meter-count", format!("expected {METER_COUNT} meters, found {}", templates.len())));
    }
    let mut seen = [false; METER_COUNT];
    for t in templates {
        if t.index >= METER_COUNT || std::mem::replace(&mut seen[t.index], true) {
            return Err(invalid("meter-index", format!("index {} is out of range or repeated", t.index)));
        }
        if t.name_translit.trim().is_empty() || t.name_ar.trim().is_empty() {
            return Err(invalid("meter-name", format!("meter {} has an empty name", t.index)));
        }
        if t.slots.is_empty() {
            return Err(invalid("meter-feet", format!("meter {} has no feet", t.index)));
        }
        for (k, slot) in t.slots.iter().enumerate() {
            let where_ = format!("meter {} foot {}", t.index, k);
            for p in std::iter::once(&slot.foot.canonical).chain(&slot.variants) {
                if !(3..=8).contains(&p.len()) {
                    return Err(invalid("tafeelah-length", format!("{where_}: pattern {p} is not 3..=8 bits")));
                }
            }
            if !slot.variants.contains(&slot.foot.canonical) {
                return Err(invalid(
                    "canonical-in-variants",
                    format!("{where_}: canonical {} missing", slot.foot.canonical),
                ));
            }
            let distinct: HashSet<_> = slot.variants.iter().collect();
            if distinct.len() != slot.variants.len() {
                return Err(invalid("distinct-variants", format!("{where_}: duplicate variant")));
            }
        }
    }
    if let Some(taweel) = templates.iter().find(|t| t.name_translit.eq_ignore_ascii_case("taweel")) {
        let canonical = taweel.canonical_pattern();
        if canonical.as_str() != TAWEEL_CANONICAL {
            return Err(invalid(
                "taweel-canonical",
                format!("Taweel canonical is {canonical}, expected {TAWEEL_CANONICAL}"),
            ));
        }
    }
    Ok(())
}

/// Lazy cartesian product over a meter's slot variant sets, in odometer order
/// (last slot varies fastest). Concatenations already emitted are skipped.
pub struct VariantIter<'a> {
    slots: &'a [FootSlot],
    odometer: Vec<usize>,
    done: bool,
    seen: HashSet<BinaryPattern>,
}

impl Iterator for VariantIter<'_> {
    type Item = BinaryPattern;

    fn next(&mut self) -> Option<BinaryPattern> {
        while !self.done {
            let pattern = BinaryPattern::concat(self.slots.iter().zip(&self.odometer).map(|(s, &i)| &s.variants[i]));
            // Advance.
            let mut k = self.slots.len();
            loop {
                if k == 0 {
                    self.done = true;
                    break;
                }
                k -= 1;
                self.odometer[k] += 1;
                if self.odometer[k] < self.slots[k].variants.len() {
                    break;
                }
                self.odometer[k] = 0;
            }
            if self.seen.insert(pattern.clone()) {
                return Some(pattern);
            }
        }
        None
    }
}
