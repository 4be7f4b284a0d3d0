use serde::Serialize;

use super::Poem;
use crate::meterdb::METER_COUNT;
use crate::normalize::{diacritic_coverage, normalize_unicode};

/// Minimum letters in a verse; marks and whitespace do not count.
pub const MIN_VERSE_CHARS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalRule {
    Normalization,
    OddVerses,
    ShortVerse,
    UnknownMeter,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CleanReport {
    pub input: usize,
    pub kept: usize,
    pub normalization: usize,
    pub odd_verses: usize,
    pub short_verse: usize,
    pub unknown_meter: usize,
}

impl CleanReport {
    fn record(&mut self, rule: RemovalRule) {
        match rule {
            RemovalRule::Normalization => self.normalization += 1,
            RemovalRule::OddVerses => self.odd_verses += 1,
            RemovalRule::ShortVerse => self.short_verse += 1,
            RemovalRule::UnknownMeter => self.unknown_meter += 1,
        }
    }

    pub fn removed(&self) -> usize {
        self.normalization + self.odd_verses + self.short_verse + self.unknown_meter
    }
}

/// Normalizes every verse and drops poems by the first rule they fail, in
/// order: normalization, odd or zero hemistich count, a verse under
/// [`MIN_VERSE_CHARS`] letters, a meter label outside the 16 classes.
pub fn clean(poems: Vec<Poem>) -> (Vec<Poem>, CleanReport) {
    let mut report = CleanReport { input: poems.len(), ..Default::default() };
    let mut kept = Vec::with_capacity(poems.len());
    for poem in poems {
        match clean_one(poem) {
            Ok(p) => kept.push(p),
            Err(rule) => report.record(rule),
        }
    }
    report.kept = kept.len();
    (kept, report)
}

fn clean_one(mut poem: Poem) -> Result<Poem, RemovalRule> {
    let mut letters = Vec::with_capacity(poem.verses.len());
    for verse in &mut poem.verses {
        let text = normalize_unicode(verse).map_err(|_| RemovalRule::Normalization)?;
        letters.push(text.letter_count());
        *verse = text.to_string();
    }
    if poem.verses.is_empty() || !poem.verses.len().is_multiple_of(2) {
        return Err(RemovalRule::OddVerses);
    }
    if letters.iter().any(|&n| n < MIN_VERSE_CHARS) {
        return Err(RemovalRule::ShortVerse);
    }
    if let Some(m) = poem.meter {
        if !(0..METER_COUNT as i64).contains(&m) {
            return Err(RemovalRule::UnknownMeter);
        }
    }
    Ok(poem)
}

/// Keeps poems whose every verse reaches `min` diacritic coverage. A verse
/// without eligible letters counts as coverage 0.
pub fn filter_by_coverage(poems: Vec<Poem>, min: f64) -> Vec<Poem> {
    poems
        .into_iter()
        .filter(|p| {
            p.verses.iter().all(|v| {
                let c = normalize_unicode(v).ok().and_then(|t| diacritic_coverage(&t).ok()).map_or(0.0, |c| c.value());
                c >= min
            })
        })
        .collect()
}
