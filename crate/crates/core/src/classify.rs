//! Meter classification, poem-level voting, Arudi prediction, qafiyah and
//! era buckets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Poem;
use crate::matcher::{best_match, meter_scores, MatchError, MatchResult};
use crate::meterdb::{MeterDbError, PatternDb};
use crate::normalize::{diacritic_coverage, normalize_unicode, strip_diacritics, ALEF, ALEF_MAQSURA, WAW, YA};
use crate::pattern::BinaryPattern;
use crate::scansion::{scan_hemistich_with, Scan, ScanError, ScanOptions};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("observed pattern is empty")]
    EmptyPattern,
    #[error("no hemistich of the poem could be scanned")]
    NoScannableVerse,
    #[error("poem has no verses")]
    EmptyPoem,
    #[error(transparent)]
    Db(#[from] MeterDbError),
}

impl From<MatchError> for ClassifyError {
    fn from(e: MatchError) -> Self {
        match e {
            MatchError::EmptyPattern => ClassifyError::EmptyPattern,
            MatchError::Db(d) => ClassifyError::Db(d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeterScore {
    pub meter: usize,
    pub score: f64,
}

/// Meters ordered by score, highest first; equal scores keep index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeterRanking(Vec<MeterScore>);

impl MeterRanking {
    pub fn new(mut scores: Vec<MeterScore>) -> Self {
        scores.sort_by(|x, y| y.score.total_cmp(&x.score).then(x.meter.cmp(&y.meter)));
        MeterRanking(scores)
    }

    pub fn top(&self) -> MeterScore {
        self.0[0]
    }

    pub fn scores(&self) -> &[MeterScore] {
        &self.0
    }

    pub fn score_of(&self, meter: usize) -> Option<f64> {
        self.0.iter().find(|s| s.meter == meter).map(|s| s.score)
    }

    pub fn meters(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|s| s.meter)
    }
}

/// Scores every meter by its best-matching variant.
pub fn classify_hemistich(pattern: &BinaryPattern, db: &PatternDb) -> Result<MeterRanking, ClassifyError> {
    let scores = meter_scores(pattern, db)?;
    Ok(MeterRanking::new(scores.into_iter().map(|(meter, score)| MeterScore { meter, score }).collect()))
}

/// Orders meters for a poem: most top-1 votes first; ties between voted
/// meters go to the higher mean top-1 similarity of their voters, then the
/// lower index. Meters without votes follow, by mean score over all
/// hemistiches.
pub fn poem_meter_order(rankings: &[MeterRanking], meter_count: usize) -> Vec<usize> {
    let mut votes = vec![0usize; meter_count];
    let mut voter_sim = vec![0.0f64; meter_count];
    let mut total = vec![0.0f64; meter_count];
    for r in rankings {
        let top = r.top();
        votes[top.meter] += 1;
        voter_sim[top.meter] += top.score;
        for s in r.scores() {
            total[s.meter] += s.score;
        }
    }
    let key = |m: usize| {
        if votes[m] > 0 {
            voter_sim[m] / votes[m] as f64
        } else {
            total[m] / rankings.len().max(1) as f64
        }
    };
    let mut order: Vec<usize> = (0..meter_count).collect();
    order.sort_by(|&a, &b| votes[b].cmp(&votes[a]).then(key(b).total_cmp(&key(a))).then(a.cmp(&b)));
    order
}

/// Plurality vote over `(meter, top-1 similarity)` pairs.
pub fn majority_vote(tops: &[(usize, f64)]) -> Option<usize> {
    let count = tops.iter().map(|t| t.0 + 1).max()?;
    let rankings: Vec<MeterRanking> =
        tops.iter().map(|&(meter, score)| MeterRanking(vec![MeterScore { meter, score }])).collect();
    poem_meter_order(&rankings, count).first().copied()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoemClassification {
    pub meter: usize,
    /// Meters best first, as used for top-k evaluation.
    pub order: Vec<usize>,
    /// Ranking of each scanned hemistich, keyed by its index in `verses`.
    pub hemistiches: Vec<(usize, MeterRanking)>,
    pub failures: Vec<(usize, ScanError)>,
}

pub fn classify_poem(poem: &Poem, db: &PatternDb, opts: &ScanOptions) -> Result<PoemClassification, ClassifyError> {
    if poem.verses.is_empty() {
        return Err(ClassifyError::EmptyPoem);
    }
    let mut hemistiches = Vec::new();
    let mut failures = Vec::new();
    for (i, verse) in poem.verses.iter().enumerate() {
        match scan_hemistich_with(verse, opts) {
            Ok(scan) => hemistiches.push((i, classify_hemistich(&scan.pattern, db)?)),
            Err(e) => failures.push((i, e)),
        }
    }
    if hemistiches.is_empty() {
        return Err(ClassifyError::NoScannableVerse);
    }
    let rankings: Vec<MeterRanking> = hemistiches.iter().map(|(_, r)| r.clone()).collect();
    let order = poem_meter_order(&rankings, db.templates().len());
    Ok(PoemClassification { meter: order[0], order, hemistiches, failures })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HemistichMatch {
    pub scan: Scan,
    pub best: MatchResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HemistichPrediction {
    pub text: String,
    pub coverage: Option<f64>,
    pub outcome: Result<HemistichMatch, ScanError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArudiPrediction {
    /// `None` when no hemistich scanned and no hint was given.
    pub meter: Option<usize>,
    pub hemistiches: Vec<HemistichPrediction>,
}

impl ArudiPrediction {
    pub fn scanned(&self) -> usize {
        self.hemistiches.iter().filter(|h| h.outcome.is_ok()).count()
    }
}

/// Scans each hemistich, settles the poem meter (the hint, or the vote),
/// and matches each pattern against that meter's variants. Hemistiches that
/// fail to scan are reported individually.
pub fn predict_arudi(
    poem: &Poem,
    db: &PatternDb,
    meter_hint: Option<usize>,
    opts: &ScanOptions,
) -> Result<ArudiPrediction, ClassifyError> {
    if let Some(m) = meter_hint {
        db.template(m)?;
    }
    let scans: Vec<Result<Scan, ScanError>> = poem.verses.iter().map(|v| scan_hemistich_with(v, opts)).collect();
    let meter = match meter_hint {
        Some(m) => Some(m),
        None => {
            let rankings = scans
                .iter()
                .filter_map(|s| s.as_ref().ok())
                .map(|s| classify_hemistich(&s.pattern, db))
                .collect::<Result<Vec<_>, _>>()?;
            (!rankings.is_empty()).then(|| poem_meter_order(&rankings, db.templates().len())[0])
        }
    };
    let mut hemistiches = Vec::with_capacity(scans.len());
    for (verse, scan) in poem.verses.iter().zip(scans) {
        let coverage = normalize_unicode(verse).ok().and_then(|t| diacritic_coverage(&t).ok()).map(|c| c.value());
        let outcome = match (scan, meter) {
            (Ok(scan), Some(m)) => {
                let best = best_match(&scan.pattern, db, Some(&[m]))?.remove(0);
                Ok(HemistichMatch { scan, best })
            }
            (Ok(_), None) => unreachable!("a scanned hemistich always yields a meter"),
            (Err(e), _) => Err(e),
        };
        hemistiches.push(HemistichPrediction { text: verse.clone(), coverage, outcome });
    }
    Ok(ArudiPrediction { meter, hemistiches })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qafiyah {
    /// The rhyme letter.
    pub rawiy: char,
    /// The rawiy and any trailing madd letter after it.
    pub tail: String,
}

fn is_madd_letter(c: char) -> bool {
    matches!(c, ALEF | ALEF_MAQSURA | WAW | YA)
}

/// Rhyme of one verse: the last letter of its last word after dropping
/// marks and at most one trailing madd letter.
pub fn qafiyah_of_verse(verse: &str) -> Option<Qafiyah> {
    let text = strip_diacritics(&normalize_unicode(verse).ok()?);
    let word: Vec<char> = text.words().last()?.iter().map(|u| u.ch).collect();
    let (&last, rest) = word.split_last()?;
    match rest.last() {
        Some(&rawiy) if is_madd_letter(last) => Some(Qafiyah { rawiy, tail: [rawiy, last].iter().collect() }),
        _ => Some(Qafiyah { rawiy: last, tail: last.to_string() }),
    }
}

/// Rhyme of the poem, taken from its final verse.
pub fn extract_qafiyah(poem: &Poem) -> Result<Qafiyah, ClassifyError> {
    poem.verses.iter().rev().find_map(|v| qafiyah_of_verse(v)).ok_or(ClassifyError::EmptyPoem)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EraInput {
    PreIslamic,
    /// Hijri year; negative values are before the Hijra.
    Year(i32),
}

/// One of four era buckets, with its half-open Hijri year range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EraBucket {
    pub index: u8,
    pub start: Option<i32>,
    pub end: Option<i32>,
}

const ERA_BOUNDS: [i32; 3] = [132, 232, 784];

pub fn bucket_era(era: EraInput) -> EraBucket {
    let year = match era {
        EraInput::PreIslamic => i32::MIN,
        EraInput::Year(y) => y,
    };
    let i = ERA_BOUNDS.iter().filter(|&&b| year >= b).count();
    EraBucket { index: i as u8 + 1, start: i.checked_sub(1).map(|j| ERA_BOUNDS[j]), end: ERA_BOUNDS.get(i).copied() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThemeLabel {
    Elegy,
    Lampoon,
    Praise,
    Romantic,
    Unknown,
}

impl ThemeLabel {
    pub const ALL: [ThemeLabel; 5] =
        [ThemeLabel::Elegy, ThemeLabel::Lampoon, ThemeLabel::Praise, ThemeLabel::Romantic, ThemeLabel::Unknown];

    pub fn as_str(self) -> &'static str {
        match self {
            ThemeLabel::Elegy => "elegy",
            ThemeLabel::Lampoon => "lampoon",
            ThemeLabel::Praise => "praise",
            ThemeLabel::Romantic => "romantic",
            ThemeLabel::Unknown => "unknown",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str().eq_ignore_ascii_case(name.trim()))
    }
}
