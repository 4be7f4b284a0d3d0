//! Evaluation: diacritization error rates, confusion matrices, rhythm
//! (meter-following) accuracy and Arudi similarity reports.
//!
//! A letter is scored when the gold text marks it; unmarked gold letters
//! cannot be judged and are left out of every count. The case ending of a
//! word is its last scored letter, and the starred rates drop it.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classify::{classify_poem, ClassifyError};
use crate::corpus::Poem;
use crate::matcher::similarity;
use crate::meterdb::PatternDb;
use crate::normalize::{strip_diacritics, NormalizedText};
use crate::pattern::BinaryPattern;
use crate::scansion::ScanOptions;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("gold and predicted texts differ in their letters: {gold:?} vs {pred:?}")]
    LetterMismatch { gold: String, pred: String },
    #[error("{golds} gold items but {preds} predictions")]
    LengthMismatch { golds: usize, preds: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("label {label} is outside the {size} known labels")]
    LabelOutOfRange { label: usize, size: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Raw counts behind DER/WER; add counts from several lines before scoring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DiacritizationCounts {
    pub letters: u64,
    pub letter_errors: u64,
    pub words: u64,
    pub word_errors: u64,
    pub letters_star: u64,
    pub letter_errors_star: u64,
    pub words_star: u64,
    pub word_errors_star: u64,
}

impl std::ops::AddAssign for DiacritizationCounts {
    fn add_assign(&mut self, o: Self) {
        self.letters += o.letters;
        self.letter_errors += o.letter_errors;
        self.words += o.words;
        self.word_errors += o.word_errors;
        self.letters_star += o.letters_star;
        self.letter_errors_star += o.letter_errors_star;
        self.words_star += o.words_star;
        self.word_errors_star += o.word_errors_star;
    }
}

fn percent(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 * 100.0 / den as f64
    }
}

impl DiacritizationCounts {
    pub fn score(&self) -> DiacritizationScore {
        DiacritizationScore {
            der: percent(self.letter_errors, self.letters),
            wer: percent(self.word_errors, self.words),
            der_star: percent(self.letter_errors_star, self.letters_star),
            wer_star: percent(self.word_errors_star, self.words_star),
        }
    }
}

/// Percentages in `[0, 100]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiacritizationScore {
    pub der: f64,
    pub wer: f64,
    pub der_star: f64,
    pub wer_star: f64,
}

pub fn der_wer_counts(gold: &NormalizedText, pred: &NormalizedText) -> Result<DiacritizationCounts, MetricsError> {
    let (gs, ps) = (strip_diacritics(gold).skeleton(), strip_diacritics(pred).skeleton());
    if gs != ps {
        return Err(MetricsError::LetterMismatch { gold: gs, pred: ps });
    }
    let mut c = DiacritizationCounts::default();
    for (gw, pw) in gold.words().into_iter().zip(pred.words()) {
        let scored: Vec<bool> =
            gw.iter().zip(pw).filter(|(g, _)| !g.marks.is_empty()).map(|(g, p)| g.marks != p.marks).collect();
        let Some((_, body)) = scored.split_last() else { continue };
        let errors = scored.iter().filter(|&&e| e).count() as u64;
        let body_errors = body.iter().filter(|&&e| e).count() as u64;
        c.letters += scored.len() as u64;
        c.letter_errors += errors;
        c.words += 1;
        c.word_errors += u64::from(errors > 0);
        c.letters_star += body.len() as u64;
        c.letter_errors_star += body_errors;
        if !body.is_empty() {
            c.words_star += 1;
            c.word_errors_star += u64::from(body_errors > 0);
        }
    }
    Ok(c)
}

pub fn der_wer(gold: &NormalizedText, pred: &NormalizedText) -> Result<DiacritizationScore, MetricsError> {
    Ok(der_wer_counts(gold, pred)?.score())
}

/// Rows are gold labels, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        ConfusionMatrix { labels, counts: vec![vec![0; n]; n] }
    }

    pub fn add(&mut self, gold: usize, pred: usize) -> Result<(), MetricsError> {
        let size = self.labels.len();
        for label in [gold, pred] {
            if label >= size {
                return Err(MetricsError::LabelOutOfRange { label, size });
            }
        }
        self.counts[gold][pred] += 1;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn write_csv(&self, out: impl Write) -> Result<(), MetricsError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(std::iter::once("").chain(self.labels.iter().map(String::as_str)))?;
        for (label, row) in self.labels.iter().zip(&self.counts) {
            w.write_record(std::iter::once(label.clone()).chain(row.iter().map(u64::to_string)))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

pub fn confusion(golds: &[usize], preds: &[usize], labels: Vec<String>) -> Result<ConfusionMatrix, MetricsError> {
    if golds.len() != preds.len() {
        return Err(MetricsError::LengthMismatch { golds: golds.len(), preds: preds.len() });
    }
    let mut m = ConfusionMatrix::new(labels);
    for (&g, &p) in golds.iter().zip(preds) {
        m.add(g, p)?;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhythmReport {
    pub total: usize,
    /// Poems with no scannable hemistich; they count as misses.
    pub failed: usize,
    pub accuracy: f64,
    pub top3: f64,
    pub top5: f64,
    pub confusion: ConfusionMatrix,
}

/// Rhythm accuracy from each poem's intended meter and its meter order
/// (`None` when the poem could not be classified).
pub fn rhythm_from_orders(
    items: &[(usize, Option<Vec<usize>>)],
    labels: Vec<String>,
) -> Result<RhythmReport, MetricsError> {
    let mut confusion = ConfusionMatrix::new(labels);
    let (mut hits, mut failed) = ([0usize; 3], 0);
    for (intended, order) in items {
        let Some(order) = order else {
            failed += 1;
            continue;
        };
        let rank = order.iter().position(|m| m == intended);
        for (hit, k) in hits.iter_mut().zip([1, 3, 5]) {
            *hit += usize::from(rank.is_some_and(|r| r < k));
        }
        confusion.add(*intended, order[0])?;
    }
    let pct = |n: usize| percent(n as u64, items.len() as u64);
    Ok(RhythmReport {
        total: items.len(),
        failed,
        accuracy: pct(hits[0]),
        top3: pct(hits[1]),
        top5: pct(hits[2]),
        confusion,
    })
}

pub fn rhythm_eval(poems: &[(usize, Poem)], db: &PatternDb, opts: &ScanOptions) -> Result<RhythmReport, MetricsError> {
    let orders: Vec<(usize, Option<Vec<usize>>)> = poems
        .par_iter()
        .map(|(intended, poem)| match classify_poem(poem, db, opts) {
            Ok(c) => Ok((*intended, Some(c.order))),
            Err(ClassifyError::NoScannableVerse | ClassifyError::EmptyPoem) => Ok((*intended, None)),
            Err(e) => Err(e),
        })
        .collect::<Result<_, ClassifyError>>()?;
    let labels = db.templates().iter().map(|t| t.name_translit.clone()).collect();
    rhythm_from_orders(&orders, labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArudiReport {
    pub count: usize,
    pub mean_similarity: f64,
    pub exact_match: f64,
}

pub fn arudi_report(golds: &[BinaryPattern], preds: &[BinaryPattern]) -> Result<ArudiReport, MetricsError> {
    if golds.len() != preds.len() {
        return Err(MetricsError::LengthMismatch { golds: golds.len(), preds: preds.len() });
    }
    if golds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let sims: Vec<f64> = golds.iter().zip(preds).map(|(g, p)| similarity(p, g)).collect();
    let n = sims.len() as f64;
    Ok(ArudiReport {
        count: sims.len(),
        mean_similarity: sims.iter().sum::<f64>() * 100.0 / n,
        exact_match: sims.iter().filter(|&&s| s == 1.0).count() as f64 * 100.0 / n,
    })
}
