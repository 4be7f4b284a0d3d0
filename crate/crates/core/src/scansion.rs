//! Arudi rewriting and binary scansion.
//!
//! A diacritized hemistich is first rewritten into its phonetically explicit
//! ("Arudi") writing, where every letter carries exactly one vowel or a
//! sukun, and then mapped letter by letter to `1` (vowel) or `0` (sukun).
//!
//! Rewrite rules, each recorded in the trace of the bits it produces:
//!
//! * `R1` letters kept as written.
//! * `R2` shadda: the letter is doubled, the first copy quiescent and the
//!   second carrying the written vowel.
//! * `R3` tanween: plain vowel plus an appended quiescent nun; the silent
//!   alef/alef maqsura seat after fathatan is dropped.
//! * `R4` madd letters (alef, alef maqsura, waw after damma, ya after kasra)
//!   are quiescent; alef madda expands to hamza with fatha plus alef.
//! * `R5` connective alef: dropped inside the hemistich (a preceding long
//!   vowel is shortened, a preceding quiescent letter takes kasra) and kept
//!   with a vowel at the start of a hemistich.
//! * `R6` definite-article lam: quiescent before a moon letter, dropped before
//!   a written shadda (the doubled letter supplies the quiescent slot).
//! * `R7` a hemistich-final vowel is lengthened with a quiescent madd letter.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::{
    self, article_alef, diacritic_coverage, normalize_unicode, DiacriticMark, Marks, NormalizeError, NormalizedText,
    Unit, UnitKind, ALEF, ALEF_MADDA, ALEF_MAQSURA, ALEF_WASLA, HAMZA, LAM, NUN, WAW, YA,
};
use crate::pattern::BinaryPattern;

/// Minimum diacritic coverage accepted by the rewriter.
pub const DEFAULT_MIN_COVERAGE: f64 = 0.95;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error("diacritic coverage {coverage:.3} is below the required {required:.3}; unmarked letters at {unmarked:?}")]
    IncompleteDiacritization { coverage: f64, required: f64, unmarked: Vec<usize> },
    #[error("letter {letter} at position {index} carries neither a vowel nor a sukun")]
    UnmarkedLetter { index: usize, letter: char },
    #[error("nothing to scan")]
    EmptyPattern,
    #[error("a hemistich must not contain the '#' separator")]
    SeparatorInHemistich,
}

impl ScanError {
    pub fn kind(&self) -> &'static str {
        match self {
            ScanError::Normalize(NormalizeError::OrphanDiacritic { .. }) => "OrphanDiacritic",
            ScanError::Normalize(NormalizeError::EmptyText) => "EmptyText",
            ScanError::Normalize(NormalizeError::NoEligibleLetters) => "NoEligibleLetters",
            ScanError::IncompleteDiacritization { .. } => "IncompleteDiacritization",
            ScanError::UnmarkedLetter { .. } => "UnmarkedLetter",
            ScanError::EmptyPattern => "EmptyPattern",
            ScanError::SeparatorInHemistich => "SeparatorInHemistich",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One letter of the Arudi writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArudiLetter {
    pub letter: char,
    /// Plain vowel or sukun; `None` when the source left the letter unmarked.
    pub mark: Option<DiacriticMark>,
    /// Ordinal of the source letter this one derives from.
    pub source: usize,
    pub rule: RuleId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArudiText {
    pub letters: Vec<ArudiLetter>,
}

impl ArudiText {
    /// Treats already-explicit text as Arudi writing without rewriting it.
    pub fn from_explicit(text: &NormalizedText) -> Self {
        let letters = text
            .letters()
            .enumerate()
            .map(|(source, u)| ArudiLetter { letter: u.ch, mark: u.marks.vowel, source, rule: RuleId::R1 })
            .collect();
        ArudiText { letters }
    }

    pub fn to_normalized(&self) -> NormalizedText {
        NormalizedText::from_units(
            self.letters
                .iter()
                .map(|l| Unit { ch: l.letter, marks: Marks { shadda: false, vowel: l.mark }, source: l.source })
                .collect(),
        )
    }
}

impl fmt::Display for ArudiText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_normalized().fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub bit: char,
    /// Source letter ordinal within the hemistich.
    pub letter: usize,
    pub rule: RuleId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScansionTrace(pub Vec<TraceEntry>);

impl ScansionTrace {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub min_coverage: f64,
    /// Apply R7 lengthening at the end of the hemistich.
    pub final_ishba: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { min_coverage: DEFAULT_MIN_COVERAGE, final_ishba: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub pattern: BinaryPattern,
    pub trace: ScansionTrace,
    pub coverage: f64,
}

fn madd_letter_for(vowel: DiacriticMark) -> char {
    match vowel {
        DiacriticMark::Damma => WAW,
        DiacriticMark::Kasra => YA,
        _ => ALEF,
    }
}

struct Rewriter<'o> {
    out: Vec<ArudiLetter>,
    opts: &'o ScanOptions,
}

impl Rewriter<'_> {
    fn emit(&mut self, letter: char, mark: Option<DiacriticMark>, source: usize, rule: RuleId) {
        self.out.push(ArudiLetter { letter, mark, source, rule });
    }

    /// Joins a connective alef to whatever ended the previous word.
    fn elide_into_previous(&mut self) {
        let Some(last) = self.out.last_mut() else { return };
        if last.mark != Some(DiacriticMark::Sukun) {
            return;
        }
        let is_long_vowel =
            last.rule == RuleId::R4 || matches!(last.letter, ALEF | ALEF_MAQSURA) && last.rule != RuleId::R2;
        if is_long_vowel {
            self.out.pop();
        } else {
            last.mark = Some(DiacriticMark::Kasra);
            last.rule = RuleId::R5;
        }
    }

    fn segment(&mut self, words: &[&[Unit]], mut ordinal: usize) {
        let segment_start = self.out.len();
        for (wi, word) in words.iter().enumerate() {
            let article = article_alef(word);
            for k in 0..word.len() {
                self.letter(word, k, wi, article, ordinal + k);
            }
            ordinal += word.len();
        }
        if self.opts.final_ishba && self.out.len() > segment_start {
            let last = *self.out.last().expect("non-empty segment");
            if let Some(vowel) = last.mark.filter(|m| m.is_harakah()) {
                self.emit(madd_letter_for(vowel), Some(DiacriticMark::Sukun), last.source, RuleId::R7);
            }
        }
    }

    fn letter(&mut self, word: &[Unit], k: usize, wi: usize, article: Option<usize>, source: usize) {
        let u = word[k];
        let prev = k.checked_sub(1).map(|p| word[p]);

        let connective = (k == 0 && matches!(u.ch, ALEF | ALEF_WASLA)) || article == Some(k);
        if connective {
            if wi == 0 && k == 0 {
                let vowel = u.marks.vowel.filter(|m| m.is_harakah()).map(DiacriticMark::base_vowel);
                let default = if article == Some(0) { DiacriticMark::Fatha } else { DiacriticMark::Kasra };
                self.emit(ALEF, Some(vowel.unwrap_or(default)), source, RuleId::R5);
            } else if k == 0 {
                self.elide_into_previous();
            }
            return;
        }

        if u.ch == LAM && article.is_some_and(|a| a + 1 == k) && !u.marks.has_harakah() {
            if word.get(k + 1).is_some_and(|n| n.marks.shadda) && u.marks.vowel.is_none() {
                return;
            }
            self.emit(LAM, Some(DiacriticMark::Sukun), source, RuleId::R6);
            return;
        }

        if u.ch == ALEF_MADDA {
            self.emit(HAMZA, Some(DiacriticMark::Fatha), source, RuleId::R4);
            self.emit(ALEF, Some(DiacriticMark::Sukun), source, RuleId::R4);
            return;
        }

        if matches!(u.ch, ALEF | ALEF_MAQSURA) && k > 0 && !u.marks.has_harakah() {
            let prev = prev.expect("k > 0");
            if prev.marks.vowel == Some(DiacriticMark::FathaTanween) {
                return;
            }
            if u.ch == ALEF && k + 1 == word.len() && prev.ch == WAW {
                return;
            }
            self.emit(u.ch, Some(DiacriticMark::Sukun), source, RuleId::R4);
            return;
        }

        if u.marks.is_empty() {
            let prev_vowel = prev.and_then(|p| p.marks.vowel);
            let is_madd =
                matches!((u.ch, prev_vowel), (WAW, Some(DiacriticMark::Damma)) | (YA, Some(DiacriticMark::Kasra)));
            if is_madd {
                self.emit(u.ch, Some(DiacriticMark::Sukun), source, RuleId::R4);
                return;
            }
        }

        let vowel = u.marks.vowel;
        if u.marks.shadda {
            self.emit(u.ch, Some(DiacriticMark::Sukun), source, RuleId::R2);
            self.emit(u.ch, vowel.map(DiacriticMark::base_vowel), source, RuleId::R2);
            if vowel.is_some_and(DiacriticMark::is_tanween) {
                self.emit(NUN, Some(DiacriticMark::Sukun), source, RuleId::R3);
            }
        } else if let Some(v) = vowel.filter(|v| v.is_tanween()) {
            self.emit(u.ch, Some(v.base_vowel()), source, RuleId::R3);
            self.emit(NUN, Some(DiacriticMark::Sukun), source, RuleId::R3);
        } else {
            self.emit(u.ch, vowel, source, RuleId::R1);
        }
    }
}

/// Rewrites diacritized verse into Arudi writing. Each `#`-separated part is
/// treated as an independent hemistich.
pub fn to_arudi_writing(verse: &NormalizedText, opts: &ScanOptions) -> Result<ArudiText, ScanError> {
    let coverage = diacritic_coverage(verse)?.value();
    if coverage < opts.min_coverage {
        return Err(ScanError::IncompleteDiacritization {
            coverage,
            required: opts.min_coverage,
            unmarked: normalize::coverage_detail(verse).unmarked,
        });
    }
    let mut rewriter = Rewriter { out: Vec::new(), opts };
    let mut ordinal = 0;
    for part in verse.units().split(|u| u.kind() == UnitKind::Separator) {
        let words: Vec<&[Unit]> = part.split(|u| !u.is_letter()).filter(|w| !w.is_empty()).collect();
        rewriter.segment(&words, ordinal);
        ordinal += words.iter().map(|w| w.len()).sum::<usize>();
    }
    Ok(ArudiText { letters: rewriter.out })
}

/// Maps Arudi writing to its binary pattern, one bit per letter.
pub fn to_binary(arudi: &ArudiText) -> Result<(BinaryPattern, ScansionTrace), ScanError> {
    if arudi.letters.is_empty() {
        return Err(ScanError::EmptyPattern);
    }
    let mut bits = String::with_capacity(arudi.letters.len());
    let mut trace = Vec::with_capacity(arudi.letters.len());
    for l in &arudi.letters {
        let bit = match l.mark {
            Some(DiacriticMark::Sukun) => '0',
            Some(m) if m.is_harakah() => '1',
            _ => return Err(ScanError::UnmarkedLetter { index: l.source, letter: l.letter }),
        };
        bits.push(bit);
        trace.push(TraceEntry { bit, letter: l.source, rule: l.rule });
    }
    let pattern = BinaryPattern::new(bits).expect("only 0/1 pushed");
    Ok((pattern, ScansionTrace(trace)))
}

pub fn scan_normalized(text: &NormalizedText, opts: &ScanOptions) -> Result<Scan, ScanError> {
    if text.units().iter().any(|u| u.kind() == UnitKind::Separator) {
        return Err(ScanError::SeparatorInHemistich);
    }
    let coverage = diacritic_coverage(text)?.value();
    let arudi = to_arudi_writing(text, opts)?;
    let (pattern, trace) = to_binary(&arudi)?;
    Ok(Scan { pattern, trace, coverage })
}

pub fn scan_hemistich_with(text: &str, opts: &ScanOptions) -> Result<Scan, ScanError> {
    scan_normalized(&normalize_unicode(text)?, opts)
}

pub fn scan_hemistich(text: &str) -> Result<Scan, ScanError> {
    scan_hemistich_with(text, &ScanOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaitPart {
    Sadr,
    Ajuz,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{part:?}: {source}")]
pub struct BaitScanError {
    pub part: BaitPart,
    pub source: ScanError,
}

pub fn scan_bait(sadr: &str, ajuz: &str, opts: &ScanOptions) -> Result<(Scan, Scan), BaitScanError> {
    let first = scan_hemistich_with(sadr, opts).map_err(|source| BaitScanError { part: BaitPart::Sadr, source })?;
    let second = scan_hemistich_with(ajuz, opts).map_err(|source| BaitScanError { part: BaitPart::Ajuz, source })?;
    Ok((first, second))
}
