//! Unicode normalization and diacritic handling for Arabic verse.
//!
//! Raw text is folded into a [`NormalizedText`]: a sequence of units, each a
//! base letter with its attached marks, a single space, or the `#` hemistich
//! separator. Presentation forms are folded to base letters, tatweel is
//! removed and every diacritic is attached to the letter before it.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::char::canonical_combining_class;
use unicode_normalization::UnicodeNormalization;

pub const TATWEEL: char = '\u{0640}';
pub const HEMISTICH_SEPARATOR: char = '#';

pub const ALEF: char = '\u{0627}';
pub const ALEF_MADDA: char = '\u{0622}';
pub const ALEF_WASLA: char = '\u{0671}';
pub const ALEF_MAQSURA: char = '\u{0649}';
pub const HAMZA: char = '\u{0621}';
pub const WAW: char = '\u{0648}';
pub const YA: char = '\u{064A}';
pub const LAM: char = '\u{0644}';
pub const NUN: char = '\u{0646}';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("diacritic U+{codepoint:04X} at byte offset {offset} has no preceding letter")]
    OrphanDiacritic { offset: usize, codepoint: u32 },
    #[error("text contains no letters")]
    EmptyText,
    #[error("text contains no letters that are expected to carry diacritics")]
    NoEligibleLetters,
}

/// The eight diacritic kinds recognized by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiacriticMark {
    Fatha,
    Damma,
    Kasra,
    FathaTanween,
    DammaTanween,
    KasraTanween,
    Sukun,
    Shadda,
}

impl DiacriticMark {
    pub const ALL: [DiacriticMark; 8] = [
        DiacriticMark::Fatha,
        DiacriticMark::Damma,
        DiacriticMark::Kasra,
        DiacriticMark::FathaTanween,
        DiacriticMark::DammaTanween,
        DiacriticMark::KasraTanween,
        DiacriticMark::Sukun,
        DiacriticMark::Shadda,
    ];

    pub fn from_char(c: char) -> Option<Self> {
        Some(match c {
            '\u{064E}' => DiacriticMark::Fatha,
            '\u{064F}' => DiacriticMark::Damma,
            '\u{0650}' => DiacriticMark::Kasra,
            '\u{064B}' => DiacriticMark::FathaTanween,
            '\u{064C}' => DiacriticMark::DammaTanween,
            '\u{064D}' => DiacriticMark::KasraTanween,
            '\u{0652}' => DiacriticMark::Sukun,
            '\u{0651}' => DiacriticMark::Shadda,
            _ => return None,
        })
    }

    pub fn as_char(self) -> char {
        match self {
            DiacriticMark::Fatha => '\u{064E}',
            DiacriticMark::Damma => '\u{064F}',
            DiacriticMark::Kasra => '\u{0650}',
            DiacriticMark::FathaTanween => '\u{064B}',
            DiacriticMark::DammaTanween => '\u{064C}',
            DiacriticMark::KasraTanween => '\u{064D}',
            DiacriticMark::Sukun => '\u{0652}',
            DiacriticMark::Shadda => '\u{0651}',
        }
    }

    /// Short vowels and the tanween forms.
    pub fn is_harakah(self) -> bool {
        !matches!(self, DiacriticMark::Sukun | DiacriticMark::Shadda)
    }

    pub fn is_tanween(self) -> bool {
        matches!(self, DiacriticMark::FathaTanween | DiacriticMark::DammaTanween | DiacriticMark::KasraTanween)
    }

    /// The plain short vowel underlying a tanween mark; other marks map to themselves.
    pub fn base_vowel(self) -> Self {
        match self {
            DiacriticMark::FathaTanween => DiacriticMark::Fatha,
            DiacriticMark::DammaTanween => DiacriticMark::Damma,
            DiacriticMark::KasraTanween => DiacriticMark::Kasra,
            other => other,
        }
    }
}

/// Marks carried by one letter: an optional gemination flag and at most one
/// vowel-or-sukun mark.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Marks {
    pub shadda: bool,
    pub vowel: Option<DiacriticMark>,
}

impl Marks {
    pub const NONE: Marks = Marks { shadda: false, vowel: None };

    pub fn vowel(mark: DiacriticMark) -> Self {
        Marks { shadda: false, vowel: Some(mark) }
    }

    pub fn is_empty(&self) -> bool {
        !self.shadda && self.vowel.is_none()
    }

    /// Adds a mark; a second vowel mark replaces the first.
    pub fn insert(&mut self, mark: DiacriticMark) {
        if mark == DiacriticMark::Shadda {
            self.shadda = true;
        } else {
            self.vowel = Some(mark);
        }
    }

    /// Marks in serialization order: shadda first, then the vowel.
    pub fn iter(&self) -> impl Iterator<Item = DiacriticMark> + '_ {
        self.shadda.then_some(DiacriticMark::Shadda).into_iter().chain(self.vowel)
    }

    pub fn has_harakah(&self) -> bool {
        self.vowel.is_some_and(DiacriticMark::is_harakah)
    }

    pub fn has_sukun(&self) -> bool {
        self.vowel == Some(DiacriticMark::Sukun)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitKind {
    Letter,
    Space,
    Separator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Unit {
    pub ch: char,
    pub marks: Marks,
    /// Byte offset of the unit's base character in the source string.
    pub source: usize,
}

impl Unit {
    pub fn kind(&self) -> UnitKind {
        match self.ch {
            ' ' => UnitKind::Space,
            HEMISTICH_SEPARATOR => UnitKind::Separator,
            _ => UnitKind::Letter,
        }
    }

    pub fn is_letter(&self) -> bool {
        self.kind() == UnitKind::Letter
    }
}

/// Canonical in-memory form of Arabic verse text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct NormalizedText {
    units: Vec<Unit>,
}

impl NormalizedText {
    pub fn from_units(units: Vec<Unit>) -> Self {
        NormalizedText { units }
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn into_units(self) -> Vec<Unit> {
        self.units
    }

    pub fn letters(&self) -> impl Iterator<Item = &Unit> + '_ {
        self.units.iter().filter(|u| u.is_letter())
    }

    pub fn letter_count(&self) -> usize {
        self.letters().count()
    }

    /// Base letters only, with word spaces and separators kept.
    pub fn skeleton(&self) -> String {
        self.units.iter().map(|u| u.ch).collect()
    }

    pub fn mark_count(&self) -> usize {
        self.letters().map(|u| u.marks.iter().count()).sum()
    }

    /// Splits into words, each a run of letters between spaces or separators.
    pub fn words(&self) -> Vec<&[Unit]> {
        self.units.split(|u| !u.is_letter()).filter(|w| !w.is_empty()).collect()
    }

    /// Splits on `#` into hemistich texts, trimming surrounding spaces.
    pub fn hemistiches(&self) -> Vec<NormalizedText> {
        self.units
            .split(|u| u.kind() == UnitKind::Separator)
            .map(|part| {
                let start = part.iter().position(|u| u.is_letter()).unwrap_or(part.len());
                let end = part.iter().rposition(|u| u.is_letter()).map_or(start, |i| i + 1);
                NormalizedText::from_units(part[start..end.max(start)].to_vec())
            })
            .collect()
    }
}

impl fmt::Display for NormalizedText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use fmt::Write;
        for unit in &self.units {
            f.write_char(unit.ch)?;
            for mark in unit.marks.iter() {
                f.write_char(mark.as_char())?;
            }
        }
        Ok(())
    }
}

/// Arabic base letters accepted by the engine, after folding.
pub fn is_arabic_letter(c: char) -> bool {
    matches!(c, '\u{0621}'..='\u{063A}' | '\u{0641}'..='\u{064A}' | ALEF_WASLA)
}

fn fold_letter(c: char) -> char {
    match c {
        // Farsi yeh and keheh are common keyboard substitutes.
        '\u{06CC}' => YA,
        '\u{06A9}' => '\u{0643}',
        other => other,
    }
}

fn is_presentation_form(c: char) -> bool {
    matches!(c, '\u{FB50}'..='\u{FDFF}' | '\u{FE70}'..='\u{FEFF}')
}

/// Folds presentation forms through their compatibility decomposition,
/// discarding the spacing and tatweel carriers of isolated/medial mark forms.
fn expand_presentation_forms(raw: &str) -> Vec<(char, usize)> {
    let mut out = Vec::with_capacity(raw.len());
    for (offset, c) in raw.char_indices() {
        if is_presentation_form(c) {
            out.extend(std::iter::once(c).nfkc().filter(|&d| d != ' ' && d != TATWEEL).map(|d| (d, offset)));
        } else {
            out.push((c, offset));
        }
    }
    out
}

fn is_combining(c: char) -> bool {
    canonical_combining_class(c) != 0
}

/// Normalizes raw UTF-8 into a [`NormalizedText`].
///
/// Non-Arabic symbols other than `#` and whitespace are dropped, whitespace
/// runs collapse to one space, and marks outside the eight recognized kinds
/// are discarded.
pub fn normalize_unicode(raw: &str) -> Result<NormalizedText, NormalizeError> {
    let chars = expand_presentation_forms(raw);
    let mut units: Vec<Unit> = Vec::new();
    // Whether the most recent kept unit can receive marks; false after a
    // dropped symbol so its marks are reported rather than misattached.
    let mut can_attach = false;

    let mut i = 0;
    while i < chars.len() {
        let (base, offset) = chars[i];
        let mut j = i + 1;
        while j < chars.len() && is_combining(chars[j].0) {
            j += 1;
        }
        let mut cluster: Vec<char> = if is_combining(base) {
            // Leading marks without a base character.
            j = i + 1;
            vec![base]
        } else {
            chars[i..j].iter().map(|&(c, _)| c).collect::<String>().nfc().collect()
        };

        let head = cluster[0];
        let marks: Vec<(char, usize)> = if is_combining(head) {
            vec![(head, offset)]
        } else {
            let tail = cluster.split_off(1);
            let mark_offsets = chars[i + 1..j].iter().map(|&(_, o)| o);
            // Composition may shorten the cluster; offsets past the end reuse the base.
            tail.into_iter().zip(mark_offsets.chain(std::iter::repeat(offset))).collect()
        };

        if !is_combining(head) {
            let head = fold_letter(head);
            if head == TATWEEL {
                // Removed; marks fall through to the preceding letter.
            } else if is_arabic_letter(head) {
                units.push(Unit { ch: head, marks: Marks::NONE, source: offset });
                can_attach = true;
            } else if head.is_whitespace() {
                if matches!(units.last(), Some(u) if u.kind() != UnitKind::Space) {
                    units.push(Unit { ch: ' ', marks: Marks::NONE, source: offset });
                }
                can_attach = false;
            } else if head == HEMISTICH_SEPARATOR {
                units.push(Unit { ch: HEMISTICH_SEPARATOR, marks: Marks::NONE, source: offset });
                can_attach = false;
            } else {
                can_attach = false;
            }
        }

        for (mark_char, mark_offset) in marks {
            let Some(mark) = DiacriticMark::from_char(mark_char) else {
                continue;
            };
            match units.last_mut() {
                Some(unit) if can_attach && unit.is_letter() => unit.marks.insert(mark),
                _ => return Err(NormalizeError::OrphanDiacritic { offset: mark_offset, codepoint: mark_char as u32 }),
            }
        }
        i = j;
    }

    if matches!(units.last(), Some(u) if u.kind() == UnitKind::Space) {
        units.pop();
    }
    Ok(NormalizedText { units })
}

pub fn strip_diacritics(text: &NormalizedText) -> NormalizedText {
    NormalizedText { units: text.units.iter().map(|u| Unit { marks: Marks::NONE, ..*u }).collect() }
}

/// Letters that conventionally carry no mark in diacritized text, regardless
/// of context: bare alef, alef wasla, alef madda, alef maqsura and hamza on
/// the line.
pub fn is_conventionally_unmarked(c: char) -> bool {
    matches!(c, ALEF | ALEF_WASLA | ALEF_MADDA | ALEF_MAQSURA | HAMZA)
}

/// Index of the definite-article alef in `word`, if the word starts with
/// `ال` directly or behind a one-letter voweled proclitic (و ف ب ك).
pub(crate) fn article_alef(word: &[Unit]) -> Option<usize> {
    let is_lam_article = |k: usize| {
        word.get(k + 1).is_some_and(|u| u.ch == LAM && (u.marks.vowel.is_none() || u.marks.has_sukun()))
            && word.len() > k + 2
    };
    let is_bare_alef = |u: &Unit| (u.ch == ALEF && u.marks.is_empty()) || u.ch == ALEF_WASLA;
    if is_bare_alef(&word[0]) && is_lam_article(0) {
        return Some(0);
    }
    if word.len() > 1
        && matches!(word[0].ch, '\u{0648}' | '\u{0641}' | '\u{0628}' | '\u{0643}')
        && word[0].marks.has_harakah()
        && is_bare_alef(&word[1])
        && is_lam_article(1)
    {
        return Some(1);
    }
    None
}

/// Whether letter `k` of `word` is expected to carry no mark in fully
/// diacritized text: the fixed set of [`is_conventionally_unmarked`] letters,
/// a bare waw/ya lengthening the preceding damma/kasra, and the article lam
/// assimilated into a following geminated letter.
pub(crate) fn exempt_from_marking(word: &[Unit], k: usize) -> bool {
    let unit = &word[k];
    if is_conventionally_unmarked(unit.ch) {
        return true;
    }
    if !unit.marks.is_empty() {
        return false;
    }
    let prev_vowel = k.checked_sub(1).and_then(|p| word[p].marks.vowel);
    match unit.ch {
        WAW if prev_vowel == Some(DiacriticMark::Damma) => true,
        YA if prev_vowel == Some(DiacriticMark::Kasra) => true,
        LAM => article_alef(word).is_some_and(|a| a + 1 == k) && word.get(k + 1).is_some_and(|u| u.marks.shadda),
        _ => false,
    }
}

/// Fraction of mark-bearing letters that actually carry a vowel or sukun.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CoverageRatio(f64);

impl CoverageRatio {
    pub fn new(value: f64) -> Self {
        CoverageRatio(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Per-letter coverage detail: eligible letter ordinals and which of them lack a mark.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoverageDetail {
    pub eligible: usize,
    pub marked: usize,
    /// Letter ordinals (0-based over all letters) that are eligible but unmarked.
    pub unmarked: Vec<usize>,
}

pub fn coverage_detail(text: &NormalizedText) -> CoverageDetail {
    let mut detail = CoverageDetail::default();
    let mut ordinal = 0;
    for word in text.words() {
        for k in 0..word.len() {
            if !exempt_from_marking(word, k) {
                detail.eligible += 1;
                if word[k].marks.vowel.is_some() {
                    detail.marked += 1;
                } else {
                    detail.unmarked.push(ordinal);
                }
            }
            ordinal += 1;
        }
    }
    detail
}

pub fn diacritic_coverage(text: &NormalizedText) -> Result<CoverageRatio, NormalizeError> {
    if text.letter_count() == 0 {
        return Err(NormalizeError::EmptyText);
    }
    let detail = coverage_detail(text);
    if detail.eligible == 0 {
        return Err(NormalizeError::NoEligibleLetters);
    }
    Ok(CoverageRatio::new(detail.marked as f64 / detail.eligible as f64))
}

/// Removes each letter's whole mark set with probability `rate`.
pub fn random_diacritic_dropout(text: &NormalizedText, rate: f64, seed: u64) -> NormalizedText {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    dropout_with(text, rate, &mut rng)
}

pub(crate) fn dropout_with(text: &NormalizedText, rate: f64, rng: &mut impl Rng) -> NormalizedText {
    let rate = rate.clamp(0.0, 1.0);
    let units = text
        .units
        .iter()
        .map(|u| {
            if u.is_letter() && !u.marks.is_empty() && rng.gen_bool(rate) {
                Unit { marks: Marks::NONE, ..*u }
            } else {
                *u
            }
        })
        .collect();
    NormalizedText { units }
}
