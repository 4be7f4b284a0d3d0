//! Poem records, JSONL interchange, cleaning and augmentation, and the
//! special-token prompt format used for conditional generation.

mod augment;
mod clean;
mod poem;
mod prompt;

use thiserror::Error;

pub use augment::{
    augment_swap, cap_classes, dedupe_against, dedupe_key, dropout_verses, era_class, truncate_poems, MAX_CLASS_SIZE,
    MAX_POEM_BAITS,
};
pub use clean::{clean, filter_by_coverage, CleanReport, RemovalRule, MIN_VERSE_CHARS};
pub use poem::{load_jsonl, read_jsonl, write_jsonl, Era, LoadMode, Loaded, Poem, PoemId, SkippedLine};
pub use prompt::{
    build_vocab, decode, encode, encode_fields, encode_tokens, poem_fields, read_encoded_corpus, resolve_meter,
    tokenize, write_encoded_corpus, PromptFields, SpecialTokenVocab, ENDOFTEXT, SPECIAL_TOKEN_COUNT, THEME_TOKENS,
    UNKNOWN_THEME,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("verse {index} does not contain exactly one '#' separator")]
    MissingSeparator { index: usize },
    #[error("character {ch:?} (U+{:04X}) is not in the vocabulary", *.ch as u32)]
    UnencodableCharacter { ch: char },
    #[error("verse text contains a reserved token sequence")]
    ReservedSequence,
    #[error("malformed template: {0}")]
    MalformedTemplate(String),
    #[error("poem has no meter label and none could be predicted")]
    MissingMeter,
    #[error("meter label {0} is not one of the 16 classes")]
    UnknownMeter(i64),
    #[error("theme id {0} is outside 0..=17")]
    InvalidTheme(i64),
    #[error("meter label {label} disagrees with the classifier prediction {predicted}")]
    MeterDisagreement { label: usize, predicted: usize },
    #[error("poem has no verses")]
    EmptyPoem,
    #[error("malformed vocabulary file: {0}")]
    MalformedVocab(String),
}
