use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CorpusError, Poem};
use crate::normalize::{dropout_with, normalize_unicode, strip_diacritics, HEMISTICH_SEPARATOR};

fn item_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Swaps the two hemistiches of each `sadr#ajuz` line with probability 0.5.
/// Each line draws from its own stream, so output is independent of the
/// thread count.
pub fn augment_swap(verses: &[String], seed: u64) -> Result<Vec<String>, CorpusError> {
    verses
        .par_iter()
        .enumerate()
        .map(|(index, verse)| {
            let mut parts = verse.split(HEMISTICH_SEPARATOR);
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(CorpusError::MissingSeparator { index });
            };
            if item_rng(seed, index).gen_bool(0.5) {
                Ok(format!("{}{}{}", b.trim(), HEMISTICH_SEPARATOR, a.trim()))
            } else {
                Ok(verse.clone())
            }
        })
        .collect()
}

/// Applies random diacritic dropout to each verse; verses that fail to
/// normalize are passed through unchanged.
pub fn dropout_verses(verses: &[String], rate: f64, seed: u64) -> Vec<String> {
    verses
        .par_iter()
        .enumerate()
        .map(|(index, verse)| match normalize_unicode(verse) {
            Ok(text) => dropout_with(&text, rate, &mut item_rng(seed, index)).to_string(),
            Err(_) => verse.clone(),
        })
        .collect()
}

/// Hemistich identity used for deduplication: normalized, diacritics
/// stripped, whitespace collapsed.
pub fn dedupe_key(hemistich: &str) -> String {
    match normalize_unicode(hemistich) {
        Ok(text) => strip_diacritics(&text).to_string(),
        Err(_) => hemistich.split_whitespace().collect::<Vec<_>>().join(" "),
    }
}

/// Drops training poems that share any hemistich with the test split.
pub fn dedupe_against(train: Vec<Poem>, test: &[Poem]) -> Vec<Poem> {
    let seen: HashSet<String> = test.iter().flat_map(|p| p.verses.iter()).map(|v| dedupe_key(v)).collect();
    train.into_iter().filter(|p| !p.verses.iter().any(|v| seen.contains(&dedupe_key(v)))).collect()
}

/// Per-class ceiling used when balancing the era corpus.
pub const MAX_CLASS_SIZE: usize = 50_000;
/// Poems are cut to this many baits before classification.
pub const MAX_POEM_BAITS: usize = 64;

/// Keeps at most `max` poems per class, first come first kept. Poems whose
/// key is `None` are dropped.
pub fn cap_classes<K: Eq + Hash>(poems: Vec<Poem>, max: usize, key: impl Fn(&Poem) -> Option<K>) -> Vec<Poem> {
    let mut seen: HashMap<K, usize> = HashMap::new();
    poems
        .into_iter()
        .filter(|p| {
            let Some(k) = key(p) else { return false };
            let n = seen.entry(k).or_default();
            *n += 1;
            *n <= max
        })
        .collect()
}

/// Era bucket index of a poem, when its era is known.
pub fn era_class(poem: &Poem) -> Option<u8> {
    poem.era.as_ref().and_then(|e| e.bucket()).map(|b| b.index)
}

/// Cuts each poem to its first `max_baits` baits.
pub fn truncate_poems(poems: Vec<Poem>, max_baits: usize) -> Vec<Poem> {
    poems
        .into_iter()
        .map(|mut p| {
            p.verses.truncate(2 * max_baits);
            p
        })
        .collect()
}
