//! Independent reference implementations and fixture builders shared by
//! the integration tests.
#![allow(dead_code)]

use qasida_core::corpus::Poem;
use qasida_core::meterdb::PatternDb;
use qasida_core::BinaryPattern;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Deserialize;

/// Total size of the matching blocks found by plain Ratcliff/Obershelp: the
/// longest common substring from a full suffix table (first by start in `a`,
/// then in `b`), recursing on both sides. No popular-element pruning, so only
/// valid for right-hand inputs under 200 elements.
pub fn brute_gestalt_matches(a: &[u8], b: &[u8]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    let (mut bi, mut bj, mut bk) = (0, 0, 0);
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            if a[i - 1] == b[j - 1] {
                let k = table[i - 1][j - 1] + 1;
                table[i][j] = k;
                if k > bk || (k == bk && (i - k, j - k) < (bi, bj)) {
                    (bi, bj, bk) = (i - k, j - k, k);
                }
            }
        }
    }
    if bk == 0 {
        return 0;
    }
    bk + brute_gestalt_matches(&a[..bi], &b[..bj]) + brute_gestalt_matches(&a[bi + bk..], &b[bj + bk..])
}

pub fn brute_ratio(a: &[u8], b: &[u8]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        1.0
    } else {
        2.0 * brute_gestalt_matches(a, b) as f64 / total as f64
    }
}

/// Wagner-Fischer table with unit costs.
pub fn levenshtein(a: &[u8], b: &[u8]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, &x) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, &y) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + usize::from(x != y)).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Every binary string of length `0..=max_len`.
pub fn all_patterns(max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for len in 1..=max_len {
        for n in 0..(1u32 << len) {
            out.push((0..len).rev().map(|i| if n >> i & 1 == 1 { '1' } else { '0' }).collect());
        }
    }
    out
}

pub fn random_pattern(rng: &mut impl Rng, max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect()
}

pub fn pat(s: &str) -> BinaryPattern {
    s.parse().unwrap()
}

#[derive(Debug, Deserialize)]
pub struct GoldEntry {
    pub meter: usize,
    pub source: String,
    pub text: String,
    pub pattern: String,
}

pub fn gold_set() -> Vec<GoldEntry> {
    let text = include_str!("../../data/gold_arudi.json");
    serde_json::from_str(text).unwrap()
}

const CONSONANTS: [char; 12] = ['ب', 'ت', 'ج', 'د', 'ر', 'س', 'ع', 'ف', 'ق', 'ك', 'م', 'ن'];
const FATHA: char = '\u{064E}';
const SUKUN: char = '\u{0652}';

/// Fully marked text whose scansion is `bits` (plus a closing sukun when
/// `bits` ends in a harakah): one letter per bit, harakah for 1, sukun for
/// 0, split into words of at most five letters that start on a harakah.
pub fn text_for_pattern(bits: &str) -> String {
    let mut out = String::new();
    let mut in_word = 0;
    for (i, b) in bits.chars().enumerate() {
        if b == '1' && in_word >= 3 {
            out.push(' ');
            in_word = 0;
        }
        out.push(CONSONANTS[i % CONSONANTS.len()]);
        out.push(if b == '1' { FATHA } else { SUKUN });
        in_word += 1;
    }
    out
}

pub fn random_variant(db: &PatternDb, meter: usize, rng: &mut impl Rng) -> String {
    let variants: Vec<BinaryPattern> = db.enumerate_variants(meter).unwrap().collect();
    variants.choose(rng).unwrap().as_str().to_string()
}

pub fn flip_bits(bits: &str, flips: usize, rng: &mut impl Rng) -> String {
    let mut v: Vec<u8> = bits.bytes().collect();
    for _ in 0..flips {
        let i = rng.gen_range(0..v.len());
        v[i] = if v[i] == b'1' { b'0' } else { b'1' };
    }
    String::from_utf8(v).unwrap()
}

/// A poem of `baits` baits, every hemistich a variant of `meter` with up to
/// `max_flips` random bit flips, rendered as text.
pub fn random_rhythm_poem(db: &PatternDb, meter: usize, baits: usize, max_flips: usize, rng: &mut impl Rng) -> Poem {
    let verses = (0..baits * 2)
        .map(|_| {
            let bits = random_variant(db, meter, rng);
            let flips = rng.gen_range(0..=max_flips);
            text_for_pattern(&flip_bits(&bits, flips, rng))
        })
        .collect();
    Poem { meter: Some(meter as i64), verses, ..Default::default() }
}

pub fn flip_bits_at(bits: &str, i: usize) -> String {
    let mut v: Vec<u8> = bits.bytes().collect();
    v[i] = if v[i] == b'1' { b'0' } else { b'1' };
    String::from_utf8(v).unwrap()
}
