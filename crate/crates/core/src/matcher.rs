//! Pattern similarity and minimal correction scripts.
//!
//! Similarity is the gestalt (Ratcliff/Obershelp) ratio with the exact block
//! selection of CPython's `difflib.SequenceMatcher`: the longest matching
//! block is found (lowest start in `a`, then in `b`, on ties) and the search
//! recurses on both sides. The ratio is `2·M / (|a| + |b|)` where `M` is the
//! total size of the matching blocks. Like `SequenceMatcher` it is not
//! symmetric in its arguments; callers pass the observed pattern first.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::meterdb::{MeterDbError, PatternDb};
use crate::pattern::BinaryPattern;

/// Right-hand lengths from which `SequenceMatcher` starts discarding popular elements.
const AUTOJUNK_MIN_LEN: usize = 200;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("observed pattern is empty")]
    EmptyPattern,
    #[error(transparent)]
    Db(#[from] MeterDbError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error("op {op} has position {position}, outside the observed pattern of length {len}")]
    InvalidPosition { op: usize, position: usize, len: usize },
    #[error("op {op} is out of order or conflicts with an earlier op at position {position}")]
    Misordered { op: usize, position: usize },
    #[error("op {op} flips position {position} to the bit it already has")]
    NoopFlip { op: usize, position: usize },
}

struct Matcher<'a> {
    a: &'a [u8],
    b: &'a [u8],
    /// Positions in `b` of each byte value, `positions[offsets[c]..offsets[c + 1]]`,
    /// ascending; popular bytes have an empty range.
    offsets: [usize; 257],
    positions: Vec<usize>,
    /// Run lengths of the previous and current row of `longest_match`,
    /// valid where the stamp equals that row's clock value.
    runs: [Vec<usize>; 2],
    stamps: [Vec<usize>; 2],
    clock: usize,
}

impl<'a> Matcher<'a> {
    fn new(a: &'a [u8], b: &'a [u8]) -> Self {
        let mut counts = [0usize; 256];
        for &c in b {
            counts[c as usize] += 1;
        }
        if b.len() >= AUTOJUNK_MIN_LEN {
            let ntest = b.len() / 100 + 1;
            for n in counts.iter_mut().filter(|n| **n > ntest) {
                *n = 0;
            }
        }
        let mut offsets = [0usize; 257];
        for c in 0..256 {
            offsets[c + 1] = offsets[c] + counts[c];
        }
        let mut fill = offsets;
        let mut positions = vec![0; offsets[256]];
        for (j, &c) in b.iter().enumerate() {
            let c = c as usize;
            if counts[c] > 0 {
                positions[fill[c]] = j;
                fill[c] += 1;
            }
        }
        let n = b.len();
        Matcher { a, b, offsets, positions, runs: [vec![0; n], vec![0; n]], stamps: [vec![0; n], vec![0; n]], clock: 0 }
    }

    fn longest_match(&mut self, alo: usize, ahi: usize, blo: usize, bhi: usize) -> (usize, usize, usize) {
        let (mut besti, mut bestj, mut bestsize) = (alo, blo, 0);
        // Skip a clock value so rows of an earlier call never look current.
        self.clock += 1;
        for i in alo..ahi {
            self.clock += 1;
            let now = self.clock;
            let (cur, prev) = (now % 2, (now + 1) % 2);
            let c = self.a[i] as usize;
            let js = &self.positions[self.offsets[c]..self.offsets[c + 1]];
            let start = js.partition_point(|&j| j < blo);
            for &j in &js[start..] {
                if j >= bhi {
                    break;
                }
                let k = match j.checked_sub(1) {
                    Some(p) if self.stamps[prev][p] == now - 1 => self.runs[prev][p] + 1,
                    _ => 1,
                };
                self.runs[cur][j] = k;
                self.stamps[cur][j] = now;
                if k > bestsize {
                    besti = i + 1 - k;
                    bestj = j + 1 - k;
                    bestsize = k;
                }
            }
        }
        // Popular elements are absent from the index but may still extend a block.
        while besti > alo && bestj > blo && self.a[besti - 1] == self.b[bestj - 1] {
            besti -= 1;
            bestj -= 1;
            bestsize += 1;
        }
        while besti + bestsize < ahi && bestj + bestsize < bhi && self.a[besti + bestsize] == self.b[bestj + bestsize] {
            bestsize += 1;
        }
        (besti, bestj, bestsize)
    }

    fn matching_total(&mut self) -> usize {
        let mut total = 0;
        let mut queue = vec![(0, self.a.len(), 0, self.b.len())];
        while let Some((alo, ahi, blo, bhi)) = queue.pop() {
            let (i, j, k) = self.longest_match(alo, ahi, blo, bhi);
            if k > 0 {
                total += k;
                if alo < i && blo < j {
                    queue.push((alo, i, blo, j));
                }
                if i + k < ahi && j + k < bhi {
                    queue.push((i + k, ahi, j + k, bhi));
                }
            }
        }
        total
    }
}

/// Total size of the gestalt matching blocks between `a` and `b`.
pub fn matching_characters(a: &[u8], b: &[u8]) -> usize {
    Matcher::new(a, b).matching_total()
}

pub fn ratio_bytes(a: &[u8], b: &[u8]) -> f64 {
    let length = a.len() + b.len();
    if length == 0 {
        return 1.0;
    }
    2.0 * matching_characters(a, b) as f64 / length as f64
}

/// Gestalt similarity in `[0, 1]`; `1.0` exactly when the patterns are equal.
pub fn similarity(a: &BinaryPattern, b: &BinaryPattern) -> f64 {
    ratio_bytes(a.as_bytes(), b.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Insert,
    Delete,
    Flip,
}

/// One correction against the observed pattern. `position` indexes the
/// observed pattern; an insert goes before that position (or at the end).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EditOp {
    pub kind: EditKind,
    #[serde(rename = "pos")]
    pub position: usize,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "bit_serde")]
    pub bit: Option<u8>,
}

mod bit_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bit: &Option<u8>, s: S) -> Result<S::Ok, S::Error> {
        match bit {
            Some(b) => s.serialize_str(if *b == b'1' { "1" } else { "0" }),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u8>, D::Error> {
        match Option::<String>::deserialize(d)?.as_deref() {
            None => Ok(None),
            Some("0") => Ok(Some(b'0')),
            Some("1") => Ok(Some(b'1')),
            Some(other) => Err(serde::de::Error::custom(format!("invalid bit {other:?}"))),
        }
    }
}

impl EditOp {
    pub fn insert(position: usize, bit: u8) -> Self {
        EditOp { kind: EditKind::Insert, position, bit: Some(bit) }
    }

    pub fn delete(position: usize) -> Self {
        EditOp { kind: EditKind::Delete, position, bit: None }
    }

    pub fn flip(position: usize, bit: u8) -> Self {
        EditOp { kind: EditKind::Flip, position, bit: Some(bit) }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EditScript(pub Vec<EditOp>);

impl EditScript {
    pub fn ops(&self) -> &[EditOp] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Suffix edit-distance table: `d[i][j]` is the distance between `a[i..]` and `b[j..]`.
fn suffix_distances(a: &[u8], b: &[u8]) -> Vec<Vec<usize>> {
    let (n, m) = (a.len(), b.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            d[i][j] = if i == n {
                m - j
            } else if j == m {
                n - i
            } else {
                let diag = d[i + 1][j + 1] + usize::from(a[i] != b[j]);
                diag.min(d[i][j + 1] + 1).min(d[i + 1][j] + 1)
            };
        }
    }
    d
}

pub fn edit_distance(a: &BinaryPattern, b: &BinaryPattern) -> usize {
    suffix_distances(a.as_bytes(), b.as_bytes())[0][0]
}

/// Minimal unit-cost script turning `observed` into `reference`. Walks the
/// alignment left to right, preferring a diagonal step (match or flip), then
/// an insertion, then a deletion.
pub fn edit_script(observed: &BinaryPattern, reference: &BinaryPattern) -> EditScript {
    let (a, b) = (observed.as_bytes(), reference.as_bytes());
    let d = suffix_distances(a, b);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut ops = Vec::with_capacity(d[0][0]);
    while i < n || j < m {
        if i < n && j < m && d[i][j] == d[i + 1][j + 1] + usize::from(a[i] != b[j]) {
            if a[i] != b[j] {
                ops.push(EditOp::flip(i, b[j]));
            }
            i += 1;
            j += 1;
        } else if j < m && d[i][j] == d[i][j + 1] + 1 {
            ops.push(EditOp::insert(i, b[j]));
            j += 1;
        } else {
            ops.push(EditOp::delete(i));
            i += 1;
        }
    }
    EditScript(ops)
}

/// Applies a script produced against `observed`.
pub fn apply_script(observed: &BinaryPattern, script: &EditScript) -> Result<BinaryPattern, ApplyError> {
    let a = observed.as_bytes();
    let mut out = Vec::with_capacity(a.len() + script.len());
    let mut next = 0; // next observed position not yet emitted
    let mut consumed_at: Option<usize> = None;
    for (op_index, op) in script.ops().iter().enumerate() {
        let limit = if op.kind == EditKind::Insert { a.len() } else { a.len().saturating_sub(1) };
        if op.position > limit || (op.kind != EditKind::Insert && a.is_empty()) {
            return Err(ApplyError::InvalidPosition { op: op_index, position: op.position, len: a.len() });
        }
        if op.position < next || consumed_at == Some(op.position) {
            return Err(ApplyError::Misordered { op: op_index, position: op.position });
        }
        out.extend_from_slice(&a[next..op.position]);
        next = op.position;
        match op.kind {
            EditKind::Insert => out.push(op.bit.unwrap_or(b'0')),
            EditKind::Delete => {
                next += 1;
                consumed_at = Some(op.position);
            }
            EditKind::Flip => {
                let bit = op.bit.unwrap_or(if a[op.position] == b'1' { b'0' } else { b'1' });
                if bit == a[op.position] {
                    return Err(ApplyError::NoopFlip { op: op_index, position: op.position });
                }
                out.push(bit);
                next += 1;
                consumed_at = Some(op.position);
            }
        }
    }
    out.extend_from_slice(&a[next..]);
    Ok(BinaryPattern::new(String::from_utf8(out).expect("ascii")).expect("bits"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub meter: usize,
    pub variant: BinaryPattern,
    pub similarity: f64,
    #[serde(rename = "ops")]
    pub script: EditScript,
}

/// Best variant of one meter: highest similarity, then smallest edit
/// distance, then earliest in enumeration order.
fn best_in_meter(observed: &BinaryPattern, db: &PatternDb, meter: usize) -> Result<MatchResult, MeterDbError> {
    let mut best: Option<(f64, usize, BinaryPattern)> = None;
    for variant in db.variants(meter)? {
        let score = similarity(observed, variant);
        let better = match &best {
            None => true,
            Some((s, _, _)) if score > *s => true,
            Some((s, dist, _)) if score == *s => edit_distance(observed, variant) < *dist,
            _ => false,
        };
        if better {
            let dist = edit_distance(observed, variant);
            best = Some((score, dist, variant.clone()));
        }
    }
    let (similarity, _, variant) = best.expect("every meter has at least one variant");
    let script = edit_script(observed, &variant);
    Ok(MatchResult { meter, variant, similarity, script })
}

/// Highest similarity of `observed` against any variant of each meter, in
/// meter index order.
pub fn meter_scores(observed: &BinaryPattern, db: &PatternDb) -> Result<Vec<(usize, f64)>, MatchError> {
    if observed.is_empty() {
        return Err(MatchError::EmptyPattern);
    }
    (0..db.templates().len())
        .into_par_iter()
        .map(|m| {
            let best = db.variants(m)?.iter().map(|v| similarity(observed, v)).fold(0.0, f64::max);
            Ok((m, best))
        })
        .collect()
}

fn rank(results: &mut [MatchResult]) {
    results.sort_by(|x, y| y.similarity.total_cmp(&x.similarity).then(x.meter.cmp(&y.meter)));
}

/// Searches every variant of the candidate meters (all meters when `None`)
/// and returns one result per meter, best first.
pub fn best_match(
    observed: &BinaryPattern,
    db: &PatternDb,
    candidates: Option<&[usize]>,
) -> Result<Vec<MatchResult>, MatchError> {
    if observed.is_empty() {
        return Err(MatchError::EmptyPattern);
    }
    let meters: Vec<usize> = match candidates {
        Some(c) => {
            let mut c = c.to_vec();
            c.sort_unstable();
            c.dedup();
            c
        }
        None => (0..db.templates().len()).collect(),
    };
    let mut results = meters.par_iter().map(|&m| best_in_meter(observed, db, m)).collect::<Result<Vec<_>, _>>()?;
    rank(&mut results);
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> BinaryPattern {
        s.parse().unwrap()
    }

    #[test]
    fn similarity_examples() {
        let taweel = p("11010110101011010110110");
        assert_eq!(similarity(&taweel, &taweel), 1.0);
        assert_eq!(similarity(&p("11010"), &p("11011")), 0.8);
        assert_eq!(similarity(&p(""), &p("")), 1.0);
        assert_eq!(similarity(&p(""), &p("1")), 0.0);
    }

    #[test]
    fn gestalt_ratio_is_order_sensitive() {
        // Same values as difflib.SequenceMatcher(None, a, b).ratio().
        assert_eq!(similarity(&p("101"), &p("01001")), 0.75);
        assert_eq!(similarity(&p("01001"), &p("101")), 0.5);
    }

    #[test]
    fn edit_script_examples() {
        assert!(edit_script(&p("11010"), &p("11010")).is_empty());
        assert_eq!(edit_script(&p("11011"), &p("11010")).ops(), &[EditOp::flip(4, b'0')]);
        assert_eq!(edit_script(&p("110100"), &p("11010")).ops(), &[EditOp::delete(5)]);
        assert_eq!(edit_script(&p("1101"), &p("11010")).ops(), &[EditOp::insert(4, b'0')]);
        assert_eq!(edit_script(&p(""), &p("10")).ops(), &[EditOp::insert(0, b'1'), EditOp::insert(0, b'0')]);
    }

    #[test]
    fn apply_examples() {
        let a = p("11011");
        assert_eq!(apply_script(&a, &EditScript::default()).unwrap(), a);
        let err = apply_script(&a, &EditScript(vec![EditOp::delete(5)])).unwrap_err();
        assert_eq!(err, ApplyError::InvalidPosition { op: 0, position: 5, len: 5 });
        let err = apply_script(&a, &EditScript(vec![EditOp::flip(0, b'1')])).unwrap_err();
        assert_eq!(err, ApplyError::NoopFlip { op: 0, position: 0 });
        let err = apply_script(&a, &EditScript(vec![EditOp::delete(3), EditOp::delete(1)])).unwrap_err();
        assert_eq!(err, ApplyError::Misordered { op: 1, position: 1 });
        let err = apply_script(&a, &EditScript(vec![EditOp::delete(3), EditOp::flip(3, b'0')])).unwrap_err();
        assert_eq!(err, ApplyError::Misordered { op: 1, position: 3 });
    }

    #[test]
    fn ops_serialize_compactly() {
        let json = serde_json::to_string(&EditScript(vec![EditOp::flip(4, b'0'), EditOp::delete(5)])).unwrap();
        assert_eq!(json, r#"[{"kind":"flip","pos":4,"bit":"0"},{"kind":"delete","pos":5}]"#);
        let back: EditScript = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), 2);
    }

    #[test]
    fn taweel_exact_and_filtered() {
        let db = PatternDb::seed();
        let taweel = db.canonical_pattern(0).unwrap();
        let results = best_match(&taweel, &db, None).unwrap();
        assert_eq!(results.len(), 16);
        assert_eq!(results[0].meter, 0);
        assert_eq!(results[0].similarity, 1.0);
        assert!(results[0].script.is_empty());
        assert!(results.windows(2).all(|w| w[0].similarity >= w[1].similarity));

        let only = best_match(&taweel, &db, Some(&[0])).unwrap();
        assert!(only.iter().all(|r| r.meter == 0));
        assert!(matches!(best_match(&p(""), &db, None), Err(MatchError::EmptyPattern)));
    }

    #[test]
    fn taweel_with_last_bit_flipped() {
        let db = PatternDb::seed();
        let mut bits = db.canonical_pattern(0).unwrap().to_string();
        bits.pop();
        bits.push('1');
        let observed = p(&bits);
        let top = &best_match(&observed, &db, None).unwrap()[0];
        assert!(top.similarity >= 44.0 / 46.0);
        assert!(top.script.len() <= 1);
        assert_eq!(apply_script(&observed, &top.script).unwrap(), top.variant);
    }

    fn bits(max: usize) -> impl Strategy<Value = BinaryPattern> {
        prop::collection::vec(prop::bool::ANY, 0..=max).prop_map(BinaryPattern::from_bits)
    }

    proptest! {
        #[test]
        fn similarity_bounds(a in bits(30), b in bits(30)) {
            let s = similarity(&a, &b);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(s == 1.0, a == b);
        }

        #[test]
        fn script_round_trips_and_is_minimal(a in bits(20), b in bits(20)) {
            let script = edit_script(&a, &b);
            prop_assert_eq!(script.len(), edit_distance(&a, &b));
            prop_assert_eq!(apply_script(&a, &script).unwrap(), b);
            for op in script.ops() {
                if op.kind == EditKind::Flip {
                    prop_assert_ne!(Some(a.as_bytes()[op.position]), op.bit);
                }
            }
        }

        #[test]
        fn filter_never_beats_full_search(a in bits(26).prop_filter("non-empty", |p| !p.is_empty()), m in 0usize..16) {
            let db = PatternDb::seed();
            let full = best_match(&a, &db, None).unwrap();
            let filtered = best_match(&a, &db, Some(&[m])).unwrap();
            prop_assert!(full[0].similarity >= filtered[0].similarity);
        }
    }
}
