mod common;

use common::{all_patterns, levenshtein, pat, random_pattern};
use qasida_core::matcher::{apply_script, edit_distance, edit_script, EditKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check(a: &str, b: &str) {
    let (pa, pb) = (pat(a), pat(b));
    let script = edit_script(&pa, &pb);
    assert_eq!(script.len(), levenshtein(a.as_bytes(), b.as_bytes()), "{a} -> {b}");
    assert_eq!(edit_distance(&pa, &pb), script.len());
    assert_eq!(apply_script(&pa, &script).unwrap(), pb, "{a} -> {b}: {script:?}");
    for op in script.ops() {
        match op.kind {
            EditKind::Insert => assert!(op.position <= a.len() && op.bit.is_some()),
            EditKind::Delete => assert!(op.position < a.len() && op.bit.is_none()),
            EditKind::Flip => assert!(op.position < a.len() && op.bit != Some(a.as_bytes()[op.position])),
        }
    }
}

#[test]
fn minimal_and_round_trips_up_to_length_six() {
    let all = all_patterns(6);
    for a in &all {
        for b in &all {
            check(a, b);
        }
    }
}

#[test]
fn minimal_and_round_trips_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..2000 {
        check(&random_pattern(&mut rng, 64), &random_pattern(&mut rng, 64));
    }
}
