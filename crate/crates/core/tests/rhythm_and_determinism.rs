mod common;

use common::random_rhythm_poem;
use qasida_core::corpus::{augment_swap, clean, dropout_verses, Poem};
use qasida_core::matcher::best_match;
use qasida_core::meterdb::PatternDb;
use qasida_core::metrics::rhythm_eval;
use qasida_core::normalize::{normalize_unicode, random_diacritic_dropout};
use qasida_core::scansion::ScanOptions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn canonical_poems_score_perfectly() {
    let db = PatternDb::seed();
    let poems: Vec<(usize, Poem)> = (0..16)
        .map(|m| {
            let text = common::text_for_pattern(db.canonical_pattern(m).unwrap().as_str());
            (m, Poem::from_baits([(text.clone(), text)]))
        })
        .collect();
    let r = rhythm_eval(&poems, &db, &ScanOptions::default()).unwrap();
    assert_eq!((r.accuracy, r.top3, r.top5, r.failed), (100.0, 100.0, 100.0, 0));
    assert_eq!(r.confusion.correct(), 16);
}

#[test]
fn unscannable_poems_count_as_failures() {
    let db = PatternDb::seed();
    let poems = vec![(0, Poem::from_baits([("قفا نبك", "من ذكرى")]))];
    let r = rhythm_eval(&poems, &db, &ScanOptions::default()).unwrap();
    assert_eq!((r.total, r.failed, r.accuracy, r.top5), (1, 1, 0.0, 0.0));
    assert_eq!(r.confusion.total(), 0);
}

#[test]
fn top_k_ordering_on_random_fixtures() {
    let db = PatternDb::seed();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let poems: Vec<(usize, Poem)> = (0..10)
            .map(|_| {
                let m = rng.gen_range(0..16);
                (m, random_rhythm_poem(&db, m, rng.gen_range(1..=2), 4, &mut rng))
            })
            .collect();
        let r = rhythm_eval(&poems, &db, &ScanOptions::default()).unwrap();
        assert!(r.accuracy <= r.top3 && r.top3 <= r.top5, "{r:?}");
        assert_eq!(r.confusion.total() as usize, r.total - r.failed);
    }
}

#[test]
fn seeded_operations_repeat_across_runs_and_thread_counts() {
    let db = PatternDb::seed();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let poems: Vec<(usize, Poem)> = (0..40)
        .map(|_| {
            let m = rng.gen_range(0..16);
            (m, random_rhythm_poem(&db, m, 2, 3, &mut rng))
        })
        .collect();
    let lines: Vec<String> = poems.iter().flat_map(|(_, p)| p.bait_lines()).collect();
    let verses: Vec<String> = poems.iter().flat_map(|(_, p)| p.verses.clone()).collect();
    let text = normalize_unicode(&verses.join(" ")).unwrap();
    let observed = common::pat("1101011010101101011011");

    let run = || {
        (
            augment_swap(&lines, 11).unwrap(),
            dropout_verses(&verses, 0.3, 12),
            random_diacritic_dropout(&text, 0.3, 13).to_string(),
            best_match(&observed, &db, None).unwrap(),
            rhythm_eval(&poems, &db, &ScanOptions::default()).unwrap(),
            clean(poems.iter().map(|(_, p)| p.clone()).collect()),
        )
    };
    let first = in_pool(1, run);
    assert_eq!(first, in_pool(1, run));
    assert_eq!(first, in_pool(4, run));
    assert_ne!(first.0, augment_swap(&lines, 12).unwrap());
}
