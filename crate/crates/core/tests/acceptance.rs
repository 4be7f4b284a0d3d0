//! Acceptance suite: one PASS/FAIL line per criterion, with its runtime
//! against the pinned budget. Exits non-zero when any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{all_patterns, brute_ratio, gold_set, levenshtein, pat, random_pattern, random_rhythm_poem};
use qasida_core::classify::classify_hemistich;
use qasida_core::corpus::{
    augment_swap, build_vocab, clean, decode, dropout_verses, encode, poem_fields, CleanReport, Poem,
};
use qasida_core::matcher::{apply_script, best_match, edit_script, similarity};
use qasida_core::meterdb::{PatternDb, METER_COUNT};
use qasida_core::metrics::{arudi_report, der_wer, der_wer_counts, rhythm_eval, DiacritizationCounts};
use qasida_core::normalize::{normalize_unicode, random_diacritic_dropout, DiacriticMark, Marks, NormalizedText, Unit};
use qasida_core::scansion::{scan_hemistich, scan_hemistich_with, ScanOptions};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const TAWEEL: &str = "11010110101011010110110";

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, u64, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn taweel_canonical(db: &PatternDb) -> Outcome {
    let c = db.canonical_pattern(0).map_err(|e| e.to_string())?;
    ensure(c.as_str() == TAWEEL, || format!("got {c}"))?;
    Ok(format!("Taweel = {c}"))
}

fn foot_cross_oracle(db: &PatternDb) -> Outcome {
    let opts = ScanOptions { final_ishba: false, ..Default::default() };
    let mut exact = 0;
    for t in db.templates() {
        let ok = t.slots.iter().all(|s| {
            scan_hemistich_with(&s.foot.name, &opts).map(|scan| scan.pattern == s.foot.canonical).unwrap_or(false)
        });
        exact += usize::from(ok);
    }
    ensure(exact == METER_COUNT, || format!("{exact}/16 meters"))?;
    Ok(format!("{exact}/16 meters exact"))
}

fn similarity_oracle() -> Outcome {
    let all = all_patterns(8);
    let pats: Vec<_> = all.iter().map(|s| pat(s)).collect();
    let mismatches: usize = (0..all.len())
        .into_par_iter()
        .map(|i| {
            (0..all.len())
                .filter(|&j| similarity(&pats[i], &pats[j]) != brute_ratio(all[i].as_bytes(), all[j].as_bytes()))
                .count()
        })
        .sum();
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let random: Vec<(String, String)> =
        (0..10_000).map(|_| (random_pattern(&mut rng, 64), random_pattern(&mut rng, 64))).collect();
    let random_mismatches = random
        .par_iter()
        .filter(|(a, b)| similarity(&pat(a), &pat(b)) != brute_ratio(a.as_bytes(), b.as_bytes()))
        .count();
    ensure(mismatches + random_mismatches == 0, || {
        format!("{mismatches} exhaustive, {random_mismatches} random mismatches")
    })?;
    Ok(format!("{} exhaustive pairs and 10000 random pairs exact", all.len() * all.len()))
}

fn edit_script_oracle() -> Outcome {
    let check = |a: &str, b: &str| {
        let (pa, pb) = (pat(a), pat(b));
        let s = edit_script(&pa, &pb);
        s.len() == levenshtein(a.as_bytes(), b.as_bytes()) && apply_script(&pa, &s).ok() == Some(pb)
    };
    let all = all_patterns(8);
    let bad: usize = all.par_iter().map(|a| all.iter().filter(|b| !check(a, b)).count()).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(65);
    let random: Vec<(String, String)> =
        (0..10_000).map(|_| (random_pattern(&mut rng, 64), random_pattern(&mut rng, 64))).collect();
    let bad_random = random.par_iter().filter(|(a, b)| !check(a, b)).count();
    ensure(bad + bad_random == 0, || format!("{bad} exhaustive, {bad_random} random failures"))?;
    Ok(format!("{} exhaustive pairs and 10000 random pairs minimal and round-trip", all.len() * all.len()))
}

fn classification_property(db: &PatternDb) -> Outcome {
    for m in 0..METER_COUNT {
        let r = classify_hemistich(&db.canonical_pattern(m).unwrap(), db).map_err(|e| e.to_string())?;
        ensure(r.top().meter == m && r.top().score == 1.0, || format!("meter {m} top is {:?}", r.top()))?;
    }
    // Rank of Taweel per flipped position, frozen from an exhaustive run.
    let expected_rank = [0usize; 23];
    for (i, &expected) in expected_rank.iter().enumerate() {
        let r = classify_hemistich(&pat(&common::flip_bits_at(TAWEEL, i)), db).map_err(|e| e.to_string())?;
        let rank = r.meters().position(|m| m == 0).unwrap();
        ensure(rank < 3 && rank == expected, || format!("flip {i}: Taweel rank {rank}"))?;
    }
    Ok("16/16 canonical top-1 at 1.0; 23/23 flips keep Taweel in top 3".into())
}

fn gold_mini_set() -> Outcome {
    let gold = gold_set();
    ensure(gold.len() == 20, || format!("{} entries", gold.len()))?;
    let golds: Vec<_> = gold.iter().map(|g| pat(&g.pattern)).collect();
    let preds = gold
        .iter()
        .map(|g| scan_hemistich(&g.text).map(|s| s.pattern).map_err(|e| format!("{}: {e}", g.source)))
        .collect::<Result<Vec<_>, _>>()?;
    let r = arudi_report(&golds, &preds).map_err(|e| e.to_string())?;
    ensure(r.mean_similarity == 100.0 && r.exact_match == 100.0, || format!("{r:?}"))?;
    Ok(format!("mean {:.2}%, exact {:.2}% over {}", r.mean_similarity, r.exact_match, r.count))
}

fn der_case(words: &[Vec<u8>]) -> (NormalizedText, NormalizedText, DiacritizationCounts) {
    let (mut g, mut p) = (Vec::new(), Vec::new());
    let mut expected = DiacritizationCounts::default();
    for (wi, w) in words.iter().enumerate() {
        if wi > 0 {
            let space = Unit { ch: ' ', marks: Marks::NONE, source: 0 };
            g.push(space);
            p.push(space);
        }
        for &s in w {
            let (gm, pm) = match s {
                0 => (Marks::NONE, Marks::vowel(DiacriticMark::Damma)),
                1 => (Marks::vowel(DiacriticMark::Fatha), Marks::vowel(DiacriticMark::Fatha)),
                _ => (Marks::vowel(DiacriticMark::Fatha), Marks::vowel(DiacriticMark::Kasra)),
            };
            g.push(Unit { ch: 'ر', marks: gm, source: 0 });
            p.push(Unit { ch: 'ر', marks: pm, source: 0 });
        }
        let scored: Vec<u8> = w.iter().copied().filter(|&s| s != 0).collect();
        if let Some((_, body)) = scored.split_last() {
            expected.letters += scored.len() as u64;
            expected.letter_errors += scored.iter().filter(|&&s| s == 2).count() as u64;
            expected.words += 1;
            expected.word_errors += u64::from(scored.contains(&2));
            expected.letters_star += body.len() as u64;
            expected.letter_errors_star += body.iter().filter(|&&s| s == 2).count() as u64;
            if !body.is_empty() {
                expected.words_star += 1;
                expected.word_errors_star += u64::from(body.contains(&2));
            }
        }
    }
    (NormalizedText::from_units(g), NormalizedText::from_units(p), expected)
}

fn metrics(db: &PatternDb) -> Outcome {
    let same = normalize_unicode("قِفَا نَبْكِ مِنْ ذِكْرَى").unwrap();
    let s = der_wer(&same, &same).map_err(|e| e.to_string())?;
    ensure([s.der, s.wer, s.der_star, s.wer_star] == [0.0; 4], || format!("pred=gold gave {s:?}"))?;

    let words: Vec<Vec<u8>> = (1..=4u32)
        .flat_map(|len| {
            (0..3usize.pow(len)).map(move |mut n| {
                (0..len)
                    .map(|_| {
                        let d = (n % 3) as u8;
                        n /= 3;
                        d
                    })
                    .collect()
            })
        })
        .collect();
    let checked: usize = words
        .par_iter()
        .map(|w1| {
            let mut n = 0;
            let mut run = |input: &[Vec<u8>]| {
                let (g, p, expected) = der_case(input);
                assert_eq!(der_wer_counts(&g, &p).unwrap(), expected, "{input:?}");
                n += 1;
            };
            run(std::slice::from_ref(w1));
            for w2 in &words {
                run(&[w1.clone(), w2.clone()]);
                for w3 in &words {
                    run(&[w1.clone(), w2.clone(), w3.clone()]);
                }
            }
            n
        })
        .sum();

    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let fixtures: Vec<Vec<(usize, Poem)>> = (0..1000)
        .map(|_| {
            (0..rng.gen_range(1..=5))
                .map(|_| {
                    let m = rng.gen_range(0..METER_COUNT);
                    (m, random_rhythm_poem(db, m, 1, 5, &mut rng))
                })
                .collect()
        })
        .collect();
    let ordered = fixtures
        .par_iter()
        .map(|f| rhythm_eval(f, db, &ScanOptions::default()).map(|r| r.accuracy <= r.top3 && r.top3 <= r.top5))
        .collect::<Result<Vec<bool>, _>>()
        .map_err(|e| e.to_string())?;
    let bad = ordered.iter().filter(|ok| !**ok).count();
    ensure(bad == 0, || format!("{bad} rhythm fixtures violate accuracy <= top3 <= top5"))?;
    Ok(format!("pred=gold zero; {checked} oracle cases exact; 1000 rhythm fixtures ordered"))
}

fn corpus() -> Outcome {
    let long = "قِفَا نَبْكِ مِنْ ذِكْرَى حَبِيبٍ وَمَنْزِلِ";
    let fixture = |verses: &[&str], meter| Poem {
        verses: verses.iter().map(|s| s.to_string()).collect(),
        meter,
        ..Default::default()
    };
    let (_, report) = clean(vec![
        fixture(&[long, long, long], Some(0)),
        fixture(&[long, "مَا"], Some(0)),
        fixture(&[long, long], Some(16)),
    ]);
    let expected = CleanReport { input: 3, kept: 0, normalization: 0, odd_verses: 1, short_verse: 1, unknown_meter: 1 };
    ensure(report == expected && report.removed() + report.kept == report.input, || format!("{report:?}"))?;

    let letters: Vec<char> = ('\u{0621}'..='\u{063A}').chain('\u{0641}'..='\u{064A}').collect();
    let marks = ['\u{064E}', '\u{064F}', '\u{0650}', '\u{0652}', '\u{064B}', '\u{064C}', '\u{064D}'];
    let mut rng = ChaCha8Rng::seed_from_u64(121);
    let word = |rng: &mut ChaCha8Rng| -> String {
        (0..rng.gen_range(3..=5))
            .map(|_| {
                let mut s = letters.choose(rng).unwrap().to_string();
                if rng.gen_bool(0.25) {
                    s.push('\u{0651}');
                }
                if rng.gen_bool(0.8) {
                    s.push(*marks.choose(rng).unwrap());
                }
                s
            })
            .collect()
    };
    let raw: Vec<Poem> = (0..1000)
        .map(|_| {
            let verses = (0..2 * rng.gen_range(1..=4))
                .map(|_| (0..rng.gen_range(2..=5)).map(|_| word(&mut rng)).collect::<Vec<_>>().join(" "))
                .collect();
            let theme = rng.gen_bool(0.8).then(|| rng.gen_range(0..18));
            Poem { meter: Some(rng.gen_range(0..16)), theme, verses, ..Default::default() }
        })
        .collect();
    let (poems, report) = clean(raw);
    ensure(report.kept == 1000, || format!("generator produced unclean poems: {report:?}"))?;
    let vocab = build_vocab(&poems);
    for p in &poems {
        let text = encode(p, &vocab, None).map_err(|e| e.to_string())?;
        let fields = decode(&text, &vocab).map_err(|e| e.to_string())?;
        ensure(fields == poem_fields(p, None).unwrap(), || format!("round trip differs for {text:?}"))?;
        let again = qasida_core::corpus::encode_fields(&fields, &vocab).map_err(|e| e.to_string())?;
        ensure(again == text, || "re-encoding is not byte-identical".into())?;
    }

    let mut chars: Vec<char> = letters.clone();
    chars.extend('\u{064B}'..='\u{0652}');
    chars.push(' ');
    chars.extend('a'..='y');
    let corpus: Vec<Poem> =
        chars.chunks(7).map(|c| Poem::from_baits([(c.iter().collect::<String>(), String::new())])).collect();
    let v = build_vocab(&corpus);
    ensure(chars.len() == 70 && v.len() == 121 && v.specials().len() == 51, || format!("vocab size {}", v.len()))?;
    Ok("3 rule fixtures attributed; 1000 poems round-trip; vocab 70 + 51 = 121".into())
}

fn determinism(db: &PatternDb) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let poems: Vec<(usize, Poem)> = (0..60)
        .map(|_| {
            let m = rng.gen_range(0..METER_COUNT);
            (m, random_rhythm_poem(db, m, 2, 3, &mut rng))
        })
        .collect();
    let lines: Vec<String> = poems.iter().flat_map(|(_, p)| p.bait_lines()).collect();
    let verses: Vec<String> = poems.iter().flat_map(|(_, p)| p.verses.clone()).collect();
    let text = normalize_unicode(&verses.join(" ")).unwrap();
    let run = || {
        (
            augment_swap(&lines, 1).unwrap(),
            dropout_verses(&verses, 0.2, 2),
            random_diacritic_dropout(&text, 0.2, 3).to_string(),
            best_match(&pat("110101101010110101101"), db, None).unwrap(),
            rhythm_eval(&poems, db, &ScanOptions::default()).unwrap(),
        )
    };
    let pool = |n: usize| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let a = pool(1).install(run);
    let b = pool(1).install(run);
    let c = pool(4).install(run);
    ensure(a == b, || "two runs differ".into())?;
    ensure(a == c, || "1 and 4 threads differ".into())?;
    Ok("swap, dropout, matching and rhythm identical across runs and 1/4 threads".into())
}

fn main() {
    let db = PatternDb::seed();
    let criteria: Vec<Criterion<'_>> = vec![
        ("taweel-canonical", 1, Box::new(|| taweel_canonical(&db))),
        ("tafeelah-cross-oracle", 1, Box::new(|| foot_cross_oracle(&db))),
        ("similarity-oracle", 30, Box::new(similarity_oracle)),
        ("edit-script-oracle", 60, Box::new(edit_script_oracle)),
        ("classification-property", 10, Box::new(|| classification_property(&db))),
        ("arudi-gold-mini-set", 5, Box::new(gold_mini_set)),
        ("metrics", 120, Box::new(|| metrics(&db))),
        ("corpus", 60, Box::new(corpus)),
        ("determinism", 60, Box::new(|| determinism(&db))),
    ];
    let mut failed = 0;
    for (name, budget, check) in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*budget);
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {name:<24} {:>7.2}s / {budget}s  {detail}", elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
