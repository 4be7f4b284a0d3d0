use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::CorpusError;
use crate::classify::{bucket_era, EraBucket, EraInput};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoemId {
    Number(i64),
    Text(String),
}

/// Era as stored in the corpus: a Hijri year or a named period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Era {
    Year(i32),
    Named(String),
}

impl Era {
    pub fn bucket(&self) -> Option<EraBucket> {
        match self {
            Era::Year(y) => Some(bucket_era(EraInput::Year(*y))),
            Era::Named(name) => {
                let n = name.trim().to_lowercase();
                let pre_islamic = ["pre-islamic", "pre_islamic", "preislamic", "jahili", "العصر الجاهلي", "قبل الإسلام"];
                pre_islamic.contains(&n.as_str()).then(|| bucket_era(EraInput::PreIslamic))
            }
        }
    }
}

/// One poem. `verses` holds hemistiches in reading order, so a bait is a
/// consecutive pair; raw data may hold an odd count until cleaned.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Poem {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<PoemId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poet: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub era: Option<Era>,
    /// Theme token id, 0..=17.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theme: Option<i64>,
    /// Meter index, 0..=15 once cleaned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meter: Option<i64>,
    #[serde(default)]
    pub verses: Vec<String>,
    /// Fields this crate does not interpret, kept for round trips.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Poem {
    pub fn from_baits<S: Into<String>>(baits: impl IntoIterator<Item = (S, S)>) -> Self {
        let verses = baits.into_iter().flat_map(|(a, b)| [a.into(), b.into()]).collect();
        Poem { verses, ..Default::default() }
    }

    pub fn baits(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.verses.chunks_exact(2).map(|c| (c[0].as_str(), c[1].as_str()))
    }

    /// Baits joined with the `#` hemistich separator.
    pub fn bait_lines(&self) -> Vec<String> {
        self.baits().map(|(a, b)| format!("{a}#{b}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadMode {
    Strict,
    /// Skip unparseable lines and report them.
    SkipInvalid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct Loaded {
    pub poems: Vec<Poem>,
    pub skipped: Vec<SkippedLine>,
}

pub fn read_jsonl(reader: impl BufRead, mode: LoadMode) -> Result<Loaded, CorpusError> {
    let mut loaded = Loaded::default();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Poem>(&line) {
            Ok(poem) => loaded.poems.push(poem),
            Err(e) => {
                let skipped = SkippedLine { line: n + 1, message: e.to_string() };
                match mode {
                    LoadMode::Strict => {
                        return Err(CorpusError::Parse { line: skipped.line, message: skipped.message })
                    }
                    LoadMode::SkipInvalid => loaded.skipped.push(skipped),
                }
            }
        }
    }
    Ok(loaded)
}

pub fn load_jsonl(path: impl AsRef<Path>, mode: LoadMode) -> Result<Loaded, CorpusError> {
    read_jsonl(BufReader::new(File::open(path)?), mode)
}

pub fn write_jsonl(poems: &[Poem], path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let mut out = BufWriter::new(File::create(path)?);
    for poem in poems {
        serde_json::to_writer(&mut out, poem).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
