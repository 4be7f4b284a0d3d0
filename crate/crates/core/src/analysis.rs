//! Request/response types for whole-poem analysis, shared by the CLI and
//! the HTTP service so both emit the same JSON.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{extract_qafiyah, predict_arudi, ClassifyError};
use crate::corpus::Poem;
use crate::matcher::{EditKind, EditScript};
use crate::meterdb::PatternDb;
use crate::normalize::HEMISTICH_SEPARATOR;
use crate::pattern::BinaryPattern;
use crate::scansion::{scan_hemistich_with, BaitPart, ScanError, ScanOptions, ScansionTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeRequest {
    /// One bait per line, hemistiches separated by `#`.
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meter_hint: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_coverage: Option<f64>,
}

/// A single hemistich to scan, without meter matching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRequest {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResponse {
    pub pattern: BinaryPattern,
    pub coverage: f64,
    pub trace: ScansionTrace,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanRequestError {
    #[error(transparent)]
    Invalid(#[from] AnalyzeError),
    #[error(transparent)]
    Scan(#[from] ScanError),
}

pub fn scan(req: &ScanRequest, defaults: &ScanOptions) -> Result<ScanResponse, ScanRequestError> {
    let mut opts = *defaults;
    if let Some(c) = req.min_coverage {
        if !(0.0..=1.0).contains(&c) {
            return Err(AnalyzeError::InvalidCoverage(c).into());
        }
        opts.min_coverage = c;
    }
    let s = scan_hemistich_with(&req.text, &opts)?;
    Ok(ScanResponse { pattern: s.pattern, coverage: s.coverage, trace: s.trace })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
}

impl From<&ScanError> for ErrorReport {
    fn from(e: &ScanError) -> Self {
        ErrorReport { kind: e.kind().to_string(), message: e.to_string() }
    }
}

impl From<&AnalyzeError> for ErrorReport {
    fn from(e: &AnalyzeError) -> Self {
        ErrorReport { kind: e.kind().to_string(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HemistichReport {
    pub bait: usize,
    pub part: BaitPart,
    pub text: String,
    pub coverage: Option<f64>,
    pub pattern: Option<BinaryPattern>,
    pub variant: Option<BinaryPattern>,
    pub similarity: Option<f64>,
    pub ops: Option<EditScript>,
    pub error: Option<ErrorReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeResponse {
    pub meter: Option<usize>,
    pub meter_name: Option<String>,
    /// The rawiy letter.
    pub qafiyah: Option<String>,
    pub hemistiches: Vec<HemistichReport>,
    pub warnings: Vec<String>,
}

impl AnalyzeResponse {
    pub fn scanned(&self) -> usize {
        self.hemistiches.iter().filter(|h| h.error.is_none()).count()
    }

    /// The first scansion error, when no hemistich scanned.
    pub fn failure(&self) -> Option<&ErrorReport> {
        if self.scanned() > 0 {
            return None;
        }
        self.hemistiches.iter().find_map(|h| h.error.as_ref())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyzeError {
    #[error("input contains no verse")]
    EmptyInput,
    #[error("line {line} has more than one '#' separator")]
    TooManySeparators { line: usize },
    #[error("meter hint {0} is not one of the 16 meters")]
    UnknownMeter(usize),
    #[error("min_coverage {0} is outside [0, 1]")]
    InvalidCoverage(f64),
}

impl AnalyzeError {
    pub fn kind(&self) -> &'static str {
        match self {
            AnalyzeError::EmptyInput => "EmptyInput",
            AnalyzeError::TooManySeparators { .. } => "TooManySeparators",
            AnalyzeError::UnknownMeter(_) => "UnknownMeter",
            AnalyzeError::InvalidCoverage(_) => "InvalidCoverage",
        }
    }
}

/// Splits poem text into `(bait, part, hemistich)`; a line without `#` is a
/// lone sadr.
pub fn split_poem_text(text: &str) -> Result<Vec<(usize, BaitPart, String)>, AnalyzeError> {
    let mut out = Vec::new();
    let lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    for (bait, (n, line)) in lines.enumerate() {
        let parts: Vec<&str> = line.split(HEMISTICH_SEPARATOR).map(str::trim).collect();
        if parts.len() > 2 {
            return Err(AnalyzeError::TooManySeparators { line: n + 1 });
        }
        for (part, text) in [BaitPart::Sadr, BaitPart::Ajuz].into_iter().zip(parts) {
            out.push((bait, part, text.to_string()));
        }
    }
    if out.is_empty() {
        return Err(AnalyzeError::EmptyInput);
    }
    Ok(out)
}

pub fn analyze(req: &AnalyzeRequest, db: &PatternDb, defaults: &ScanOptions) -> Result<AnalyzeResponse, AnalyzeError> {
    let mut opts = *defaults;
    if let Some(c) = req.min_coverage {
        if !(0.0..=1.0).contains(&c) {
            return Err(AnalyzeError::InvalidCoverage(c));
        }
        opts.min_coverage = c;
    }
    let layout = split_poem_text(&req.text)?;
    let poem = Poem { verses: layout.iter().map(|(_, _, t)| t.clone()).collect(), ..Default::default() };
    let prediction = match predict_arudi(&poem, db, req.meter_hint, &opts) {
        Ok(p) => p,
        Err(ClassifyError::Db(_)) => return Err(AnalyzeError::UnknownMeter(req.meter_hint.unwrap_or_default())),
        Err(e) => unreachable!("prediction over a valid database cannot fail with {e}"),
    };
    let mut warnings = Vec::new();
    let hemistiches = layout
        .into_iter()
        .zip(prediction.hemistiches)
        .map(|((bait, part, text), h)| {
            let mut r = HemistichReport {
                bait,
                part,
                text,
                coverage: h.coverage,
                pattern: None,
                variant: None,
                similarity: None,
                ops: None,
                error: None,
            };
            match h.outcome {
                Ok(m) => {
                    r.pattern = Some(m.scan.pattern);
                    r.variant = Some(m.best.variant);
                    r.similarity = Some(m.best.similarity);
                    r.ops = Some(m.best.script);
                }
                Err(e) => {
                    warnings.push(format!("bait {} {}: {}", bait + 1, part_name(part), e));
                    r.error = Some(ErrorReport::from(&e));
                }
            }
            r
        })
        .collect();
    Ok(AnalyzeResponse {
        meter: prediction.meter,
        meter_name: prediction.meter.and_then(|m| db.name(m)).map(String::from),
        qafiyah: extract_qafiyah(&poem).ok().map(|q| q.rawiy.to_string()),
        hemistiches,
        warnings,
    })
}

fn part_name(part: BaitPart) -> &'static str {
    match part {
        BaitPart::Sadr => "sadr",
        BaitPart::Ajuz => "ajuz",
    }
}

/// Observed bits with corrections inlined: `[+b]` inserts `b` before a
/// position, `[-]` deletes the bit, `[~b]` flips it to `b`.
pub fn render_ops(pattern: &BinaryPattern, ops: &EditScript) -> String {
    let bits = pattern.as_bytes();
    let mut out = String::new();
    let mut ops = ops.ops().iter().peekable();
    for i in 0..=bits.len() {
        let mut replaced = false;
        while let Some(op) = ops.next_if(|op| op.position == i) {
            let bit = op.bit.map(char::from).unwrap_or('?');
            match op.kind {
                EditKind::Insert => out.push_str(&format!("[+{bit}]")),
                EditKind::Delete => {
                    out.push_str("[-]");
                    replaced = true;
                }
                EditKind::Flip => {
                    out.push_str(&format!("[~{bit}]"));
                    replaced = true;
                }
            }
        }
        if !replaced && i < bits.len() {
            out.push(bits[i] as char);
        }
    }
    out
}
