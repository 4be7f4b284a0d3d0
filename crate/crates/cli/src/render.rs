//! Human-readable rendering of analysis replies.

use std::fmt::Write;

use qasida_core::analysis::{render_ops, AnalyzeResponse, ErrorReport};
use qasida_core::scansion::BaitPart;
use qasida_service::Reply;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
struct ErrorBody {
    error: ErrorReport,
    #[serde(default)]
    analysis: Option<AnalyzeResponse>,
}

pub struct Outcome {
    pub analysis: Option<AnalyzeResponse>,
    pub error: Option<ErrorReport>,
}

pub fn reply_outcome(reply: &Reply) -> Outcome {
    if reply.is_success() {
        match serde_json::from_str(&reply.body) {
            Ok(a) => Outcome { analysis: Some(a), error: None },
            Err(e) => Outcome { analysis: None, error: Some(undecodable(e)) },
        }
    } else {
        match serde_json::from_str::<ErrorBody>(&reply.body) {
            Ok(b) => Outcome { analysis: b.analysis, error: Some(b.error) },
            Err(e) => Outcome { analysis: None, error: Some(undecodable(e)) },
        }
    }
}

fn undecodable(e: serde_json::Error) -> ErrorReport {
    ErrorReport { kind: "UndecodableResponse".into(), message: e.to_string() }
}

pub fn text_report(a: &AnalyzeResponse) -> String {
    let mut s = String::new();
    match (&a.meter, &a.meter_name) {
        (Some(m), Some(name)) => writeln!(s, "meter    {name} ({m})"),
        _ => writeln!(s, "meter    -"),
    }
    .unwrap();
    writeln!(s, "qafiyah  {}", a.qafiyah.as_deref().unwrap_or("-")).unwrap();
    for h in &a.hemistiches {
        let part = match h.part {
            BaitPart::Sadr => "sadr",
            BaitPart::Ajuz => "ajuz",
        };
        writeln!(s, "\n{} {part}  {}", h.bait + 1, h.text).unwrap();
        if let Some(e) = &h.error {
            writeln!(s, "  error      {}: {}", e.kind, e.message).unwrap();
            continue;
        }
        let (Some(p), Some(v), Some(sim), Some(ops)) = (&h.pattern, &h.variant, h.similarity, &h.ops) else { continue };
        writeln!(s, "  pattern    {p}").unwrap();
        writeln!(s, "  variant    {v}").unwrap();
        writeln!(s, "  similarity {sim:.4}").unwrap();
        if ops.is_empty() {
            writeln!(s, "  ops        none").unwrap();
        } else {
            writeln!(s, "  ops        {}", render_ops(p, ops)).unwrap();
        }
    }
    s
}
