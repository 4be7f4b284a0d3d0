//! Transport-free request handling: bytes in, status and body out.

use qasida_core::analysis::{self, AnalyzeRequest, AnalyzeResponse, ErrorReport, ScanRequest, ScanRequestError};
use qasida_core::meterdb::PatternDb;
use qasida_core::scansion::ScanOptions;
use serde::de::DeserializeOwned;
use serde::Serialize;

pub const OK: u16 = 200;
pub const BAD_REQUEST: u16 = 400;
pub const UNPROCESSABLE: u16 = 422;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub status: u16,
    pub body: String,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    analysis: Option<&'a AnalyzeResponse>,
}

#[derive(Serialize)]
struct Health<'a> {
    status: &'static str,
    meters: usize,
    db_checksum: &'a str,
}

#[derive(Serialize)]
struct MeterEntry<'a> {
    index: usize,
    name: &'a str,
}

impl Reply {
    fn json(status: u16, value: &impl Serialize) -> Reply {
        match serde_json::to_string(value) {
            Ok(body) => Reply { status, body },
            Err(e) => Reply::internal(&e.to_string()),
        }
    }

    fn error(status: u16, kind: &str, message: String) -> Reply {
        Reply::json(status, &ErrorBody { error: ErrorReport { kind: kind.into(), message }, analysis: None })
    }

    pub fn internal(message: &str) -> Reply {
        Reply {
            status: 500,
            body: format!(r#"{{"error":{{"kind":"Internal","message":{}}}}}"#, serde_json::Value::from(message)),
        }
    }

    pub fn is_success(&self) -> bool {
        self.status == OK
    }
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, Reply> {
    serde_json::from_slice(body).map_err(|e| Reply::error(BAD_REQUEST, "MalformedBody", e.to_string()))
}

pub fn health(db: &PatternDb) -> Reply {
    Reply::json(OK, &Health { status: "ok", meters: db.templates().len(), db_checksum: db.checksum() })
}

pub fn meters(db: &PatternDb) -> Reply {
    let list: Vec<_> = db.meters().into_iter().map(|(index, name)| MeterEntry { index, name }).collect();
    Reply::json(OK, &list)
}

/// 200 with the analysis when at least one hemistich scanned; 422 with the
/// first scansion error (and the partial analysis) when none did.
pub fn analyze(db: &PatternDb, opts: &ScanOptions, body: &[u8]) -> Reply {
    let req: AnalyzeRequest = match parse(body) {
        Ok(r) => r,
        Err(reply) => return reply,
    };
    analyze_request(db, opts, &req)
}

pub fn analyze_request(db: &PatternDb, opts: &ScanOptions, req: &AnalyzeRequest) -> Reply {
    match analysis::analyze(req, db, opts) {
        Ok(resp) => match resp.failure() {
            None => Reply::json(OK, &resp),
            Some(err) => Reply::json(UNPROCESSABLE, &ErrorBody { error: err.clone(), analysis: Some(&resp) }),
        },
        Err(e) => Reply::json(UNPROCESSABLE, &ErrorBody { error: ErrorReport::from(&e), analysis: None }),
    }
}

pub fn scan(opts: &ScanOptions, body: &[u8]) -> Reply {
    let req: ScanRequest = match parse(body) {
        Ok(r) => r,
        Err(reply) => return reply,
    };
    match analysis::scan(&req, opts) {
        Ok(resp) => Reply::json(OK, &resp),
        Err(ScanRequestError::Invalid(e)) => {
            Reply::json(UNPROCESSABLE, &ErrorBody { error: ErrorReport::from(&e), analysis: None })
        }
        Err(ScanRequestError::Scan(e)) => {
            Reply::json(UNPROCESSABLE, &ErrorBody { error: ErrorReport::from(&e), analysis: None })
        }
    }
}
