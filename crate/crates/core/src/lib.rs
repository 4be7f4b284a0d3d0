//! Rule-based Arabic prosody engine.
//!
//! Scans diacritized verse into harakah/sukun patterns, identifies the meter
//! against a database of the sixteen classical meters and their permissible
//! foot variants, and reports minimal add/delete/flip corrections. Corpus
//! preparation and evaluation tooling live alongside.

pub mod analysis;
pub mod classify;
pub mod corpus;
pub mod matcher;
pub mod meterdb;
pub mod metrics;
pub mod normalize;
pub mod pattern;
pub mod scansion;

pub use pattern::BinaryPattern;

/// JSON schema of [`analysis::AnalyzeResponse`].
pub const ANALYZE_RESPONSE_SCHEMA: &str = include_str!("../schema/analyze_response.schema.json");
