//! Generation-record schema and JSONL corpus ingestion.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of each ensemble member distribution.
pub const DISTRIBUTION_MASS_TOL: f64 = 1e-6;

/// One source document with its greedy summary and everything the
/// uncertainty methods consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub id: String,
    pub input_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_summary: Option<String>,
    pub greedy_text: String,
    /// Natural-log probability of each greedy token.
    pub greedy_token_logprobs: Vec<f64>,
    /// Entropy (nats) of the predictive distribution at each greedy position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greedy_token_entropies: Option<Vec<f64>>,
    #[serde(default)]
    pub samples: Vec<SampledGeneration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledGeneration {
    pub text: String,
    #[serde(default)]
    pub token_logprobs: Vec<f64>,
    /// Total sequence log-probability of this sample under each ensemble member.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble_seq_logprobs: Option<Vec<f64>>,
}

/// Per-position member distributions of an M-member ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleBlock {
    pub member_count: usize,
    /// One entry per greedy-generation position.
    pub token_distributions: Vec<PositionDistributions>,
}

/// Member distributions at one position over a shared restricted vocabulary.
///
/// `member_probs[m]` has `token_ids.len() + 1` entries: the probabilities of
/// the listed tokens followed by the aggregated tail mass of every other token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionDistributions {
    pub token_ids: Vec<u32>,
    pub member_probs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(ToString::to_string).collect()
    }
}

fn check_logprobs(report: &mut ValidationReport, field: &str, values: &[f64]) {
    for (i, &lp) in values.iter().enumerate() {
        if lp.is_nan() || lp > 0.0 {
            report.push(
                format!("{field}[{i}]"),
                format!("log-probability must be <= 0, got {lp}"),
            );
        }
    }
}

/// Lists every invariant `record` violates. `embedding_dim` is the corpus-wide
/// embedding dimension when one has been established.
pub fn validate_record(record: &GenerationRecord, embedding_dim: Option<usize>) -> ValidationReport {
    let mut report = ValidationReport::default();

    if record.id.is_empty() {
        report.push("id", "must be non-empty");
    }
    if record.greedy_token_logprobs.is_empty() {
        report.push("greedy_token_logprobs", "must be non-empty");
    }
    check_logprobs(&mut report, "greedy_token_logprobs", &record.greedy_token_logprobs);

    if let Some(entropies) = &record.greedy_token_entropies {
        if entropies.len() != record.greedy_token_logprobs.len() {
            report.push(
                "greedy_token_entropies",
                format!(
                    "length {} differs from greedy_token_logprobs length {}",
                    entropies.len(),
                    record.greedy_token_logprobs.len()
                ),
            );
        }
        for (i, &h) in entropies.iter().enumerate() {
            if !(h >= 0.0 && h.is_finite()) {
                report.push(
                    format!("greedy_token_entropies[{i}]"),
                    format!("entropy must be finite and >= 0, got {h}"),
                );
            }
        }
    }

    let mut member_len: Option<usize> = None;
    for (s, sample) in record.samples.iter().enumerate() {
        check_logprobs(&mut report, &format!("samples[{s}].token_logprobs"), &sample.token_logprobs);
        if let Some(seq) = &sample.ensemble_seq_logprobs {
            check_logprobs(&mut report, &format!("samples[{s}].ensemble_seq_logprobs"), seq);
            match member_len {
                None => member_len = Some(seq.len()),
                Some(m) if m != seq.len() => report.push(
                    format!("samples[{s}].ensemble_seq_logprobs"),
                    format!("member count {} differs from earlier samples ({m})", seq.len()),
                ),
                _ => {}
            }
        }
    }

    if let Some(embedding) = &record.embedding {
        if embedding.is_empty() {
            report.push("embedding", "must be non-empty when present");
        }
        if let Some(d) = embedding_dim {
            if embedding.len() != d {
                report.push(
                    "embedding",
                    format!("embedding dimension {} differs from corpus dimension {d}", embedding.len()),
                );
            }
        }
        if embedding.iter().any(|v| !v.is_finite()) {
            report.push("embedding", "contains non-finite values");
        }
    }

    if let Some(ensemble) = &record.ensemble {
        validate_ensemble(&mut report, ensemble, record.greedy_token_logprobs.len());
    }

    report
}

fn validate_ensemble(report: &mut ValidationReport, ensemble: &EnsembleBlock, greedy_len: usize) {
    if ensemble.member_count < 2 {
        report.push(
            "ensemble.member_count",
            format!("must be >= 2, got {}", ensemble.member_count),
        );
    }
    if ensemble.token_distributions.len() != greedy_len {
        report.push(
            "ensemble.token_distributions",
            format!(
                "{} positions but greedy generation has {greedy_len} tokens",
                ensemble.token_distributions.len()
            ),
        );
    }
    for (l, position) in ensemble.token_distributions.iter().enumerate() {
        let field = format!("ensemble.token_distributions[{l}]");
        if position.member_probs.len() != ensemble.member_count {
            report.push(
                &field,
                format!(
                    "{} member distributions, expected {}",
                    position.member_probs.len(),
                    ensemble.member_count
                ),
            );
        }
        let width = position.token_ids.len() + 1;
        for (m, probs) in position.member_probs.iter().enumerate() {
            if probs.len() != width {
                report.push(
                    format!("{field}.member_probs[{m}]"),
                    format!("{} entries, expected {width} (top-k plus tail)", probs.len()),
                );
            }
            if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                report.push(format!("{field}.member_probs[{m}]"), "probabilities must lie in [0, 1]");
            }
            let mass: f64 = probs.iter().sum();
            if (mass - 1.0).abs() > DISTRIBUTION_MASS_TOL {
                report.push(
                    format!("{field}.member_probs[{m}]"),
                    format!("distribution mass {mass} differs from 1"),
                );
            }
        }
    }
}

/// Reads a JSONL corpus from any buffered reader. Blank lines are ignored.
pub fn parse_records<R: BufRead>(reader: R) -> Result<Vec<GenerationRecord>> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut embedding_dim = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: GenerationRecord = serde_json::from_str(&line).map_err(|e| {
            if e.is_data() {
                Error::Schema {
                    line: line_no,
                    id: String::new(),
                    violations: vec![e.to_string()],
                }
            } else {
                Error::MalformedLine {
                    line: line_no,
                    message: e.to_string(),
                }
            }
        })?;

        if embedding_dim.is_none() {
            embedding_dim = record.embedding.as_ref().map(Vec::len);
        }
        let report = validate_record(&record, embedding_dim);
        if !report.is_ok() {
            return Err(Error::Schema {
                line: line_no,
                id: record.id,
                violations: report.messages(),
            });
        }
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId {
                id: record.id,
                line: line_no,
            });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn parse_record_file(path: impl AsRef<Path>) -> Result<Vec<GenerationRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_records(BufReader::new(file))
}

pub fn write_records<W: Write>(mut writer: W, records: &[GenerationRecord]) -> std::io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn write_record_file(path: impl AsRef<Path>, records: &[GenerationRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_records(BufWriter::new(file), records).map_err(|e| Error::io(path, e))
}

/// Embedding vectors from a JSONL file whose lines carry an `embedding` field
/// (a record corpus or bare `{"embedding": [...]}` lines).
pub fn parse_embedding_file(path: impl AsRef<Path>) -> Result<Vec<(Option<String>, Vec<f64>)>> {
    #[derive(Deserialize)]
    struct Line {
        #[serde(default)]
        id: Option<String>,
        embedding: Vec<f64>,
    }
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push((parsed.id, parsed.embedding));
    }
    Ok(out)
}
