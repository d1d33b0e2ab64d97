//! LLM-judge metrics: prompt-batch emission and reply parsing.
//!
//! Prompts are written to a batch file and executed outside this crate; the
//! replies come back as `{"id", "reply"}` JSONL.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::record::GenerationRecord;
use crate::score::{ScoreKind, ScoreVector};

use super::descriptor::{Dimension, JudgeVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeScale {
    pub min: i64,
    pub max: i64,
}

impl Default for JudgeScale {
    fn default() -> Self {
        Self { min: 1, max: 5 }
    }
}

/// Prompt wording. Everything here can be overridden from configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JudgeTemplate {
    pub scale: JudgeScale,
    pub preamble: String,
    pub definitions: BTreeMap<Dimension, String>,
}

impl Default for JudgeTemplate {
    fn default() -> Self {
        let definitions = [
            (
                Dimension::Relevance,
                "Relevance: the summary keeps the key content of the source and leaves out unimportant details.",
            ),
            (
                Dimension::Consistency,
                "Consistency: every statement in the summary is supported by the source; nothing is invented or contradicted.",
            ),
            (
                Dimension::Coherence,
                "Coherence: the sentences of the summary connect logically and read as one organized whole.",
            ),
            (
                Dimension::Fluency,
                "Fluency: each sentence of the summary is grammatical and natural to read.",
            ),
            (
                Dimension::Overall,
                "Overall: a single judgement that weighs relevance, consistency, coherence and fluency together.",
            ),
        ]
        .into_iter()
        .map(|(d, s)| (d, s.to_string()))
        .collect();
        Self {
            scale: JudgeScale::default(),
            preamble: "You are grading an automatically generated summary.".to_string(),
            definitions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptItem {
    pub id: String,
    pub prompt: String,
}

/// One prompt per record for a (variant, dimension) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgePromptBatch {
    pub variant: JudgeVariant,
    pub dimension: Dimension,
    pub scale: JudgeScale,
    pub items: Vec<PromptItem>,
}

impl JudgePromptBatch {
    pub fn metric_name(&self) -> String {
        self.variant.metric_name(self.dimension)
    }

    pub fn ids(&self) -> Vec<String> {
        self.items.iter().map(|i| i.id.clone()).collect()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::MalformedLine {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

fn render_prompt(
    record: &GenerationRecord,
    variant: JudgeVariant,
    dimension: Dimension,
    template: &JudgeTemplate,
) -> String {
    let mut out = String::new();
    out.push_str(&template.preamble);
    out.push_str("\n\n");
    if variant.with_definitions() {
        if let Some(def) = template.definitions.get(&dimension) {
            out.push_str(def);
            out.push_str("\n\n");
        }
    }
    if matches!(variant, JudgeVariant::WiIn | JudgeVariant::WiIngt) {
        out.push_str("Source text:\n");
        out.push_str(&record.input_text);
        out.push_str("\n\n");
    }
    if matches!(variant, JudgeVariant::Wo | JudgeVariant::WiGt | JudgeVariant::WiIngt) {
        out.push_str("Reference summary:\n");
        out.push_str(record.reference_summary.as_deref().unwrap_or_default());
        out.push_str("\n\n");
    }
    out.push_str("Candidate summary:\n");
    out.push_str(&record.greedy_text);
    out.push_str("\n\n");
    out.push_str(&format!(
        "Rate the {} of the candidate summary as an integer from {} to {}. Reply with the number only.",
        dimension.as_str(),
        template.scale.min,
        template.scale.max
    ));
    out
}

/// Renders the batch; every record must carry the texts the variant compares
/// against.
pub fn emit_judge_prompts(
    records: &[GenerationRecord],
    variant: JudgeVariant,
    dimension: Dimension,
    template: &JudgeTemplate,
) -> Result<JudgePromptBatch> {
    if template.scale.max <= template.scale.min {
        return Err(Error::OutOfRange(format!(
            "judge scale max {} must exceed min {}",
            template.scale.max, template.scale.min
        )));
    }
    if variant.with_definitions() && !template.definitions.contains_key(&dimension) {
        return Err(Error::MissingInput(format!("no definition configured for dimension {dimension}")));
    }
    let needs_reference = matches!(variant, JudgeVariant::Wo | JudgeVariant::WiGt | JudgeVariant::WiIngt);
    let needs_input = matches!(variant, JudgeVariant::WiIn | JudgeVariant::WiIngt);
    let lacking: Vec<String> = records
        .iter()
        .filter(|r| {
            (needs_reference && r.reference_summary.as_deref().is_none_or(|s| s.trim().is_empty()))
                || (needs_input && r.input_text.trim().is_empty())
        })
        .map(|r| r.id.clone())
        .collect();
    if !lacking.is_empty() {
        return Err(Error::MissingInput(format!(
            "{} prompts need {} for records: {}",
            variant.label(),
            match (needs_input, needs_reference) {
                (true, true) => "input text and reference summary",
                (true, false) => "input text",
                _ => "a reference summary",
            },
            lacking.join(", ")
        )));
    }
    Ok(JudgePromptBatch {
        variant,
        dimension,
        scale: template.scale,
        items: records
            .iter()
            .map(|r| PromptItem {
                id: r.id.clone(),
                prompt: render_prompt(r, variant, dimension, template),
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub id: String,
    pub reason: String,
}

/// Normalized judge scores for the accepted replies, plus the rejected ones.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgeScores {
    pub scores: ScoreVector<f64>,
    pub rejected: Vec<Rejection>,
}

fn number_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"-?\d+(?:\.\d+)?").expect("valid regex"))
}

/// Integer score from a reply: the first number in the text, which must be
/// a whole number inside the scale.
pub fn extract_score(reply: &Value, scale: JudgeScale) -> std::result::Result<i64, String> {
    let number = match reply {
        Value::Number(n) => n.as_f64().ok_or("non-finite number")?,
        Value::String(s) => {
            let m = number_regex().find(s).ok_or("no number in reply")?;
            m.as_str().parse::<f64>().map_err(|e| e.to_string())?
        }
        other => return Err(format!("unsupported reply type: {other}")),
    };
    if number.fract() != 0.0 {
        return Err(format!("score {number} is not an integer"));
    }
    let score = number as i64;
    if score < scale.min || score > scale.max {
        return Err(format!("score {score} outside scale {}-{}", scale.min, scale.max));
    }
    Ok(score)
}

#[derive(Deserialize)]
struct ReplyLine {
    id: String,
    reply: Value,
}

pub fn read_judge_responses<R: BufRead>(reader: R, batch: &JudgePromptBatch) -> Result<JudgeScores> {
    let expected: HashSet<&str> = batch.items.iter().map(|i| i.id.as_str()).collect();
    let mut replies: HashMap<String, Value> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::ScoreParse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ReplyLine = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if !expected.contains(parsed.id.as_str()) {
            return Err(Error::UnknownId {
                id: parsed.id,
                line: line_no,
            });
        }
        if replies.insert(parsed.id.clone(), parsed.reply).is_some() {
            return Err(Error::DuplicateId {
                id: parsed.id,
                line: line_no,
            });
        }
    }

    let span = (batch.scale.max - batch.scale.min) as f64;
    let mut ids = Vec::new();
    let mut values = Vec::new();
    let mut rejected = Vec::new();
    for item in &batch.items {
        let outcome = match replies.get(&item.id) {
            None => Err("no reply".to_string()),
            Some(reply) => extract_score(reply, batch.scale),
        };
        match outcome {
            Ok(score) => {
                ids.push(item.id.clone());
                values.push((score - batch.scale.min) as f64 / span);
            }
            Err(reason) => rejected.push(Rejection {
                id: item.id.clone(),
                reason,
            }),
        }
    }

    let total = batch.items.len();
    if rejected.len() * 10 > total {
        return Err(Error::TooManyUnparseable {
            rejected: rejected.len(),
            total,
        });
    }
    for r in &rejected {
        log::warn!("{}: rejected reply for {}: {}", batch.metric_name(), r.id, r.reason);
    }
    Ok(JudgeScores {
        scores: ScoreVector::new(batch.metric_name(), ScoreKind::Nlg, ids, values)?,
        rejected,
    })
}

pub fn parse_judge_responses(path: impl AsRef<Path>, batch: &JudgePromptBatch) -> Result<JudgeScores> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_judge_responses(BufReader::new(file), batch)
}
