//! Corpus-level scoring: every selected uncertainty method and native NLG
//! metric over a record corpus, with a skip report for methods whose inputs
//! are absent.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::blackbox::{self, SimilarityInput, DEFAULT_SET_THRESHOLD};
use crate::error::{Error, Result};
use crate::nlg::descriptor::{KENDALL_TAU, ROUGE_L, SPEARMAN};
use crate::nlg::{embedding_semantic_overlap, rouge_l, RankCorrelation};
use crate::prr::DEFAULT_SEED;
use crate::record::GenerationRecord;
use crate::score::{ScoreKind, ScoreVector};
use crate::whitebox::{self, DensityModel, DEFAULT_VARIANCE_KEPT, MAX_TRAINING_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UeMethod {
    Msp,
    Mte,
    Mcse,
    Md,
    Rde,
    TTu,
    TRmi,
    STu,
    SRmi,
    PTrue,
    NumSets,
    Ecc,
    LexSim,
    EigV,
}

impl UeMethod {
    pub const ALL: [UeMethod; 14] = [
        UeMethod::Msp,
        UeMethod::Mte,
        UeMethod::Mcse,
        UeMethod::Md,
        UeMethod::Rde,
        UeMethod::TTu,
        UeMethod::TRmi,
        UeMethod::STu,
        UeMethod::SRmi,
        UeMethod::PTrue,
        UeMethod::NumSets,
        UeMethod::Ecc,
        UeMethod::LexSim,
        UeMethod::EigV,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UeMethod::Msp => "MSP",
            UeMethod::Mte => "MTE",
            UeMethod::Mcse => "MCSE",
            UeMethod::Md => "MD",
            UeMethod::Rde => "RDE",
            UeMethod::TTu => "T-TU",
            UeMethod::TRmi => "T-RMI",
            UeMethod::STu => "S-TU",
            UeMethod::SRmi => "S-RMI",
            UeMethod::PTrue => "P(True)",
            UeMethod::NumSets => "NumSets",
            UeMethod::Ecc => "ECC",
            UeMethod::LexSim => "LexSim",
            UeMethod::EigV => "EigV",
        }
    }

    pub fn is_black_box(self) -> bool {
        matches!(self, UeMethod::NumSets | UeMethod::Ecc | UeMethod::LexSim | UeMethod::EigV)
    }
}

impl fmt::Display for UeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UeMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        UeMethod::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::OutOfRange(format!("unknown uncertainty method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NativeMetric {
    RougeL,
    Spearman,
    Kendall,
}

impl NativeMetric {
    pub const ALL: [NativeMetric; 3] = [NativeMetric::RougeL, NativeMetric::Spearman, NativeMetric::Kendall];

    pub fn name(self) -> &'static str {
        match self {
            NativeMetric::RougeL => ROUGE_L,
            NativeMetric::Spearman => SPEARMAN,
            NativeMetric::Kendall => KENDALL_TAU,
        }
    }
}

impl FromStr for NativeMetric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        NativeMetric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::OutOfRange(format!("unknown native metric {s:?}")))
    }
}

/// Machine-readable reason a method or metric was not scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipCode {
    MissingEmbeddings,
    MissingTrainingEmbeddings,
    MissingTokenEntropies,
    MissingSamples,
    InsufficientSamples,
    MissingSampleLogprobs,
    MissingEnsemble,
    MissingMemberLogprobs,
    MissingPTrue,
    MissingReference,
    MissingReferenceEmbeddings,
    EmptyCorpus,
    ComputationFailed,
}

impl SkipCode {
    pub fn reason(self) -> &'static str {
        match self {
            SkipCode::MissingEmbeddings => "missing embeddings",
            SkipCode::MissingTrainingEmbeddings => "missing training embeddings",
            SkipCode::MissingTokenEntropies => "missing token entropies",
            SkipCode::MissingSamples => "missing sampled generations",
            SkipCode::InsufficientSamples => "fewer than 2 sampled generations",
            SkipCode::MissingSampleLogprobs => "missing sample token log-probabilities",
            SkipCode::MissingEnsemble => "missing ensemble block",
            SkipCode::MissingMemberLogprobs => "missing ensemble sequence log-probabilities",
            SkipCode::MissingPTrue => "missing P(True) responses",
            SkipCode::MissingReference => "missing reference summary",
            SkipCode::MissingReferenceEmbeddings => "missing reference embeddings",
            SkipCode::EmptyCorpus => "empty corpus",
            SkipCode::ComputationFailed => "computation failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub name: String,
    pub code: SkipCode,
    pub reason: String,
    /// Records lacking the required input (first few).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringOptions {
    pub mcse_length_normalize: bool,
    pub set_threshold: f64,
    /// Eigenvectors used by ECC; `None` means `round(EigV)`.
    pub ecc_k: Option<usize>,
    pub variance_kept: f64,
    pub max_training: usize,
    pub seed: u64,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        Self {
            mcse_length_normalize: true,
            set_threshold: DEFAULT_SET_THRESHOLD,
            ecc_k: None,
            variance_kept: DEFAULT_VARIANCE_KEPT,
            max_training: MAX_TRAINING_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ScoringInputs<'a> {
    pub records: &'a [GenerationRecord],
    pub training_embeddings: Option<&'a [Vec<f64>]>,
    pub p_true: Option<&'a HashMap<String, f64>>,
    pub reference_embeddings: Option<&'a HashMap<String, Vec<f64>>>,
}

#[derive(Debug, Clone, Default)]
pub struct ScoringOutcome {
    pub scores: Vec<ScoreVector<f64>>,
    pub skipped: Vec<Skip>,
}

const SKIP_ID_LIMIT: usize = 5;

fn lacking(records: &[GenerationRecord], pred: impl Fn(&GenerationRecord) -> bool) -> Vec<String> {
    records.iter().filter(|r| pred(r)).map(|r| r.id.clone()).collect()
}

fn skip(name: &str, code: SkipCode, mut ids: Vec<String>) -> Skip {
    ids.truncate(SKIP_ID_LIMIT);
    Skip {
        name: name.to_string(),
        code,
        reason: code.reason().to_string(),
        ids,
    }
}

fn precheck(method: UeMethod, inputs: &ScoringInputs<'_>) -> Option<(SkipCode, Vec<String>)> {
    let records = inputs.records;
    let check = |code: SkipCode, pred: &dyn Fn(&GenerationRecord) -> bool| {
        let ids = lacking(records, pred);
        (!ids.is_empty()).then_some((code, ids))
    };
    match method {
        UeMethod::Msp => None,
        UeMethod::Mte => check(SkipCode::MissingTokenEntropies, &|r| r.greedy_token_entropies.is_none()),
        UeMethod::Mcse => check(SkipCode::MissingSamples, &|r| r.samples.is_empty()).or_else(|| {
            check(SkipCode::MissingSampleLogprobs, &|r| {
                r.samples.iter().any(|s| s.token_logprobs.is_empty())
            })
        }),
        UeMethod::Md | UeMethod::Rde => check(SkipCode::MissingEmbeddings, &|r| r.embedding.is_none()).or_else(|| {
            match inputs.training_embeddings {
                Some(t) if t.len() >= 2 => None,
                _ => Some((SkipCode::MissingTrainingEmbeddings, Vec::new())),
            }
        }),
        UeMethod::TTu | UeMethod::TRmi => check(SkipCode::MissingEnsemble, &|r| r.ensemble.is_none()),
        UeMethod::STu | UeMethod::SRmi => check(SkipCode::MissingSamples, &|r| r.samples.is_empty())
            .or_else(|| {
                check(SkipCode::MissingSampleLogprobs, &|r| {
                    r.samples.iter().any(|s| s.token_logprobs.is_empty())
                })
            })
            .or_else(|| {
                check(SkipCode::MissingMemberLogprobs, &|r| {
                    r.samples.iter().any(|s| s.ensemble_seq_logprobs.as_ref().is_none_or(Vec::is_empty))
                })
            }),
        UeMethod::PTrue => match inputs.p_true {
            None => Some((SkipCode::MissingPTrue, Vec::new())),
            Some(map) => check(SkipCode::MissingPTrue, &|r| !map.contains_key(&r.id)),
        },
        UeMethod::NumSets | UeMethod::Ecc | UeMethod::LexSim | UeMethod::EigV => {
            check(SkipCode::InsufficientSamples, &|r| r.samples.len() < 2)
        }
    }
}

fn per_record(
    records: &[GenerationRecord],
    f: impl Fn(&GenerationRecord) -> Result<f64> + Sync + Send,
) -> Result<Vec<f64>> {
    records.par_iter().map(f).collect()
}

fn training_set(inputs: &ScoringInputs<'_>, opts: &ScoringOptions) -> Vec<Vec<f64>> {
    whitebox::subsample_training(inputs.training_embeddings.unwrap_or_default(), opts.max_training, opts.seed)
}

fn density_scores(records: &[GenerationRecord], model: &DensityModel<f64>) -> Result<Vec<f64>> {
    per_record(records, |r| {
        whitebox::mahalanobis(r.embedding.as_deref().unwrap_or_default(), model)
    })
}

fn compute(method: UeMethod, inputs: &ScoringInputs<'_>, opts: &ScoringOptions) -> Result<Vec<f64>> {
    let records = inputs.records;
    match method {
        UeMethod::Msp => per_record(records, whitebox::msp),
        UeMethod::Mte => per_record(records, whitebox::mte),
        UeMethod::Mcse => per_record(records, |r| whitebox::mcse(r, opts.mcse_length_normalize)),
        UeMethod::Md => {
            let model = whitebox::fit_density(&training_set(inputs, opts), false, 1.0)?;
            density_scores(records, &model)
        }
        UeMethod::Rde => {
            let model = whitebox::fit_density(&training_set(inputs, opts), true, opts.variance_kept)?;
            density_scores(records, &model)
        }
        UeMethod::TTu => per_record(records, |r| {
            whitebox::token_total_uncertainty(r.ensemble.as_ref().expect("prechecked"))
        }),
        UeMethod::TRmi => per_record(records, |r| whitebox::token_rmi(r.ensemble.as_ref().expect("prechecked"))),
        UeMethod::STu => per_record(records, whitebox::seq_total_uncertainty),
        UeMethod::SRmi => per_record(records, whitebox::seq_rmi),
        UeMethod::PTrue => {
            let map = inputs.p_true.expect("prechecked");
            per_record(records, |r| whitebox::p_true_uncertainty(map[&r.id]))
        }
        UeMethod::NumSets | UeMethod::Ecc | UeMethod::LexSim | UeMethod::EigV => per_record(records, |r| {
            let texts: Vec<&str> = r.samples.iter().map(|s| s.text.as_str()).collect();
            let graph = blackbox::pairwise_similarity::<f64>(SimilarityInput::Texts(&texts))?;
            Ok(match method {
                UeMethod::NumSets => blackbox::num_sets(&graph, opts.set_threshold) as f64,
                UeMethod::Ecc => match opts.ecc_k {
                    Some(k) => blackbox::ecc(&graph, k.min(graph.size()))?,
                    None => blackbox::ecc_default(&graph),
                },
                UeMethod::LexSim => blackbox::lexsim_from_graph(&graph),
                _ => blackbox::eigv(&graph),
            })
        }),
    }
}

/// Scores every method in `methods` (duplicates ignored), in the given order.
pub fn score_methods(methods: &[UeMethod], inputs: &ScoringInputs<'_>, opts: &ScoringOptions) -> ScoringOutcome {
    let mut outcome = ScoringOutcome::default();
    let ids: Vec<String> = inputs.records.iter().map(|r| r.id.clone()).collect();
    let mut seen = std::collections::HashSet::new();
    for &method in methods {
        if !seen.insert(method) {
            continue;
        }
        if inputs.records.is_empty() {
            outcome.skipped.push(skip(method.name(), SkipCode::EmptyCorpus, Vec::new()));
            continue;
        }
        if let Some((code, lacking)) = precheck(method, inputs) {
            outcome.skipped.push(skip(method.name(), code, lacking));
            continue;
        }
        match compute(method, inputs, opts)
            .and_then(|values| ScoreVector::new(method.name(), ScoreKind::Uncertainty, ids.clone(), values))
        {
            Ok(v) => outcome.scores.push(v),
            Err(e) => {
                log::warn!("{method}: {e}");
                let mut s = skip(method.name(), SkipCode::ComputationFailed, Vec::new());
                s.reason = format!("{}: {e}", s.reason);
                outcome.skipped.push(s);
            }
        }
    }
    outcome
}

/// Scores the natively computed NLG metrics of the greedy summaries.
pub fn score_native_metrics(metrics: &[NativeMetric], inputs: &ScoringInputs<'_>) -> ScoringOutcome {
    let records = inputs.records;
    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    let mut outcome = ScoringOutcome::default();
    let mut seen = std::collections::HashSet::new();
    for &metric in metrics {
        if !seen.insert(metric) {
            continue;
        }
        let name = metric.name();
        if records.is_empty() {
            outcome.skipped.push(skip(name, SkipCode::EmptyCorpus, Vec::new()));
            continue;
        }
        let result = match metric {
            NativeMetric::RougeL => {
                let no_ref = lacking(records, |r| r.reference_summary.is_none());
                if !no_ref.is_empty() {
                    outcome.skipped.push(skip(name, SkipCode::MissingReference, no_ref));
                    continue;
                }
                per_record(records, |r| {
                    Ok(rouge_l(&r.greedy_text, r.reference_summary.as_deref().unwrap_or_default()))
                })
            }
            NativeMetric::Spearman | NativeMetric::Kendall => {
                let no_emb = lacking(records, |r| r.embedding.is_none());
                if !no_emb.is_empty() {
                    outcome.skipped.push(skip(name, SkipCode::MissingEmbeddings, no_emb));
                    continue;
                }
                let Some(refs) = inputs.reference_embeddings else {
                    outcome.skipped.push(skip(name, SkipCode::MissingReferenceEmbeddings, Vec::new()));
                    continue;
                };
                let no_ref = lacking(records, |r| !refs.contains_key(&r.id));
                if !no_ref.is_empty() {
                    outcome.skipped.push(skip(name, SkipCode::MissingReferenceEmbeddings, no_ref));
                    continue;
                }
                let kind = if metric == NativeMetric::Spearman {
                    RankCorrelation::Spearman
                } else {
                    RankCorrelation::Kendall
                };
                per_record(records, |r| {
                    embedding_semantic_overlap(r.embedding.as_deref().unwrap_or_default(), &refs[&r.id], kind)
                })
            }
        };
        match result.and_then(|values| ScoreVector::new(name, ScoreKind::Nlg, ids.clone(), values)) {
            Ok(v) => outcome.scores.push(v),
            Err(e) => {
                let mut s = skip(name, SkipCode::ComputationFailed, Vec::new());
                s.reason = format!("{}: {e}", s.reason);
                outcome.skipped.push(s);
            }
        }
    }
    outcome
}

/// Reads P(True) judge replies (`{"id", "reply"}` JSONL) whose reply is a
/// probability, given as a number or a numeric string.
pub fn read_p_true<R: BufRead>(reader: R) -> Result<HashMap<String, f64>> {
    #[derive(Deserialize)]
    struct Line {
        id: String,
        reply: Value,
    }
    let mut out = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::ScoreParse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        let p = match &parsed.reply {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => s.trim().parse::<f64>().ok(),
            _ => None,
        }
        .filter(|p| (0.0..=1.0).contains(p))
        .ok_or_else(|| Error::ScoreParse {
            line: line_no,
            message: format!("P(True) reply {} is not a probability", parsed.reply),
        })?;
        if out.insert(parsed.id.clone(), p).is_some() {
            return Err(Error::DuplicateId {
                id: parsed.id,
                line: line_no,
            });
        }
    }
    Ok(out)
}

pub fn parse_p_true_file(path: impl AsRef<Path>) -> Result<HashMap<String, f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_p_true(BufReader::new(file))
}
