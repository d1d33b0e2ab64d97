use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Relevance,
    Consistency,
    Coherence,
    Fluency,
    Overall,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Relevance,
        Dimension::Consistency,
        Dimension::Coherence,
        Dimension::Fluency,
        Dimension::Overall,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Relevance => "relevance",
            Dimension::Consistency => "consistency",
            Dimension::Coherence => "coherence",
            Dimension::Fluency => "fluency",
            Dimension::Overall => "overall",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Dimension::Relevance => "Relevance",
            Dimension::Consistency => "Consistency",
            Dimension::Coherence => "Coherence",
            Dimension::Fluency => "Fluency",
            Dimension::Overall => "Overall",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::OutOfRange(format!("unknown dimension {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSource {
    Native,
    Ingested,
    Judge,
}

/// Which texts the metric compares the candidate summary against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSource {
    GroundTruth,
    InputText,
    Both,
    None,
}

/// Prompt variant of the LLM-judge metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeVariant {
    /// No dimension definitions; compares with the reference summary.
    Wo,
    /// Definitions; compares with the reference summary.
    WiGt,
    /// Definitions; compares with the input text.
    WiIn,
    /// Definitions; compares with input text and reference summary.
    WiIngt,
}

impl JudgeVariant {
    pub const ALL: [JudgeVariant; 4] = [JudgeVariant::Wo, JudgeVariant::WiGt, JudgeVariant::WiIn, JudgeVariant::WiIngt];

    pub fn label(self) -> &'static str {
        match self {
            JudgeVariant::Wo => "wo",
            JudgeVariant::WiGt => "wi-gt",
            JudgeVariant::WiIn => "wi-in",
            JudgeVariant::WiIngt => "wi-ingt",
        }
    }

    pub fn with_definitions(self) -> bool {
        !matches!(self, JudgeVariant::Wo)
    }

    pub fn target(self) -> TargetSource {
        match self {
            JudgeVariant::Wo | JudgeVariant::WiGt => TargetSource::GroundTruth,
            JudgeVariant::WiIn => TargetSource::InputText,
            JudgeVariant::WiIngt => TargetSource::Both,
        }
    }

    pub fn metric_name(self, dimension: Dimension) -> String {
        format!("{}-judge ({})", self.label(), dimension.title())
    }
}

impl FromStr for JudgeVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let norm = s.replace('_', "-").to_ascii_lowercase();
        JudgeVariant::ALL
            .into_iter()
            .find(|v| v.label() == norm)
            .ok_or_else(|| Error::OutOfRange(format!("unknown judge variant {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricDescriptor {
    pub name: String,
    pub dimension: Dimension,
    pub source: MetricSource,
    pub target_source: TargetSource,
}

impl MetricDescriptor {
    pub fn new(name: impl Into<String>, dimension: Dimension, source: MetricSource, target_source: TargetSource) -> Self {
        Self {
            name: name.into(),
            dimension,
            source,
            target_source,
        }
    }

    pub fn judge(variant: JudgeVariant, dimension: Dimension) -> Self {
        Self::new(variant.metric_name(dimension), dimension, MetricSource::Judge, variant.target())
    }
}

pub const ROUGE_L: &str = "ROUGE-L";
pub const SPEARMAN: &str = "Spearman";
pub const KENDALL_TAU: &str = "Kendall-Tau";

/// The natively computed metrics, all grouped under relevance.
pub fn native_metrics() -> Vec<MetricDescriptor> {
    [ROUGE_L, SPEARMAN, KENDALL_TAU]
        .into_iter()
        .map(|n| MetricDescriptor::new(n, Dimension::Relevance, MetricSource::Native, TargetSource::GroundTruth))
        .collect()
}

/// Full 31-metric taxonomy: native, model-based (ingested) and judge metrics.
pub fn catalog() -> Vec<MetricDescriptor> {
    use Dimension::*;
    let mut out = native_metrics();
    for name in ["BARTScore", "CTC"] {
        out.push(MetricDescriptor::new(name, Consistency, MetricSource::Ingested, TargetSource::GroundTruth));
    }
    out.push(MetricDescriptor::new("SummaC", Consistency, MetricSource::Ingested, TargetSource::InputText));
    for dim in Dimension::ALL {
        out.push(MetricDescriptor::new(
            format!("UniEval ({})", dim.title()),
            dim,
            MetricSource::Ingested,
            TargetSource::Both,
        ));
        for variant in JudgeVariant::ALL {
            out.push(MetricDescriptor::judge(variant, dim));
        }
    }
    // keep Table-style grouping: metrics ordered by dimension
    out.sort_by_key(|d| d.dimension);
    out
}
