//! NLG quality metrics: native ROUGE-L and embedding rank correlations,
//! ingestion of externally computed scores, and the LLM-judge prompt path.

pub mod descriptor;
pub mod ingest;
pub mod judge;
pub mod rank_corr;
pub mod rouge;

pub use descriptor::{catalog, native_metrics, Dimension, JudgeVariant, MetricDescriptor, MetricSource, TargetSource};
pub use ingest::{ingest_metric_scores, read_metric_scores};
pub use judge::{
    emit_judge_prompts, extract_score, parse_judge_responses, read_judge_responses, JudgePromptBatch, JudgeScale,
    JudgeScores, JudgeTemplate, PromptItem, Rejection,
};
pub use rank_corr::{embedding_semantic_overlap, kendall_tau_b, rank_correlation, spearman, RankCorrelation};
pub use rouge::{lcs_len, rouge_l, rouge_l_tokens, tokenize};
