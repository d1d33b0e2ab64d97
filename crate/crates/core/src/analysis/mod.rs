//! Result tables: PRR over every (quality, uncertainty) pair, Spearman
//! correlation between profiles, and the human-annotation experiments.

mod correlation;
mod experiment;
mod human;
mod table;

pub use correlation::{correlation_matrix, CorrelationAxis, CorrelationMatrix};
pub use experiment::{run_experiment, ExperimentInput, ExperimentKind};
pub use human::{
    human_score, human_score_vector, parse_annotation_file, read_annotations, ErrorCounts, ErrorType, HumanAnnotation,
};
pub use table::{build_prr_table, PrrTable};
