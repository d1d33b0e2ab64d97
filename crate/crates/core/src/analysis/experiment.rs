use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prr::RandomBaseline;
use crate::scalar::Scalar;
use crate::score::{ScoreKind, ScoreVector};

use super::human::{human_score_vector, ErrorType, HumanAnnotation};
use super::table::{build_prr_table, PrrTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Uncertainty methods against NLG metrics.
    UeNlg,
    /// Uncertainty methods against human error annotations.
    UeHum,
    /// Negated NLG metrics (as uncertainty) against human error annotations.
    NlgHum,
}

#[derive(Debug, Clone, Copy)]
pub struct ExperimentInput<'a, T> {
    pub ue: &'a [ScoreVector<T>],
    pub nlg: &'a [ScoreVector<T>],
    pub annotations: Option<&'a [HumanAnnotation]>,
}

fn human_vectors<T: Scalar>(annotations: Option<&[HumanAnnotation]>, ids: &[String]) -> Result<Vec<ScoreVector<T>>> {
    let annotations = annotations.ok_or_else(|| Error::MissingInput("experiment needs human annotations".into()))?;
    ErrorType::ALL
        .into_iter()
        .map(|t| human_score_vector(annotations, ids, t))
        .collect()
}

/// Table layouts:
/// - `UeNlg`: rows NLG metrics, columns UE methods.
/// - `UeHum`: rows error types, columns UE methods, with row means.
/// - `NlgHum`: rows NLG metrics, columns error types, with row means.
pub fn run_experiment<T: Scalar>(
    kind: ExperimentKind,
    input: ExperimentInput<'_, T>,
    baseline: RandomBaseline,
) -> Result<PrrTable<T>> {
    match kind {
        ExperimentKind::UeNlg => build_prr_table(input.ue, input.nlg, baseline),
        ExperimentKind::UeHum => {
            let ids = &input.ue.first().ok_or(Error::Empty("uncertainty score vectors"))?.ids;
            let human = human_vectors(input.annotations, ids)?;
            Ok(build_prr_table(input.ue, &human, baseline)?.with_row_means())
        }
        ExperimentKind::NlgHum => {
            let ids = &input.nlg.first().ok_or(Error::Empty("NLG score vectors"))?.ids;
            let human = human_vectors(input.annotations, ids)?;
            let negated: Vec<ScoreVector<T>> = input
                .nlg
                .iter()
                .map(|s| s.negated(s.name.clone(), ScoreKind::Uncertainty))
                .collect();
            Ok(build_prr_table(&negated, &human, baseline)?.transpose().with_row_means())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::human::ErrorCounts;

    fn annotations(n: usize) -> Vec<HumanAnnotation> {
        (0..n)
            .map(|i| {
                let e = (i * 7 % 5) as u32;
                HumanAnnotation {
                    id: format!("r{i}"),
                    total_words: 10,
                    errors: ErrorCounts {
                        EI: e,
                        MR: e,
                        SOAF: e,
                        RE: e,
                        TME: e,
                        CO: e,
                        NMS: e,
                    },
                }
            })
            .collect()
    }

    #[test]
    fn nlg_hum_self_alignment_is_all_ones() {
        let ann = annotations(10);
        let ids: Vec<String> = ann.iter().map(|a| a.id.clone()).collect();
        let mut nlg: ScoreVector<f64> = human_score_vector(&ann, &ids, ErrorType::EI).unwrap();
        nlg.kind = ScoreKind::Nlg;
        nlg.name = "metric".into();
        let table = run_experiment(
            ExperimentKind::NlgHum,
            ExperimentInput {
                ue: &[],
                nlg: &[nlg],
                annotations: Some(&ann),
            },
            RandomBaseline::default(),
        )
        .unwrap();
        assert_eq!(table.row_names, vec!["metric"]);
        assert_eq!(table.col_names.len(), 7);
        assert!(table.values.iter().flatten().all(|&v| v == 1.0));
        assert_eq!(table.row_means, Some(vec![1.0]));
    }

    #[test]
    fn human_experiments_need_annotations() {
        let ids: Vec<String> = (0..3).map(|i| format!("r{i}")).collect();
        let ue = ScoreVector::new("u", ScoreKind::Uncertainty, ids, vec![0.1, 0.2, 0.3]).unwrap();
        let err = run_experiment(
            ExperimentKind::UeHum,
            ExperimentInput {
                ue: &[ue],
                nlg: &[],
                annotations: None,
            },
            RandomBaseline::Expected,
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingInput(_)));
    }
}
