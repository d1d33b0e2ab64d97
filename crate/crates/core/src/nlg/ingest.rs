//! Metric scores computed elsewhere, read from `{"id", "score"}` JSONL.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::score::{ScoreKind, ScoreVector};

use super::descriptor::MetricDescriptor;

#[derive(Deserialize)]
struct ScoreLine {
    id: String,
    score: Value,
}

/// Reads `id → score` lines and aligns them to `ids`.
pub fn read_metric_scores<R: BufRead>(
    reader: R,
    descriptor: &MetricDescriptor,
    ids: &[String],
) -> Result<ScoreVector<f64>> {
    let position: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut values: Vec<Option<f64>> = vec![None; ids.len()];

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::ScoreParse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ScoreLine = serde_json::from_str(&line).map_err(|e| Error::ScoreParse {
            line: line_no,
            message: e.to_string(),
        })?;
        let score = match &parsed.score {
            Value::Number(n) => n.as_f64(),
            _ => None,
        }
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::ScoreParse {
            line: line_no,
            message: format!("score {} is not a finite number", parsed.score),
        })?;
        let &slot = position.get(parsed.id.as_str()).ok_or_else(|| Error::UnknownId {
            id: parsed.id.clone(),
            line: line_no,
        })?;
        if values[slot].replace(score).is_some() {
            return Err(Error::DuplicateId {
                id: parsed.id,
                line: line_no,
            });
        }
    }

    let missing: Vec<String> = ids
        .iter()
        .zip(&values)
        .filter(|(_, v)| v.is_none())
        .map(|(id, _)| id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingIds(missing));
    }
    ScoreVector::new(
        descriptor.name.clone(),
        ScoreKind::Nlg,
        ids.to_vec(),
        values.into_iter().flatten().collect(),
    )
}

pub fn ingest_metric_scores(
    path: impl AsRef<Path>,
    descriptor: &MetricDescriptor,
    ids: &[String],
) -> Result<ScoreVector<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_metric_scores(BufReader::new(file), descriptor, ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlg::descriptor::{Dimension, MetricSource, TargetSource};

    fn desc() -> MetricDescriptor {
        MetricDescriptor::new("SummaC", Dimension::Consistency, MetricSource::Ingested, TargetSource::InputText)
    }

    fn ids() -> Vec<String> {
        vec!["a".into(), "b".into(), "c".into()]
    }

    #[test]
    fn complete_file() {
        let text = "{\"id\":\"c\",\"score\":0.3}\n{\"id\":\"a\",\"score\":1}\n\n{\"id\":\"b\",\"score\":-2.5}\n";
        let v = read_metric_scores(text.as_bytes(), &desc(), &ids()).unwrap();
        assert_eq!(v.values, vec![1.0, -2.5, 0.3]);
        assert_eq!(v.name, "SummaC");
        assert!(v.higher_is_better);
    }

    #[test]
    fn missing_id_named() {
        let text = "{\"id\":\"a\",\"score\":1}\n{\"id\":\"c\",\"score\":1}\n";
        let err = read_metric_scores(text.as_bytes(), &desc(), &ids()).unwrap_err();
        assert!(matches!(&err, Error::MissingIds(m) if m == &["b".to_string()]));
    }

    #[test]
    fn non_numeric_score_reports_line() {
        let text = "{\"id\":\"a\",\"score\":1}\n{\"id\":\"b\",\"score\":\"abc\"}\n";
        let err = read_metric_scores(text.as_bytes(), &desc(), &ids()).unwrap_err();
        assert!(matches!(err, Error::ScoreParse { line: 2, .. }));
    }

    #[test]
    fn unknown_id_rejected() {
        let text = "{\"id\":\"zzz\",\"score\":1}\n";
        assert!(matches!(
            read_metric_scores(text.as_bytes(), &desc(), &ids()),
            Err(Error::UnknownId { line: 1, .. })
        ));
    }
}
