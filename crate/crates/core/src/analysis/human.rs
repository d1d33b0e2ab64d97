//! Word-level human error annotations and the quality scores derived from them.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::score::{ScoreKind, ScoreVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorType {
    /// Extrinsic information.
    EI,
    /// Mis-referencing.
    MR,
    /// Stating opinion as fact.
    SOAF,
    /// Reasoning error.
    RE,
    /// Tense/modality error.
    TME,
    /// Contradiction.
    CO,
    /// Nuanced meaning shift.
    NMS,
}

impl ErrorType {
    pub const ALL: [ErrorType; 7] = [
        ErrorType::EI,
        ErrorType::MR,
        ErrorType::SOAF,
        ErrorType::RE,
        ErrorType::TME,
        ErrorType::CO,
        ErrorType::NMS,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ErrorType::EI => "EI",
            ErrorType::MR => "MR",
            ErrorType::SOAF => "SOAF",
            ErrorType::RE => "RE",
            ErrorType::TME => "TME",
            ErrorType::CO => "CO",
            ErrorType::NMS => "NMS",
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ErrorType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ErrorType::ALL
            .into_iter()
            .find(|t| t.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::OutOfRange(format!("unknown error type {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ErrorCounts {
    pub EI: u32,
    pub MR: u32,
    pub SOAF: u32,
    pub RE: u32,
    pub TME: u32,
    pub CO: u32,
    pub NMS: u32,
}

impl ErrorCounts {
    pub fn get(&self, t: ErrorType) -> u32 {
        match t {
            ErrorType::EI => self.EI,
            ErrorType::MR => self.MR,
            ErrorType::SOAF => self.SOAF,
            ErrorType::RE => self.RE,
            ErrorType::TME => self.TME,
            ErrorType::CO => self.CO,
            ErrorType::NMS => self.NMS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanAnnotation {
    pub id: String,
    pub total_words: u32,
    pub errors: ErrorCounts,
}

impl HumanAnnotation {
    pub fn validate(&self) -> Result<()> {
        if self.total_words == 0 {
            return Err(Error::OutOfRange(format!("{}: total_words must be >= 1", self.id)));
        }
        for t in ErrorType::ALL {
            if self.errors.get(t) > self.total_words {
                return Err(Error::OutOfRange(format!(
                    "{}: {} erroneous words exceed total {}",
                    self.id,
                    t,
                    self.total_words
                )));
            }
        }
        Ok(())
    }
}

/// `1 - erroneous(T) / total`.
pub fn human_score<T: Scalar>(annotation: &HumanAnnotation, error_type: ErrorType) -> T {
    T::one() - T::from_count(annotation.errors.get(error_type) as usize) / T::from_count(annotation.total_words as usize)
}

/// Human quality vector for one error type, joined onto `ids`.
pub fn human_score_vector<T: Scalar>(
    annotations: &[HumanAnnotation],
    ids: &[String],
    error_type: ErrorType,
) -> Result<ScoreVector<T>> {
    let by_id: HashMap<&str, &HumanAnnotation> = annotations.iter().map(|a| (a.id.as_str(), a)).collect();
    let mut missing = Vec::new();
    let mut values = Vec::with_capacity(ids.len());
    for id in ids {
        match by_id.get(id.as_str()) {
            Some(a) => values.push(human_score(a, error_type)),
            None => missing.push(id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingIds(missing));
    }
    ScoreVector::new(error_type.code(), ScoreKind::Human, ids.to_vec(), values)
}

pub fn read_annotations<R: BufRead>(reader: R) -> Result<Vec<HumanAnnotation>> {
    let mut out: Vec<HumanAnnotation> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let a: HumanAnnotation = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        a.validate().map_err(|e| Error::Schema {
            line: line_no,
            id: a.id.clone(),
            violations: vec![e.to_string()],
        })?;
        if !seen.insert(a.id.clone()) {
            return Err(Error::DuplicateId { id: a.id, line: line_no });
        }
        out.push(a);
    }
    Ok(out)
}

pub fn parse_annotation_file(path: impl AsRef<Path>) -> Result<Vec<HumanAnnotation>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_annotations(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ann(errors: u32, total: u32) -> HumanAnnotation {
        HumanAnnotation {
            id: "a".into(),
            total_words: total,
            errors: ErrorCounts {
                MR: errors,
                ..Default::default()
            },
        }
    }

    #[test]
    fn score_examples() {
        assert_eq!(human_score::<f64>(&ann(0, 10), ErrorType::MR), 1.0);
        assert_eq!(human_score::<f64>(&ann(10, 10), ErrorType::MR), 0.0);
        assert_eq!(human_score::<f64>(&ann(3, 12), ErrorType::MR), 0.75);
        assert_eq!(human_score::<f64>(&ann(3, 12), ErrorType::EI), 1.0);
    }

    #[test]
    fn parse_and_validate() {
        let text = r#"{"id":"x","total_words":12,"errors":{"EI":1,"MR":0,"SOAF":0,"RE":2,"TME":0,"CO":0,"NMS":3}}"#;
        let a = read_annotations(text.as_bytes()).unwrap();
        assert_eq!(a[0].errors.get(ErrorType::NMS), 3);
        let bad = r#"{"id":"x","total_words":2,"errors":{"EI":3,"MR":0,"SOAF":0,"RE":0,"TME":0,"CO":0,"NMS":0}}"#;
        assert!(read_annotations(bad.as_bytes()).is_err());
        let zero = r#"{"id":"x","total_words":0,"errors":{"EI":0,"MR":0,"SOAF":0,"RE":0,"TME":0,"CO":0,"NMS":0}}"#;
        assert!(read_annotations(zero.as_bytes()).is_err());
    }

    #[test]
    fn missing_annotation_is_error() {
        let err = human_score_vector::<f64>(&[ann(0, 5)], &["a".into(), "b".into()], ErrorType::EI).unwrap_err();
        assert!(matches!(err, Error::MissingIds(ids) if ids == ["b"]));
    }
}
