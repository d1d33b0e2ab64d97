//! Named per-sample score vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Uncertainty,
    Nlg,
    Human,
}

impl ScoreKind {
    /// Uncertainty scores rank low-to-high as confident-to-uncertain; quality
    /// scores (NLG, human) are higher-is-better.
    pub fn higher_is_better(self) -> bool {
        !matches!(self, ScoreKind::Uncertainty)
    }
}

/// One method's or metric's scores over a corpus, aligned with `ids`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ScoreVector<T = f64> {
    pub name: String,
    pub kind: ScoreKind,
    pub ids: Vec<String>,
    pub values: Vec<T>,
    pub higher_is_better: bool,
}

impl<T: Scalar> ScoreVector<T> {
    pub fn new(name: impl Into<String>, kind: ScoreKind, ids: Vec<String>, values: Vec<T>) -> Result<Self> {
        let name = name.into();
        if ids.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: ids.len(),
                actual: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::OutOfRange(format!("{name}: NaN score for id {:?}", ids[i])));
        }
        Ok(Self {
            name,
            kind,
            ids,
            values,
            higher_is_better: kind.higher_is_better(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Elementwise `-1 × values`, relabelled with `kind`.
    pub fn negated(&self, name: impl Into<String>, kind: ScoreKind) -> Self {
        Self {
            name: name.into(),
            kind,
            ids: self.ids.clone(),
            values: self.values.iter().map(|&v| -v).collect(),
            higher_is_better: kind.higher_is_better(),
        }
    }

    pub fn ensure_aligned(&self, other: &ScoreVector<T>) -> Result<()> {
        if self.ids != other.ids {
            return Err(Error::Misaligned {
                left: self.name.clone(),
                right: other.name.clone(),
            });
        }
        Ok(())
    }
}
