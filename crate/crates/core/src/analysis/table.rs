use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prr::{QualityReference, RandomBaseline};
use crate::scalar::{mean, Scalar};
use crate::score::ScoreVector;

/// PRR values for every (row, column) pair, with the column means (and
/// optionally row means) the result tables carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PrrTable<T = f64> {
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
    pub values: Vec<Vec<T>>,
    pub col_means: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_means: Option<Vec<T>>,
    /// Cells whose quality vector was constant (PRR reported as 0).
    #[serde(default)]
    pub degenerate: Vec<Vec<bool>>,
}

impl<T: Scalar> PrrTable<T> {
    pub fn new(row_names: Vec<String>, col_names: Vec<String>, values: Vec<Vec<T>>) -> Result<Self> {
        if values.len() != row_names.len() {
            return Err(Error::LengthMismatch {
                expected: row_names.len(),
                actual: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|r| r.len() != col_names.len()) {
            return Err(Error::LengthMismatch {
                expected: col_names.len(),
                actual: bad.len(),
            });
        }
        let degenerate = vec![vec![false; col_names.len()]; row_names.len()];
        let mut table = Self {
            row_names,
            col_names,
            values,
            col_means: Vec::new(),
            row_means: None,
            degenerate,
        };
        table.col_means = table.compute_col_means();
        Ok(table)
    }

    pub fn n_rows(&self) -> usize {
        self.row_names.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_names.len()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.values.iter().map(|r| r[j]).collect()
    }

    fn compute_col_means(&self) -> Vec<T> {
        (0..self.n_cols())
            .map(|j| mean(&self.column(j)).unwrap_or_else(T::nan))
            .collect()
    }

    pub fn with_row_means(mut self) -> Self {
        self.row_means = Some(
            self.values
                .iter()
                .map(|r| mean(r).unwrap_or_else(T::nan))
                .collect(),
        );
        self
    }

    /// Swaps rows and columns; means are recomputed (row means kept if present).
    pub fn transpose(&self) -> Self {
        let values = (0..self.n_cols()).map(|j| self.column(j)).collect();
        let degenerate = (0..self.n_cols())
            .map(|j| self.degenerate.iter().map(|r| r[j]).collect())
            .collect();
        let mut t = Self::new(self.col_names.clone(), self.row_names.clone(), values).expect("transposed shape");
        t.degenerate = degenerate;
        if self.row_means.is_some() {
            t = t.with_row_means();
        }
        t
    }
}

/// Rows are quality vectors, columns uncertainty vectors; cell `(i, j)` is
/// `PRR(uncertainty_j, quality_i)`.
pub fn build_prr_table<T: Scalar>(
    uncertainty: &[ScoreVector<T>],
    quality: &[ScoreVector<T>],
    baseline: RandomBaseline,
) -> Result<PrrTable<T>> {
    if uncertainty.is_empty() {
        return Err(Error::Empty("uncertainty score vectors"));
    }
    if quality.is_empty() {
        return Err(Error::Empty("quality score vectors"));
    }
    let anchor = &quality[0];
    for v in uncertainty.iter().chain(quality) {
        anchor.ensure_aligned(v)?;
    }
    if let Some(bad) = uncertainty.iter().find(|u| u.higher_is_better) {
        return Err(Error::OutOfRange(format!("{} is not an uncertainty score", bad.name)));
    }
    if let Some(bad) = quality.iter().find(|q| !q.higher_is_better) {
        return Err(Error::OutOfRange(format!("{} is not a quality score", bad.name)));
    }

    let rows: Vec<(Vec<T>, Vec<bool>)> = quality
        .par_iter()
        .map(|q| -> Result<_> {
            let reference = QualityReference::new(&q.values, baseline)?;
            let mut values = Vec::with_capacity(uncertainty.len());
            let mut flags = Vec::with_capacity(uncertainty.len());
            for u in uncertainty {
                let r = reference.evaluate(&u.values)?;
                values.push(r.prr);
                flags.push(r.degenerate);
            }
            Ok((values, flags))
        })
        .collect::<Result<_>>()?;

    let (values, degenerate): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let mut table = PrrTable::new(
        quality.iter().map(|q| q.name.clone()).collect(),
        uncertainty.iter().map(|u| u.name.clone()).collect(),
        values,
    )?;
    table.degenerate = degenerate;
    Ok(table)
}
