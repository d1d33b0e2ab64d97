use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nlg::rank_corr::spearman;
use crate::scalar::Scalar;

use super::table::PrrTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationAxis {
    /// Correlate columns (each column's PRR profile across rows).
    BetweenMethods,
    /// Correlate rows.
    BetweenMetrics,
}

/// Symmetric Spearman matrix; `None` marks an undefined entry (a constant
/// profile), never a fabricated value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct CorrelationMatrix<T = f64> {
    pub names: Vec<String>,
    pub values: Vec<Vec<Option<T>>>,
}

pub fn correlation_matrix<T: Scalar>(table: &PrrTable<T>, axis: CorrelationAxis) -> Result<CorrelationMatrix<T>> {
    if table.n_rows() < 2 || table.n_cols() < 2 {
        return Err(Error::OutOfRange(format!(
            "correlation needs at least 2 rows and 2 columns, table is {}x{}",
            table.n_rows(),
            table.n_cols()
        )));
    }
    let (names, profiles): (Vec<String>, Vec<Vec<T>>) = match axis {
        CorrelationAxis::BetweenMethods => (
            table.col_names.clone(),
            (0..table.n_cols()).map(|j| table.column(j)).collect(),
        ),
        CorrelationAxis::BetweenMetrics => (table.row_names.clone(), table.values.clone()),
    };
    let k = profiles.len();
    let constant: Vec<bool> = profiles
        .iter()
        .map(|p| p.iter().all(|&v| v == p[0]))
        .collect();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        if !constant[i] {
            values[i][i] = Some(T::one());
        }
        for j in (i + 1)..k {
            let v = spearman(&profiles[i], &profiles[j]).ok();
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    Ok(CorrelationMatrix { names, values })
}
