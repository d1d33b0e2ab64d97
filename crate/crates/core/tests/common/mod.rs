#![allow(dead_code)]

use sumue_core::{ScoreKind, ScoreVector};

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("r{i:03}")).collect()
}

pub fn nlg(name: &str, values: Vec<f64>) -> ScoreVector<f64> {
    ScoreVector::new(name, ScoreKind::Nlg, ids(values.len()), values).unwrap()
}

pub fn unc(name: &str, values: Vec<f64>) -> ScoreVector<f64> {
    ScoreVector::new(name, ScoreKind::Uncertainty, ids(values.len()), values).unwrap()
}
