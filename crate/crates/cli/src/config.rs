//! TOML run configuration. Relative paths resolve against the directory of
//! the configuration file.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sumue_core::nlg::{Dimension, JudgeTemplate, JudgeVariant, TargetSource};
use sumue_core::pipeline::{NativeMetric, ScoringOptions, UeMethod};
use sumue_core::prr::{DEFAULT_ALPHA, DEFAULT_SEED};
use sumue_core::RandomBaseline;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    #[default]
    MonteCarlo,
    Expected,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestedMetric {
    pub name: String,
    pub path: PathBuf,
    pub dimension: Dimension,
    #[serde(default)]
    pub target: Option<TargetSource>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgeRun {
    pub variant: JudgeVariant,
    pub dimension: Dimension,
    /// Prompt batch written by `emit-prompts`.
    pub batch: PathBuf,
    /// `{"id", "reply"}` JSONL returned by the judge.
    pub responses: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub training_embeddings: Option<PathBuf>,
    pub reference_embeddings: Option<PathBuf>,
    pub p_true_responses: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub methods: Vec<String>,
    pub metrics: Vec<String>,
    pub alpha: usize,
    pub seed: u64,
    pub baseline: BaselineKind,
    pub out: PathBuf,
    pub scoring: ScoringOptions,
    pub ingested: Vec<IngestedMetric>,
    pub judge: Vec<JudgeRun>,
    pub judge_template: JudgeTemplate,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            training_embeddings: None,
            reference_embeddings: None,
            p_true_responses: None,
            annotations: None,
            methods: UeMethod::ALL.iter().map(|m| m.name().to_string()).collect(),
            metrics: NativeMetric::ALL.iter().map(|m| m.name().to_string()).collect(),
            alpha: DEFAULT_ALPHA,
            seed: DEFAULT_SEED,
            baseline: BaselineKind::MonteCarlo,
            out: PathBuf::from("out"),
            scoring: ScoringOptions::default(),
            ingested: Vec::new(),
            judge: Vec::new(),
            judge_template: JudgeTemplate::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub alpha: Option<usize>,
    pub out: Option<PathBuf>,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            None => RunConfig::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                let mut cfg: RunConfig = toml::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
                let base = path.parent().unwrap_or(Path::new("."));
                for p in [
                    &mut cfg.corpus,
                    &mut cfg.training_embeddings,
                    &mut cfg.reference_embeddings,
                    &mut cfg.p_true_responses,
                    &mut cfg.annotations,
                ]
                .into_iter()
                .flatten()
                {
                    resolve(base, p);
                }
                resolve(base, &mut cfg.out);
                for m in &mut cfg.ingested {
                    resolve(base, &mut m.path);
                }
                for j in &mut cfg.judge {
                    resolve(base, &mut j.batch);
                    resolve(base, &mut j.responses);
                }
                cfg
            }
        };
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(alpha) = overrides.alpha {
            cfg.alpha = alpha;
        }
        if let Some(out) = &overrides.out {
            cfg.out = out.clone();
        }
        cfg.scoring.seed = cfg.seed;
        if cfg.alpha < 1 {
            return Err(CliError::Usage("alpha must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn baseline(&self) -> RandomBaseline {
        match self.baseline {
            BaselineKind::MonteCarlo => RandomBaseline::MonteCarlo {
                alpha: self.alpha,
                seed: self.seed,
            },
            BaselineKind::Expected => RandomBaseline::Expected,
        }
    }

    pub fn corpus(&self) -> Result<&Path, CliError> {
        self.corpus
            .as_deref()
            .ok_or_else(|| CliError::Usage("no corpus configured".into()))
    }

    pub fn ue_methods(&self) -> Result<Vec<UeMethod>, CliError> {
        parse_list(&self.methods, "methods")
    }

    pub fn native_metrics(&self) -> Result<Vec<NativeMetric>, CliError> {
        self.metrics
            .iter()
            .map(|m| m.parse().map_err(|e| CliError::Usage(format!("{e}"))))
            .collect()
    }

    pub fn scores_dir(&self) -> PathBuf {
        self.out.join("scores")
    }
}

fn parse_list(names: &[String], what: &str) -> Result<Vec<UeMethod>, CliError> {
    if names.is_empty() {
        return Err(CliError::Usage(format!("{what} list is empty")));
    }
    names
        .iter()
        .map(|m| m.parse().map_err(|e| CliError::Usage(format!("{e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_follow_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "corpus = \"data/corpus.jsonl\"\nmethods = [\"MSP\", \"lexsim\"]\nseed = 7\n\n[[ingested]]\nname = \"BARTScore\"\npath = \"bart.jsonl\"\ndimension = \"relevance\"\n",
        )
        .unwrap();
        let cfg = RunConfig::load(Some(&path), &Overrides::default()).unwrap();
        assert_eq!(cfg.corpus.unwrap(), dir.path().join("data/corpus.jsonl"));
        assert_eq!(cfg.ingested[0].path, dir.path().join("bart.jsonl"));
        assert_eq!(cfg.scoring.seed, 7);
        assert_eq!(cfg.alpha, DEFAULT_ALPHA);
    }

    #[test]
    fn overrides_and_validation() {
        let cfg = RunConfig::load(
            None,
            &Overrides {
                seed: Some(3),
                alpha: Some(10),
                out: None,
            },
        )
        .unwrap();
        assert_eq!(cfg.baseline(), RandomBaseline::MonteCarlo { alpha: 10, seed: 3 });
        let err = RunConfig::load(
            None,
            &Overrides {
                alpha: Some(0),
                ..Overrides::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "corpsu = \"x\"\n").unwrap();
        assert!(matches!(RunConfig::load(Some(&path), &Overrides::default()), Err(CliError::Usage(_))));
    }
}
