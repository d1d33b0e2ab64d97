//! Atomic file writes and the on-disk score store: one `{"id", "score"}`
//! JSONL file per score vector plus a manifest.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sumue_core::nlg::Rejection;
use sumue_core::pipeline::Skip;
use sumue_core::{ScoreKind, ScoreVector};

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// File-system safe stem for a metric or method name.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    let trimmed = out.trim_matches('_');
    if trimmed.is_empty() {
        "score".to_string()
    } else {
        trimmed.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub kind: ScoreKind,
    pub higher_is_better: bool,
    /// Relative to the manifest directory.
    pub file: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

/// Methods and metrics that `score` could not compute.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SkipReport {
    pub skipped: Vec<Skip>,
}

pub const MANIFEST: &str = "manifest.json";
pub const SKIP_REPORT: &str = "skip_report.json";

#[derive(Serialize, Deserialize)]
struct ScoreLine {
    id: String,
    score: f64,
}

pub struct ScoreStore {
    dir: PathBuf,
}

impl ScoreStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join(MANIFEST)
    }

    pub fn read_manifest(&self) -> Result<Manifest> {
        let path = self.manifest_path();
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn read_manifest_or_default(&self) -> Result<Manifest> {
        if self.manifest_path().exists() {
            self.read_manifest()
        } else {
            Ok(Manifest::default())
        }
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<()> {
        write_json(&self.manifest_path(), manifest)
    }

    /// Writes the vector and returns its manifest entry.
    pub fn write_scores(&self, scores: &ScoreVector<f64>, rejected: Vec<Rejection>) -> Result<ManifestEntry> {
        let prefix = match scores.kind {
            ScoreKind::Uncertainty => "ue",
            ScoreKind::Nlg => "nlg",
            ScoreKind::Human => "human",
        };
        let file = format!("{prefix}_{}.jsonl", slug(&scores.name));
        let mut text = String::new();
        for (id, &score) in scores.ids.iter().zip(&scores.values) {
            text.push_str(&serde_json::to_string(&ScoreLine { id: id.clone(), score })?);
            text.push('\n');
        }
        write_atomic(&self.dir.join(&file), text.as_bytes())?;
        Ok(ManifestEntry {
            name: scores.name.clone(),
            kind: scores.kind,
            higher_is_better: scores.higher_is_better,
            file,
            rejected,
        })
    }

    pub fn read_scores(&self, entry: &ManifestEntry) -> Result<ScoreVector<f64>> {
        let path = self.dir.join(&entry.file);
        let file = fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: ScoreLine =
                serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
            ids.push(parsed.id);
            values.push(parsed.score);
        }
        let v = ScoreVector::new(entry.name.clone(), entry.kind, ids, values)?;
        if v.higher_is_better != entry.higher_is_better {
            bail!("{}: orientation in manifest disagrees with kind", entry.name);
        }
        Ok(v)
    }
}

/// Adds `entry` to the manifest, replacing an entry of the same name.
pub fn upsert(manifest: &mut Manifest, entry: ManifestEntry) {
    match manifest.entries.iter_mut().find(|e| e.name == entry.name) {
        Some(slot) => *slot = entry,
        None => manifest.entries.push(entry),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("P(True)"), "p_true");
        assert_eq!(slug("wi-ingt-judge (Consistency)"), "wi_ingt_judge_consistency");
        assert_eq!(slug("T-RMI"), "t_rmi");
        assert_eq!(slug("??"), "score");
    }

    #[test]
    fn scores_roundtrip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let store = ScoreStore::new(dir.path());
        let v = ScoreVector::new(
            "MSP",
            ScoreKind::Uncertainty,
            vec!["a".into(), "b".into()],
            vec![0.1 + 0.2, 1e-300],
        )
        .unwrap();
        let entry = store.write_scores(&v, vec![]).unwrap();
        assert_eq!(entry.file, "ue_msp.jsonl");
        assert_eq!(store.read_scores(&entry).unwrap(), v);
    }
}
