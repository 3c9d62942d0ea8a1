//! File-based artifact registry.
//!
//! Layout under the registry root: `datasets/`, `models/`, `reports/` and
//! an `index.toml` listing every artifact with its kind, platform,
//! scenario tag, seed and relative path. The index can always be rebuilt
//! by scanning the directories; incremental updates go through the same
//! per-file derivation, so a rebuild never disagrees with it.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Entry {
    pub path: String,
    pub kind: String,
    pub platform: String,
    pub scenario: String,
    pub seed: u64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct IndexDoc {
    #[serde(default)]
    artifacts: Vec<Entry>,
}

pub struct Registry {
    root: PathBuf,
}

impl Registry {
    /// Opens (creating if needed) a registry at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Registry> {
        let root = root.into();
        for sub in ["datasets", "models", "reports"] {
            fs::create_dir_all(root.join(sub))
                .with_context(|| format!("creating {}/{sub}", root.display()))?;
        }
        Ok(Registry { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn datasets_dir(&self) -> PathBuf {
        self.root.join("datasets")
    }

    pub fn models_dir(&self) -> PathBuf {
        self.root.join("models")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    fn index_path(&self) -> PathBuf {
        self.root.join("index.toml")
    }

    pub fn load_index(&self) -> Result<Vec<Entry>> {
        let path = self.index_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        let text = fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let doc: IndexDoc = toml::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        Ok(doc.artifacts)
    }

    fn write_index(&self, mut entries: Vec<Entry>) -> Result<()> {
        entries.sort();
        entries.dedup_by(|a, b| a.path == b.path);
        let text = toml::to_string(&IndexDoc { artifacts: entries })?;
        fs::write(self.index_path(), text)
            .with_context(|| format!("writing {}", self.index_path().display()))?;
        Ok(())
    }

    /// Records one artifact file (must live under the registry root).
    pub fn record(&self, path: &Path) -> Result<()> {
        let entry = self.entry_for(path)?;
        let mut entries: Vec<Entry> =
            self.load_index()?.into_iter().filter(|e| e.path != entry.path).collect();
        entries.push(entry);
        self.write_index(entries)
    }

    /// Rescans the artifact directories and rewrites the index.
    pub fn rebuild(&self) -> Result<Vec<Entry>> {
        let entries = self.scan()?;
        self.write_index(entries.clone())?;
        Ok(entries)
    }

    pub fn scan(&self) -> Result<Vec<Entry>> {
        let mut entries = Vec::new();
        for dir in [self.datasets_dir(), self.models_dir(), self.reports_dir()] {
            let mut files: Vec<PathBuf> = fs::read_dir(&dir)
                .with_context(|| format!("scanning {}", dir.display()))?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.is_file())
                .collect();
            files.sort();
            for f in files {
                entries.push(self.entry_for(&f)?);
            }
        }
        entries.sort();
        Ok(entries)
    }

    /// Derives the index entry for a file; shared by `record` and
    /// `rebuild` so the two can never diverge.
    fn entry_for(&self, path: &Path) -> Result<Entry> {
        let rel = path
            .strip_prefix(&self.root)
            .with_context(|| format!("{} is outside the registry", path.display()))?
            .to_string_lossy()
            .replace('\\', "/");
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_default();

        if rel.starts_with("datasets/") {
            let ds = vbspower::ingest_csv(path)
                .with_context(|| format!("reading dataset {}", path.display()))?;
            let seed = name
                .rsplit_once("_seed")
                .and_then(|(_, s)| s.parse().ok())
                .unwrap_or(0);
            return Ok(Entry {
                path: rel,
                kind: "dataset".into(),
                platform: ds.platform().to_string(),
                scenario: ds.scheduler().as_str().to_string(),
                seed,
            });
        }
        if rel.starts_with("models/") {
            let model = vbspower::load_model(path)
                .with_context(|| format!("reading model {}", path.display()))?;
            return Ok(Entry {
                path: rel,
                kind: "model".into(),
                platform: model.platform.clone(),
                scenario: model.train_scenario.clone(),
                seed: model.seed,
            });
        }
        if rel.starts_with("reports/") {
            // Canonical report names: eval_{S}_{platform}_seeds{a}-{b},
            // scatter_{S}_{platform}_{kind}_seed{n}, bars_{S}_{platform}_...
            let parts: Vec<&str> = name.split('_').collect();
            let (scenario, platform) = if parts.len() >= 3 {
                (parts[1].to_string(), parts[2].to_string())
            } else {
                (String::new(), String::new())
            };
            let seed = name
                .rsplit_once("_seed")
                .and_then(|(_, s)| s.parse().ok())
                .or_else(|| {
                    name.rsplit_once("_seeds")
                        .and_then(|(_, s)| s.split('-').next().and_then(|v| v.parse().ok()))
                })
                .unwrap_or(0);
            return Ok(Entry {
                path: rel,
                kind: "report".into(),
                platform,
                scenario,
                seed,
            });
        }
        bail!("{} is not inside a known registry subdirectory", path.display());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incremental_record_matches_rebuild() {
        let dir = tempfile::tempdir().unwrap();
        let reg = Registry::open(dir.path()).unwrap();

        let ds_path = reg.datasets_dir().join("Server1_custom_seed9.csv");
        fs::write(
            &ds_path,
            "airtime,snr_db,mcs,power_w,scheduler,platform\n\
             0.500,20.00,10,22.9500,custom,Server1\n",
        )
        .unwrap();
        reg.record(&ds_path).unwrap();

        let incremental = reg.load_index().unwrap();
        let scanned = reg.rebuild().unwrap();
        assert_eq!(incremental, scanned);
        assert_eq!(scanned.len(), 1);
        assert_eq!(scanned[0].kind, "dataset");
        assert_eq!(scanned[0].platform, "Server1");
        assert_eq!(scanned[0].scenario, "custom");
        assert_eq!(scanned[0].seed, 9);
    }
}
