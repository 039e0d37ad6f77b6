//! Run manifests and all-or-nothing output staging.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lbd_core::util;
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";
const STAGING_PREFIX: &str = ".staging-";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Succeeded,
    Failed,
}

/// Wall-clock fields; the only part of a manifest that varies between
/// otherwise identical runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started: String,
    pub finished: String,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub status: Status,
    pub command: String,
    pub version: String,
    pub dataset: Option<String>,
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
    pub inputs: BTreeMap<String, String>,
    pub artifacts: BTreeMap<String, String>,
    pub summary: serde_json::Value,
    pub error: Option<String>,
    pub timestamps: Timestamps,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Manifest> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Artifacts are written into a hidden sibling directory and only moved
/// into `out` once the whole pipeline has succeeded.
pub struct Staging {
    out: PathBuf,
    dir: PathBuf,
    artifacts: BTreeMap<String, String>,
}

impl Staging {
    pub fn new(out: &Path) -> Result<Staging> {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let nanos = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or_default();
        let dir = out.join(format!("{STAGING_PREFIX}{}-{nanos}", std::process::id()));
        fs::create_dir(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Staging {
            out: out.to_path_buf(),
            dir,
            artifacts: BTreeMap::new(),
        })
    }

    /// Location for a writer that wants a path; follow with [`Staging::record`].
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn record(&mut self, name: &str) -> Result<()> {
        let hash = util::sha256_file(&self.path(name))?;
        self.artifacts.insert(name.to_owned(), hash);
        Ok(())
    }

    /// Writes text; a `.gz` name is compressed.
    pub fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        util::write_text(&self.path(name), contents)?;
        self.record(name)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.text(name, &s)
    }

    pub fn artifacts(&self) -> &BTreeMap<String, String> {
        &self.artifacts
    }

    /// Moves every artifact into place, replacing the previous run's files,
    /// then writes the manifest last.
    pub fn commit(self, manifest: &Manifest) -> Result<()> {
        remove_previous_artifacts(&self.out, Some(&self.artifacts));
        for name in self.artifacts.keys() {
            let target = self.out.join(name);
            fs::rename(self.dir.join(name), &target)
                .with_context(|| format!("moving {name} into {}", self.out.display()))?;
        }
        let _ = fs::remove_dir_all(&self.dir);
        write_manifest(&self.out, manifest)
    }

    pub fn abort(self) {
        let _ = fs::remove_dir_all(&self.dir);
    }
}

/// Deletes artifacts listed by an earlier manifest in `out` (except those
/// about to be replaced). Files the tool did not write are left alone.
fn remove_previous_artifacts(out: &Path, keep: Option<&BTreeMap<String, String>>) {
    let Ok(prev) = Manifest::read(out) else {
        return;
    };
    for name in prev.artifacts.keys() {
        if keep.is_some_and(|k| k.contains_key(name)) {
            continue;
        }
        if Path::new(name).components().count() == 1 {
            let _ = fs::remove_file(out.join(name));
        }
    }
}

fn write_manifest(out: &Path, manifest: &Manifest) -> Result<()> {
    let mut s = serde_json::to_string_pretty(manifest)?;
    s.push('\n');
    let path = out.join(MANIFEST_FILE);
    fs::write(&path, s).with_context(|| format!("writing {}", path.display()))
}

/// Leaves `out` holding only a failed manifest in place of this tool's outputs.
pub fn write_failed(out: &Path, manifest: &Manifest) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    remove_previous_artifacts(out, None);
    write_manifest(out, manifest)
}
