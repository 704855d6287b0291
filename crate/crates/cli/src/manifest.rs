use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::input_err;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const LOCK_FILE: &str = ".lock";
const MANIFEST_VERSION: u32 = 1;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Build,
    Communities,
    Label,
    Polarisation,
    Odds,
    Activity,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Build,
        Stage::Communities,
        Stage::Label,
        Stage::Polarisation,
        Stage::Odds,
        Stage::Activity,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Build => "build",
            Stage::Communities => "communities",
            Stage::Label => "label",
            Stage::Polarisation => "polarisation",
            Stage::Odds => "odds",
            Stage::Activity => "activity",
            Stage::Report => "report",
        }
    }

    /// Stages whose output this stage reads.
    pub fn requires(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Build => &[Stage::Ingest],
            Stage::Communities => &[Stage::Build],
            Stage::Label => &[Stage::Communities],
            Stage::Polarisation | Stage::Odds | Stage::Activity => &[Stage::Label],
            Stage::Report => &[Stage::Polarisation, Stage::Odds, Stage::Activity],
        }
    }

    /// The command that produces this stage.
    pub fn command(self) -> &'static str {
        match self {
            Stage::Label => "label apply",
            s => s.name(),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub params: Value,
    /// Fingerprints of the required stages at the time this one ran.
    pub upstream: BTreeMap<Stage, String>,
    /// Artifact path (relative to the run directory) to sha256.
    pub artifacts: BTreeMap<String, String>,
    pub fingerprint: String,
    pub completed_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub run_id: Option<String>,
    /// Input file path to sha256.
    pub inputs: BTreeMap<String, String>,
    pub tracked: Vec<String>,
    pub stages: BTreeMap<Stage, StageRecord>,
}

impl Default for RunManifest {
    fn default() -> Self {
        RunManifest {
            version: MANIFEST_VERSION,
            run_id: None,
            inputs: BTreeMap::new(),
            tracked: Vec::new(),
            stages: BTreeMap::new(),
        }
    }
}

impl RunManifest {
    pub fn load(run_dir: &Path) -> Result<Self> {
        let path = run_dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(RunManifest::default());
        }
        let text = fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let manifest: RunManifest = serde_json::from_str(&text)
            .map_err(|e| input_err(format!("corrupt manifest {}: {e}", path.display())))?;
        if manifest.version != MANIFEST_VERSION {
            return Err(input_err(format!(
                "manifest version {} is not supported (expected {MANIFEST_VERSION})",
                manifest.version
            )));
        }
        Ok(manifest)
    }

    pub fn save(&self, run_dir: &Path) -> Result<()> {
        let path = run_dir.join(MANIFEST_FILE);
        let tmp = run_dir.join(format!("{MANIFEST_FILE}.tmp"));
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, &path).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    /// True when every artifact of `stage` exists with its recorded digest.
    pub fn verify(&self, run_dir: &Path, stage: Stage) -> bool {
        let Some(rec) = self.stages.get(&stage) else {
            return false;
        };
        rec.artifacts.iter().all(|(rel, digest)| {
            sha256_file(&run_dir.join(rel)).is_ok_and(|d| &d == digest)
        })
    }

    /// Every stage that reads, directly or not, from `stage`.
    pub fn downstream(stage: Stage) -> Vec<Stage> {
        let mut out: Vec<Stage> = Vec::new();
        let mut changed = true;
        while changed {
            changed = false;
            for s in Stage::ALL {
                if out.contains(&s) {
                    continue;
                }
                if s.requires().iter().any(|r| *r == stage || out.contains(r)) {
                    out.push(s);
                    changed = true;
                }
            }
        }
        out.sort();
        out
    }

    pub fn invalidate_downstream(&mut self, stage: Stage) -> Vec<Stage> {
        Self::downstream(stage)
            .into_iter()
            .filter(|s| self.stages.remove(s).is_some())
            .collect()
    }

    /// Artifacts of `stage` under `dir/`, keyed by file stem.
    pub fn artifacts_in(&self, stage: Stage, dir: &str) -> Vec<String> {
        let prefix = format!("{dir}/");
        self.stages
            .get(&stage)
            .map(|rec| {
                rec.artifacts
                    .keys()
                    .filter_map(|k| k.strip_prefix(&prefix))
                    .filter_map(|f| f.strip_suffix(".json"))
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default()
    }
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Exclusive writer lock on a run directory, released on drop.
#[derive(Debug)]
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(run_dir: &Path) -> Result<Self> {
        fs::create_dir_all(run_dir)
            .with_context(|| format!("creating run directory {}", run_dir.display()))?;
        let path = run_dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(RunLock { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                let holder = fs::read_to_string(&path).unwrap_or_default();
                Err(input_err(format!(
                    "run directory {} is locked by process {}; remove {} if that process is gone",
                    run_dir.display(),
                    holder.trim(),
                    path.display()
                )))
            }
            Err(e) => Err(e).with_context(|| format!("creating {}", path.display())),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
