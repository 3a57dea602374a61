//! Version history as a single JSON chain: cuts, manifest fingerprints
//! and per-namespace layout snapshots, enough to reconstruct any
//! version's selector map and to validate a revert without the original
//! manifests on hand.

use crate::codegen::manifest::Manifest;
use crate::upgrade::abi::FacetCut;
use crate::upgrade::diff::{apply_cuts, LayoutSet};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

pub const CHANGELOG_SCHEMA_VERSION: u32 = 1;
pub const CHANGELOG_FILE_NAME: &str = "seam.changelog.json";

#[derive(Debug, Error)]
pub enum ChangelogError {
    #[error("version gap: expected version {expected}, got {got}")]
    VersionGap { expected: u64, got: u64 },
    #[error("fork detected: entry for version {version} declares parent {declared:?}, chain head is {head:?}")]
    ForkDetected {
        version: u64,
        declared: Option<u64>,
        head: Option<u64>,
    },
    #[error("unknown version {0}")]
    UnknownVersion(u64),
    #[error("changelog chain is corrupt: {0}")]
    Corrupt(String),
    #[error("failed to parse changelog: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChangelogEntry {
    pub version: u64,
    pub parent_version: Option<u64>,
    /// ISO-8601 UTC; recorded but excluded from fingerprints so the
    /// chain stays reproducible.
    pub timestamp_utc: String,
    pub cuts: Vec<FacetCut>,
    pub manifest_fingerprint: String,
    pub note: String,
    /// Per-namespace layouts of this version, for revert validation.
    pub layouts: LayoutSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Changelog {
    pub schema_version: u32,
    pub contract_name: String,
    pub entries: Vec<ChangelogEntry>,
}

impl Changelog {
    pub fn new(contract_name: impl Into<String>) -> Changelog {
        Changelog {
            schema_version: CHANGELOG_SCHEMA_VERSION,
            contract_name: contract_name.into(),
            entries: Vec::new(),
        }
    }

    pub fn head_version(&self) -> Option<u64> {
        self.entries.last().map(|e| e.version)
    }

    pub fn entry(&self, version: u64) -> Option<&ChangelogEntry> {
        self.entries.iter().find(|e| e.version == version)
    }

    /// Append an entry, enforcing the +1 version rule and parent linkage.
    pub fn append(&mut self, entry: ChangelogEntry) -> Result<(), ChangelogError> {
        let head = self.head_version();
        let expected = head.unwrap_or(0) + 1;
        if entry.version != expected {
            return Err(ChangelogError::VersionGap { expected, got: entry.version });
        }
        if entry.parent_version != head {
            return Err(ChangelogError::ForkDetected {
                version: entry.version,
                declared: entry.parent_version,
                head,
            });
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Reconstruct the selector->facet map of `version` by folding cuts
    /// from genesis.
    pub fn selector_map_at(
        &self,
        version: u64,
    ) -> Result<BTreeMap<[u8; 4], String>, ChangelogError> {
        if self.entry(version).is_none() {
            return Err(ChangelogError::UnknownVersion(version));
        }
        let mut map = BTreeMap::new();
        for entry in &self.entries {
            if entry.version > version {
                break;
            }
            apply_cuts(&mut map, &entry.cuts)
                .map_err(|e| ChangelogError::Corrupt(format!("at version {}: {e}", entry.version)))?;
        }
        Ok(map)
    }

    pub fn layouts_at(&self, version: u64) -> Result<&LayoutSet, ChangelogError> {
        self.entry(version)
            .map(|e| &e.layouts)
            .ok_or(ChangelogError::UnknownVersion(version))
    }

    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("changelog serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("changelog serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Changelog, ChangelogError> {
        let log: Changelog =
            serde_json::from_str(text).map_err(|e| ChangelogError::Parse(e.to_string()))?;
        if log.schema_version != CHANGELOG_SCHEMA_VERSION {
            return Err(ChangelogError::Parse(format!(
                "unsupported schema version {}",
                log.schema_version
            )));
        }
        // Verify the chain invariants on load.
        let mut replay = Changelog::new(log.contract_name.clone());
        for entry in &log.entries {
            replay.append(entry.clone()).map_err(|e| {
                ChangelogError::Corrupt(format!("invalid chain in file: {e}"))
            })?;
        }
        Ok(log)
    }

    pub fn load(path: &Path) -> Result<Changelog, ChangelogError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ChangelogError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Write atomically: temp file in the same directory, then rename.
    pub fn save(&self, path: &Path) -> Result<(), ChangelogError> {
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, self.to_canonical_json())
            .map_err(|e| ChangelogError::Io(format!("{}: {e}", tmp.display())))?;
        std::fs::rename(&tmp, path)
            .map_err(|e| ChangelogError::Io(format!("{}: {e}", path.display())))?;
        Ok(())
    }
}

/// Build the entry recording an upgrade to `new_manifest` via `cuts`.
pub fn entry_for(
    log: &Changelog,
    new_manifest: &Manifest,
    cuts: Vec<FacetCut>,
    note: impl Into<String>,
) -> ChangelogEntry {
    ChangelogEntry {
        version: log.head_version().unwrap_or(0) + 1,
        parent_version: log.head_version(),
        timestamp_utc: now_utc_iso8601(),
        cuts,
        manifest_fingerprint: new_manifest.fingerprint(),
        note: note.into(),
        layouts: LayoutSet::from(new_manifest),
    }
}

pub fn now_utc_iso8601() -> String {
    chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string()
}
