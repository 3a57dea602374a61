//! Machine-readable record of one generated version: facets, selectors,
//! namespaces and storage layouts. Serialization is canonical (sorted
//! keys, lowercase hex) so fingerprints and diffs are stable.

use crate::hash::{keccak256, to_hex};
use crate::layout::StorageLayout;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE_NAME: &str = "seam.manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("manifest schema error: {0}")]
    Schema(String),
    #[error("failed to parse manifest: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectorRecord {
    /// Lowercase 0x-prefixed 4-byte hex.
    pub selector: String,
    pub signature: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifestFacet {
    pub name: String,
    pub storage_namespace: String,
    pub base_slot_hex: String,
    /// Sorted by selector hex.
    pub selectors: Vec<SelectorRecord>,
    pub layout: StorageLayout,
    pub layout_fingerprint: String,
    /// Keccak-256 of the generated facet source, for replace detection.
    pub source_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub schema_version: u32,
    pub contract_name: String,
    pub version: u64,
    pub tool_version: String,
    pub facets: Vec<ManifestFacet>,
}

impl Manifest {
    /// Canonical JSON: keys sorted, two-space indent, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("manifest serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("manifest serializes");
        text.push('\n');
        text
    }

    /// Keccak-256 over the canonical JSON bytes.
    pub fn fingerprint(&self) -> String {
        to_hex(keccak256(self.to_canonical_json().as_bytes()))
    }

    pub fn from_json(text: &str) -> Result<Manifest, ManifestError> {
        let manifest: Manifest =
            serde_json::from_str(text).map_err(|e| ManifestError::Parse(e.to_string()))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(ManifestError::Schema(format!(
                "unsupported schema version {}",
                self.schema_version
            )));
        }
        if self.version < 1 {
            return Err(ManifestError::Schema("version must be >= 1".to_string()));
        }
        for facet in &self.facets {
            for record in &facet.selectors {
                let ok = record.selector.len() == 10
                    && record.selector.starts_with("0x")
                    && record.selector[2..].bytes().all(|b| b.is_ascii_hexdigit())
                    && record.selector[2..]
                        .bytes()
                        .all(|b| !b.is_ascii_uppercase());
                if !ok {
                    return Err(ManifestError::Schema(format!(
                        "invalid selector `{}` in facet `{}`",
                        record.selector, facet.name
                    )));
                }
            }
            let mut sorted = facet.selectors.clone();
            sorted.sort_by(|a, b| a.selector.cmp(&b.selector));
            if sorted != facet.selectors {
                return Err(ManifestError::Schema(format!(
                    "selectors of facet `{}` are not sorted",
                    facet.name
                )));
            }
        }
        Ok(())
    }

    /// selector hex -> facet name over all facets.
    pub fn selector_map(&self) -> std::collections::BTreeMap<String, String> {
        let mut map = std::collections::BTreeMap::new();
        for facet in &self.facets {
            for record in &facet.selectors {
                map.insert(record.selector.clone(), facet.name.clone());
            }
        }
        map
    }

    pub fn facet(&self, name: &str) -> Option<&ManifestFacet> {
        self.facets.iter().find(|f| f.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::BaseKind;

    fn sample() -> Manifest {
        Manifest {
            schema_version: 1,
            contract_name: "C".into(),
            version: 1,
            tool_version: "0.0.0".into(),
            facets: vec![ManifestFacet {
                name: "FFacet".into(),
                storage_namespace: "seam.storage.v1.FFacet".into(),
                base_slot_hex: "0x00".into(),
                selectors: vec![SelectorRecord {
                    selector: "0xa9059cbb".into(),
                    signature: "transfer(address,uint256)".into(),
                }],
                layout: StorageLayout {
                    base_kind: BaseKind::DiamondNamespace,
                    namespace: "seam.storage.v1.FFacet".into(),
                    entries: vec![],
                    structs: Default::default(),
                },
                layout_fingerprint: "0x00".into(),
                source_hash: "0x00".into(),
            }],
        }
    }

    #[test]
    fn canonical_json_round_trips_and_is_stable() {
        let m = sample();
        let j1 = m.to_canonical_json();
        let parsed = Manifest::from_json(&j1).unwrap();
        assert_eq!(parsed, m);
        assert_eq!(parsed.to_canonical_json(), j1);
        assert_eq!(m.fingerprint(), parsed.fingerprint());
    }

    #[test]
    fn keys_are_sorted_in_canonical_json() {
        let j = sample().to_canonical_json();
        let contract_pos = j.find("\"contractName\"").unwrap();
        let facets_pos = j.find("\"facets\"").unwrap();
        let schema_pos = j.find("\"schemaVersion\"").unwrap();
        assert!(contract_pos < facets_pos && facets_pos < schema_pos);
    }

    #[test]
    fn rejects_bad_schema() {
        let mut m = sample();
        m.schema_version = 9;
        assert!(m.validate().is_err());

        let mut m = sample();
        m.facets[0].selectors[0].selector = "0xZZZZZZZZ".into();
        assert!(m.validate().is_err());

        let mut m = sample();
        m.facets[0].selectors = vec![
            SelectorRecord { selector: "0xffffffff".into(), signature: "b()".into() },
            SelectorRecord { selector: "0x00000000".into(), signature: "a()".into() },
        ];
        assert!(m.validate().is_err());
    }
}
