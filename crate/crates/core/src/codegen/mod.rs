//! Diamond contract generation: Solidity sources plus the manifest.

pub mod manifest;
pub mod printer;
pub mod solidity;

pub use manifest::{Manifest, ManifestFacet, SelectorRecord, MANIFEST_FILE_NAME};
pub use printer::{print_expr, print_file, print_unit};

use crate::facetizer::FacetPlan;
use crate::frontend::ast::SourceUnit;
use crate::hash::{keccak256, to_hex};
use crate::layout::{diamond_storage_slot, fingerprint_hex, LayoutError};
use crate::security::{canonical_signature, compute_selector, plan_function, SecurityError};
use crate::types::TypeTable;
use std::collections::BTreeMap;
use thiserror::Error;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error("internal rewrite error: `{variable}` escaped rewriting in {facet}.{function}")]
    InternalRewrite {
        facet: String,
        function: String,
        variable: String,
    },
    #[error("{0}")]
    Layout(#[from] LayoutError),
    #[error("{0}")]
    Security(#[from] SecurityError),
    #[error("codegen invariant violated: {0}")]
    Internal(String),
}

/// Everything one conversion produces: relative path -> file text, plus
/// the machine-readable manifest.
#[derive(Debug, Clone)]
pub struct GeneratedBundle {
    pub files: BTreeMap<String, String>,
    pub manifest: Manifest,
}

impl GeneratedBundle {
    pub fn file(&self, path: &str) -> Option<&str> {
        self.files.get(path).map(|s| s.as_str())
    }
}

/// Generate the full bundle for a facet plan.
pub fn generate_bundle(
    unit: &SourceUnit,
    plan: &FacetPlan,
    version: u64,
) -> Result<GeneratedBundle, CodegenError> {
    let table = TypeTable::from_contract(&unit.contract)
        .map_err(|e| CodegenError::Internal(e.to_string()))?;
    let mut files = BTreeMap::new();

    let types_file = solidity::generate_types_file(unit);
    let has_types_file = types_file.is_some();
    if let Some(text) = types_file {
        files.insert("libraries/Types.sol".to_string(), text);
    }

    let mut facet_sources: BTreeMap<String, String> = BTreeMap::new();
    for facet in &plan.facets {
        let storage_lib = solidity::generate_storage_lib(unit, plan, facet, has_types_file)?;
        let has_storage_lib = storage_lib.is_some();
        if let Some(text) = storage_lib {
            files.insert(
                format!("libraries/{}.sol", solidity::storage_lib_name(&facet.name)),
                text,
            );
        }
        let source = solidity::generate_facet(unit, plan, facet, has_types_file, has_storage_lib)?;
        facet_sources.insert(facet.name.clone(), source.clone());
        files.insert(format!("facets/{}.sol", facet.name), source);
    }

    if let Some(text) = solidity::generate_shared_lib(unit, plan, has_types_file)? {
        files.insert(
            format!("libraries/{}.sol", plan.shared_library.name),
            text,
        );
    }

    files.insert(
        "libraries/LibDiamondStorage.sol".to_string(),
        solidity::generate_diamond_storage_lib(plan)?,
    );
    files.insert("Diamond.sol".to_string(), solidity::generate_diamond()?);

    let manifest = emit_manifest(unit, plan, &table, &facet_sources, version)?;
    Ok(GeneratedBundle { files, manifest })
}

/// Build the manifest for a plan. Selectors inside each facet are sorted
/// by hex; the global-uniqueness invariant holds whenever the plan passed
/// clash detection.
pub fn emit_manifest(
    unit: &SourceUnit,
    plan: &FacetPlan,
    table: &TypeTable,
    facet_sources: &BTreeMap<String, String>,
    version: u64,
) -> Result<Manifest, CodegenError> {
    let mut facets = Vec::with_capacity(plan.facets.len());
    for facet in &plan.facets {
        let mut selectors = Vec::new();
        for fn_name in &facet.external_functions {
            let func = plan_function(unit, plan, fn_name).ok_or_else(|| {
                CodegenError::Internal(format!("missing function `{fn_name}`"))
            })?;
            let signature = canonical_signature(fn_name, func, table)?;
            let selector = compute_selector(&signature)?;
            selectors.push(SelectorRecord {
                selector: to_hex(selector),
                signature,
            });
        }
        selectors.sort_by(|a, b| a.selector.cmp(&b.selector));

        let source_hash = facet_sources
            .get(&facet.name)
            .map(|src| to_hex(keccak256(src.as_bytes())))
            .unwrap_or_else(|| to_hex([0u8; 32]));

        facets.push(ManifestFacet {
            name: facet.name.clone(),
            storage_namespace: facet.storage_namespace.clone(),
            base_slot_hex: to_hex(diamond_storage_slot(&facet.storage_namespace)?),
            selectors,
            layout: facet.storage_layout.clone(),
            layout_fingerprint: fingerprint_hex(&facet.storage_layout),
            source_hash,
        });
    }
    Ok(Manifest {
        schema_version: manifest::MANIFEST_SCHEMA_VERSION,
        contract_name: plan.contract_name.clone(),
        version,
        tool_version: TOOL_VERSION.to_string(),
        facets,
    })
}
