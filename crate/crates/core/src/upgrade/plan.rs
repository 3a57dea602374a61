//! Deployment-plan emission. Plans are inert JSON documents: every
//! on-chain action is described with symbolic addresses and calldata
//! templates, nothing is ever transmitted.

use crate::codegen::manifest::Manifest;
use crate::upgrade::abi::{
    encode_with_placeholders, AbiError, AddressPlaceholder, CutAction, FacetCut, ZERO_ADDRESS,
};
use crate::upgrade::changelog::Changelog;
use crate::upgrade::diff::{diff_layout_sets, CompatibilityReport, LayoutSet};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const PLAN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("{0}")]
    Abi(#[from] AbiError),
    #[error("unknown version {0}")]
    UnknownVersion(u64),
    #[error("{0}")]
    Changelog(#[from] crate::upgrade::changelog::ChangelogError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "camelCase")]
pub enum PlanStep {
    /// Compile and deploy one facet; the resulting address substitutes
    /// for `symbol` in later steps.
    #[serde(rename_all = "camelCase")]
    DeployFacet {
        facet: String,
        source: String,
        symbol: String,
    },
    /// Deploy the diamond itself (genesis only).
    #[serde(rename_all = "camelCase")]
    DeployDiamond {
        source: String,
        symbol: String,
        constructor_args: Vec<String>,
    },
    /// Send the encoded diamondCut transaction after patching the
    /// placeholder address words.
    #[serde(rename_all = "camelCase")]
    DiamondCut {
        to: String,
        calldata: String,
        placeholders: Vec<AddressPlaceholder>,
        cuts: Vec<FacetCut>,
    },
    /// Expected loupe responses after the cut.
    #[serde(rename_all = "camelCase")]
    Verify {
        expected_facet_selectors: BTreeMap<String, Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeploymentPlan {
    pub schema_version: u32,
    pub contract_name: String,
    pub from_version: Option<u64>,
    pub to_version: u64,
    /// Set when this plan reverts to an earlier version whose storage
    /// shape the current version no longer satisfies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub irreversible: Option<bool>,
    pub steps: Vec<PlanStep>,
    pub notes: Vec<String>,
}

impl DeploymentPlan {
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("plan serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("plan serializes");
        text.push('\n');
        text
    }

    pub fn file_name(&self) -> String {
        format!("plan.{}.json", self.to_version)
    }
}

fn diamond_cut_step(cuts: &[FacetCut], to: &str) -> Result<PlanStep, AbiError> {
    let (calldata, placeholders) = encode_with_placeholders(cuts, ZERO_ADDRESS, &[])?;
    Ok(PlanStep::DiamondCut {
        to: to.to_string(),
        calldata: crate::hash::to_hex(calldata),
        placeholders,
        cuts: cuts.to_vec(),
    })
}

fn verify_step_from_cut_targets(manifest: &Manifest, facets: &[&str]) -> PlanStep {
    let mut expected = BTreeMap::new();
    for facet in manifest.facets.iter().filter(|f| facets.contains(&f.name.as_str())) {
        expected.insert(
            format!("@deploy:{}", facet.name),
            facet.selectors.iter().map(|s| s.selector.clone()).collect(),
        );
    }
    PlanStep::Verify { expected_facet_selectors: expected }
}

/// Genesis plan: deploy every facet, deploy the diamond, apply the Add
/// cuts, verify the loupe.
pub fn genesis_plan(manifest: &Manifest) -> Result<(Vec<FacetCut>, DeploymentPlan), PlanError> {
    let mut cuts = Vec::new();
    let mut steps = Vec::new();
    let mut notes = vec![
        "plan is inert: deploy steps and calldata are descriptions, nothing was transmitted"
            .to_string(),
    ];
    for facet in &manifest.facets {
        if facet.selectors.is_empty() {
            continue;
        }
        steps.push(PlanStep::DeployFacet {
            facet: facet.name.clone(),
            source: format!("facets/{}.sol", facet.name),
            symbol: format!("@deploy:{}", facet.name),
        });
        let selectors = facet
            .selectors
            .iter()
            .filter_map(|s| crate::hash::from_hex_fixed::<4>(&s.selector))
            .collect();
        cuts.push(FacetCut::new(
            facet.name.as_str(),
            CutAction::Add,
            selectors,
            crate::upgrade::abi::FacetAddress::deploy_symbol(&facet.name),
        ));
    }
    steps.push(PlanStep::DeployDiamond {
        source: "Diamond.sol".to_string(),
        symbol: "@deploy:Diamond".to_string(),
        constructor_args: vec!["@owner".to_string()],
    });
    if !cuts.is_empty() {
        steps.push(diamond_cut_step(&cuts, "@deploy:Diamond")?);
        let names: Vec<&str> = manifest.facets.iter().map(|f| f.name.as_str()).collect();
        steps.push(verify_step_from_cut_targets(manifest, &names));
    } else {
        notes.push("contract exposes no external functions; the diamond routes nothing".to_string());
    }
    if manifest
        .facets
        .iter()
        .any(|f| f.selectors.iter().any(|s| s.signature.starts_with("initialize(")))
    {
        notes.push(
            "constructor logic moved to initialize(...); call it once after the genesis cut"
                .to_string(),
        );
    }
    let plan = DeploymentPlan {
        schema_version: PLAN_SCHEMA_VERSION,
        contract_name: manifest.contract_name.clone(),
        from_version: None,
        to_version: manifest.version,
        irreversible: None,
        steps,
        notes,
    };
    Ok((cuts, plan))
}

/// Upgrade plan for precomputed cuts: deploy changed facets, cut, verify.
pub fn upgrade_plan(
    old: &Manifest,
    new: &Manifest,
    cuts: &[FacetCut],
    to_version: u64,
) -> Result<DeploymentPlan, PlanError> {
    let mut steps = Vec::new();
    let mut notes = vec![
        "plan is inert: deploy steps and calldata are descriptions, nothing was transmitted"
            .to_string(),
    ];
    if cuts.is_empty() {
        notes.push("no selector or facet changes between the two versions; nothing to do".to_string());
        return Ok(DeploymentPlan {
            schema_version: PLAN_SCHEMA_VERSION,
            contract_name: new.contract_name.clone(),
            from_version: Some(old.version),
            to_version,
            irreversible: None,
            steps,
            notes,
        });
    }
    let mut deployed = Vec::new();
    for cut in cuts {
        if cut.action != CutAction::Remove && !deployed.contains(&cut.facet_name) {
            deployed.push(cut.facet_name.clone());
            steps.push(PlanStep::DeployFacet {
                facet: cut.facet_name.clone(),
                source: format!("facets/{}.sol", cut.facet_name),
                symbol: format!("@deploy:{}", cut.facet_name),
            });
        }
    }
    steps.push(diamond_cut_step(cuts, "@diamond")?);
    let touched: Vec<&str> = deployed.iter().map(|s| s.as_str()).collect();
    steps.push(verify_step_from_cut_targets(new, &touched));
    Ok(DeploymentPlan {
        schema_version: PLAN_SCHEMA_VERSION,
        contract_name: new.contract_name.clone(),
        from_version: Some(old.version),
        to_version,
        irreversible: None,
        steps,
        notes,
    })
}

/// Revert plan: reconstruct the target version's routing from the
/// changelog, diff against the current manifest, and validate that the
/// target's storage view is still a prefix of current reality.
pub fn revert_plan(
    log: &Changelog,
    target_version: u64,
    current: &Manifest,
) -> Result<(Vec<FacetCut>, CompatibilityReport, DeploymentPlan), PlanError> {
    let target_map = log.selector_map_at(target_version)?;
    let current_map: BTreeMap<[u8; 4], String> = current
        .facets
        .iter()
        .flat_map(|f| {
            f.selectors.iter().filter_map(|s| {
                crate::hash::from_hex_fixed::<4>(&s.selector).map(|sel| (sel, f.name.clone()))
            })
        })
        .collect();

    // Selectors re-routed after the target version still point at newer
    // facet deployments even when the facet name is unchanged; those
    // need a Replace back to the facet rebuilt from target sources.
    let mut touched_since: std::collections::BTreeSet<[u8; 4]> = Default::default();
    for entry in &log.entries {
        if entry.version > target_version {
            for cut in &entry.cuts {
                touched_since.extend(cut.selectors.iter().copied());
            }
        }
    }

    let mut adds: BTreeMap<&str, Vec<[u8; 4]>> = BTreeMap::new();
    let mut replaces: BTreeMap<&str, Vec<[u8; 4]>> = BTreeMap::new();
    let mut removes: BTreeMap<&str, Vec<[u8; 4]>> = BTreeMap::new();
    for (sel, facet) in &target_map {
        match current_map.get(sel) {
            None => adds.entry(facet).or_default().push(*sel),
            Some(now) if now != facet => replaces.entry(facet).or_default().push(*sel),
            Some(_) if touched_since.contains(sel) => {
                replaces.entry(facet).or_default().push(*sel)
            }
            Some(_) => {}
        }
    }
    for (sel, facet) in &current_map {
        if !target_map.contains_key(sel) {
            removes.entry(facet).or_default().push(*sel);
        }
    }
    let mut cuts = Vec::new();
    for (facet, sels) in adds {
        cuts.push(FacetCut::new(
            facet,
            CutAction::Add,
            sels,
            crate::upgrade::abi::FacetAddress::deploy_symbol(facet),
        ));
    }
    for (facet, sels) in replaces {
        cuts.push(FacetCut::new(
            facet,
            CutAction::Replace,
            sels,
            crate::upgrade::abi::FacetAddress::deploy_symbol(facet),
        ));
    }
    for (facet, sels) in removes {
        cuts.push(FacetCut::new(
            facet,
            CutAction::Remove,
            sels,
            crate::upgrade::abi::FacetAddress::zero(),
        ));
    }

    // Storage safety: every slot the target version expects must still
    // hold what it held then. Appends since the target are orphaned but
    // harmless; shape changes make the revert irreversible.
    let target_layouts = log.layouts_at(target_version)?;
    let current_layouts = LayoutSet::from(current);
    let report = diff_layout_sets(target_layouts, &current_layouts);

    let mut notes = vec![
        "plan is inert: deploy steps and calldata are descriptions, nothing was transmitted"
            .to_string(),
        format!(
            "revert restores selector routing of version {target_version}; storage contents written since are not rolled back"
        ),
        format!(
            "facets must be rebuilt from version {target_version} sources before executing the deploy steps"
        ),
    ];
    let irreversible = !report.is_compatible();
    if irreversible {
        notes.push(
            "IRREVERSIBLE: the current storage shape no longer matches the target version; executing this plan risks data corruption"
                .to_string(),
        );
    }

    let mut steps = Vec::new();
    let mut deployed = Vec::new();
    for cut in &cuts {
        if cut.action != CutAction::Remove && !deployed.contains(&cut.facet_name) {
            deployed.push(cut.facet_name.clone());
            steps.push(PlanStep::DeployFacet {
                facet: cut.facet_name.clone(),
                source: format!("facets/{}.sol", cut.facet_name),
                symbol: format!("@deploy:{}", cut.facet_name),
            });
        }
    }
    if cuts.is_empty() {
        notes.push("already at the target routing; nothing to do".to_string());
    } else {
        steps.push(diamond_cut_step(&cuts, "@diamond")?);
    }
    let plan = DeploymentPlan {
        schema_version: PLAN_SCHEMA_VERSION,
        contract_name: current.contract_name.clone(),
        from_version: Some(current.version),
        to_version: target_version,
        irreversible: irreversible.then_some(true),
        steps,
        notes,
    };
    Ok((cuts, report, plan))
}
