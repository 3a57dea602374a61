//! Manifest diffing: storage-layout compatibility between versions and
//! selector-level facet cuts.

use crate::codegen::manifest::Manifest;
use crate::diagnostics::{codes, Diagnostic, Severity};
use crate::layout::StorageLayout;
use crate::upgrade::abi::{CutAction, FacetAddress, FacetCut};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("new manifest has clashing selectors: {0}")]
    ClashInNew(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Verdict {
    Compatible,
    CompatibleWithWarnings,
    Incompatible,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CompatibilityReport {
    pub verdict: Verdict,
    pub findings: Vec<Diagnostic>,
}

impl CompatibilityReport {
    pub fn from_findings(findings: Vec<Diagnostic>) -> CompatibilityReport {
        let verdict = if findings.iter().any(|d| d.severity == Severity::Error) {
            Verdict::Incompatible
        } else if findings.iter().any(|d| d.severity == Severity::Warning) {
            Verdict::CompatibleWithWarnings
        } else {
            Verdict::Compatible
        };
        CompatibilityReport { verdict, findings }
    }

    pub fn is_compatible(&self) -> bool {
        self.verdict != Verdict::Incompatible
    }

    pub fn merged_with(mut self, other: CompatibilityReport) -> CompatibilityReport {
        self.findings.extend(other.findings);
        CompatibilityReport::from_findings(self.findings)
    }
}

/// Per-namespace storage layouts, the view diffing operates on. Built
/// from a manifest or from a changelog snapshot.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LayoutSet {
    pub namespaces: BTreeMap<String, StorageLayout>,
}

impl From<&Manifest> for LayoutSet {
    fn from(m: &Manifest) -> Self {
        LayoutSet {
            namespaces: m
                .facets
                .iter()
                .map(|f| (f.storage_namespace.clone(), f.layout.clone()))
                .collect(),
        }
    }
}

/// Storage compatibility of upgrading `old` to `new`.
pub fn diff_layouts(old: &Manifest, new: &Manifest) -> CompatibilityReport {
    diff_layout_sets(&LayoutSet::from(old), &LayoutSet::from(new))
}

pub fn diff_layout_sets(old: &LayoutSet, new: &LayoutSet) -> CompatibilityReport {
    let mut findings = Vec::new();
    for (namespace, old_layout) in &old.namespaces {
        let Some(new_layout) = new.namespaces.get(namespace) else {
            findings.push(Diagnostic::warning(
                codes::ORPHANED_NAMESPACE,
                format!(
                    "namespace `{namespace}` is absent from the new version; its storage is orphaned but intact"
                ),
            ));
            continue;
        };
        diff_namespace(namespace, old_layout, new_layout, &mut findings);
    }
    CompatibilityReport::from_findings(findings)
}

fn diff_namespace(
    namespace: &str,
    old: &StorageLayout,
    new: &StorageLayout,
    findings: &mut Vec<Diagnostic>,
) {
    let new_by_label: BTreeMap<&str, &crate::layout::LayoutEntry> =
        new.entries.iter().map(|e| (e.label.as_str(), e)).collect();
    let old_labels: BTreeSet<&str> = old.entries.iter().map(|e| e.label.as_str()).collect();

    for old_entry in &old.entries {
        match new_by_label.get(old_entry.label.as_str()) {
            None => findings.push(Diagnostic::error(
                codes::UPGRADE_INCOMPATIBLE,
                format!(
                    "namespace `{namespace}`: entry `{}` (slot {}, offset {}, {}) was removed; existing storage would be reinterpreted",
                    old_entry.label, old_entry.slot, old_entry.offset, old_entry.type_name
                ),
            )),
            Some(new_entry) => {
                if new_entry.slot != old_entry.slot
                    || new_entry.offset != old_entry.offset
                    || new_entry.type_name != old_entry.type_name
                {
                    findings.push(Diagnostic::error(
                        codes::UPGRADE_INCOMPATIBLE,
                        format!(
                            "namespace `{namespace}`: entry `{}` moved from (slot {}, offset {}, {}) to (slot {}, offset {}, {})",
                            old_entry.label,
                            old_entry.slot,
                            old_entry.offset,
                            old_entry.type_name,
                            new_entry.slot,
                            new_entry.offset,
                            new_entry.type_name
                        ),
                    ));
                }
            }
        }
    }

    // Append-only: new labels must sit strictly after the old tail.
    let free = old.first_free_position();
    for new_entry in &new.entries {
        if old_labels.contains(new_entry.label.as_str()) {
            continue;
        }
        if (new_entry.slot, new_entry.offset) < free {
            findings.push(Diagnostic::error(
                codes::UPGRADE_INCOMPATIBLE,
                format!(
                    "namespace `{namespace}`: new entry `{}` at (slot {}, offset {}) overlaps the region already used up to (slot {}, offset {}); new variables must be appended",
                    new_entry.label, new_entry.slot, new_entry.offset, free.0, free.1
                ),
            ));
        }
    }

    diff_structs(namespace, old, new, findings);
}

#[derive(Debug, Clone, Copy, Default)]
struct UsageContext {
    in_array: bool,
    in_mapping: bool,
}

/// Where each struct sits in the namespace's type trees.
fn struct_contexts(layout: &StorageLayout) -> BTreeMap<String, UsageContext> {
    use crate::types::{TypeDesc, TypeTable};
    let mut contexts: BTreeMap<String, UsageContext> = BTreeMap::new();
    let member_types: BTreeMap<&str, Vec<TypeDesc>> = layout
        .structs
        .iter()
        .map(|(name, sl)| {
            let members = sl
                .members
                .iter()
                .filter_map(|m| TypeTable::parse_type_string(&m.type_name).ok())
                .collect();
            (name.as_str(), members)
        })
        .collect();

    fn walk(
        ty: &crate::types::TypeDesc,
        layout: &StorageLayout,
        member_types: &BTreeMap<&str, Vec<crate::types::TypeDesc>>,
        ctx: UsageContext,
        contexts: &mut BTreeMap<String, UsageContext>,
        depth: usize,
    ) {
        use crate::types::TypeDesc;
        if depth > 32 {
            return;
        }
        match ty {
            TypeDesc::Elementary(_) | TypeDesc::Enum(_) => {}
            TypeDesc::FixedArray { elem, .. } | TypeDesc::DynArray { elem } => walk(
                elem,
                layout,
                member_types,
                UsageContext { in_array: true, ..ctx },
                contexts,
                depth + 1,
            ),
            TypeDesc::Mapping { value, .. } => walk(
                value,
                layout,
                member_types,
                UsageContext { in_mapping: true, ..ctx },
                contexts,
                depth + 1,
            ),
            TypeDesc::Struct(name) => {
                // Bare names missing from the struct table are enums.
                if !layout.structs.contains_key(name) {
                    return;
                }
                let entry = contexts.entry(name.clone()).or_default();
                entry.in_array |= ctx.in_array;
                entry.in_mapping |= ctx.in_mapping;
                if let Some(members) = member_types.get(name.as_str()) {
                    for m in members {
                        walk(m, layout, member_types, ctx, contexts, depth + 1);
                    }
                }
            }
        }
    }

    for entry in &layout.entries {
        if let Ok(ty) = crate::types::TypeTable::parse_type_string(&entry.type_name) {
            walk(&ty, layout, &member_types, UsageContext::default(), &mut contexts, 0);
        }
    }
    contexts
}

fn diff_structs(
    namespace: &str,
    old: &StorageLayout,
    new: &StorageLayout,
    findings: &mut Vec<Diagnostic>,
) {
    let old_ctx = struct_contexts(old);
    let new_ctx = struct_contexts(new);

    for (name, old_struct) in &old.structs {
        let Some(new_struct) = new.structs.get(name) else { continue };
        let old_members: Vec<(&str, u64, u8, &str)> = old_struct
            .members
            .iter()
            .map(|m| (m.label.as_str(), m.slot, m.offset, m.type_name.as_str()))
            .collect();
        let new_members: Vec<(&str, u64, u8, &str)> = new_struct
            .members
            .iter()
            .map(|m| (m.label.as_str(), m.slot, m.offset, m.type_name.as_str()))
            .collect();
        if old_members == new_members {
            continue;
        }
        let is_append = new_members.len() > old_members.len()
            && new_members[..old_members.len()] == old_members[..];

        // Conservative: consider how the struct is used in either version.
        let ctx = {
            let a = old_ctx.get(name).copied().unwrap_or_default();
            let b = new_ctx.get(name).copied().unwrap_or_default();
            UsageContext {
                in_array: a.in_array || b.in_array,
                in_mapping: a.in_mapping || b.in_mapping,
            }
        };

        if !is_append {
            findings.push(Diagnostic::error(
                codes::UPGRADE_INCOMPATIBLE,
                format!(
                    "namespace `{namespace}`: struct `{name}` changed shape (members reordered, retyped or removed); existing values would be reinterpreted"
                ),
            ));
            continue;
        }
        if ctx.in_array {
            findings.push(Diagnostic::error(
                codes::UPGRADE_INCOMPATIBLE,
                format!(
                    "namespace `{namespace}`: struct `{name}` gained members while used as an array element; the element stride changes and every element after the first shifts"
                ),
            ));
        } else if ctx.in_mapping {
            findings.push(Diagnostic::warning(
                codes::UPGRADE_INCOMPATIBLE,
                format!(
                    "namespace `{namespace}`: struct `{name}` gained members while used as a mapping value; new members read as zero for existing keys"
                ),
            ));
        }
        // Inline-only growth is covered by the entry position checks.
    }
}

// ---------------------------------------------------------------------------
// Selector diff
// ---------------------------------------------------------------------------

/// Derive the facet cuts transforming `old` into `new`: Add for new
/// selectors, Replace when the owning facet changed (by name or by
/// content), Remove (zero address) for dropped selectors. Cuts are
/// grouped per facet and ordered Add, Replace, Remove with facets
/// alphabetical.
pub fn diff_selectors(old: &Manifest, new: &Manifest) -> Result<Vec<FacetCut>, DiffError> {
    check_clash_free(new)?;
    let old_map = selector_facet_map(old);
    let new_map = selector_facet_map(new);

    let mut adds: BTreeMap<&str, Vec<[u8; 4]>> = BTreeMap::new();
    let mut replaces: BTreeMap<&str, Vec<[u8; 4]>> = BTreeMap::new();
    let mut removes: BTreeMap<&str, Vec<[u8; 4]>> = BTreeMap::new();

    for (selector, new_facet) in &new_map {
        match old_map.get(selector) {
            None => adds.entry(new_facet).or_default().push(*selector),
            Some(old_facet) => {
                let facet_changed = if old_facet == new_facet {
                    let of = old.facet(old_facet);
                    let nf = new.facet(new_facet);
                    match (of, nf) {
                        (Some(a), Some(b)) => {
                            a.layout_fingerprint != b.layout_fingerprint
                                || a.source_hash != b.source_hash
                        }
                        _ => true,
                    }
                } else {
                    true
                };
                if facet_changed {
                    replaces.entry(new_facet).or_default().push(*selector);
                }
            }
        }
    }
    for (selector, old_facet) in &old_map {
        if !new_map.contains_key(selector) {
            removes.entry(old_facet).or_default().push(*selector);
        }
    }

    let mut cuts = Vec::new();
    for (facet, selectors) in adds {
        cuts.push(FacetCut::new(
            facet,
            CutAction::Add,
            selectors,
            FacetAddress::deploy_symbol(facet),
        ));
    }
    for (facet, selectors) in replaces {
        cuts.push(FacetCut::new(
            facet,
            CutAction::Replace,
            selectors,
            FacetAddress::deploy_symbol(facet),
        ));
    }
    for (facet, selectors) in removes {
        cuts.push(FacetCut::new(facet, CutAction::Remove, selectors, FacetAddress::zero()));
    }
    Ok(cuts)
}

fn check_clash_free(manifest: &Manifest) -> Result<(), DiffError> {
    let mut seen: BTreeMap<String, (String, String)> = BTreeMap::new();
    for facet in &manifest.facets {
        for record in &facet.selectors {
            if let Some((other_facet, other_sig)) = seen.insert(
                record.selector.clone(),
                (facet.name.clone(), record.signature.clone()),
            ) {
                return Err(DiffError::ClashInNew(format!(
                    "{} maps to `{}` ({}) and `{}` ({})",
                    record.selector, other_sig, other_facet, record.signature, facet.name
                )));
            }
        }
    }
    Ok(())
}

fn selector_facet_map(manifest: &Manifest) -> BTreeMap<[u8; 4], String> {
    let mut map = BTreeMap::new();
    for facet in &manifest.facets {
        for record in &facet.selectors {
            if let Some(sel) = crate::hash::from_hex_fixed::<4>(&record.selector) {
                map.insert(sel, facet.name.clone());
            }
        }
    }
    map
}

/// Sanity-check externally supplied cuts against the selector map they
/// would be applied to.
pub fn validate_cuts(old: &Manifest, cuts: &[FacetCut]) -> Vec<Diagnostic> {
    let old_map = selector_facet_map(old);
    let mut findings = Vec::new();
    for cut in cuts {
        for sel in &cut.selectors {
            let known = old_map.contains_key(sel);
            match cut.action {
                CutAction::Add => {
                    if known {
                        findings.push(Diagnostic::error(
                            codes::SEL_CLASH,
                            format!(
                                "Add cut for `{}` targets selector {} already routed",
                                cut.facet_name,
                                crate::hash::to_hex(sel)
                            ),
                        ));
                    }
                }
                CutAction::Replace | CutAction::Remove => {
                    if !known {
                        findings.push(Diagnostic::error(
                            codes::REPLACE_UNKNOWN_SELECTOR,
                            format!(
                                "{:?} cut for `{}` targets selector {} which is not routed in the old version",
                                cut.action,
                                cut.facet_name,
                                crate::hash::to_hex(sel)
                            ),
                        ));
                    }
                }
            }
        }
        if cut.action == CutAction::Remove && cut.facet_address != FacetAddress::zero() {
            findings.push(Diagnostic::error(
                codes::UPGRADE_INCOMPATIBLE,
                format!(
                    "Remove cut for `{}` must carry the zero address",
                    cut.facet_name
                ),
            ));
        }
    }
    findings
}

/// Full upgrade validation: layout rules plus selector-level checks.
pub fn validate_upgrade(old: &Manifest, new: &Manifest) -> CompatibilityReport {
    let mut report = diff_layouts(old, new);
    match diff_selectors(old, new) {
        Ok(cuts) => {
            report.findings.extend(validate_cuts(old, &cuts));
        }
        Err(DiffError::ClashInNew(msg)) => {
            report
                .findings
                .push(Diagnostic::error(codes::CLASH_IN_NEW, msg));
        }
    }
    CompatibilityReport::from_findings(report.findings)
}

/// Apply cuts to a selector->facet map; used by the changelog fold.
pub fn apply_cuts(
    map: &mut BTreeMap<[u8; 4], String>,
    cuts: &[FacetCut],
) -> Result<(), String> {
    for cut in cuts {
        for sel in &cut.selectors {
            match cut.action {
                CutAction::Add => {
                    if map.insert(*sel, cut.facet_name.clone()).is_some() {
                        return Err(format!(
                            "Add of already-routed selector {}",
                            crate::hash::to_hex(sel)
                        ));
                    }
                }
                CutAction::Replace => {
                    if !map.contains_key(sel) {
                        return Err(format!(
                            "Replace of unrouted selector {}",
                            crate::hash::to_hex(sel)
                        ));
                    }
                    map.insert(*sel, cut.facet_name.clone());
                }
                CutAction::Remove => {
                    if map.remove(sel).is_none() {
                        return Err(format!(
                            "Remove of unrouted selector {}",
                            crate::hash::to_hex(sel)
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}
