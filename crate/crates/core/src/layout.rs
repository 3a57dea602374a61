//! Canonical Solidity storage layout computation.
//!
//! Implements the packing rules of the Solidity storage specification:
//! sequential slot assignment from slot 0, low-to-high packing of value
//! types, fresh slots for structs/arrays/mappings, keccak-derived data
//! positions for dynamic structures, and diamond-storage base slots at
//! `keccak256(namespace)`.

use crate::frontend::ast::VarDecl;
use crate::hash::{keccak256, to_hex, u256_add};
use crate::types::{TypeDesc, TypeError, TypeTable};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("struct `{0}` contains itself by value")]
    RecursiveStruct(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("storage namespace must not be empty")]
    EmptyNamespace,
    #[error("storage namespace must be ASCII: `{0}`")]
    NonAsciiNamespace(String),
}

impl From<TypeError> for LayoutError {
    fn from(e: TypeError) -> Self {
        match e {
            TypeError::UnknownType(n) => LayoutError::UnknownType(n),
            TypeError::RecursiveStruct(n) => LayoutError::RecursiveStruct(n),
            other => LayoutError::UnknownType(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BaseKind {
    ContractRoot,
    DiamondNamespace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutEntry {
    pub label: String,
    pub slot: u64,
    pub offset: u8,
    #[serde(rename = "type")]
    pub type_name: String,
    pub num_slots: u64,
}

/// Member layout of one struct, members relative to the struct base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StructLayout {
    pub members: Vec<LayoutEntry>,
    pub num_slots: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StorageLayout {
    pub base_kind: BaseKind,
    /// Empty for `contractRoot` layouts.
    pub namespace: String,
    pub entries: Vec<LayoutEntry>,
    /// Layouts of every struct reachable from the entries.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub structs: BTreeMap<String, StructLayout>,
}

impl StorageLayout {
    /// First unoccupied (slot, offset) position after the last entry.
    pub fn first_free_position(&self) -> (u64, u8) {
        match self.entries.last() {
            None => (0, 0),
            Some(e) => {
                let size = self.entry_packed_size(e);
                if e.num_slots == 1 && e.offset as u64 + size <= 32 {
                    let end = e.offset as u64 + size;
                    if end >= 32 {
                        (e.slot + 1, 0)
                    } else {
                        (e.slot, end as u8)
                    }
                } else {
                    (e.slot + e.num_slots, 0)
                }
            }
        }
    }

    /// Packed byte size recovered from an entry's canonical type string;
    /// whole-slot entries report 32. Bare names not present in the struct
    /// table are enums, which pack into a single byte.
    pub fn entry_packed_size(&self, entry: &LayoutEntry) -> u64 {
        TypeTable::parse_type_string(&entry.type_name)
            .ok()
            .and_then(|ty| match ty {
                TypeDesc::Struct(name) => {
                    if self.structs.contains_key(&name) {
                        None
                    } else {
                        Some(1)
                    }
                }
                other => other.packed_size(),
            })
            .unwrap_or(32)
    }
}

struct Cursor {
    slot: u64,
    offset: u64,
}

impl Cursor {
    fn new() -> Self {
        Cursor { slot: 0, offset: 0 }
    }

    fn align_to_slot(&mut self) {
        if self.offset > 0 {
            self.slot += 1;
            self.offset = 0;
        }
    }
}

/// Compute the canonical storage layout for an ordered variable list.
pub fn compute_layout(
    vars: &[VarDecl],
    table: &TypeTable,
) -> Result<StorageLayout, LayoutError> {
    let resolved = vars
        .iter()
        .map(|v| Ok((v.name.name.clone(), table.resolve(&v.ty)?)))
        .collect::<Result<Vec<_>, LayoutError>>()?;
    compute_layout_of(&resolved, table, BaseKind::ContractRoot, String::new())
}

/// Layout for a facet namespace: same rules, entries relative to the
/// namespace base slot.
pub fn compute_namespace_layout(
    members: &[(String, TypeDesc)],
    table: &TypeTable,
    namespace: &str,
) -> Result<StorageLayout, LayoutError> {
    compute_layout_of(
        members,
        table,
        BaseKind::DiamondNamespace,
        namespace.to_string(),
    )
}

fn compute_layout_of(
    members: &[(String, TypeDesc)],
    table: &TypeTable,
    base_kind: BaseKind,
    namespace: String,
) -> Result<StorageLayout, LayoutError> {
    let mut cursor = Cursor::new();
    let mut entries = Vec::with_capacity(members.len());
    let mut struct_names = Vec::new();
    for (label, ty) in members {
        let entry = place(label, ty, &mut cursor, table)?;
        ty.referenced_structs(table, &mut struct_names);
        entries.push(entry);
    }
    let mut structs = BTreeMap::new();
    for name in struct_names {
        let (members, num_slots) = struct_member_layout(&name, table)?;
        structs.insert(name, StructLayout { members, num_slots });
    }
    Ok(StorageLayout { base_kind, namespace, entries, structs })
}

fn place(
    label: &str,
    ty: &TypeDesc,
    cursor: &mut Cursor,
    table: &TypeTable,
) -> Result<LayoutEntry, LayoutError> {
    if let Some(size) = ty.packed_size() {
        if 32 - cursor.offset < size {
            cursor.slot += 1;
            cursor.offset = 0;
        }
        let entry = LayoutEntry {
            label: label.to_string(),
            slot: cursor.slot,
            offset: cursor.offset as u8,
            type_name: ty.display(),
            num_slots: 1,
        };
        cursor.offset += size;
        if cursor.offset == 32 {
            cursor.slot += 1;
            cursor.offset = 0;
        }
        return Ok(entry);
    }
    cursor.align_to_slot();
    let slots = whole_slots(ty, table)?;
    let entry = LayoutEntry {
        label: label.to_string(),
        slot: cursor.slot,
        offset: 0,
        type_name: ty.display(),
        num_slots: slots,
    };
    cursor.slot += slots;
    cursor.offset = 0;
    Ok(entry)
}

/// Whole slots occupied inline by a non-packable type.
fn whole_slots(ty: &TypeDesc, table: &TypeTable) -> Result<u64, LayoutError> {
    match ty {
        TypeDesc::Elementary(_) => Ok(1), // string / bytes head
        TypeDesc::DynArray { .. } | TypeDesc::Mapping { .. } => Ok(1),
        TypeDesc::FixedArray { elem, len } => fixed_array_slots(elem, *len, table),
        TypeDesc::Struct(name) => struct_size_by_name(name, table, &mut Vec::new()),
        TypeDesc::Enum(_) => Ok(1),
    }
}

fn fixed_array_slots(
    elem: &TypeDesc,
    len: u64,
    table: &TypeTable,
) -> Result<u64, LayoutError> {
    if let Some(size) = elem.packed_size() {
        let per_slot = 32 / size;
        return Ok(len.div_ceil(per_slot));
    }
    Ok(len * whole_slots(elem, table)?)
}

/// Number of whole slots a struct occupies inline.
pub fn struct_size(name: &str, table: &TypeTable) -> Result<u64, LayoutError> {
    struct_size_by_name(name, table, &mut Vec::new())
}

fn struct_size_by_name(
    name: &str,
    table: &TypeTable,
    visiting: &mut Vec<String>,
) -> Result<u64, LayoutError> {
    if visiting.iter().any(|n| n == name) {
        return Err(LayoutError::RecursiveStruct(name.to_string()));
    }
    let members = table
        .struct_members(name)
        .ok_or_else(|| LayoutError::UnknownType(name.to_string()))?;
    visiting.push(name.to_string());
    let mut cursor = Cursor::new();
    for (_, ty) in members {
        if let Some(size) = ty.packed_size() {
            if 32 - cursor.offset < size {
                cursor.slot += 1;
                cursor.offset = 0;
            }
            cursor.offset += size;
            if cursor.offset == 32 {
                cursor.slot += 1;
                cursor.offset = 0;
            }
        } else {
            cursor.align_to_slot();
            let slots = match ty {
                TypeDesc::Struct(inner) => struct_size_by_name(inner, table, visiting)?,
                TypeDesc::FixedArray { elem, len } => {
                    check_recursion_through_arrays(elem, table, visiting)?;
                    fixed_array_slots(elem, *len, table)?
                }
                other => whole_slots(other, table)?,
            };
            cursor.slot += slots;
        }
    }
    visiting.pop();
    Ok(if cursor.offset > 0 { cursor.slot + 1 } else { cursor.slot.max(1) })
}

fn check_recursion_through_arrays(
    elem: &TypeDesc,
    table: &TypeTable,
    visiting: &mut Vec<String>,
) -> Result<(), LayoutError> {
    match elem {
        TypeDesc::Struct(name) => {
            struct_size_by_name(name, table, visiting)?;
            Ok(())
        }
        TypeDesc::FixedArray { elem, .. } => {
            check_recursion_through_arrays(elem, table, visiting)
        }
        _ => Ok(()),
    }
}

/// Member layout of one struct relative to its base slot.
fn struct_member_layout(
    name: &str,
    table: &TypeTable,
) -> Result<(Vec<LayoutEntry>, u64), LayoutError> {
    let members = table
        .struct_members(name)
        .ok_or_else(|| LayoutError::UnknownType(name.to_string()))?;
    let mut cursor = Cursor::new();
    let mut entries = Vec::with_capacity(members.len());
    for (label, ty) in members {
        entries.push(place(label, ty, &mut cursor, table)?);
    }
    let size = struct_size(name, table)?;
    Ok((entries, size))
}

// ---------------------------------------------------------------------------
// Keccak-derived positions
// ---------------------------------------------------------------------------

/// Base slot of a diamond-storage namespace: keccak-256 of the exact
/// ASCII bytes of the namespace string.
pub fn diamond_storage_slot(namespace: &str) -> Result<[u8; 32], LayoutError> {
    if namespace.is_empty() {
        return Err(LayoutError::EmptyNamespace);
    }
    if !namespace.is_ascii() {
        return Err(LayoutError::NonAsciiNamespace(namespace.to_string()));
    }
    Ok(keccak256(namespace.as_bytes()))
}

/// Data area of a dynamic array whose head sits at `head_slot`:
/// `keccak256(uint256(head_slot))`.
pub fn dyn_array_data_slot(head_slot: [u8; 32]) -> [u8; 32] {
    keccak256(head_slot)
}

/// Slot of element `index` given the data base and per-element stride.
pub fn element_slot(data_slot: [u8; 32], stride: u64, index: u64) -> [u8; 32] {
    u256_add(data_slot, stride * index)
}

/// Value slot of mapping key `key` (already padded to 32 bytes) for a
/// mapping head at `head_slot`: `keccak256(key ‖ head_slot)`.
pub fn mapping_value_slot(key: [u8; 32], head_slot: [u8; 32]) -> [u8; 32] {
    let mut preimage = [0u8; 64];
    preimage[..32].copy_from_slice(&key);
    preimage[32..].copy_from_slice(&head_slot);
    keccak256(preimage)
}

pub fn slot_bytes(slot: u64) -> [u8; 32] {
    let mut out = [0u8; 32];
    out[24..].copy_from_slice(&slot.to_be_bytes());
    out
}

// ---------------------------------------------------------------------------
// Fingerprint
// ---------------------------------------------------------------------------

/// Keccak-256 over the canonical serialization of a layout: the namespace
/// followed by each entry as label‖slot‖offset‖type, entries sorted by
/// (slot, offset).
pub fn layout_fingerprint(layout: &StorageLayout) -> [u8; 32] {
    let mut entries: Vec<&LayoutEntry> = layout.entries.iter().collect();
    entries.sort_by_key(|e| (e.slot, e.offset));
    let mut preimage = Vec::new();
    preimage.extend_from_slice(layout.namespace.as_bytes());
    preimage.push(b'\n');
    for e in entries {
        preimage.extend_from_slice(e.label.as_bytes());
        preimage.push(0);
        preimage.extend_from_slice(e.slot.to_string().as_bytes());
        preimage.push(0);
        preimage.extend_from_slice(e.offset.to_string().as_bytes());
        preimage.push(0);
        preimage.extend_from_slice(e.type_name.as_bytes());
        preimage.push(b'\n');
    }
    keccak256(preimage)
}

pub fn fingerprint_hex(layout: &StorageLayout) -> String {
    to_hex(layout_fingerprint(layout))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn layout_of(src: &str) -> StorageLayout {
        let unit = parse(src).unwrap();
        let table = TypeTable::from_contract(&unit.contract).unwrap();
        compute_layout(&unit.contract.state_vars, &table).unwrap()
    }

    fn positions(layout: &StorageLayout) -> Vec<(u64, u8)> {
        layout.entries.iter().map(|e| (e.slot, e.offset)).collect()
    }

    #[test]
    fn packs_value_types_low_to_high() {
        let layout = layout_of("contract C { uint128 a; uint128 b; uint256 c; }");
        assert_eq!(positions(&layout), vec![(0, 0), (0, 16), (1, 0)]);
    }

    #[test]
    fn value_that_does_not_fit_starts_new_slot() {
        let layout = layout_of("contract C { bool a; address b; bool c; uint64 d; uint64 e; }");
        assert_eq!(positions(&layout), vec![(0, 0), (0, 1), (0, 21), (0, 22), (1, 0)]);
    }

    #[test]
    fn empty_contract_empty_layout() {
        let layout = layout_of("contract C { }");
        assert!(layout.entries.is_empty());
    }

    #[test]
    fn dynamic_heads_take_one_full_slot() {
        let layout = layout_of(
            "contract C { bool a; uint256[] xs; mapping(address => uint256) m; string s; bytes b; bool z; }",
        );
        assert_eq!(
            positions(&layout),
            vec![(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (5, 0)]
        );
        assert!(layout.entries.iter().all(|e| e.num_slots == 1 || e.label == "a"));
    }

    #[test]
    fn struct_sizes_match_packing_rules() {
        let unit = parse(
            r#"
            contract C {
                struct P2 { uint128 a; uint128 b; }
                struct Book { string title; string author; uint256 id; }
                struct Single { bool f; }
                struct Mixed { uint128 a; uint256 b; uint128 c; }
                P2 p;
            }
            "#,
        )
        .unwrap();
        let table = TypeTable::from_contract(&unit.contract).unwrap();
        assert_eq!(struct_size("P2", &table).unwrap(), 1);
        assert_eq!(struct_size("Book", &table).unwrap(), 3);
        assert_eq!(struct_size("Single", &table).unwrap(), 1);
        // a packs into slot 0, b claims slot 1, c starts slot 2.
        assert_eq!(struct_size("Mixed", &table).unwrap(), 3);
    }

    #[test]
    fn struct_entries_start_fresh_and_following_vars_too() {
        let layout = layout_of(
            r#"
            contract C {
                struct Pair { uint128 a; uint128 b; }
                bool x;
                Pair p;
                bool y;
            }
            "#,
        );
        assert_eq!(positions(&layout), vec![(0, 0), (1, 0), (2, 0)]);
        assert_eq!(layout.entries[1].num_slots, 1);
        assert!(layout.structs.contains_key("Pair"));
    }

    #[test]
    fn fixed_arrays_pack_elements() {
        let layout = layout_of(
            "contract C { uint64[5] a; bool t; uint256[2] b; bytes1[33] c; string[3] s; }",
        );
        let a = &layout.entries[0];
        assert_eq!((a.slot, a.num_slots), (0, 2));
        let t = &layout.entries[1];
        assert_eq!((t.slot, t.offset), (2, 0));
        let b = &layout.entries[2];
        assert_eq!((b.slot, b.num_slots), (3, 2));
        let c = &layout.entries[3];
        assert_eq!((c.slot, c.num_slots), (5, 2));
        let s = &layout.entries[4];
        assert_eq!((s.slot, s.num_slots), (7, 3));
    }

    #[test]
    fn array_of_structs_uses_struct_stride() {
        let layout = layout_of(
            r#"
            contract C {
                struct Book { string title; string author; uint256 id; }
                Book[2] two;
                Book[] many;
            }
            "#,
        );
        assert_eq!(layout.entries[0].num_slots, 6);
        assert_eq!(layout.entries[1].slot, 6);
        assert_eq!(layout.entries[1].num_slots, 1);
    }

    #[test]
    fn recursive_struct_rejected() {
        let unit = parse(
            "contract C { struct A { B b; } struct B { A a; } A x; }",
        )
        .unwrap();
        let table = TypeTable::from_contract(&unit.contract).unwrap();
        let err = compute_layout(&unit.contract.state_vars, &table).unwrap_err();
        assert!(matches!(err, LayoutError::RecursiveStruct(_)));
    }

    #[test]
    fn recursion_through_dynamic_array_is_fine() {
        let unit = parse("contract C { struct Node { Node[] children; uint256 v; } Node root; }")
            .unwrap();
        let table = TypeTable::from_contract(&unit.contract).unwrap();
        assert_eq!(struct_size("Node", &table).unwrap(), 2);
    }

    #[test]
    fn diamond_storage_slot_is_keccak_of_namespace() {
        assert!(matches!(
            diamond_storage_slot(""),
            Err(LayoutError::EmptyNamespace)
        ));
        let a = diamond_storage_slot("seam.storage.v1.BookFacet").unwrap();
        assert_eq!(
            to_hex(a),
            "0xd1d88974f70b8b0c881fc0dda88eecdc5d4aad9183b2af8fe29dc41806157d66"
        );
        let b = diamond_storage_slot("seam.storage.v1.Other").unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn book_element_stride_changes_when_struct_grows() {
        // A Book of 3 slots places element i at data + 3i; adding a
        // uint256 member moves the stride to 4.
        let head = slot_bytes(0);
        let data = dyn_array_data_slot(keccak256(head));
        let before = element_slot(data, 3, 5);
        let after = element_slot(data, 4, 5);
        assert_ne!(before, after);
        assert_eq!(element_slot(data, 3, 0), data);
    }

    #[test]
    fn fingerprints_are_canonical() {
        let l1 = layout_of("contract C { uint128 a; uint128 b; }");
        let l2 = layout_of("contract C { uint128 a; uint128 b; }");
        assert_eq!(layout_fingerprint(&l1), layout_fingerprint(&l2));

        let relabeled = layout_of("contract C { uint128 a2; uint128 b; }");
        assert_ne!(layout_fingerprint(&l1), layout_fingerprint(&relabeled));

        let mut permuted = l1.clone();
        permuted.entries.reverse();
        assert_eq!(layout_fingerprint(&l1), layout_fingerprint(&permuted));
    }

    #[test]
    fn first_free_position_tracks_tail_packing() {
        let packed = layout_of("contract C { uint128 a; uint64 b; }");
        assert_eq!(packed.first_free_position(), (0, 24));
        let full = layout_of("contract C { uint256 a; }");
        assert_eq!(full.first_free_position(), (1, 0));
        let multi = layout_of(
            "contract C { struct B { uint256 x; uint256 y; } B b; }",
        );
        assert_eq!(multi.first_free_position(), (2, 0));
        let empty = layout_of("contract C { }");
        assert_eq!(empty.first_free_position(), (0, 0));
    }
}
