//! Canonical Solidity type descriptors with size and packing semantics.

use crate::frontend::ast::{ContractDef, ElementaryType, SourceFile, TopItem, TypeName};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("struct `{0}` contains itself by value")]
    RecursiveStruct(String),
    #[error("type `{0}` has no ABI encoding")]
    NotAbiEncodable(String),
    #[error("malformed type string `{0}`")]
    MalformedTypeString(String),
}

/// Resolved type with canonical naming and storage semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeDesc {
    Elementary(ElementaryType),
    FixedArray { elem: Box<TypeDesc>, len: u64 },
    DynArray { elem: Box<TypeDesc> },
    Mapping { key: Box<TypeDesc>, value: Box<TypeDesc> },
    Struct(String),
    Enum(String),
}

impl TypeDesc {
    /// Canonical source-level name: `uint256`, `Book[]`,
    /// `mapping(uint256 => Book)`.
    pub fn display(&self) -> String {
        match self {
            TypeDesc::Elementary(e) => e.canonical_name(),
            TypeDesc::FixedArray { elem, len } => format!("{}[{len}]", elem.display()),
            TypeDesc::DynArray { elem } => format!("{}[]", elem.display()),
            TypeDesc::Mapping { key, value } => {
                format!("mapping({} => {})", key.display(), value.display())
            }
            TypeDesc::Struct(name) | TypeDesc::Enum(name) => name.clone(),
        }
    }

    /// Number of bytes a value of this type occupies when packed into a
    /// slot; `None` for types that claim whole slots.
    pub fn packed_size(&self) -> Option<u64> {
        match self {
            TypeDesc::Elementary(e) => match e {
                ElementaryType::Bool => Some(1),
                ElementaryType::Address => Some(20),
                ElementaryType::Uint(bits) | ElementaryType::Int(bits) => {
                    Some(u64::from(*bits) / 8)
                }
                ElementaryType::FixedBytes(n) => Some(u64::from(*n)),
                ElementaryType::String | ElementaryType::Bytes => None,
            },
            TypeDesc::Enum(_) => Some(1),
            _ => None,
        }
    }

    pub fn is_value_type(&self) -> bool {
        self.packed_size().is_some()
    }

    /// True if the type tree contains an array (fixed or dynamic) whose
    /// element type is, or contains, a struct.
    pub fn contains_array_of_structs(&self, table: &TypeTable) -> bool {
        match self {
            TypeDesc::Elementary(_) | TypeDesc::Enum(_) => false,
            TypeDesc::FixedArray { elem, .. } | TypeDesc::DynArray { elem } => {
                elem.embeds_struct(table) || elem.contains_array_of_structs(table)
            }
            TypeDesc::Mapping { value, .. } => value.contains_array_of_structs(table),
            TypeDesc::Struct(name) => table
                .struct_members(name)
                .map(|members| {
                    members.iter().any(|(_, ty)| ty.contains_array_of_structs(table))
                })
                .unwrap_or(false),
        }
    }

    /// True if the type is a struct or holds one by value (through fixed
    /// arrays or nested structs).
    fn embeds_struct(&self, table: &TypeTable) -> bool {
        match self {
            TypeDesc::Struct(_) => true,
            TypeDesc::FixedArray { elem, .. } => elem.embeds_struct(table),
            _ => false,
        }
    }

    /// Struct names appearing anywhere in the type tree.
    pub fn referenced_structs(&self, table: &TypeTable, out: &mut Vec<String>) {
        match self {
            TypeDesc::Elementary(_) | TypeDesc::Enum(_) => {}
            TypeDesc::FixedArray { elem, .. } | TypeDesc::DynArray { elem } => {
                elem.referenced_structs(table, out)
            }
            TypeDesc::Mapping { key, value } => {
                key.referenced_structs(table, out);
                value.referenced_structs(table, out);
            }
            TypeDesc::Struct(name) => {
                if !out.contains(name) {
                    out.push(name.clone());
                    if let Some(members) = table.struct_members(name) {
                        for (_, ty) in members {
                            ty.referenced_structs(table, out);
                        }
                    }
                }
            }
        }
    }
}

/// Struct and enum definitions resolved from a contract (or a generated
/// bundle), queried by the layout and analysis passes.
#[derive(Debug, Clone, Default)]
pub struct TypeTable {
    structs: BTreeMap<String, Vec<(String, TypeDesc)>>,
    enums: BTreeMap<String, usize>,
}

impl TypeTable {
    pub fn from_contract(contract: &ContractDef) -> Result<TypeTable, TypeError> {
        let mut table = TypeTable::default();
        for e in &contract.enums {
            table.enums.insert(e.name.name.clone(), e.variants.len());
        }
        // Two passes so struct members can reference structs declared later.
        for s in &contract.structs {
            table.structs.insert(s.name.name.clone(), Vec::new());
        }
        for s in &contract.structs {
            let members = s
                .members
                .iter()
                .map(|m| Ok((m.name.name.clone(), table.resolve(&m.ty)?)))
                .collect::<Result<Vec<_>, TypeError>>()?;
            table.structs.insert(s.name.name.clone(), members);
        }
        Ok(table)
    }

    /// Table over a whole generated bundle: file-level types plus every
    /// contract's and library's nested types.
    pub fn from_files(files: &[SourceFile]) -> Result<TypeTable, TypeError> {
        let mut table = TypeTable::default();
        let mut struct_defs = Vec::new();
        for file in files {
            for item in &file.items {
                match item {
                    TopItem::Struct(s) => struct_defs.push(s),
                    TopItem::Enum(e) => {
                        table.enums.insert(e.name.name.clone(), e.variants.len());
                    }
                    TopItem::Contract(c) => {
                        for s in &c.structs {
                            struct_defs.push(s);
                        }
                        for e in &c.enums {
                            table.enums.insert(e.name.name.clone(), e.variants.len());
                        }
                    }
                }
            }
        }
        for s in &struct_defs {
            table.structs.insert(s.name.name.clone(), Vec::new());
        }
        for s in &struct_defs {
            let members = s
                .members
                .iter()
                .map(|m| Ok((m.name.name.clone(), table.resolve(&m.ty)?)))
                .collect::<Result<Vec<_>, TypeError>>()?;
            table.structs.insert(s.name.name.clone(), members);
        }
        Ok(table)
    }

    pub fn struct_members(&self, name: &str) -> Option<&[(String, TypeDesc)]> {
        self.structs.get(name).map(|v| v.as_slice())
    }

    pub fn struct_names(&self) -> impl Iterator<Item = &String> {
        self.structs.keys()
    }

    pub fn is_enum(&self, name: &str) -> bool {
        self.enums.contains_key(name)
    }

    /// Resolve a syntactic type name to a descriptor.
    pub fn resolve(&self, ty: &TypeName) -> Result<TypeDesc, TypeError> {
        match ty {
            TypeName::Elementary(e) => Ok(TypeDesc::Elementary(*e)),
            TypeName::Array { elem, len } => {
                let elem = Box::new(self.resolve(elem)?);
                Ok(match len {
                    Some(n) => TypeDesc::FixedArray { elem, len: *n },
                    None => TypeDesc::DynArray { elem },
                })
            }
            TypeName::Mapping { key, value } => Ok(TypeDesc::Mapping {
                key: Box::new(self.resolve(key)?),
                value: Box::new(self.resolve(value)?),
            }),
            TypeName::User { path } => {
                let name = path
                    .iter()
                    .map(|i| i.name.as_str())
                    .collect::<Vec<_>>()
                    .join(".");
                let last = &path.last().unwrap().name;
                if self.structs.contains_key(last) {
                    Ok(TypeDesc::Struct(last.clone()))
                } else if self.enums.contains_key(last) {
                    Ok(TypeDesc::Enum(last.clone()))
                } else {
                    Err(TypeError::UnknownType(name))
                }
            }
        }
    }

    /// ABI canonical name used in function signatures. Structs flatten to
    /// tuples, enums encode as `uint8`.
    pub fn abi_name(&self, ty: &TypeDesc) -> Result<String, TypeError> {
        match ty {
            TypeDesc::Elementary(e) => Ok(e.canonical_name()),
            TypeDesc::FixedArray { elem, len } => {
                Ok(format!("{}[{len}]", self.abi_name(elem)?))
            }
            TypeDesc::DynArray { elem } => Ok(format!("{}[]", self.abi_name(elem)?)),
            TypeDesc::Mapping { .. } => Err(TypeError::NotAbiEncodable(ty.display())),
            TypeDesc::Enum(_) => Ok("uint8".to_string()),
            TypeDesc::Struct(name) => {
                let members = self
                    .struct_members(name)
                    .ok_or_else(|| TypeError::UnknownType(name.clone()))?;
                let inner = members
                    .iter()
                    .map(|(_, ty)| self.abi_name(ty))
                    .collect::<Result<Vec<_>, _>>()?
                    .join(",");
                Ok(format!("({inner})"))
            }
        }
    }

    /// Parse a canonical display string (as stored in manifests) back into
    /// a descriptor. Struct and enum names must exist in this table unless
    /// `lenient` naming is acceptable — unknown names parse as structs.
    pub fn parse_type_string(s: &str) -> Result<TypeDesc, TypeError> {
        let s = s.trim();
        if let Some(rest) = s.strip_suffix("[]") {
            return Ok(TypeDesc::DynArray { elem: Box::new(Self::parse_type_string(rest)?) });
        }
        if s.ends_with(']') {
            let open = s
                .rfind('[')
                .ok_or_else(|| TypeError::MalformedTypeString(s.to_string()))?;
            let len: u64 = s[open + 1..s.len() - 1]
                .parse()
                .map_err(|_| TypeError::MalformedTypeString(s.to_string()))?;
            return Ok(TypeDesc::FixedArray {
                elem: Box::new(Self::parse_type_string(&s[..open])?),
                len,
            });
        }
        if let Some(rest) = s.strip_prefix("mapping(") {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| TypeError::MalformedTypeString(s.to_string()))?;
            // Split on the top-level `=>`.
            let mut depth = 0usize;
            let bytes = inner.as_bytes();
            let mut split = None;
            for i in 0..bytes.len().saturating_sub(1) {
                match bytes[i] {
                    b'(' => depth += 1,
                    b')' => depth = depth.saturating_sub(1),
                    b'=' if depth == 0 && bytes[i + 1] == b'>' => {
                        split = Some(i);
                        break;
                    }
                    _ => {}
                }
            }
            let split = split.ok_or_else(|| TypeError::MalformedTypeString(s.to_string()))?;
            return Ok(TypeDesc::Mapping {
                key: Box::new(Self::parse_type_string(&inner[..split])?),
                value: Box::new(Self::parse_type_string(&inner[split + 2..])?),
            });
        }
        if let Some(e) = ElementaryType::from_keyword(s) {
            // `from_keyword` normalizes aliases; canonical strings only.
            if e.canonical_name() == s {
                return Ok(TypeDesc::Elementary(e));
            }
            return Err(TypeError::MalformedTypeString(s.to_string()));
        }
        if s.is_empty() || !s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
        {
            return Err(TypeError::MalformedTypeString(s.to_string()));
        }
        Ok(TypeDesc::Struct(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn table(src: &str) -> (TypeTable, crate::frontend::SourceUnit) {
        let unit = parse(src).unwrap();
        let table = TypeTable::from_contract(&unit.contract).unwrap();
        (table, unit)
    }

    #[test]
    fn resolves_and_displays() {
        let (table, unit) = table(
            r#"
            contract C {
                struct Book { string title; uint256 id; }
                Book[] books;
                mapping(uint256 => Book) byId;
                uint128 small;
            }
            "#,
        );
        let tys: Vec<String> = unit
            .contract
            .state_vars
            .iter()
            .map(|v| table.resolve(&v.ty).unwrap().display())
            .collect();
        assert_eq!(tys, vec!["Book[]", "mapping(uint256 => Book)", "uint128"]);
    }

    #[test]
    fn abi_names_flatten_structs_and_enums() {
        let (table, unit) = table(
            r#"
            contract C {
                struct Pair { uint256 a; address b; }
                enum Color { Red, Green }
                Pair p;
                Color c;
            }
            "#,
        );
        let pair = table.resolve(&unit.contract.state_vars[0].ty).unwrap();
        assert_eq!(table.abi_name(&pair).unwrap(), "(uint256,address)");
        let color = table.resolve(&unit.contract.state_vars[1].ty).unwrap();
        assert_eq!(table.abi_name(&color).unwrap(), "uint8");
    }

    #[test]
    fn packed_sizes() {
        assert_eq!(TypeDesc::Elementary(ElementaryType::Bool).packed_size(), Some(1));
        assert_eq!(TypeDesc::Elementary(ElementaryType::Address).packed_size(), Some(20));
        assert_eq!(TypeDesc::Elementary(ElementaryType::Uint(128)).packed_size(), Some(16));
        assert_eq!(TypeDesc::Elementary(ElementaryType::FixedBytes(32)).packed_size(), Some(32));
        assert_eq!(TypeDesc::Elementary(ElementaryType::String).packed_size(), None);
        assert_eq!(TypeDesc::Enum("X".into()).packed_size(), Some(1));
    }

    #[test]
    fn detects_array_of_structs_at_depth() {
        let (table, unit) = table(
            r#"
            contract C {
                struct Inner { uint256 x; }
                struct Outer { Inner[] list; }
                Inner[] direct;
                mapping(uint256 => Inner[]) viaMapping;
                Outer nested;
                uint256[] plain;
            }
            "#,
        );
        let flags: Vec<bool> = unit
            .contract
            .state_vars
            .iter()
            .map(|v| table.resolve(&v.ty).unwrap().contains_array_of_structs(&table))
            .collect();
        assert_eq!(flags, vec![true, true, true, false]);
    }

    #[test]
    fn type_string_round_trip() {
        for s in [
            "uint256",
            "bool",
            "address",
            "bytes32",
            "string",
            "Book",
            "Book[]",
            "Book[3]",
            "uint128[7]",
            "mapping(uint256 => Book)",
            "mapping(address => mapping(uint256 => bool))",
            "mapping(uint256 => Book[])",
        ] {
            let parsed = TypeTable::parse_type_string(s).unwrap();
            assert_eq!(parsed.display(), s);
        }
        assert!(TypeTable::parse_type_string("uint").is_err());
        assert!(TypeTable::parse_type_string("mapping(uint256 =>)").is_err());
        assert!(TypeTable::parse_type_string("").is_err());
    }
}
