//! Selector-clash detection and storage-collision risk analysis, with
//! deterministic remediation suggestions.

mod transform;

pub use transform::{apply_array_to_mapping, TransformError};

use crate::diagnostics::{codes, Diagnostic, Suggestion};
use crate::facetizer::FacetPlan;
use crate::frontend::ast::{FuncDef, SourceUnit};
use crate::hash::{keccak256, to_hex};
use crate::types::{TypeDesc, TypeError, TypeTable};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SecurityError {
    #[error("malformed signature `{signature}`: {reason}")]
    MalformedSignature { signature: String, reason: String },
    #[error("no clash-free rename found for `{0}` up to suffix _v9")]
    Unresolvable(String),
    #[error("{0}")]
    Type(#[from] TypeError),
}

/// Signatures the generated diamond itself exposes. Clashing with any of
/// these is always an error and the diamond side is never renamed.
pub const DIAMOND_CORE_SIGNATURES: &[&str] = &[
    "diamondCut((address,uint8,bytes4[])[],address,bytes)",
    "facets()",
    "facetFunctionSelectors(address)",
    "facetAddresses()",
    "facetAddress(bytes4)",
    "owner()",
    "transferOwnership(address)",
    "supportsInterface(bytes4)",
];

pub const DIAMOND_CUT_SIGNATURE: &str = "diamondCut((address,uint8,bytes4[])[],address,bytes)";

// ---------------------------------------------------------------------------
// Selector computation
// ---------------------------------------------------------------------------

/// First 4 bytes of keccak-256 of a canonical signature.
///
/// The signature must already be canonical: no spaces, no return types,
/// normalized type names. Anything else is rejected rather than silently
/// hashed, since a non-canonical preimage yields a wrong selector.
pub fn compute_selector(signature: &str) -> Result<[u8; 4], SecurityError> {
    validate_signature(signature)?;
    let hash = keccak256(signature.as_bytes());
    Ok([hash[0], hash[1], hash[2], hash[3]])
}

fn malformed(signature: &str, reason: impl Into<String>) -> SecurityError {
    SecurityError::MalformedSignature {
        signature: signature.to_string(),
        reason: reason.into(),
    }
}

fn validate_signature(sig: &str) -> Result<(), SecurityError> {
    if !sig.is_ascii() {
        return Err(malformed(sig, "non-ASCII characters"));
    }
    if sig.contains(' ') {
        return Err(malformed(sig, "contains spaces"));
    }
    let open = sig.find('(').ok_or_else(|| malformed(sig, "missing `(`"))?;
    let name = &sig[..open];
    if name.is_empty() {
        return Err(malformed(sig, "empty function name"));
    }
    let mut chars = name.chars();
    let first = chars.next().unwrap();
    if !(first.is_ascii_alphabetic() || first == '_' || first == '$') {
        return Err(malformed(sig, "function name must start with a letter"));
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$') {
        return Err(malformed(sig, "invalid character in function name"));
    }
    if !sig.ends_with(')') {
        return Err(malformed(sig, "missing trailing `)`"));
    }
    let params = &sig[open + 1..sig.len() - 1];
    if params.is_empty() {
        return Ok(());
    }
    for ty in split_top_level(params).ok_or_else(|| malformed(sig, "unbalanced parentheses"))? {
        validate_canonical_type(ty).map_err(|reason| malformed(sig, reason))?;
    }
    Ok(())
}

/// Split a comma-separated list at depth zero.
fn split_top_level(s: &str) -> Option<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1)?,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return None;
    }
    parts.push(&s[start..]);
    Some(parts)
}

fn validate_canonical_type(ty: &str) -> Result<(), String> {
    if ty.is_empty() {
        return Err("empty type".to_string());
    }
    // Strip array suffixes.
    let mut base = ty;
    loop {
        if let Some(rest) = base.strip_suffix("[]") {
            base = rest;
            continue;
        }
        if base.ends_with(']') {
            let open = base.rfind('[').ok_or(format!("malformed array in `{ty}`"))?;
            let digits = &base[open + 1..base.len() - 1];
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(format!("malformed array length in `{ty}`"));
            }
            base = &base[..open];
            continue;
        }
        break;
    }
    if base.starts_with('(') {
        if !base.ends_with(')') {
            return Err(format!("unbalanced tuple in `{ty}`"));
        }
        let inner = &base[1..base.len() - 1];
        if inner.is_empty() {
            return Err("empty tuple".to_string());
        }
        for part in split_top_level(inner).ok_or(format!("unbalanced tuple in `{ty}`"))? {
            validate_canonical_type(part)?;
        }
        return Ok(());
    }
    match base {
        "address" | "bool" | "string" | "bytes" => return Ok(()),
        "uint" | "int" | "byte" => {
            return Err(format!("alias `{base}` is not canonical"));
        }
        _ => {}
    }
    if let Some(bits) = base.strip_prefix("uint").or_else(|| base.strip_prefix("int")) {
        let n: u32 = bits.parse().map_err(|_| format!("unknown type `{base}`"))?;
        if n >= 8 && n <= 256 && n % 8 == 0 {
            return Ok(());
        }
        return Err(format!("invalid integer width in `{base}`"));
    }
    if let Some(width) = base.strip_prefix("bytes") {
        let n: u32 = width.parse().map_err(|_| format!("unknown type `{base}`"))?;
        if (1..=32).contains(&n) {
            return Ok(());
        }
        return Err(format!("invalid bytes width in `{base}`"));
    }
    Err(format!("unknown type `{base}`"))
}

/// Canonical signature of a function: name plus parenthesized,
/// comma-joined canonical parameter types. Structs flatten to tuples.
pub fn canonical_signature(
    name: &str,
    func: &FuncDef,
    table: &TypeTable,
) -> Result<String, SecurityError> {
    let params = func
        .params
        .iter()
        .map(|p| {
            let desc = table.resolve(&p.ty)?;
            table.abi_name(&desc)
        })
        .collect::<Result<Vec<_>, TypeError>>()?
        .join(",");
    Ok(format!("{name}({params})"))
}

// ---------------------------------------------------------------------------
// Selector table & clash detection
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum SelectorOrigin {
    UserFacet,
    DiamondCore,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectorEntry {
    pub signature: String,
    pub facet: String,
    pub origin: SelectorOrigin,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SelectorTable {
    pub entries: BTreeMap<[u8; 4], Vec<SelectorEntry>>,
}

impl SelectorTable {
    pub fn insert(&mut self, selector: [u8; 4], entry: SelectorEntry) {
        self.entries.entry(selector).or_default().push(entry);
    }

    pub fn is_clash_free(&self) -> bool {
        self.entries.values().all(|v| v.len() == 1)
    }

    pub fn clashes(&self) -> impl Iterator<Item = (&[u8; 4], &Vec<SelectorEntry>)> {
        self.entries.iter().filter(|(_, v)| v.len() > 1)
    }

    pub fn contains_selector(&self, selector: &[u8; 4]) -> bool {
        self.entries.contains_key(selector)
    }
}

/// Build the full selector table for a plan (user facets plus diamond
/// core) and report one `SEL_CLASH` error per colliding selector.
pub fn detect_selector_clashes(
    unit: &SourceUnit,
    plan: &FacetPlan,
) -> Result<(SelectorTable, Vec<Diagnostic>), SecurityError> {
    let table = TypeTable::from_contract(&unit.contract)?;
    let mut selectors = SelectorTable::default();

    for sig in DIAMOND_CORE_SIGNATURES {
        let sel = compute_selector(sig)?;
        selectors.insert(
            sel,
            SelectorEntry {
                signature: sig.to_string(),
                facet: "Diamond".to_string(),
                origin: SelectorOrigin::DiamondCore,
            },
        );
    }

    for facet in &plan.facets {
        for fn_name in &facet.external_functions {
            let func = plan_function(unit, plan, fn_name).ok_or_else(|| {
                malformed(fn_name, "function missing from contract".to_string())
            })?;
            let sig = canonical_signature(fn_name, func, &table)?;
            let sel = compute_selector(&sig)?;
            selectors.insert(
                sel,
                SelectorEntry {
                    signature: sig,
                    facet: facet.name.clone(),
                    origin: SelectorOrigin::UserFacet,
                },
            );
        }
    }

    let mut diags = Vec::new();
    for (sel, entries) in selectors.clashes() {
        let mut described: Vec<String> = entries
            .iter()
            .map(|e| format!("`{}` ({})", e.signature, e.facet))
            .collect();
        described.sort();
        let mut diag = Diagnostic::error(
            codes::SEL_CLASH,
            format!(
                "selector {} is shared by {}",
                to_hex(sel),
                described.join(" and ")
            ),
        );
        for entry in entries {
            if entry.origin == SelectorOrigin::UserFacet {
                if let Some(func) = plan_function(unit, plan, fn_name_of(&entry.signature)) {
                    diag.positions.push(func.name.span.into());
                }
            }
        }
        if let Ok(suggestion) = suggest_selector_fix(entries, &selectors) {
            if let Some(first) = suggestion.into_iter().next() {
                diag = diag.with_suggestion(first);
            }
        }
        diags.push(diag);
    }
    diags.sort_by(|a, b| a.message.cmp(&b.message));
    Ok((selectors, diags))
}

fn fn_name_of(signature: &str) -> &str {
    signature.split('(').next().unwrap_or(signature)
}

/// Look up the `FuncDef` behind a plan-level function name, which is the
/// constructor when the name is the plan's initialize function.
pub fn plan_function<'a>(
    unit: &'a SourceUnit,
    plan: &FacetPlan,
    fn_name: &str,
) -> Option<&'a FuncDef> {
    if let Some(init) = &plan.init_function {
        if init.function_name == fn_name {
            return unit.contract.functions.iter().find(|f| f.is_constructor);
        }
    }
    unit.find_function(fn_name)
}

// ---------------------------------------------------------------------------
// Rename suggestions
// ---------------------------------------------------------------------------

/// Deterministic fix for one clash: keep the lexicographically first user
/// signature (or all core signatures), rename the rest by appending `_v2`
/// (then `_v3`, ...) until the new selector is free.
pub fn suggest_selector_fix(
    entries: &[SelectorEntry],
    table: &SelectorTable,
) -> Result<Vec<Suggestion>, SecurityError> {
    let mut users: Vec<&SelectorEntry> = entries
        .iter()
        .filter(|e| e.origin == SelectorOrigin::UserFacet)
        .collect();
    users.sort_by(|a, b| a.signature.cmp(&b.signature));
    let has_core = entries.iter().any(|e| e.origin == SelectorOrigin::DiamondCore);
    let keep = if has_core { 0 } else { 1 };

    let mut suggestions = Vec::new();
    let mut new_selectors: Vec<[u8; 4]> = Vec::new();
    for entry in users.into_iter().skip(keep) {
        let old_name = fn_name_of(&entry.signature).to_string();
        let params = &entry.signature[old_name.len()..];
        let old_selector = compute_selector(&entry.signature)?;
        let mut chosen = None;
        for suffix in 2..=9u32 {
            let new_name = format!("{old_name}_v{suffix}");
            let new_sig = format!("{new_name}{params}");
            let new_sel = compute_selector(&new_sig)?;
            if !table.contains_selector(&new_sel) && !new_selectors.contains(&new_sel) {
                chosen = Some((new_name, new_sig, new_sel));
                break;
            }
        }
        let (new_name, new_sig, new_sel) =
            chosen.ok_or_else(|| SecurityError::Unresolvable(entry.signature.clone()))?;
        new_selectors.push(new_sel);
        suggestions.push(Suggestion::RenameFunction {
            function: old_name,
            new_name,
            old_signature: entry.signature.clone(),
            new_signature: new_sig,
            old_selector: to_hex(old_selector),
            new_selector: to_hex(new_sel),
        });
    }
    Ok(suggestions)
}

/// All rename suggestions needed to clear every clash in the table.
pub fn suggest_all_fixes(table: &SelectorTable) -> Result<Vec<Suggestion>, SecurityError> {
    let mut out = Vec::new();
    for (_, entries) in table.clashes() {
        out.extend(suggest_selector_fix(entries, table)?);
    }
    Ok(out)
}

/// Apply rename suggestions to the contract: the function definition and
/// every direct call site change together.
pub fn apply_renames(mut unit: SourceUnit, suggestions: &[Suggestion]) -> SourceUnit {
    let renames: BTreeMap<String, String> = suggestions
        .iter()
        .filter_map(|s| match s {
            Suggestion::RenameFunction { function, new_name, .. } => {
                Some((function.clone(), new_name.clone()))
            }
            _ => None,
        })
        .collect();
    if renames.is_empty() {
        return unit;
    }
    for f in &mut unit.contract.functions {
        if let Some(new_name) = renames.get(&f.name.name) {
            f.name.name = new_name.clone();
        }
        f.calls = f
            .calls
            .iter()
            .map(|c| renames.get(c).cloned().unwrap_or_else(|| c.clone()))
            .collect();
        rename_calls_in_block(&mut f.body, &renames);
    }
    unit
}

fn rename_calls_in_block(block: &mut crate::frontend::ast::Block, renames: &BTreeMap<String, String>) {
    use crate::frontend::ast::Stmt;
    for stmt in &mut block.stmts {
        match stmt {
            Stmt::Block(b) => rename_calls_in_block(b, renames),
            Stmt::VarDecl { init, .. } => {
                if let Some(e) = init {
                    rename_calls_in_expr(e, renames);
                }
            }
            Stmt::Expr(e) => rename_calls_in_expr(e, renames),
            Stmt::Assign { target, value, .. } => {
                rename_calls_in_expr(target, renames);
                rename_calls_in_expr(value, renames);
            }
            Stmt::If { cond, then_branch, else_branch } => {
                rename_calls_in_expr(cond, renames);
                rename_calls_in_block(then_branch, renames);
                if let Some(e) = else_branch {
                    let mut tmp = crate::frontend::ast::Block {
                        stmts: vec![(**e).clone()],
                        span: Default::default(),
                    };
                    rename_calls_in_block(&mut tmp, renames);
                    **e = tmp.stmts.pop().unwrap();
                }
            }
            Stmt::While { cond, body } => {
                rename_calls_in_expr(cond, renames);
                rename_calls_in_block(body, renames);
            }
            Stmt::For { init, cond, update, body } => {
                if let Some(s) = init {
                    let mut tmp = crate::frontend::ast::Block {
                        stmts: vec![(**s).clone()],
                        span: Default::default(),
                    };
                    rename_calls_in_block(&mut tmp, renames);
                    **s = tmp.stmts.pop().unwrap();
                }
                if let Some(e) = cond {
                    rename_calls_in_expr(e, renames);
                }
                if let Some(s) = update {
                    let mut tmp = crate::frontend::ast::Block {
                        stmts: vec![(**s).clone()],
                        span: Default::default(),
                    };
                    rename_calls_in_block(&mut tmp, renames);
                    **s = tmp.stmts.pop().unwrap();
                }
                rename_calls_in_block(body, renames);
            }
            Stmt::Return { values } => {
                for v in values {
                    rename_calls_in_expr(v, renames);
                }
            }
            Stmt::Require { cond, .. } => rename_calls_in_expr(cond, renames),
            Stmt::Emit { args, .. } => {
                for a in args {
                    rename_calls_in_expr(a, renames);
                }
            }
            Stmt::Delete { target } => rename_calls_in_expr(target, renames),
            Stmt::Revert { .. } | Stmt::Break | Stmt::Continue | Stmt::Assembly(_) => {}
        }
    }
}

fn rename_calls_in_expr(expr: &mut crate::frontend::ast::Expr, renames: &BTreeMap<String, String>) {
    use crate::frontend::ast::Expr;
    match expr {
        Expr::Call { callee, args } => {
            if let Expr::Ident(ident) = callee.as_mut() {
                if let Some(new_name) = renames.get(&ident.name) {
                    ident.name = new_name.clone();
                }
            } else {
                rename_calls_in_expr(callee, renames);
            }
            for a in args {
                rename_calls_in_expr(a, renames);
            }
        }
        Expr::Member { base, .. } => rename_calls_in_expr(base, renames),
        Expr::Index { base, index } => {
            rename_calls_in_expr(base, renames);
            rename_calls_in_expr(index, renames);
        }
        Expr::Binary { lhs, rhs, .. } => {
            rename_calls_in_expr(lhs, renames);
            rename_calls_in_expr(rhs, renames);
        }
        Expr::Unary { expr, .. } => rename_calls_in_expr(expr, renames),
        Expr::Ternary { cond, if_true, if_false } => {
            rename_calls_in_expr(cond, renames);
            rename_calls_in_expr(if_true, renames);
            rename_calls_in_expr(if_false, renames);
        }
        Expr::Tuple { elems, .. } => {
            for e in elems {
                rename_calls_in_expr(e, renames);
            }
        }
        _ => {}
    }
}

// ---------------------------------------------------------------------------
// Storage collision risks
// ---------------------------------------------------------------------------

/// Flag upgrade-risk storage patterns per facet: arrays of structs,
/// nested structs followed by other members, and partially packed tail
/// slots.
pub fn detect_collision_risks(unit: &SourceUnit, plan: &FacetPlan) -> Vec<Diagnostic> {
    let Ok(table) = TypeTable::from_contract(&unit.contract) else {
        return Vec::new();
    };
    let mut diags = Vec::new();
    let mut flagged_structs = std::collections::BTreeSet::new();

    for facet in &plan.facets {
        let mut reachable_structs = Vec::new();
        for var_name in &facet.owned_state_vars {
            let Some(decl) = unit.find_state_var(var_name) else { continue };
            let Ok(desc) = table.resolve(&decl.ty) else { continue };
            desc.referenced_structs(&table, &mut reachable_structs);

            if desc.contains_array_of_structs(&table) {
                let suggestion = match &desc {
                    TypeDesc::DynArray { elem } if matches!(elem.as_ref(), TypeDesc::Struct(_)) => {
                        let elem_name = elem.display();
                        Suggestion::ArrayToMapping {
                            variable: var_name.clone(),
                            mapping_decl: format!(
                                "mapping(uint256 => {elem_name}) {var_name};"
                            ),
                            counter_decl: format!("uint256 {var_name}Count;"),
                        }
                    }
                    _ => Suggestion::Note {
                        text: format!(
                            "restructure `{var_name}` so struct elements live behind a mapping; appending members to the element struct shifts every later element"
                        ),
                    },
                };
                diags.push(
                    Diagnostic::warning(
                        codes::SLOT_ARRAY_OF_STRUCTS,
                        format!(
                            "`{var_name}` ({}) stores struct elements at consecutive slots; appending a member to the element struct shifts all later elements on upgrade",
                            desc.display()
                        ),
                    )
                    .at(decl.span)
                    .with_suggestion(suggestion),
                );
            }
        }

        for struct_name in reachable_structs {
            if !flagged_structs.insert(struct_name.clone()) {
                continue;
            }
            let Some(members) = table.struct_members(&struct_name) else { continue };
            for (i, (member_name, member_ty)) in members.iter().enumerate() {
                if matches!(member_ty, TypeDesc::Struct(_)) && i + 1 < members.len() {
                    let def = unit
                        .contract
                        .structs
                        .iter()
                        .find(|s| s.name.name == struct_name);
                    let mut diag = Diagnostic::warning(
                        codes::SLOT_NESTED_STRUCT,
                        format!(
                            "struct `{struct_name}` nests `{}` in member `{member_name}` before other members; appending to `{}` shifts the members after it",
                            member_ty.display(),
                            member_ty.display()
                        ),
                    )
                    .with_suggestion(Suggestion::Note {
                        text: format!(
                            "move `{member_name}` to the end of `{struct_name}` or flatten its members"
                        ),
                    });
                    if let Some(def) = def {
                        diag = diag.at(def.members[i].span);
                    }
                    diags.push(diag);
                }
            }
        }

        let (_, tail_offset) = facet.storage_layout.first_free_position();
        if tail_offset > 0 {
            diags.push(Diagnostic::info(
                codes::SLOT_PACKED_TAIL,
                format!(
                    "facet `{}` ends on a partially packed slot ({} of 32 bytes used); a small variable appended later will silently pack into it",
                    facet.name, tail_offset
                ),
            ));
        }
    }
    diags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facetizer::{build_access_graph, partition_facets, FacetizerConfig};
    use crate::frontend::{parse, resolve};

    fn pipeline(src: &str) -> (SourceUnit, FacetPlan) {
        let unit = resolve(parse(src).unwrap()).unwrap();
        let graph = build_access_graph(&unit);
        let (plan, _) = partition_facets(&unit, &graph, &FacetizerConfig::default()).unwrap();
        (unit, plan)
    }

    #[test]
    fn selector_vectors() {
        assert_eq!(
            compute_selector("transfer(address,uint256)").unwrap(),
            [0xa9, 0x05, 0x9c, 0xbb]
        );
        assert_eq!(
            compute_selector(DIAMOND_CUT_SIGNATURE).unwrap(),
            [0x1f, 0x93, 0x1c, 0x1c]
        );
        assert_eq!(
            compute_selector("burn(uint256)").unwrap(),
            compute_selector("collate_propagate_storage(bytes16)").unwrap()
        );
    }

    #[test]
    fn canonicality_is_enforced() {
        assert!(compute_selector("f()").is_ok());
        let err = compute_selector("f( )").unwrap_err();
        assert!(matches!(err, SecurityError::MalformedSignature { .. }));
        assert!(compute_selector("f(uint)").is_err());
        assert!(compute_selector("f(uint256").is_err());
        assert!(compute_selector("(uint256)").is_err());
        assert!(compute_selector("f(uint256) ").is_err());
        assert!(compute_selector("f(uint7)").is_err());
        assert!(compute_selector("f(bytes33)").is_err());
        assert!(compute_selector("f((uint256,))").is_err());
        assert!(compute_selector("f(uint256[x])").is_err());
        assert!(compute_selector("f((address,uint8,bytes4[])[],address,bytes)").is_ok());
    }

    #[test]
    fn known_collision_reported_and_fixed() {
        let (unit, plan) = pipeline(
            r#"
            contract C {
                uint256 a;
                uint256 b;
                function burn(uint256 amount) public { a = amount; }
                function collate_propagate_storage(bytes16 data) public { b = 1; }
            }
            "#,
        );
        let (table, diags) = detect_selector_clashes(&unit, &plan).unwrap();
        assert!(!table.is_clash_free());
        let clash: Vec<_> = diags.iter().filter(|d| d.code == "SEL_CLASH").collect();
        assert_eq!(clash.len(), 1);
        assert!(clash[0].message.contains("burn(uint256)"));
        assert!(clash[0].message.contains("collate_propagate_storage(bytes16)"));

        // The lexicographically later signature gets the rename.
        let fixes = suggest_all_fixes(&table).unwrap();
        assert_eq!(fixes.len(), 1);
        let Suggestion::RenameFunction { function, new_name, new_signature, .. } = &fixes[0]
        else {
            panic!("expected rename");
        };
        assert_eq!(function, "collate_propagate_storage");
        assert_eq!(new_name, "collate_propagate_storage_v2");
        assert_eq!(new_signature, "collate_propagate_storage_v2(bytes16)");

        // Applying the rename clears the clash.
        let fixed = apply_renames(unit, &fixes);
        let fixed = resolve(fixed).unwrap();
        let graph = build_access_graph(&fixed);
        let (plan2, _) =
            partition_facets(&fixed, &graph, &FacetizerConfig::default()).unwrap();
        let (table2, diags2) = detect_selector_clashes(&fixed, &plan2).unwrap();
        assert!(table2.is_clash_free());
        assert!(diags2.iter().all(|d| d.code != "SEL_CLASH"));
    }

    #[test]
    fn clash_with_diamond_core_renames_user_function() {
        let (unit, plan) = pipeline(
            r#"
            contract C {
                uint256 x;
                function owner() public view returns (uint256) { return x; }
            }
            "#,
        );
        let (table, diags) = detect_selector_clashes(&unit, &plan).unwrap();
        assert!(!table.is_clash_free());
        assert_eq!(diags.len(), 1);
        let fixes = suggest_all_fixes(&table).unwrap();
        let Suggestion::RenameFunction { function, new_name, .. } = &fixes[0] else {
            panic!("expected rename");
        };
        assert_eq!(function, "owner");
        assert_eq!(new_name, "owner_v2");
    }

    #[test]
    fn single_function_is_clash_free() {
        let (unit, plan) = pipeline(
            "contract C { uint256 x; function f() public { x = 1; } }",
        );
        let (table, diags) = detect_selector_clashes(&unit, &plan).unwrap();
        assert!(table.is_clash_free());
        assert!(diags.is_empty());
    }

    #[test]
    fn struct_params_flatten_to_tuples_in_signatures() {
        let (unit, plan) = pipeline(
            r#"
            contract C {
                struct Order { address to; uint256 amount; }
                uint256 n;
                function submit(Order memory order) public { n += order.amount; }
            }
            "#,
        );
        let (table, _) = detect_selector_clashes(&unit, &plan).unwrap();
        let sigs: Vec<_> = table
            .entries
            .values()
            .flatten()
            .filter(|e| e.origin == SelectorOrigin::UserFacet)
            .map(|e| e.signature.clone())
            .collect();
        assert_eq!(sigs, vec!["submit((address,uint256))"]);
    }

    #[test]
    fn collision_risks_per_pattern() {
        let (unit, plan) = pipeline(
            r#"
            contract C {
                struct Inner { uint256 v; }
                struct Outer { Inner a; uint256 b; }
                struct Book { string title; string author; uint256 id; }
                Book[] books;
                Outer config;
                function addBook(string memory t) public { books.push(Book(t, t, 0)); }
                function setConfig(uint256 b) public { config.b = b; }
            }
            "#,
        );
        let diags = detect_collision_risks(&unit, &plan);
        let arr: Vec<_> = diags
            .iter()
            .filter(|d| d.code == "SLOT_ARRAY_OF_STRUCTS")
            .collect();
        assert_eq!(arr.len(), 1);
        assert!(matches!(
            arr[0].suggestion,
            Some(Suggestion::ArrayToMapping { .. })
        ));
        assert!(diags.iter().any(|d| d.code == "SLOT_NESTED_STRUCT"));
    }

    #[test]
    fn clean_contract_has_no_risk_diagnostics() {
        let (unit, plan) = pipeline(
            r#"
            contract C {
                uint256 a;
                uint256 b;
                function f() public { a = 1; b = 2; }
            }
            "#,
        );
        let diags = detect_collision_risks(&unit, &plan);
        assert!(diags.is_empty(), "{diags:?}");
    }

    #[test]
    fn packed_tail_reported_as_info() {
        let (unit, plan) = pipeline(
            "contract C { uint128 a; function f() public { a = 1; } }",
        );
        let diags = detect_collision_risks(&unit, &plan);
        assert!(diags
            .iter()
            .any(|d| d.code == "SLOT_PACKED_TAIL" && d.severity == crate::diagnostics::Severity::Info));
    }
}
