//! Emits the diamond proxy, per-facet contracts, diamond-storage
//! libraries, the shared internal-function library and the type
//! definitions file.

use crate::codegen::printer::print_file;
use crate::codegen::CodegenError;
use crate::facetizer::{Facet, FacetPlan};
use crate::frontend::ast::*;
use crate::hash::to_hex;
use crate::layout::diamond_storage_slot;
use crate::security::{compute_selector, DIAMOND_CORE_SIGNATURES, DIAMOND_CUT_SIGNATURE};
use crate::span::{Ident, Span};
use std::collections::BTreeSet;

pub const GENERATED_PRAGMA: &str = "^0.8.19";

pub fn storage_lib_name(facet_name: &str) -> String {
    format!("Lib{facet_name}Storage")
}

/// Types.sol: user struct and enum definitions hoisted to file level so
/// every generated unit shares one declaration.
pub fn generate_types_file(unit: &SourceUnit) -> Option<String> {
    if unit.contract.structs.is_empty() && unit.contract.enums.is_empty() {
        return None;
    }
    let file = SourceFile {
        pragma: Some(GENERATED_PRAGMA.to_string()),
        imports: Vec::new(),
        items: unit
            .contract
            .structs
            .iter()
            .map(|s| TopItem::Struct(s.clone()))
            .chain(unit.contract.enums.iter().map(|e| TopItem::Enum(e.clone())))
            .collect(),
    };
    Some(print_file(&file))
}

/// Storage library for one facet: the namespace struct, its keccak
/// position and the accessor binding a storage reference to it.
pub fn generate_storage_lib(
    unit: &SourceUnit,
    plan: &FacetPlan,
    facet: &Facet,
    has_types_file: bool,
) -> Result<Option<String>, CodegenError> {
    let mut members: Vec<StructMember> = facet
        .owned_state_vars
        .iter()
        .map(|v| {
            let decl = unit
                .find_state_var(v)
                .ok_or_else(|| CodegenError::Internal(format!("missing state var `{v}`")))?;
            Ok(StructMember {
                name: Ident::synthetic(v),
                ty: decl.ty.clone(),
                span: Span::default(),
            })
        })
        .collect::<Result<Vec<_>, CodegenError>>()?;
    if let Some(init) = &plan.init_function {
        if init.facet == facet.name {
            members.push(StructMember {
                name: Ident::synthetic(&init.guard_var),
                ty: TypeName::Elementary(ElementaryType::Bool),
                span: Span::default(),
            });
        }
    }
    if members.is_empty() {
        return Ok(None);
    }

    let position = diamond_storage_slot(&facet.storage_namespace)?;
    let lib = ContractDef {
        kind: ContractKind::Library,
        name: Ident::synthetic(storage_lib_name(&facet.name)),
        state_vars: Vec::new(),
        constants: vec![ConstDecl {
            name: Ident::synthetic("POSITION"),
            ty: TypeName::Elementary(ElementaryType::FixedBytes(32)),
            value: Expr::number(to_hex(position)),
            annotation: Some(facet.storage_namespace.clone()),
            span: Span::default(),
        }],
        structs: vec![StructDef {
            name: Ident::synthetic("Layout"),
            members,
            span: Span::default(),
        }],
        enums: Vec::new(),
        events: Vec::new(),
        functions: vec![accessor_function()],
        span: Span::default(),
    };

    let mut imports = Vec::new();
    if has_types_file {
        imports.push(ImportDirective { path: "./Types.sol".to_string(), span: Span::default() });
    }
    let file = SourceFile {
        pragma: Some(GENERATED_PRAGMA.to_string()),
        imports,
        items: vec![TopItem::Contract(lib)],
    };
    Ok(Some(print_file(&file)))
}

/// `function layout() internal pure returns (Layout storage s) { ... }`
fn accessor_function() -> FuncDef {
    let body = Block {
        stmts: vec![
            Stmt::VarDecl {
                ty: TypeName::Elementary(ElementaryType::FixedBytes(32)),
                location: None,
                name: Ident::synthetic("position"),
                init: Some(Expr::ident("POSITION")),
            },
            Stmt::Assembly(YulBlock {
                stmts: vec![YulStmt::Assign {
                    target: vec![Ident::synthetic("s"), Ident::synthetic("slot")],
                    value: YulExpr::Path(vec![Ident::synthetic("position")]),
                }],
                span: Span::default(),
            }),
        ],
        span: Span::default(),
    };
    FuncDef {
        name: Ident::synthetic("layout"),
        is_constructor: false,
        is_fallback: false,
        params: Vec::new(),
        returns: vec![Param {
            ty: TypeName::user("Layout"),
            location: Some(DataLocation::Storage),
            name: Some(Ident::synthetic("s")),
            span: Span::default(),
        }],
        visibility: Visibility::Internal,
        mutability: Mutability::Pure,
        body,
        span: Span::default(),
        body_span: Span::default(),
        reads: Default::default(),
        writes: Default::default(),
        calls: Default::default(),
    }
}

/// One facet contract: original functions with every owned-state
/// reference routed through the namespace accessor, shared internal
/// calls qualified with the library name.
pub fn generate_facet(
    unit: &SourceUnit,
    plan: &FacetPlan,
    facet: &Facet,
    has_types_file: bool,
    has_storage_lib: bool,
) -> Result<String, CodegenError> {
    let shared: BTreeSet<&str> = plan
        .shared_library
        .internal_functions
        .iter()
        .map(|s| s.as_str())
        .collect();
    let mut owned: BTreeSet<String> = facet.owned_state_vars.iter().cloned().collect();
    let mut guard_var = None;
    if let Some(init) = &plan.init_function {
        if init.facet == facet.name {
            owned.insert(init.guard_var.clone());
            guard_var = Some(init.guard_var.clone());
        }
    }
    let all_state: BTreeSet<&str> = unit
        .contract
        .state_vars
        .iter()
        .map(|v| v.name.name.as_str())
        .collect();
    let lib_name = storage_lib_name(&facet.name);

    let rewriter = FacetRewriter {
        owned,
        all_state,
        shared,
        lib_name: lib_name.clone(),
        shared_lib: plan.shared_library.name.clone(),
        facet: facet.name.clone(),
    };

    let mut functions = Vec::new();
    let mut uses_shared = false;
    for fn_name in facet.external_functions.iter().chain(facet.internal_functions.iter()) {
        let is_init = plan
            .init_function
            .as_ref()
            .map(|i| &i.function_name == fn_name && i.facet == facet.name)
            .unwrap_or(false);
        let source_fn = if is_init {
            unit.contract
                .functions
                .iter()
                .find(|f| f.is_constructor)
                .ok_or_else(|| CodegenError::Internal("missing constructor".into()))?
        } else {
            unit.find_function(fn_name).ok_or_else(|| {
                CodegenError::Internal(format!("missing function `{fn_name}`"))
            })?
        };
        uses_shared = uses_shared || source_fn.calls.iter().any(|c| rewriter.shared.contains(c.as_str()));

        let mut func = source_fn.clone();
        rewriter.rewrite_block(&mut func.body)?;
        if is_init {
            let guard = guard_var.clone().expect("init facet has a guard");
            func.name = Ident::synthetic(fn_name);
            func.is_constructor = false;
            func.visibility = Visibility::External;
            func.body.stmts.insert(
                0,
                Stmt::Require {
                    cond: Expr::Unary {
                        op: UnOp::Not,
                        expr: Box::new(rewriter.accessor_member(&guard)),
                        prefix: true,
                    },
                    message: Some("AlreadyInitialized".to_string()),
                },
            );
            func.body.stmts.push(Stmt::Assign {
                target: rewriter.accessor_member(&guard),
                op: AssignOp::Assign,
                value: Expr::BoolLit { value: true, span: Span::default() },
            });
        }
        rewriter.verify_no_bare_state(&func)?;
        functions.push(func);
    }

    // Events referenced by the emitted functions.
    let mut used_events = BTreeSet::new();
    for f in &functions {
        collect_emitted_events(&f.body, &mut used_events);
    }
    let events: Vec<EventDef> = unit
        .contract
        .events
        .iter()
        .filter(|e| used_events.contains(&e.name.name))
        .cloned()
        .collect();

    let contract = ContractDef {
        kind: ContractKind::Contract,
        name: Ident::synthetic(&facet.name),
        state_vars: Vec::new(),
        constants: Vec::new(),
        structs: Vec::new(),
        enums: Vec::new(),
        events,
        functions,
        span: Span::default(),
    };

    let mut imports = Vec::new();
    if has_types_file {
        imports.push(ImportDirective {
            path: "../libraries/Types.sol".to_string(),
            span: Span::default(),
        });
    }
    if has_storage_lib {
        imports.push(ImportDirective {
            path: format!("../libraries/{lib_name}.sol"),
            span: Span::default(),
        });
    }
    if uses_shared {
        imports.push(ImportDirective {
            path: "../libraries/SharedLib.sol".to_string(),
            span: Span::default(),
        });
    }
    let file = SourceFile {
        pragma: Some(GENERATED_PRAGMA.to_string()),
        imports,
        items: vec![TopItem::Contract(contract)],
    };
    Ok(print_file(&file))
}

fn collect_emitted_events(block: &Block, out: &mut BTreeSet<String>) {
    for stmt in &block.stmts {
        match stmt {
            Stmt::Emit { event, .. } => {
                out.insert(event.name.clone());
            }
            Stmt::Block(b) => collect_emitted_events(b, out),
            Stmt::If { then_branch, else_branch, .. } => {
                collect_emitted_events(then_branch, out);
                if let Some(e) = else_branch {
                    let tmp = Block { stmts: vec![(**e).clone()], span: Span::default() };
                    collect_emitted_events(&tmp, out);
                }
            }
            Stmt::While { body, .. } | Stmt::For { body, .. } => {
                collect_emitted_events(body, out)
            }
            _ => {}
        }
    }
}

struct FacetRewriter<'a> {
    owned: BTreeSet<String>,
    all_state: BTreeSet<&'a str>,
    shared: BTreeSet<&'a str>,
    lib_name: String,
    shared_lib: String,
    facet: String,
}

impl<'a> FacetRewriter<'a> {
    fn accessor(&self) -> Expr {
        Expr::call(
            Expr::member(Expr::ident(&self.lib_name), "layout"),
            Vec::new(),
        )
    }

    fn accessor_member(&self, var: &str) -> Expr {
        Expr::member(self.accessor(), var)
    }

    fn rewrite_block(&self, block: &mut Block) -> Result<(), CodegenError> {
        let mut scopes = vec![BTreeSet::new()];
        self.rewrite_block_scoped(block, &mut scopes)
    }

    fn rewrite_block_scoped(
        &self,
        block: &mut Block,
        scopes: &mut Vec<BTreeSet<String>>,
    ) -> Result<(), CodegenError> {
        scopes.push(BTreeSet::new());
        for stmt in &mut block.stmts {
            self.rewrite_stmt(stmt, scopes)?;
        }
        scopes.pop();
        Ok(())
    }

    fn rewrite_stmt(
        &self,
        stmt: &mut Stmt,
        scopes: &mut Vec<BTreeSet<String>>,
    ) -> Result<(), CodegenError> {
        match stmt {
            Stmt::Block(b) => self.rewrite_block_scoped(b, scopes),
            Stmt::VarDecl { name, init, .. } => {
                if let Some(e) = init {
                    self.rewrite_expr(e, scopes)?;
                }
                scopes.last_mut().unwrap().insert(name.name.clone());
                Ok(())
            }
            Stmt::Expr(e) => self.rewrite_expr(e, scopes),
            Stmt::Assign { target, value, .. } => {
                self.rewrite_expr(target, scopes)?;
                self.rewrite_expr(value, scopes)
            }
            Stmt::If { cond, then_branch, else_branch } => {
                self.rewrite_expr(cond, scopes)?;
                self.rewrite_block_scoped(then_branch, scopes)?;
                if let Some(e) = else_branch {
                    self.rewrite_stmt(e, scopes)?;
                }
                Ok(())
            }
            Stmt::While { cond, body } => {
                self.rewrite_expr(cond, scopes)?;
                self.rewrite_block_scoped(body, scopes)
            }
            Stmt::For { init, cond, update, body } => {
                scopes.push(BTreeSet::new());
                if let Some(s) = init {
                    self.rewrite_stmt(s, scopes)?;
                }
                if let Some(c) = cond {
                    self.rewrite_expr(c, scopes)?;
                }
                if let Some(u) = update {
                    self.rewrite_stmt(u, scopes)?;
                }
                self.rewrite_block_scoped(body, scopes)?;
                scopes.pop();
                Ok(())
            }
            Stmt::Return { values } => {
                for v in values {
                    self.rewrite_expr(v, scopes)?;
                }
                Ok(())
            }
            Stmt::Require { cond, .. } => self.rewrite_expr(cond, scopes),
            Stmt::Emit { args, .. } => {
                for a in args {
                    self.rewrite_expr(a, scopes)?;
                }
                Ok(())
            }
            Stmt::Delete { target } => self.rewrite_expr(target, scopes),
            Stmt::Revert { .. } | Stmt::Break | Stmt::Continue | Stmt::Assembly(_) => Ok(()),
        }
    }

    fn is_shadowed(&self, name: &str, scopes: &[BTreeSet<String>]) -> bool {
        scopes.iter().any(|s| s.contains(name))
    }

    fn rewrite_expr(
        &self,
        expr: &mut Expr,
        scopes: &mut Vec<BTreeSet<String>>,
    ) -> Result<(), CodegenError> {
        match expr {
            Expr::Ident(ident) => {
                if self.owned.contains(&ident.name) && !self.is_shadowed(&ident.name, scopes) {
                    *expr = self.accessor_member(&ident.name);
                }
                Ok(())
            }
            Expr::Member { base, .. } => self.rewrite_expr(base, scopes),
            Expr::Index { base, index } => {
                self.rewrite_expr(base, scopes)?;
                self.rewrite_expr(index, scopes)
            }
            Expr::Call { callee, args } => {
                if let Expr::Ident(name) = callee.as_mut() {
                    if self.shared.contains(name.name.as_str())
                        && !self.is_shadowed(&name.name, scopes)
                    {
                        **callee = Expr::member(Expr::ident(&self.shared_lib), &name.name);
                    }
                } else {
                    self.rewrite_expr(callee, scopes)?;
                }
                for a in args {
                    self.rewrite_expr(a, scopes)?;
                }
                Ok(())
            }
            Expr::Binary { lhs, rhs, .. } => {
                self.rewrite_expr(lhs, scopes)?;
                self.rewrite_expr(rhs, scopes)
            }
            Expr::Unary { expr, .. } => self.rewrite_expr(expr, scopes),
            Expr::Ternary { cond, if_true, if_false } => {
                self.rewrite_expr(cond, scopes)?;
                self.rewrite_expr(if_true, scopes)?;
                self.rewrite_expr(if_false, scopes)
            }
            Expr::Tuple { elems, .. } => {
                for e in elems {
                    self.rewrite_expr(e, scopes)?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// A reference that escaped rewriting indicates a partition bug, not
    /// a user error; fail loudly rather than emit broken code.
    fn verify_no_bare_state(&self, func: &FuncDef) -> Result<(), CodegenError> {
        let mut scopes: Vec<BTreeSet<String>> = vec![func
            .params
            .iter()
            .chain(func.returns.iter())
            .filter_map(|p| p.name.as_ref().map(|n| n.name.clone()))
            .collect()];
        self.verify_block(&func.body, &mut scopes, &func.name.name)
    }

    fn verify_block(
        &self,
        block: &Block,
        scopes: &mut Vec<BTreeSet<String>>,
        func: &str,
    ) -> Result<(), CodegenError> {
        scopes.push(BTreeSet::new());
        for stmt in &block.stmts {
            self.verify_stmt(stmt, scopes, func)?;
        }
        scopes.pop();
        Ok(())
    }

    fn verify_stmt(
        &self,
        stmt: &Stmt,
        scopes: &mut Vec<BTreeSet<String>>,
        func: &str,
    ) -> Result<(), CodegenError> {
        match stmt {
            Stmt::Block(b) => self.verify_block(b, scopes, func),
            Stmt::VarDecl { name, init, .. } => {
                if let Some(e) = init {
                    self.verify_expr(e, scopes, func)?;
                }
                scopes.last_mut().unwrap().insert(name.name.clone());
                Ok(())
            }
            Stmt::Expr(e) => self.verify_expr(e, scopes, func),
            Stmt::Assign { target, value, .. } => {
                self.verify_expr(target, scopes, func)?;
                self.verify_expr(value, scopes, func)
            }
            Stmt::If { cond, then_branch, else_branch } => {
                self.verify_expr(cond, scopes, func)?;
                self.verify_block(then_branch, scopes, func)?;
                if let Some(e) = else_branch {
                    self.verify_stmt(e, scopes, func)?;
                }
                Ok(())
            }
            Stmt::While { cond, body } => {
                self.verify_expr(cond, scopes, func)?;
                self.verify_block(body, scopes, func)
            }
            Stmt::For { init, cond, update, body } => {
                scopes.push(BTreeSet::new());
                if let Some(s) = init {
                    self.verify_stmt(s, scopes, func)?;
                }
                if let Some(c) = cond {
                    self.verify_expr(c, scopes, func)?;
                }
                if let Some(u) = update {
                    self.verify_stmt(u, scopes, func)?;
                }
                self.verify_block(body, scopes, func)?;
                scopes.pop();
                Ok(())
            }
            Stmt::Return { values } => {
                for v in values {
                    self.verify_expr(v, scopes, func)?;
                }
                Ok(())
            }
            Stmt::Require { cond, .. } => self.verify_expr(cond, scopes, func),
            Stmt::Emit { args, .. } => {
                for a in args {
                    self.verify_expr(a, scopes, func)?;
                }
                Ok(())
            }
            Stmt::Delete { target } => self.verify_expr(target, scopes, func),
            Stmt::Revert { .. } | Stmt::Break | Stmt::Continue | Stmt::Assembly(_) => Ok(()),
        }
    }

    fn verify_expr(
        &self,
        expr: &Expr,
        scopes: &mut Vec<BTreeSet<String>>,
        func: &str,
    ) -> Result<(), CodegenError> {
        match expr {
            Expr::Ident(ident) => {
                if self.all_state.contains(ident.name.as_str())
                    && !self.is_shadowed(&ident.name, scopes)
                {
                    return Err(CodegenError::InternalRewrite {
                        facet: self.facet.clone(),
                        function: func.to_string(),
                        variable: ident.name.clone(),
                    });
                }
                Ok(())
            }
            Expr::Member { base, .. } => self.verify_expr(base, scopes, func),
            Expr::Index { base, index } => {
                self.verify_expr(base, scopes, func)?;
                self.verify_expr(index, scopes, func)
            }
            Expr::Call { callee, args } => {
                self.verify_expr(callee, scopes, func)?;
                for a in args {
                    self.verify_expr(a, scopes, func)?;
                }
                Ok(())
            }
            Expr::Binary { lhs, rhs, .. } => {
                self.verify_expr(lhs, scopes, func)?;
                self.verify_expr(rhs, scopes, func)
            }
            Expr::Unary { expr, .. } => self.verify_expr(expr, scopes, func),
            Expr::Ternary { cond, if_true, if_false } => {
                self.verify_expr(cond, scopes, func)?;
                self.verify_expr(if_true, scopes, func)?;
                self.verify_expr(if_false, scopes, func)
            }
            Expr::Tuple { elems, .. } => {
                for e in elems {
                    self.verify_expr(e, scopes, func)?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Shared internal functions, emitted verbatim into one library.
pub fn generate_shared_lib(
    unit: &SourceUnit,
    plan: &FacetPlan,
    has_types_file: bool,
) -> Result<Option<String>, CodegenError> {
    if plan.shared_library.internal_functions.is_empty() {
        return Ok(None);
    }
    let functions: Vec<FuncDef> = plan
        .shared_library
        .internal_functions
        .iter()
        .map(|name| {
            unit.find_function(name)
                .cloned()
                .ok_or_else(|| CodegenError::Internal(format!("missing function `{name}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let lib = ContractDef {
        kind: ContractKind::Library,
        name: Ident::synthetic(&plan.shared_library.name),
        state_vars: Vec::new(),
        constants: Vec::new(),
        structs: Vec::new(),
        enums: Vec::new(),
        events: Vec::new(),
        functions,
        span: Span::default(),
    };
    let mut imports = Vec::new();
    if has_types_file {
        imports.push(ImportDirective { path: "./Types.sol".to_string(), span: Span::default() });
    }
    let file = SourceFile {
        pragma: Some(GENERATED_PRAGMA.to_string()),
        imports,
        items: vec![TopItem::Contract(lib)],
    };
    Ok(Some(print_file(&file)))
}

// ---------------------------------------------------------------------------
// The diamond itself
// ---------------------------------------------------------------------------

/// ERC-165 interface identifiers derived from the core signatures.
fn interface_ids() -> Result<(String, String, String, String), CodegenError> {
    let xor = |sigs: &[&str]| -> Result<String, CodegenError> {
        let mut acc = [0u8; 4];
        for sig in sigs {
            let sel = compute_selector(sig)?;
            for i in 0..4 {
                acc[i] ^= sel[i];
            }
        }
        Ok(to_hex(acc))
    };
    let erc165 = xor(&["supportsInterface(bytes4)"])?;
    let cut = xor(&[DIAMOND_CUT_SIGNATURE])?;
    let loupe = xor(&[
        "facets()",
        "facetFunctionSelectors(address)",
        "facetAddresses()",
        "facetAddress(bytes4)",
    ])?;
    let ownership = xor(&["owner()", "transferOwnership(address)"])?;
    Ok((erc165, cut, loupe, ownership))
}

pub fn diamond_namespace(plan: &FacetPlan) -> String {
    format!("{}Diamond", plan.namespace_prefix)
}

/// Routing storage for the diamond: owner plus the selector tables.
pub fn generate_diamond_storage_lib(plan: &FacetPlan) -> Result<String, CodegenError> {
    let namespace = diamond_namespace(plan);
    let position = to_hex(diamond_storage_slot(&namespace)?);
    Ok(format!(
        r#"// SPDX-License-Identifier: MIT
pragma solidity {GENERATED_PRAGMA};

library LibDiamondStorage {{
    bytes32 internal constant POSITION = {position}; // {namespace}

    struct Layout {{
        address owner;
        bytes4[] selectors;
        mapping(bytes4 => address) facetOf;
        mapping(bytes4 => uint256) selectorIndex;
    }}

    function layout() internal pure returns (Layout storage s) {{
        bytes32 position = POSITION;
        assembly {{
            s.slot := position
        }}
    }}
}}
"#
    ))
}

/// The diamond proxy: EIP-2535 `diamondCut` with owner guard, loupe
/// views, ERC-165/173, and a delegatecall fallback.
pub fn generate_diamond() -> Result<String, CodegenError> {
    let (erc165, cut_id, loupe_id, ownership_id) = interface_ids()?;
    let core_list = DIAMOND_CORE_SIGNATURES.join(", ");
    Ok(format!(
        r#"// SPDX-License-Identifier: MIT
pragma solidity {GENERATED_PRAGMA};

import "./libraries/LibDiamondStorage.sol";

struct FacetCut {{
    address facetAddress;
    uint8 action;
    bytes4[] functionSelectors;
}}

struct Facet {{
    address facetAddress;
    bytes4[] functionSelectors;
}}

// Core signatures routed by this contract: {core_list}
contract Diamond {{
    event DiamondCut(FacetCut[] cuts, address init, bytes data);
    event OwnershipTransferred(address previousOwner, address newOwner);

    uint8 internal constant ACTION_ADD = 0;
    uint8 internal constant ACTION_REPLACE = 1;
    uint8 internal constant ACTION_REMOVE = 2;

    constructor(address initialOwner) {{
        require(initialOwner != address(0), "Diamond: owner is the zero address");
        LibDiamondStorage.layout().owner = initialOwner;
        emit OwnershipTransferred(address(0), initialOwner);
    }}

    function owner() external view returns (address) {{
        return LibDiamondStorage.layout().owner;
    }}

    function transferOwnership(address newOwner) external {{
        LibDiamondStorage.Layout storage ds = LibDiamondStorage.layout();
        require(msg.sender == ds.owner, "Diamond: caller is not the owner");
        require(newOwner != address(0), "Diamond: new owner is the zero address");
        emit OwnershipTransferred(ds.owner, newOwner);
        ds.owner = newOwner;
    }}

    function diamondCut(FacetCut[] memory cuts, address init, bytes memory data) external {{
        LibDiamondStorage.Layout storage ds = LibDiamondStorage.layout();
        require(msg.sender == ds.owner, "Diamond: caller is not the owner");
        for (uint256 i = 0; i < cuts.length; i++) {{
            uint8 action = cuts[i].action;
            if (action == ACTION_ADD) {{
                _addFunctions(ds, cuts[i].facetAddress, cuts[i].functionSelectors);
            }} else if (action == ACTION_REPLACE) {{
                _replaceFunctions(ds, cuts[i].facetAddress, cuts[i].functionSelectors);
            }} else if (action == ACTION_REMOVE) {{
                _removeFunctions(ds, cuts[i].facetAddress, cuts[i].functionSelectors);
            }} else {{
                revert("Diamond: invalid facet cut action");
            }}
        }}
        emit DiamondCut(cuts, init, data);
        _initializeCut(init, data);
    }}

    function facetAddress(bytes4 selector) external view returns (address) {{
        return LibDiamondStorage.layout().facetOf[selector];
    }}

    function facetAddresses() external view returns (address[] memory) {{
        LibDiamondStorage.Layout storage ds = LibDiamondStorage.layout();
        return _facetAddresses(ds);
    }}

    function facetFunctionSelectors(address facet) external view returns (bytes4[] memory) {{
        LibDiamondStorage.Layout storage ds = LibDiamondStorage.layout();
        return _facetFunctionSelectors(ds, facet);
    }}

    function facets() external view returns (Facet[] memory) {{
        LibDiamondStorage.Layout storage ds = LibDiamondStorage.layout();
        address[] memory addrs = _facetAddresses(ds);
        Facet[] memory result = new Facet[](addrs.length);
        for (uint256 i = 0; i < addrs.length; i++) {{
            result[i] = Facet(addrs[i], _facetFunctionSelectors(ds, addrs[i]));
        }}
        return result;
    }}

    function supportsInterface(bytes4 interfaceId) external pure returns (bool) {{
        return interfaceId == bytes4({erc165}) || interfaceId == bytes4({cut_id}) || interfaceId == bytes4({loupe_id}) || interfaceId == bytes4({ownership_id});
    }}

    function _addFunctions(LibDiamondStorage.Layout storage ds, address facet, bytes4[] memory selectors) private {{
        require(facet != address(0), "Diamond: add facet is the zero address");
        require(selectors.length > 0, "Diamond: no selectors in cut");
        for (uint256 i = 0; i < selectors.length; i++) {{
            bytes4 sel = selectors[i];
            require(ds.facetOf[sel] == address(0), "Diamond: selector already registered");
            ds.facetOf[sel] = facet;
            ds.selectorIndex[sel] = ds.selectors.length;
            ds.selectors.push(sel);
        }}
    }}

    function _replaceFunctions(LibDiamondStorage.Layout storage ds, address facet, bytes4[] memory selectors) private {{
        require(facet != address(0), "Diamond: replace facet is the zero address");
        require(selectors.length > 0, "Diamond: no selectors in cut");
        for (uint256 i = 0; i < selectors.length; i++) {{
            bytes4 sel = selectors[i];
            address old = ds.facetOf[sel];
            require(old != address(0), "Diamond: selector not registered");
            require(old != facet, "Diamond: replacing with the same facet");
            ds.facetOf[sel] = facet;
        }}
    }}

    function _removeFunctions(LibDiamondStorage.Layout storage ds, address facet, bytes4[] memory selectors) private {{
        require(facet == address(0), "Diamond: remove expects the zero address");
        require(selectors.length > 0, "Diamond: no selectors in cut");
        for (uint256 i = 0; i < selectors.length; i++) {{
            bytes4 sel = selectors[i];
            require(ds.facetOf[sel] != address(0), "Diamond: selector not registered");
            uint256 index = ds.selectorIndex[sel];
            uint256 last = ds.selectors.length - 1;
            if (index != last) {{
                bytes4 moved = ds.selectors[last];
                ds.selectors[index] = moved;
                ds.selectorIndex[moved] = index;
            }}
            ds.selectors.pop();
            delete ds.selectorIndex[sel];
            delete ds.facetOf[sel];
        }}
    }}

    function _initializeCut(address init, bytes memory data) private {{
        if (init == address(0)) {{
            require(data.length == 0, "Diamond: init calldata without init address");
            return;
        }}
        require(data.length > 0, "Diamond: init address without calldata");
        assembly {{
            let ok := delegatecall(gas(), init, add(data, 32), mload(data), 0, 0)
            if iszero(ok) {{
                returndatacopy(0, 0, returndatasize())
                revert(0, returndatasize())
            }}
        }}
    }}

    function _facetAddresses(LibDiamondStorage.Layout storage ds) private view returns (address[] memory) {{
        uint256 total = ds.selectors.length;
        address[] memory temp = new address[](total);
        uint256 count = 0;
        for (uint256 i = 0; i < total; i++) {{
            address facet = ds.facetOf[ds.selectors[i]];
            bool seen = false;
            for (uint256 j = 0; j < count; j++) {{
                if (temp[j] == facet) {{
                    seen = true;
                }}
            }}
            if (!seen) {{
                temp[count] = facet;
                count += 1;
            }}
        }}
        address[] memory result = new address[](count);
        for (uint256 i = 0; i < count; i++) {{
            result[i] = temp[i];
        }}
        return result;
    }}

    function _facetFunctionSelectors(LibDiamondStorage.Layout storage ds, address facet) private view returns (bytes4[] memory) {{
        uint256 total = ds.selectors.length;
        uint256 count = 0;
        for (uint256 i = 0; i < total; i++) {{
            if (ds.facetOf[ds.selectors[i]] == facet) {{
                count += 1;
            }}
        }}
        bytes4[] memory result = new bytes4[](count);
        uint256 k = 0;
        for (uint256 i = 0; i < total; i++) {{
            bytes4 sel = ds.selectors[i];
            if (ds.facetOf[sel] == facet) {{
                result[k] = sel;
                k += 1;
            }}
        }}
        return result;
    }}

    fallback() external payable {{
        address facet = LibDiamondStorage.layout().facetOf[msg.sig];
        if (facet == address(0)) {{
            revert("FunctionNotFound");
        }}
        assembly {{
            calldatacopy(0, 0, calldatasize())
            let result := delegatecall(gas(), facet, 0, calldatasize(), 0, 0)
            returndatacopy(0, 0, returndatasize())
            switch result
            case 0 {{
                revert(0, returndatasize())
            }}
            default {{
                return(0, returndatasize())
            }}
        }}
    }}
}}
"#
    ))
}

