//! Symbol resolution and state-access analysis.
//!
//! Populates `reads`/`writes`/`calls` on every function. Writes cover
//! assignments, compound assignments, `push`/`pop`, `delete` and the
//! increment/decrement operators. `calls` records direct invocations of
//! contract functions; transitive closure is the facetizer's job.

use crate::diagnostics::{codes, Diagnostic};
use crate::frontend::ast::*;
use crate::span::{Ident, Span};
use std::collections::{BTreeSet, HashMap, HashSet};

/// Resolve a user contract, returning it with effect sets populated.
pub fn resolve(mut unit: SourceUnit) -> Result<SourceUnit, Diagnostic> {
    let global = GlobalScope::default();
    resolve_contract(&mut unit.contract, &global, true)?;
    Ok(unit)
}

/// Resolve a bundle of generated files against a shared global scope.
/// Returns all diagnostics found rather than stopping at the first.
pub fn resolve_bundle(files: &mut [SourceFile]) -> Vec<Diagnostic> {
    let mut global = GlobalScope::default();
    let mut diags = Vec::new();
    for file in files.iter() {
        for item in &file.items {
            let (name, sym, span) = match item {
                TopItem::Contract(c) => (
                    c.name.name.clone(),
                    if c.kind == ContractKind::Library {
                        GlobalSymbol::Library(LibraryScope::from_contract(c))
                    } else {
                        GlobalSymbol::Contract
                    },
                    c.span,
                ),
                TopItem::Struct(s) => (
                    s.name.name.clone(),
                    GlobalSymbol::Struct(s.members.len()),
                    s.span,
                ),
                TopItem::Enum(e) => (
                    e.name.name.clone(),
                    GlobalSymbol::Enum(e.variants.iter().map(|v| v.name.clone()).collect()),
                    e.span,
                ),
            };
            if global.symbols.insert(name.clone(), sym).is_some() {
                diags.push(
                    Diagnostic::error(
                        codes::DUPLICATE_DECLARATION,
                        format!("duplicate top-level declaration `{name}`"),
                    )
                    .at(span),
                );
            }
        }
    }
    for file in files.iter_mut() {
        for item in file.items.iter_mut() {
            if let TopItem::Contract(c) = item {
                if let Err(d) = resolve_contract(c, &global, false) {
                    diags.push(d);
                }
            }
        }
    }
    diags
}

#[derive(Debug, Clone)]
enum GlobalSymbol {
    Struct(usize),
    Enum(HashSet<String>),
    Library(LibraryScope),
    Contract,
}

#[derive(Debug, Clone)]
struct LibraryScope {
    functions: HashSet<String>,
    constants: HashSet<String>,
    structs: HashSet<String>,
}

impl LibraryScope {
    fn from_contract(c: &ContractDef) -> Self {
        LibraryScope {
            functions: c.functions.iter().map(|f| f.name.name.clone()).collect(),
            constants: c.constants.iter().map(|k| k.name.name.clone()).collect(),
            structs: c.structs.iter().map(|s| s.name.name.clone()).collect(),
        }
    }
}

#[derive(Default)]
struct GlobalScope {
    symbols: HashMap<String, GlobalSymbol>,
}

#[derive(Debug, Clone, PartialEq)]
enum ContractSymbol {
    StateVar,
    Constant,
    Struct(usize),
    Enum(HashSet<String>),
    Event(usize),
    Function,
}

struct ContractScope {
    symbols: HashMap<String, ContractSymbol>,
}

impl ContractScope {
    fn build(contract: &ContractDef) -> Result<ContractScope, Diagnostic> {
        let mut symbols = HashMap::new();
        let mut declare = |name: &Ident, sym: ContractSymbol| -> Result<(), Diagnostic> {
            if symbols.insert(name.name.clone(), sym).is_some() {
                return Err(Diagnostic::error(
                    codes::DUPLICATE_DECLARATION,
                    format!("duplicate declaration of `{}`", name.name),
                )
                .at(name.span));
            }
            Ok(())
        };
        for s in &contract.structs {
            declare(&s.name, ContractSymbol::Struct(s.members.len()))?;
        }
        for e in &contract.enums {
            declare(
                &e.name,
                ContractSymbol::Enum(e.variants.iter().map(|v| v.name.clone()).collect()),
            )?;
        }
        for ev in &contract.events {
            declare(&ev.name, ContractSymbol::Event(ev.params.len()))?;
        }
        for v in &contract.state_vars {
            declare(&v.name, ContractSymbol::StateVar)?;
        }
        for k in &contract.constants {
            declare(&k.name, ContractSymbol::Constant)?;
        }
        for f in &contract.functions {
            // Overloading is out of subset; names must be unique.
            declare(&f.name, ContractSymbol::Function)?;
        }
        Ok(ContractScope { symbols })
    }
}

fn builtin_members(root: &str) -> Option<&'static [&'static str]> {
    match root {
        "msg" => Some(&["sender", "value", "data", "sig"]),
        "block" => Some(&[
            "timestamp",
            "number",
            "chainid",
            "coinbase",
            "basefee",
            "gaslimit",
            "prevrandao",
        ]),
        "tx" => Some(&["origin", "gasprice"]),
        _ => None,
    }
}

const YUL_BUILTINS: &[&str] = &[
    "add", "sub", "mul", "div", "mod", "and", "or", "xor", "not", "iszero", "eq", "lt",
    "gt", "shl", "shr", "mload", "mstore", "sload", "sstore", "calldatacopy",
    "calldatasize", "calldataload", "returndatacopy", "returndatasize", "delegatecall",
    "staticcall", "call", "gas", "caller", "callvalue", "revert", "return", "keccak256",
];

fn resolve_contract(
    contract: &mut ContractDef,
    global: &GlobalScope,
    strict: bool,
) -> Result<(), Diagnostic> {
    let scope = ContractScope::build(contract)?;

    // Type positions must name known structs/enums.
    for v in &contract.state_vars {
        check_type(&v.ty, &scope, global, strict, v.span)?;
    }
    for s in &contract.structs {
        for m in &s.members {
            check_type(&m.ty, &scope, global, strict, m.span)?;
        }
    }
    for ev in &contract.events {
        for p in &ev.params {
            check_type(&p.ty, &scope, global, strict, ev.span)?;
        }
    }

    let functions = std::mem::take(&mut contract.functions);
    let mut resolved = Vec::with_capacity(functions.len());
    for mut f in functions {
        let mut ctx = FnCtx {
            scope: &scope,
            global,
            strict,
            locals: vec![HashSet::new()],
            reads: BTreeSet::new(),
            writes: BTreeSet::new(),
            calls: BTreeSet::new(),
        };
        for p in f.params.iter().chain(f.returns.iter()) {
            check_type(&p.ty, &scope, global, strict, p.span)?;
            if strict && matches!(p.ty, TypeName::Mapping { .. }) {
                return Err(Diagnostic::error(
                    codes::UNSUPPORTED_CONSTRUCT,
                    "unsupported construct: mapping parameter",
                )
                .at(p.span));
            }
            if let Some(name) = &p.name {
                ctx.declare_local(name)?;
            }
        }
        ctx.walk_block(&f.body)?;
        f.reads = ctx.reads;
        f.writes = ctx.writes;
        f.calls = ctx.calls;
        resolved.push(f);
    }
    contract.functions = resolved;
    Ok(())
}

fn check_type(
    ty: &TypeName,
    scope: &ContractScope,
    global: &GlobalScope,
    strict: bool,
    span: Span,
) -> Result<(), Diagnostic> {
    match ty {
        TypeName::Elementary(_) => Ok(()),
        TypeName::Array { elem, .. } => check_type(elem, scope, global, strict, span),
        TypeName::Mapping { key, value } => {
            // Struct keys are invalid; enums and elementaries are fine.
            if let TypeName::User { path } = key.as_ref() {
                let name = &path[0].name;
                if matches!(scope.symbols.get(name), Some(ContractSymbol::Struct(_))) {
                    return Err(Diagnostic::error(
                        codes::UNRESOLVED_IDENTIFIER,
                        format!("struct `{name}` cannot be a mapping key"),
                    )
                    .at(path[0].span));
                }
            }
            check_type(key, scope, global, strict, span)?;
            check_type(value, scope, global, strict, span)
        }
        TypeName::User { path } => {
            let head = &path[0];
            if path.len() == 1 {
                match scope.symbols.get(&head.name) {
                    Some(ContractSymbol::Struct(_)) | Some(ContractSymbol::Enum(_)) => {
                        return Ok(())
                    }
                    _ => {}
                }
                if !strict {
                    match global.symbols.get(&head.name) {
                        Some(GlobalSymbol::Struct(_)) | Some(GlobalSymbol::Enum(_)) => {
                            return Ok(())
                        }
                        _ => {}
                    }
                }
                Err(Diagnostic::error(
                    codes::UNRESOLVED_IDENTIFIER,
                    format!("unknown type `{}`", head.name),
                )
                .at(head.span))
            } else {
                // Qualified like `LibFoo.Layout`; generated code only.
                if strict {
                    return Err(Diagnostic::error(
                        codes::UNRESOLVED_IDENTIFIER,
                        format!("unknown type `{}`", ty.display()),
                    )
                    .at(head.span));
                }
                match global.symbols.get(&head.name) {
                    Some(GlobalSymbol::Library(lib)) if path.len() == 2 => {
                        if lib.structs.contains(&path[1].name) {
                            Ok(())
                        } else {
                            Err(Diagnostic::error(
                                codes::UNRESOLVED_IDENTIFIER,
                                format!("library `{}` has no type `{}`", head.name, path[1].name),
                            )
                            .at(path[1].span))
                        }
                    }
                    _ => Err(Diagnostic::error(
                        codes::UNRESOLVED_IDENTIFIER,
                        format!("unknown type `{}`", ty.display()),
                    )
                    .at(head.span)),
                }
            }
        }
    }
}

struct FnCtx<'a> {
    scope: &'a ContractScope,
    global: &'a GlobalScope,
    strict: bool,
    locals: Vec<HashSet<String>>,
    reads: BTreeSet<String>,
    writes: BTreeSet<String>,
    calls: BTreeSet<String>,
}

impl<'a> FnCtx<'a> {
    fn declare_local(&mut self, name: &Ident) -> Result<(), Diagnostic> {
        let top = self.locals.last_mut().unwrap();
        if !top.insert(name.name.clone()) {
            return Err(Diagnostic::error(
                codes::DUPLICATE_DECLARATION,
                format!("duplicate declaration of `{}`", name.name),
            )
            .at(name.span));
        }
        Ok(())
    }

    fn is_local(&self, name: &str) -> bool {
        self.locals.iter().rev().any(|s| s.contains(name))
    }

    fn unresolved(&self, ident: &Ident) -> Diagnostic {
        Diagnostic::error(
            codes::UNRESOLVED_IDENTIFIER,
            format!("unresolved identifier `{}`", ident.name),
        )
        .at(ident.span)
    }

    fn walk_block(&mut self, block: &Block) -> Result<(), Diagnostic> {
        self.locals.push(HashSet::new());
        for stmt in &block.stmts {
            self.walk_stmt(stmt)?;
        }
        self.locals.pop();
        Ok(())
    }

    fn walk_stmt(&mut self, stmt: &Stmt) -> Result<(), Diagnostic> {
        match stmt {
            Stmt::Block(b) => self.walk_block(b),
            Stmt::VarDecl { ty, name, init, .. } => {
                check_type(ty, self.scope, self.global, self.strict, name.span)?;
                if let Some(init) = init {
                    self.walk_expr(init)?;
                }
                self.declare_local(name)
            }
            Stmt::Expr(e) => self.walk_expr(e),
            Stmt::Assign { target, op, value } => {
                self.walk_target(target)?;
                if *op != AssignOp::Assign {
                    // Compound assignment reads the old value.
                    if let Some(root) = target.root_ident() {
                        if self.is_state_var(&root.name) && !self.is_local(&root.name) {
                            self.reads.insert(root.name.clone());
                        }
                    }
                }
                self.walk_expr(value)
            }
            Stmt::If { cond, then_branch, else_branch } => {
                self.walk_expr(cond)?;
                self.walk_block(then_branch)?;
                if let Some(e) = else_branch {
                    self.walk_stmt(e)?;
                }
                Ok(())
            }
            Stmt::While { cond, body } => {
                self.walk_expr(cond)?;
                self.walk_block(body)
            }
            Stmt::For { init, cond, update, body } => {
                self.locals.push(HashSet::new());
                if let Some(init) = init {
                    self.walk_stmt(init)?;
                }
                if let Some(cond) = cond {
                    self.walk_expr(cond)?;
                }
                if let Some(update) = update {
                    self.walk_stmt(update)?;
                }
                self.walk_block(body)?;
                self.locals.pop();
                Ok(())
            }
            Stmt::Return { values } => {
                for v in values {
                    self.walk_expr(v)?;
                }
                Ok(())
            }
            Stmt::Require { cond, .. } => self.walk_expr(cond),
            Stmt::Revert { .. } | Stmt::Break | Stmt::Continue => Ok(()),
            Stmt::Emit { event, args } => {
                match self.scope.symbols.get(&event.name) {
                    Some(ContractSymbol::Event(arity)) => {
                        if *arity != args.len() {
                            return Err(Diagnostic::error(
                                codes::UNRESOLVED_IDENTIFIER,
                                format!(
                                    "event `{}` expects {} arguments, got {}",
                                    event.name,
                                    arity,
                                    args.len()
                                ),
                            )
                            .at(event.span));
                        }
                    }
                    _ => return Err(self.unresolved(event)),
                }
                for a in args {
                    self.walk_expr(a)?;
                }
                Ok(())
            }
            Stmt::Delete { target } => self.walk_target(target),
            Stmt::Assembly(block) => {
                if self.strict {
                    return Err(Diagnostic::error(
                        codes::UNSUPPORTED_CONSTRUCT,
                        "unsupported construct: inline assembly",
                    )
                    .at(block.span));
                }
                self.locals.push(HashSet::new());
                self.walk_yul_block(block)?;
                self.locals.pop();
                Ok(())
            }
        }
    }

    fn is_state_var(&self, name: &str) -> bool {
        matches!(self.scope.symbols.get(name), Some(ContractSymbol::StateVar))
    }

    /// Walk an assignment / mutation target: the root state variable is a
    /// write; index expressions inside the chain are ordinary reads.
    fn walk_target(&mut self, target: &Expr) -> Result<(), Diagnostic> {
        match target {
            Expr::Ident(ident) => {
                if self.is_local(&ident.name) {
                    return Ok(());
                }
                match self.scope.symbols.get(&ident.name) {
                    Some(ContractSymbol::StateVar) => {
                        self.writes.insert(ident.name.clone());
                        Ok(())
                    }
                    Some(ContractSymbol::Constant) => Err(Diagnostic::error(
                        codes::UNRESOLVED_IDENTIFIER,
                        format!("cannot assign to constant `{}`", ident.name),
                    )
                    .at(ident.span)),
                    Some(_) => Err(Diagnostic::error(
                        codes::UNRESOLVED_IDENTIFIER,
                        format!("`{}` is not assignable", ident.name),
                    )
                    .at(ident.span)),
                    None => Err(self.unresolved(ident)),
                }
            }
            Expr::Member { base, .. } => self.walk_target(base),
            Expr::Index { base, index } => {
                self.walk_expr(index)?;
                self.walk_target(base)
            }
            // Storage references produced by accessor calls
            // (`Lib.layout().v = ...`); the call itself is walked normally.
            Expr::Call { .. } => self.walk_expr(target),
            other => Err(Diagnostic::error(
                codes::UNRESOLVED_IDENTIFIER,
                "expression is not assignable",
            )
            .at(other.span())),
        }
    }

    fn walk_expr(&mut self, expr: &Expr) -> Result<(), Diagnostic> {
        match expr {
            Expr::Ident(ident) => {
                if self.is_local(&ident.name) {
                    return Ok(());
                }
                match self.scope.symbols.get(&ident.name) {
                    Some(ContractSymbol::StateVar) => {
                        self.reads.insert(ident.name.clone());
                        Ok(())
                    }
                    Some(ContractSymbol::Constant) => Ok(()),
                    Some(other) => {
                        let what = match other {
                            ContractSymbol::Function => "function",
                            ContractSymbol::Event(_) => "event",
                            _ => "type",
                        };
                        Err(Diagnostic::error(
                            codes::UNRESOLVED_IDENTIFIER,
                            format!("`{}` ({what}) cannot be used as a value", ident.name),
                        )
                        .at(ident.span))
                    }
                    None => Err(self.unresolved(ident)),
                }
            }
            Expr::Number { .. }
            | Expr::StringLit { .. }
            | Expr::BoolLit { .. }
            | Expr::ElementaryTypeExpr { .. }
            | Expr::New { .. } => Ok(()),
            Expr::Member { base, member } => self.walk_member(base, member),
            Expr::Index { base, index } => {
                self.walk_expr(index)?;
                self.walk_expr(base)
            }
            Expr::Call { callee, args } => {
                self.walk_callee(callee, args)?;
                for a in args {
                    self.walk_expr(a)?;
                }
                Ok(())
            }
            Expr::Binary { lhs, rhs, .. } => {
                self.walk_expr(lhs)?;
                self.walk_expr(rhs)
            }
            Expr::Unary { op, expr, .. } => match op {
                UnOp::Inc | UnOp::Dec => {
                    self.walk_target(expr)?;
                    if let Some(root) = expr.root_ident() {
                        if self.is_state_var(&root.name) && !self.is_local(&root.name) {
                            self.reads.insert(root.name.clone());
                        }
                    }
                    Ok(())
                }
                _ => self.walk_expr(expr),
            },
            Expr::Ternary { cond, if_true, if_false } => {
                self.walk_expr(cond)?;
                self.walk_expr(if_true)?;
                self.walk_expr(if_false)
            }
            Expr::Tuple { elems, .. } => {
                for e in elems {
                    self.walk_expr(e)?;
                }
                Ok(())
            }
        }
    }

    fn walk_member(&mut self, base: &Expr, member: &Ident) -> Result<(), Diagnostic> {
        if let Expr::Ident(root) = base {
            if !self.is_local(&root.name) {
                if let Some(members) = builtin_members(&root.name) {
                    if !members.contains(&member.name.as_str()) {
                        return Err(Diagnostic::error(
                            codes::UNRESOLVED_IDENTIFIER,
                            format!("`{}` has no member `{}`", root.name, member.name),
                        )
                        .at(member.span));
                    }
                    return Ok(());
                }
                if let Some(ContractSymbol::Enum(variants)) = self.scope.symbols.get(&root.name)
                {
                    if !variants.contains(&member.name) {
                        return Err(Diagnostic::error(
                            codes::UNRESOLVED_IDENTIFIER,
                            format!("enum `{}` has no variant `{}`", root.name, member.name),
                        )
                        .at(member.span));
                    }
                    return Ok(());
                }
                if !self.strict {
                    if let Some(GlobalSymbol::Library(lib)) =
                        self.global.symbols.get(&root.name)
                    {
                        if lib.functions.contains(&member.name)
                            || lib.constants.contains(&member.name)
                        {
                            return Ok(());
                        }
                        return Err(Diagnostic::error(
                            codes::UNRESOLVED_IDENTIFIER,
                            format!(
                                "library `{}` has no member `{}`",
                                root.name, member.name
                            ),
                        )
                        .at(member.span));
                    }
                    if let Some(GlobalSymbol::Enum(variants)) =
                        self.global.symbols.get(&root.name)
                    {
                        if variants.contains(&member.name) {
                            return Ok(());
                        }
                    }
                }
            }
        }
        // Deeper members are not type-checked; only the root must resolve.
        self.walk_expr(base)
    }

    fn walk_callee(&mut self, callee: &Expr, args: &[Expr]) -> Result<(), Diagnostic> {
        match callee {
            Expr::Ident(ident) => {
                if self.is_local(&ident.name) {
                    return Err(Diagnostic::error(
                        codes::UNRESOLVED_IDENTIFIER,
                        format!("`{}` is not callable", ident.name),
                    )
                    .at(ident.span));
                }
                match self.scope.symbols.get(&ident.name) {
                    Some(ContractSymbol::Function) => {
                        self.calls.insert(ident.name.clone());
                        Ok(())
                    }
                    Some(ContractSymbol::Struct(member_count)) => {
                        if *member_count != args.len() {
                            return Err(Diagnostic::error(
                                codes::UNRESOLVED_IDENTIFIER,
                                format!(
                                    "struct `{}` has {} members but {} arguments were given",
                                    ident.name,
                                    member_count,
                                    args.len()
                                ),
                            )
                            .at(ident.span));
                        }
                        Ok(())
                    }
                    Some(_) => Err(Diagnostic::error(
                        codes::UNRESOLVED_IDENTIFIER,
                        format!("`{}` is not callable", ident.name),
                    )
                    .at(ident.span)),
                    None => {
                        if !self.strict {
                            if let Some(GlobalSymbol::Struct(member_count)) =
                                self.global.symbols.get(&ident.name)
                            {
                                if *member_count != args.len() {
                                    return Err(Diagnostic::error(
                                        codes::UNRESOLVED_IDENTIFIER,
                                        format!(
                                            "struct `{}` has {} members but {} arguments were given",
                                            ident.name,
                                            member_count,
                                            args.len()
                                        ),
                                    )
                                    .at(ident.span));
                                }
                                return Ok(());
                            }
                        }
                        Err(self.unresolved(ident))
                    }
                }
            }
            Expr::ElementaryTypeExpr { .. } | Expr::New { .. } => Ok(()),
            Expr::Member { base, member } => {
                // Array mutations attribute a write to the root state var.
                if member.name == "push" || member.name == "pop" {
                    if let Some(root) = base.root_ident() {
                        if !self.is_local(&root.name) && self.is_state_var(&root.name) {
                            self.walk_target(base)?;
                            return Ok(());
                        }
                    }
                    // push/pop on something rooted elsewhere (storage ref
                    // chains in generated code): walk for resolution only.
                    return self.walk_member_base_quiet(base);
                }
                self.walk_member(base, member)
            }
            other => self.walk_expr(other),
        }
    }

    /// Walk a push/pop base without attributing reads to the root.
    fn walk_member_base_quiet(&mut self, base: &Expr) -> Result<(), Diagnostic> {
        match base {
            Expr::Ident(ident) => {
                if self.is_local(&ident.name) {
                    return Ok(());
                }
                if self.scope.symbols.contains_key(&ident.name) {
                    return Ok(());
                }
                if !self.strict && self.global.symbols.contains_key(&ident.name) {
                    return Ok(());
                }
                Err(self.unresolved(ident))
            }
            Expr::Member { base, .. } => self.walk_member_base_quiet(base),
            Expr::Index { base, index } => {
                self.walk_expr(index)?;
                self.walk_member_base_quiet(base)
            }
            other => self.walk_expr(other),
        }
    }

    // -- Yul ------------------------------------------------------------

    fn walk_yul_block(&mut self, block: &YulBlock) -> Result<(), Diagnostic> {
        self.locals.push(HashSet::new());
        for stmt in &block.stmts {
            self.walk_yul_stmt(stmt)?;
        }
        self.locals.pop();
        Ok(())
    }

    fn walk_yul_stmt(&mut self, stmt: &YulStmt) -> Result<(), Diagnostic> {
        match stmt {
            YulStmt::Let { name, value } => {
                self.walk_yul_expr(value)?;
                self.declare_local(name)
            }
            YulStmt::Assign { target, value } => {
                self.walk_yul_path(target)?;
                self.walk_yul_expr(value)
            }
            YulStmt::Expr(e) => self.walk_yul_expr(e),
            YulStmt::If { cond, body } => {
                self.walk_yul_expr(cond)?;
                self.walk_yul_block(body)
            }
            YulStmt::Switch { expr, cases, default } => {
                self.walk_yul_expr(expr)?;
                for (_, body) in cases {
                    self.walk_yul_block(body)?;
                }
                if let Some(d) = default {
                    self.walk_yul_block(d)?;
                }
                Ok(())
            }
        }
    }

    fn walk_yul_path(&mut self, path: &[Ident]) -> Result<(), Diagnostic> {
        let head = &path[0];
        if self.is_local(&head.name)
            || matches!(
                self.scope.symbols.get(&head.name),
                Some(ContractSymbol::StateVar) | Some(ContractSymbol::Constant)
            )
        {
            // `.slot` / `.offset` suffixes are the only valid continuations.
            for seg in &path[1..] {
                if seg.name != "slot" && seg.name != "offset" {
                    return Err(Diagnostic::error(
                        codes::UNRESOLVED_IDENTIFIER,
                        format!("invalid Yul suffix `{}`", seg.name),
                    )
                    .at(seg.span));
                }
            }
            return Ok(());
        }
        Err(self.unresolved(head))
    }

    fn walk_yul_expr(&mut self, expr: &YulExpr) -> Result<(), Diagnostic> {
        match expr {
            YulExpr::Literal(_) => Ok(()),
            YulExpr::Path(path) => self.walk_yul_path(path),
            YulExpr::Call { name, args } => {
                if !YUL_BUILTINS.contains(&name.name.as_str()) {
                    return Err(Diagnostic::error(
                        codes::UNRESOLVED_IDENTIFIER,
                        format!("unknown Yul function `{}`", name.name),
                    )
                    .at(name.span));
                }
                for a in args {
                    self.walk_yul_expr(a)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse;

    fn resolved(src: &str) -> SourceUnit {
        resolve(parse(src).unwrap()).unwrap()
    }

    #[test]
    fn read_modify_write() {
        let unit = resolved(
            "contract C { uint256 x; function f() public { x = x + 1; } }",
        );
        let f = unit.find_function("f").unwrap();
        assert!(f.reads.contains("x"));
        assert!(f.writes.contains("x"));
    }

    #[test]
    fn push_is_a_write_not_a_read() {
        let unit = resolved(
            r#"
            contract C {
                struct Book { string title; string author; uint256 id; }
                Book[] books;
                function addBook(string memory t, string memory a) public {
                    books.push(Book(t, a, 1));
                }
            }
            "#,
        );
        let f = unit.find_function("addBook").unwrap();
        assert_eq!(f.writes.iter().collect::<Vec<_>>(), vec!["books"]);
        assert!(f.reads.is_empty());
    }

    #[test]
    fn array_length_is_a_read() {
        let unit = resolved(
            r#"
            contract C {
                uint256[] xs;
                function count() public view returns (uint256) { return xs.length; }
            }
            "#,
        );
        let f = unit.find_function("count").unwrap();
        assert!(f.reads.contains("xs"));
        assert!(f.writes.is_empty());
    }

    #[test]
    fn internal_call_recorded_without_transitive_effects() {
        let unit = resolved(
            r#"
            contract C {
                uint256 y;
                function g() internal { y = 1; }
                function f() public { g(); }
            }
            "#,
        );
        let f = unit.find_function("f").unwrap();
        assert_eq!(f.calls.iter().collect::<Vec<_>>(), vec!["g"]);
        assert!(f.writes.is_empty());
        let g = unit.find_function("g").unwrap();
        assert!(g.writes.contains("y"));
    }

    #[test]
    fn unresolved_identifier_errors() {
        let err = resolve(
            parse("contract C { function f() public { y = 1; } }").unwrap(),
        )
        .unwrap_err();
        assert_eq!(err.code, "UNRESOLVED_IDENTIFIER");
        assert!(err.message.contains("`y`"));
    }

    #[test]
    fn duplicate_declaration_errors() {
        let err = resolve(parse("contract C { uint256 x; uint256 x; }").unwrap()).unwrap_err();
        assert_eq!(err.code, "DUPLICATE_DECLARATION");
    }

    #[test]
    fn duplicate_function_errors() {
        let err = resolve(
            parse("contract C { function f() public { } function f() public { } }").unwrap(),
        )
        .unwrap_err();
        assert_eq!(err.code, "DUPLICATE_DECLARATION");
    }

    #[test]
    fn locals_shadow_state() {
        let unit = resolved(
            r#"
            contract C {
                uint256 x;
                function f() public pure returns (uint256) {
                    uint256 x = 3;
                    return x + 1;
                }
            }
            "#,
        );
        let f = unit.find_function("f").unwrap();
        assert!(f.reads.is_empty());
        assert!(f.writes.is_empty());
    }

    #[test]
    fn delete_and_increment_are_writes() {
        let unit = resolved(
            r#"
            contract C {
                uint256 n;
                uint256[] xs;
                function f(uint256 i) public {
                    n++;
                    delete xs[i];
                    xs.pop();
                }
            }
            "#,
        );
        let f = unit.find_function("f").unwrap();
        assert!(f.writes.contains("n"));
        assert!(f.writes.contains("xs"));
        assert!(f.reads.contains("n")); // increment reads the old value
    }

    #[test]
    fn compound_assign_reads_and_writes() {
        let unit = resolved(
            "contract C { uint256 t; function f(uint256 v) public { t += v; } }",
        );
        let f = unit.find_function("f").unwrap();
        assert!(f.reads.contains("t"));
        assert!(f.writes.contains("t"));
    }

    #[test]
    fn enum_variant_and_builtin_members() {
        let unit = resolved(
            r#"
            contract C {
                enum Color { Red, Green }
                Color c;
                address last;
                function f() public {
                    c = Color.Red;
                    last = msg.sender;
                }
            }
            "#,
        );
        let f = unit.find_function("f").unwrap();
        assert!(f.writes.contains("c"));
        assert!(f.writes.contains("last"));
    }

    #[test]
    fn unknown_enum_variant_errors() {
        let err = resolve(
            parse(
                "contract C { enum Color { Red } function f() public pure { Color.Blue; } }",
            )
            .unwrap(),
        )
        .unwrap_err();
        assert_eq!(err.code, "UNRESOLVED_IDENTIFIER");
    }

    #[test]
    fn event_arity_checked() {
        let err = resolve(
            parse(
                "contract C { event E(uint256 a); function f() public { emit E(1, 2); } }",
            )
            .unwrap(),
        )
        .unwrap_err();
        assert!(err.message.contains("expects 1 arguments"));
    }

    #[test]
    fn mapping_parameter_rejected() {
        let err = resolve(
            parse(
                "contract C { function f(mapping(uint256 => uint256) storage m) internal { } }",
            )
            .unwrap(),
        )
        .unwrap_err();
        assert_eq!(err.code, "UNSUPPORTED_CONSTRUCT");
    }
}
