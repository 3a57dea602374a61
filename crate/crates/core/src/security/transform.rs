//! Source-to-source rewrite replacing a dynamic array of structs with a
//! mapping plus a counter, removing the element-shift hazard on upgrades.
//!
//! The rewrite is conservative: any use of the array that cannot be
//! mechanically proven equivalent under the mapping representation
//! aborts with `UnsupportedUsage` and the caller falls back to a
//! suggestion-only diagnostic.

use crate::frontend::ast::*;
use crate::frontend::resolve;
use crate::span::{Ident, Span};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum TransformError {
    #[error("`{0}` is not a state variable")]
    UnknownVariable(String),
    #[error("`{0}` is not a dynamic array of structs")]
    NotDynArrayOfStructs(String),
    #[error("`{variable}` is used in a way the rewriter cannot prove safe ({context}) at {line}:{column}")]
    UnsupportedUsage {
        variable: String,
        context: String,
        line: u32,
        column: u32,
    },
    #[error("transformed contract failed to re-resolve: {0}")]
    Reresolve(String),
}

/// Replace dynamic-array-of-structs variable `var_name` with
/// `mapping(uint256 => Elem)` plus a `<name>Count` counter.
///
/// - `v.push(x)`  becomes `v[vCount] = x; vCount += 1;`
/// - `v.pop()`    becomes `vCount -= 1; delete v[vCount];`
/// - `v[i]`       keeps its syntax, guarded by `require(i < vCount, ...)`
/// - `v.length`   becomes `vCount`
pub fn apply_array_to_mapping(
    unit: &SourceUnit,
    var_name: &str,
) -> Result<SourceUnit, TransformError> {
    let decl = unit
        .find_state_var(var_name)
        .ok_or_else(|| TransformError::UnknownVariable(var_name.to_string()))?;
    let elem_ty = match &decl.ty {
        TypeName::Array { elem, len: None } => match elem.as_ref() {
            TypeName::User { .. } => (**elem).clone(),
            _ => return Err(TransformError::NotDynArrayOfStructs(var_name.to_string())),
        },
        _ => return Err(TransformError::NotDynArrayOfStructs(var_name.to_string())),
    };

    // Pick a fresh counter name.
    let taken: Vec<&str> = unit
        .contract
        .state_vars
        .iter()
        .map(|v| v.name.name.as_str())
        .chain(unit.contract.functions.iter().map(|f| f.name.name.as_str()))
        .chain(unit.contract.structs.iter().map(|s| s.name.name.as_str()))
        .chain(unit.contract.enums.iter().map(|e| e.name.name.as_str()))
        .chain(unit.contract.events.iter().map(|e| e.name.name.as_str()))
        .collect();
    let mut counter = format!("{var_name}Count");
    let mut n = 2;
    while taken.contains(&counter.as_str()) {
        counter = format!("{var_name}Count{n}");
        n += 1;
    }

    let mut out = unit.clone();

    // Declarations: mapping keeps the variable's name and position; the
    // counter follows immediately after.
    let idx = out
        .contract
        .state_vars
        .iter()
        .position(|v| v.name.name == var_name)
        .unwrap();
    let old = &mut out.contract.state_vars[idx];
    old.ty = TypeName::Mapping {
        key: Box::new(TypeName::Elementary(ElementaryType::Uint(256))),
        value: Box::new(elem_ty),
    };
    let counter_decl = VarDecl {
        name: Ident::synthetic(&counter),
        ty: TypeName::Elementary(ElementaryType::Uint(256)),
        visibility: VarVisibility::Internal,
        span: Span::default(),
    };
    out.contract.state_vars.insert(idx + 1, counter_decl);

    let rewriter = Rewriter { var: var_name.to_string(), counter: counter.clone() };
    for f in &mut out.contract.functions {
        rewriter.rewrite_block(&mut f.body)?;
    }

    // Effects changed; re-resolve to refresh them and to prove the
    // rewrite left a well-formed contract.
    resolve(out).map_err(|d| TransformError::Reresolve(d.message))
}

struct Rewriter {
    var: String,
    counter: String,
}

impl Rewriter {
    fn unsupported(&self, context: &str, span: Span) -> TransformError {
        TransformError::UnsupportedUsage {
            variable: self.var.clone(),
            context: context.to_string(),
            line: span.line,
            column: span.column,
        }
    }

    fn counter_expr(&self) -> Expr {
        Expr::ident(&self.counter)
    }

    fn rewrite_block(&self, block: &mut Block) -> Result<(), TransformError> {
        let mut rewritten = Vec::with_capacity(block.stmts.len());
        for stmt in block.stmts.drain(..) {
            self.rewrite_stmt(stmt, &mut rewritten)?;
        }
        block.stmts = rewritten;
        Ok(())
    }

    /// Rewrite one statement, emitting bounds guards before it and
    /// expansion statements in place.
    fn rewrite_stmt(&self, stmt: Stmt, out: &mut Vec<Stmt>) -> Result<(), TransformError> {
        match stmt {
            // v.push(x) / v.pop() as standalone statements expand in place.
            Stmt::Expr(expr) if self.is_push(&expr) => {
                let Expr::Call { mut args, .. } = expr else { unreachable!() };
                let mut guards = Vec::new();
                let value = self.rewrite_expr(args.pop().unwrap(), &mut guards)?;
                out.extend(guards);
                out.push(Stmt::Assign {
                    target: Expr::index(Expr::ident(&self.var), self.counter_expr()),
                    op: AssignOp::Assign,
                    value,
                });
                out.push(Stmt::Assign {
                    target: self.counter_expr(),
                    op: AssignOp::Add,
                    value: Expr::number("1"),
                });
                Ok(())
            }
            Stmt::Expr(expr) if self.is_pop(&expr) => {
                out.push(Stmt::Assign {
                    target: self.counter_expr(),
                    op: AssignOp::Sub,
                    value: Expr::number("1"),
                });
                out.push(Stmt::Delete {
                    target: Expr::index(Expr::ident(&self.var), self.counter_expr()),
                });
                Ok(())
            }
            Stmt::Block(mut b) => {
                self.rewrite_block(&mut b)?;
                out.push(Stmt::Block(b));
                Ok(())
            }
            Stmt::VarDecl { ty, location, name, init } => {
                let init = match init {
                    Some(e) => {
                        let mut guards = Vec::new();
                        let e = self.rewrite_expr(e, &mut guards)?;
                        out.extend(guards);
                        Some(e)
                    }
                    None => None,
                };
                out.push(Stmt::VarDecl { ty, location, name, init });
                Ok(())
            }
            Stmt::Expr(expr) => {
                let mut guards = Vec::new();
                let expr = self.rewrite_expr(expr, &mut guards)?;
                out.extend(guards);
                out.push(Stmt::Expr(expr));
                Ok(())
            }
            Stmt::Assign { target, op, value } => {
                let mut guards = Vec::new();
                // Assigning the whole array is not representable.
                if self.is_bare_var(&target) {
                    return Err(self.unsupported("whole-array assignment", target.span()));
                }
                let target = self.rewrite_expr(target, &mut guards)?;
                let value = self.rewrite_expr(value, &mut guards)?;
                out.extend(guards);
                out.push(Stmt::Assign { target, op, value });
                Ok(())
            }
            Stmt::If { cond, mut then_branch, else_branch } => {
                let mut guards = Vec::new();
                let cond = self.rewrite_expr(cond, &mut guards)?;
                out.extend(guards);
                self.rewrite_block(&mut then_branch)?;
                let else_branch = match else_branch {
                    Some(e) => {
                        let mut tmp = Vec::new();
                        self.rewrite_stmt(*e, &mut tmp)?;
                        if tmp.len() == 1 {
                            Some(Box::new(tmp.pop().unwrap()))
                        } else {
                            Some(Box::new(Stmt::Block(Block {
                                stmts: tmp,
                                span: Span::default(),
                            })))
                        }
                    }
                    None => None,
                };
                out.push(Stmt::If { cond, then_branch, else_branch });
                Ok(())
            }
            Stmt::While { cond, mut body } => {
                // A guard hoisted out of a loop condition would only run
                // once; refuse instead of changing semantics.
                if self.uses_var_index(&cond) {
                    return Err(self.unsupported("array indexing in a loop condition", cond.span()));
                }
                let mut guards = Vec::new();
                let cond = self.rewrite_expr(cond, &mut guards)?;
                debug_assert!(guards.is_empty());
                self.rewrite_block(&mut body)?;
                out.push(Stmt::While { cond, body });
                Ok(())
            }
            Stmt::For { init, cond, update, mut body } => {
                let init = match init {
                    Some(s) => {
                        let mut tmp = Vec::new();
                        self.rewrite_stmt(*s, &mut tmp)?;
                        if tmp.len() != 1 {
                            return Err(self.unsupported(
                                "array mutation in a for-loop initializer",
                                Span::default(),
                            ));
                        }
                        Some(Box::new(tmp.pop().unwrap()))
                    }
                    None => None,
                };
                let cond = match cond {
                    Some(c) => {
                        if self.uses_var_index(&c) {
                            return Err(
                                self.unsupported("array indexing in a loop condition", c.span())
                            );
                        }
                        let mut guards = Vec::new();
                        let c = self.rewrite_expr(c, &mut guards)?;
                        Some(c)
                    }
                    None => None,
                };
                let update = match update {
                    Some(s) => {
                        if let Stmt::Expr(e) | Stmt::Assign { value: e, .. } = s.as_ref() {
                            if self.uses_var_index(e) {
                                return Err(self.unsupported(
                                    "array indexing in a loop update",
                                    e.span(),
                                ));
                            }
                        }
                        let mut tmp = Vec::new();
                        self.rewrite_stmt(*s, &mut tmp)?;
                        if tmp.len() != 1 {
                            return Err(self.unsupported(
                                "array mutation in a for-loop update",
                                Span::default(),
                            ));
                        }
                        Some(Box::new(tmp.pop().unwrap()))
                    }
                    None => None,
                };
                self.rewrite_block(&mut body)?;
                out.push(Stmt::For { init, cond, update, body });
                Ok(())
            }
            Stmt::Return { values } => {
                let mut guards = Vec::new();
                let values = values
                    .into_iter()
                    .map(|v| self.rewrite_expr(v, &mut guards))
                    .collect::<Result<Vec<_>, _>>()?;
                out.extend(guards);
                out.push(Stmt::Return { values });
                Ok(())
            }
            Stmt::Require { cond, message } => {
                let mut guards = Vec::new();
                let cond = self.rewrite_expr(cond, &mut guards)?;
                out.extend(guards);
                out.push(Stmt::Require { cond, message });
                Ok(())
            }
            Stmt::Emit { event, args } => {
                let mut guards = Vec::new();
                let args = args
                    .into_iter()
                    .map(|a| self.rewrite_expr(a, &mut guards))
                    .collect::<Result<Vec<_>, _>>()?;
                out.extend(guards);
                out.push(Stmt::Emit { event, args });
                Ok(())
            }
            Stmt::Delete { target } => {
                if self.is_bare_var(&target) {
                    return Err(self.unsupported("deleting the whole array", target.span()));
                }
                let mut guards = Vec::new();
                let target = self.rewrite_expr(target, &mut guards)?;
                out.extend(guards);
                out.push(Stmt::Delete { target });
                Ok(())
            }
            s @ (Stmt::Revert { .. } | Stmt::Break | Stmt::Continue | Stmt::Assembly(_)) => {
                out.push(s);
                Ok(())
            }
        }
    }

    fn is_bare_var(&self, expr: &Expr) -> bool {
        matches!(expr, Expr::Ident(i) if i.name == self.var)
    }

    fn is_push(&self, expr: &Expr) -> bool {
        self.is_array_method(expr, "push", 1)
    }

    fn is_pop(&self, expr: &Expr) -> bool {
        self.is_array_method(expr, "pop", 0)
    }

    fn is_array_method(&self, expr: &Expr, method: &str, arity: usize) -> bool {
        let Expr::Call { callee, args } = expr else { return false };
        let Expr::Member { base, member } = callee.as_ref() else { return false };
        member.name == method && args.len() == arity && self.is_bare_var(base)
    }

    /// Does the expression contain `v[...]` anywhere?
    fn uses_var_index(&self, expr: &Expr) -> bool {
        match expr {
            Expr::Index { base, index } => {
                self.is_bare_var(base) || self.uses_var_index(base) || self.uses_var_index(index)
            }
            Expr::Member { base, .. } => self.uses_var_index(base),
            Expr::Call { callee, args } => {
                self.uses_var_index(callee) || args.iter().any(|a| self.uses_var_index(a))
            }
            Expr::Binary { lhs, rhs, .. } => {
                self.uses_var_index(lhs) || self.uses_var_index(rhs)
            }
            Expr::Unary { expr, .. } => self.uses_var_index(expr),
            Expr::Ternary { cond, if_true, if_false } => {
                self.uses_var_index(cond)
                    || self.uses_var_index(if_true)
                    || self.uses_var_index(if_false)
            }
            Expr::Tuple { elems, .. } => elems.iter().any(|e| self.uses_var_index(e)),
            _ => false,
        }
    }

    /// Rewrite an expression, pushing bounds guards for every `v[i]`
    /// encountered. Bare `v` outside the supported patterns aborts.
    fn rewrite_expr(&self, expr: Expr, guards: &mut Vec<Stmt>) -> Result<Expr, TransformError> {
        match expr {
            Expr::Ident(ident) if ident.name == self.var => {
                Err(self.unsupported("the array used as a value", ident.span))
            }
            Expr::Member { base, member } => {
                if member.name == "length" && self.is_bare_var(&base) {
                    return Ok(self.counter_expr());
                }
                if (member.name == "push" || member.name == "pop") && self.is_bare_var(&base) {
                    // Valid only as a standalone statement, handled above.
                    return Err(self.unsupported(
                        &format!("`{}.{}` used inside an expression", self.var, member.name),
                        member.span,
                    ));
                }
                let base = self.rewrite_expr(*base, guards)?;
                Ok(Expr::Member { base: Box::new(base), member })
            }
            Expr::Index { base, index } => {
                if self.is_bare_var(&base) {
                    let index = self.rewrite_expr(*index, guards)?;
                    guards.push(Stmt::Require {
                        cond: Expr::Binary {
                            op: BinOp::Lt,
                            lhs: Box::new(index.clone()),
                            rhs: Box::new(self.counter_expr()),
                        },
                        message: Some(format!("{}: index out of bounds", self.var)),
                    });
                    return Ok(Expr::Index {
                        base: Box::new(Expr::ident(&self.var)),
                        index: Box::new(index),
                    });
                }
                let base = self.rewrite_expr(*base, guards)?;
                let index = self.rewrite_expr(*index, guards)?;
                Ok(Expr::Index { base: Box::new(base), index: Box::new(index) })
            }
            Expr::Call { callee, args } => {
                let callee = match *callee {
                    // Callee member chains rooted at v[i] recurse normally.
                    c => self.rewrite_expr(c, guards)?,
                };
                let args = args
                    .into_iter()
                    .map(|a| self.rewrite_expr(a, guards))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Expr::Call { callee: Box::new(callee), args })
            }
            Expr::Binary { op, lhs, rhs } => Ok(Expr::Binary {
                op,
                lhs: Box::new(self.rewrite_expr(*lhs, guards)?),
                rhs: Box::new(self.rewrite_expr(*rhs, guards)?),
            }),
            Expr::Unary { op, expr, prefix } => Ok(Expr::Unary {
                op,
                expr: Box::new(self.rewrite_expr(*expr, guards)?),
                prefix,
            }),
            Expr::Ternary { cond, if_true, if_false } => Ok(Expr::Ternary {
                cond: Box::new(self.rewrite_expr(*cond, guards)?),
                if_true: Box::new(self.rewrite_expr(*if_true, guards)?),
                if_false: Box::new(self.rewrite_expr(*if_false, guards)?),
            }),
            Expr::Tuple { elems, span } => Ok(Expr::Tuple {
                elems: elems
                    .into_iter()
                    .map(|e| self.rewrite_expr(e, guards))
                    .collect::<Result<Vec<_>, _>>()?,
                span,
            }),
            other => Ok(other),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    const BOOKS: &str = r#"
        contract BookLibrary {
            struct Book { string title; string author; uint256 id; }
            Book[] books;
            event BookAdded(uint256 id);
            function addBook(string memory title, string memory author) public {
                books.push(Book(title, author, books.length));
                emit BookAdded(books.length - 1);
            }
            function getBook(uint256 id) public view returns (string memory) {
                require(id < books.length, "unknown book");
                Book memory b = books[id];
                return b.title;
            }
            function removeLast() public {
                books.pop();
            }
        }
    "#;

    fn transformed(src: &str, var: &str) -> SourceUnit {
        let unit = resolve(parse(src).unwrap()).unwrap();
        apply_array_to_mapping(&unit, var).unwrap()
    }

    #[test]
    fn declarations_are_replaced() {
        let unit = transformed(BOOKS, "books");
        let tys: Vec<(String, String)> = unit
            .contract
            .state_vars
            .iter()
            .map(|v| (v.name.name.clone(), v.ty.display()))
            .collect();
        assert_eq!(
            tys,
            vec![
                ("books".to_string(), "mapping(uint256 => Book)".to_string()),
                ("booksCount".to_string(), "uint256".to_string()),
            ]
        );
    }

    #[test]
    fn push_expands_to_assignment_and_increment() {
        let unit = transformed(BOOKS, "books");
        let f = unit.find_function("addBook").unwrap();
        // push expands into two statements; emit stays, so 3 statements.
        assert_eq!(f.body.stmts.len(), 3);
        let Stmt::Assign { target, op, .. } = &f.body.stmts[0] else {
            panic!("expected assignment, got {:?}", f.body.stmts[0]);
        };
        assert_eq!(*op, AssignOp::Assign);
        assert!(matches!(target, Expr::Index { .. }));
        let Stmt::Assign { op: inc_op, .. } = &f.body.stmts[1] else { panic!() };
        assert_eq!(*inc_op, AssignOp::Add);
        assert!(f.writes.contains("books"));
        assert!(f.writes.contains("booksCount"));
    }

    #[test]
    fn pop_expands_to_decrement_and_delete() {
        let unit = transformed(BOOKS, "books");
        let f = unit.find_function("removeLast").unwrap();
        assert_eq!(f.body.stmts.len(), 2);
        assert!(matches!(&f.body.stmts[0], Stmt::Assign { op: AssignOp::Sub, .. }));
        assert!(matches!(&f.body.stmts[1], Stmt::Delete { .. }));
    }

    #[test]
    fn length_becomes_counter_and_index_gets_guard() {
        let unit = transformed(BOOKS, "books");
        let f = unit.find_function("getBook").unwrap();
        // Original require (length rewritten) + inserted guard + decl + return.
        let Stmt::Require { cond, .. } = &f.body.stmts[0] else { panic!() };
        let Expr::Binary { rhs, .. } = cond else { panic!() };
        assert!(matches!(rhs.as_ref(), Expr::Ident(i) if i.name == "booksCount"));
        // The inserted guard precedes the declaration that indexes.
        let Stmt::Require { message, .. } = &f.body.stmts[1] else {
            panic!("expected inserted guard, got {:?}", f.body.stmts[1]);
        };
        assert_eq!(message.as_deref(), Some("books: index out of bounds"));
        assert!(f.reads.contains("booksCount"));
    }

    #[test]
    fn counter_name_dedups_against_existing() {
        let src = r#"
            contract C {
                struct S { uint256 v; }
                S[] xs;
                uint256 xsCount;
                function add() public { xs.push(S(1)); xsCount = 0; }
            }
        "#;
        let unit = transformed(src, "xs");
        assert!(unit
            .contract
            .state_vars
            .iter()
            .any(|v| v.name.name == "xsCount2"));
    }

    #[test]
    fn whole_array_in_emit_is_unsupported() {
        let src = r#"
            contract C {
                struct S { uint256 v; }
                S[] xs;
                event All(S[] xs);
                function f() public { emit All(xs); }
            }
        "#;
        let unit = resolve(parse(src).unwrap()).unwrap();
        let err = apply_array_to_mapping(&unit, "xs").unwrap_err();
        assert!(matches!(err, TransformError::UnsupportedUsage { .. }));
    }

    #[test]
    fn non_struct_array_is_rejected() {
        let src = "contract C { uint256[] xs; function f() public { xs.push(1); } }";
        let unit = resolve(parse(src).unwrap()).unwrap();
        let err = apply_array_to_mapping(&unit, "xs").unwrap_err();
        assert!(matches!(err, TransformError::NotDynArrayOfStructs(_)));
    }

    #[test]
    fn unused_array_transforms_trivially() {
        let src = "contract C { struct S { uint256 v; } S[] xs; function f() public pure returns (uint256) { return 1; } }";
        let unit = transformed(src, "xs");
        assert_eq!(unit.contract.state_vars.len(), 2);
    }

    #[test]
    fn loop_condition_indexing_is_unsupported() {
        let src = r#"
            contract C {
                struct S { bool flag; uint256 v; }
                S[] xs;
                function f() public view returns (uint256) {
                    uint256 i = 0;
                    while (xs[i].flag) {
                        i += 1;
                    }
                    return i;
                }
            }
        "#;
        let unit = resolve(parse(src).unwrap()).unwrap();
        let err = apply_array_to_mapping(&unit, "xs").unwrap_err();
        assert!(matches!(err, TransformError::UnsupportedUsage { .. }));
    }
}
