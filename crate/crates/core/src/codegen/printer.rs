//! Pretty-printer for the Solidity subset. Style is frozen (4-space
//! indent, one statement per line) so golden files stay stable, and the
//! output always re-parses to a structurally identical tree.

use crate::frontend::ast::*;

pub fn print_file(file: &SourceFile) -> String {
    let mut p = Printer::new();
    p.line("// SPDX-License-Identifier: MIT");
    if let Some(pragma) = &file.pragma {
        p.line(&format!("pragma solidity {pragma};"));
    }
    if !file.imports.is_empty() {
        p.blank();
        for import in &file.imports {
            p.line(&format!("import \"{}\";", import.path));
        }
    }
    for item in &file.items {
        p.blank();
        match item {
            TopItem::Contract(c) => p.contract(c),
            TopItem::Struct(s) => p.struct_def(s),
            TopItem::Enum(e) => p.enum_def(e),
        }
    }
    p.finish()
}

/// Print a user contract back to source. Used for round-trip checks and
/// for re-emitting transformed contracts.
pub fn print_unit(unit: &SourceUnit) -> String {
    let file = SourceFile {
        pragma: unit.pragma.clone(),
        imports: Vec::new(),
        items: vec![TopItem::Contract(unit.contract.clone())],
    };
    print_file(&file)
}

pub fn print_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr, 0);
    out
}

struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn new() -> Self {
        Printer { out: String::new(), indent: 0 }
    }

    fn finish(mut self) -> String {
        if !self.out.ends_with('\n') {
            self.out.push('\n');
        }
        self.out
    }

    fn line(&mut self, text: &str) {
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn blank(&mut self) {
        if !self.out.is_empty() && !self.out.ends_with("\n\n") {
            self.out.push('\n');
        }
    }

    fn contract(&mut self, def: &ContractDef) {
        let keyword = match def.kind {
            ContractKind::Contract => "contract",
            ContractKind::Library => "library",
        };
        self.line(&format!("{keyword} {} {{", def.name.name));
        self.indent += 1;

        let mut first_section = true;
        let section = |p: &mut Printer, first: &mut bool| {
            if !*first {
                p.blank();
            }
            *first = false;
        };

        if !def.structs.is_empty() {
            section(self, &mut first_section);
            for (i, s) in def.structs.iter().enumerate() {
                if i > 0 {
                    self.blank();
                }
                self.struct_def(s);
            }
        }
        if !def.enums.is_empty() {
            section(self, &mut first_section);
            for e in &def.enums {
                self.enum_def(e);
            }
        }
        if !def.events.is_empty() {
            section(self, &mut first_section);
            for e in &def.events {
                self.event_def(e);
            }
        }
        if !def.constants.is_empty() {
            section(self, &mut first_section);
            for c in &def.constants {
                let annotation = c
                    .annotation
                    .as_ref()
                    .map(|a| format!(" // {a}"))
                    .unwrap_or_default();
                self.line(&format!(
                    "{} internal constant {} = {};{annotation}",
                    c.ty.display(),
                    c.name.name,
                    print_expr(&c.value)
                ));
            }
        }
        if !def.state_vars.is_empty() {
            section(self, &mut first_section);
            for v in &def.state_vars {
                let vis = match v.visibility {
                    VarVisibility::Internal => String::new(),
                    VarVisibility::Public => " public".to_string(),
                    VarVisibility::Private => " private".to_string(),
                };
                self.line(&format!("{}{vis} {};", v.ty.display(), v.name.name));
            }
        }
        for f in &def.functions {
            section(self, &mut first_section);
            self.function(f);
        }

        self.indent -= 1;
        self.line("}");
    }

    fn struct_def(&mut self, s: &StructDef) {
        self.line(&format!("struct {} {{", s.name.name));
        self.indent += 1;
        for m in &s.members {
            self.line(&format!("{} {};", m.ty.display(), m.name.name));
        }
        self.indent -= 1;
        self.line("}");
    }

    fn enum_def(&mut self, e: &EnumDef) {
        let variants: Vec<&str> = e.variants.iter().map(|v| v.name.as_str()).collect();
        self.line(&format!("enum {} {{ {} }}", e.name.name, variants.join(", ")));
    }

    fn event_def(&mut self, e: &EventDef) {
        let params: Vec<String> = e
            .params
            .iter()
            .map(|p| {
                let mut s = p.ty.display();
                if p.indexed {
                    s.push_str(" indexed");
                }
                if let Some(name) = &p.name {
                    s.push(' ');
                    s.push_str(&name.name);
                }
                s
            })
            .collect();
        self.line(&format!("event {}({});", e.name.name, params.join(", ")));
    }

    fn function(&mut self, f: &FuncDef) {
        let params = param_list(&f.params);
        let mut header = if f.is_constructor {
            format!("constructor({params})")
        } else if f.is_fallback {
            format!("fallback({params})")
        } else {
            format!("function {}({params})", f.name.name)
        };
        if !f.is_constructor {
            header.push(' ');
            header.push_str(match f.visibility {
                Visibility::External => "external",
                Visibility::Public => "public",
                Visibility::Internal => "internal",
                Visibility::Private => "private",
            });
        }
        match f.mutability {
            Mutability::Pure => header.push_str(" pure"),
            Mutability::View => header.push_str(" view"),
            Mutability::Payable => header.push_str(" payable"),
            Mutability::Nonpayable => {}
        }
        if !f.returns.is_empty() {
            header.push_str(&format!(" returns ({})", param_list(&f.returns)));
        }
        header.push_str(" {");
        self.line(&header);
        self.indent += 1;
        for stmt in &f.body.stmts {
            self.stmt(stmt);
        }
        self.indent -= 1;
        self.line("}");
    }

    fn stmt(&mut self, stmt: &Stmt) {
        match stmt {
            Stmt::Block(b) => {
                self.line("{");
                self.indent += 1;
                for s in &b.stmts {
                    self.stmt(s);
                }
                self.indent -= 1;
                self.line("}");
            }
            Stmt::VarDecl { .. } | Stmt::Expr(_) | Stmt::Assign { .. } => {
                let text = simple_stmt_text(stmt);
                self.line(&format!("{text};"));
            }
            Stmt::If { cond, then_branch, else_branch } => {
                self.line(&format!("if ({}) {{", print_expr(cond)));
                self.indent += 1;
                for s in &then_branch.stmts {
                    self.stmt(s);
                }
                self.indent -= 1;
                match else_branch.as_deref() {
                    None => self.line("}"),
                    Some(Stmt::If { .. }) => {
                        // `} else if (...) {` chains print flat.
                        let nested = else_branch.as_deref().unwrap();
                        self.else_if_chain(nested);
                    }
                    Some(Stmt::Block(b)) => {
                        self.line("} else {");
                        self.indent += 1;
                        for s in &b.stmts {
                            self.stmt(s);
                        }
                        self.indent -= 1;
                        self.line("}");
                    }
                    Some(other) => {
                        self.line("} else {");
                        self.indent += 1;
                        self.stmt(other);
                        self.indent -= 1;
                        self.line("}");
                    }
                }
            }
            Stmt::While { cond, body } => {
                self.line(&format!("while ({}) {{", print_expr(cond)));
                self.indent += 1;
                for s in &body.stmts {
                    self.stmt(s);
                }
                self.indent -= 1;
                self.line("}");
            }
            Stmt::For { init, cond, update, body } => {
                let init_s = init.as_deref().map(simple_stmt_text).unwrap_or_default();
                let cond_s = cond.as_ref().map(print_expr).unwrap_or_default();
                let update_s = update.as_deref().map(simple_stmt_text).unwrap_or_default();
                self.line(&format!("for ({init_s}; {cond_s}; {update_s}) {{"));
                self.indent += 1;
                for s in &body.stmts {
                    self.stmt(s);
                }
                self.indent -= 1;
                self.line("}");
            }
            Stmt::Return { values } => match values.len() {
                0 => self.line("return;"),
                1 => self.line(&format!("return {};", print_expr(&values[0]))),
                _ => {
                    let list: Vec<String> = values.iter().map(print_expr).collect();
                    self.line(&format!("return ({});", list.join(", ")));
                }
            },
            Stmt::Require { cond, message } => match message {
                Some(m) => self.line(&format!(
                    "require({}, \"{}\");",
                    print_expr(cond),
                    escape(m)
                )),
                None => self.line(&format!("require({});", print_expr(cond))),
            },
            Stmt::Revert { message } => match message {
                Some(m) => self.line(&format!("revert(\"{}\");", escape(m))),
                None => self.line("revert();"),
            },
            Stmt::Emit { event, args } => {
                let list: Vec<String> = args.iter().map(print_expr).collect();
                self.line(&format!("emit {}({});", event.name, list.join(", ")));
            }
            Stmt::Delete { target } => self.line(&format!("delete {};", print_expr(target))),
            Stmt::Break => self.line("break;"),
            Stmt::Continue => self.line("continue;"),
            Stmt::Assembly(block) => {
                self.line("assembly {");
                self.indent += 1;
                for s in &block.stmts {
                    self.yul_stmt(s);
                }
                self.indent -= 1;
                self.line("}");
            }
        }
    }

    fn else_if_chain(&mut self, stmt: &Stmt) {
        let Stmt::If { cond, then_branch, else_branch } = stmt else {
            self.stmt(stmt);
            return;
        };
        self.line(&format!("}} else if ({}) {{", print_expr(cond)));
        self.indent += 1;
        for s in &then_branch.stmts {
            self.stmt(s);
        }
        self.indent -= 1;
        match else_branch.as_deref() {
            None => self.line("}"),
            Some(next @ Stmt::If { .. }) => self.else_if_chain(next),
            Some(Stmt::Block(b)) => {
                self.line("} else {");
                self.indent += 1;
                for s in &b.stmts {
                    self.stmt(s);
                }
                self.indent -= 1;
                self.line("}");
            }
            Some(other) => {
                self.line("} else {");
                self.indent += 1;
                self.stmt(other);
                self.indent -= 1;
                self.line("}");
            }
        }
    }

    fn yul_stmt(&mut self, stmt: &YulStmt) {
        match stmt {
            YulStmt::Let { name, value } => {
                self.line(&format!("let {} := {}", name.name, yul_expr(value)));
            }
            YulStmt::Assign { target, value } => {
                let path: Vec<&str> = target.iter().map(|i| i.name.as_str()).collect();
                self.line(&format!("{} := {}", path.join("."), yul_expr(value)));
            }
            YulStmt::Expr(e) => self.line(&yul_expr(e)),
            YulStmt::If { cond, body } => {
                self.line(&format!("if {} {{", yul_expr(cond)));
                self.indent += 1;
                for s in &body.stmts {
                    self.yul_stmt(s);
                }
                self.indent -= 1;
                self.line("}");
            }
            YulStmt::Switch { expr, cases, default } => {
                self.line(&format!("switch {}", yul_expr(expr)));
                for (lit, body) in cases {
                    self.line(&format!("case {lit} {{"));
                    self.indent += 1;
                    for s in &body.stmts {
                        self.yul_stmt(s);
                    }
                    self.indent -= 1;
                    self.line("}");
                }
                if let Some(body) = default {
                    self.line("default {");
                    self.indent += 1;
                    for s in &body.stmts {
                        self.yul_stmt(s);
                    }
                    self.indent -= 1;
                    self.line("}");
                }
            }
        }
    }
}

fn param_list(params: &[Param]) -> String {
    params
        .iter()
        .map(|p| {
            let mut s = p.ty.display();
            match p.location {
                Some(DataLocation::Memory) => s.push_str(" memory"),
                Some(DataLocation::Storage) => s.push_str(" storage"),
                Some(DataLocation::Calldata) => s.push_str(" calldata"),
                None => {}
            }
            if let Some(name) = &p.name {
                s.push(' ');
                s.push_str(&name.name);
            }
            s
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Statement text without the trailing semicolon (for-header parts and
/// plain statements share this).
fn simple_stmt_text(stmt: &Stmt) -> String {
    match stmt {
        Stmt::VarDecl { ty, location, name, init } => {
            let mut s = ty.display();
            match location {
                Some(DataLocation::Memory) => s.push_str(" memory"),
                Some(DataLocation::Storage) => s.push_str(" storage"),
                Some(DataLocation::Calldata) => s.push_str(" calldata"),
                None => {}
            }
            s.push(' ');
            s.push_str(&name.name);
            if let Some(init) = init {
                s.push_str(" = ");
                s.push_str(&print_expr(init));
            }
            s
        }
        Stmt::Expr(e) => print_expr(e),
        Stmt::Assign { target, op, value } => {
            format!("{} {} {}", print_expr(target), op.symbol(), print_expr(value))
        }
        other => panic!("not a simple statement: {other:?}"),
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            other => out.push(other),
        }
    }
    out
}

fn yul_expr(expr: &YulExpr) -> String {
    match expr {
        YulExpr::Path(path) => path
            .iter()
            .map(|i| i.name.as_str())
            .collect::<Vec<_>>()
            .join("."),
        YulExpr::Literal(l) => l.clone(),
        YulExpr::Call { name, args } => {
            let list: Vec<String> = args.iter().map(yul_expr).collect();
            format!("{}({})", name.name, list.join(", "))
        }
    }
}

// Precedence bands: ternary 1, binary 2..=12, unary 13, postfix/primary 14.
fn expr_prec(expr: &Expr) -> u8 {
    match expr {
        Expr::Ternary { .. } => 1,
        Expr::Binary { op, .. } => op.precedence() + 2,
        Expr::Unary { prefix: true, .. } => 13,
        _ => 14,
    }
}

fn write_expr(out: &mut String, expr: &Expr, min_prec: u8) {
    let prec = expr_prec(expr);
    let needs_parens = prec < min_prec;
    if needs_parens {
        out.push('(');
    }
    match expr {
        Expr::Ident(i) => out.push_str(&i.name),
        Expr::Number { text, .. } => out.push_str(text),
        Expr::StringLit { value, .. } => {
            out.push('"');
            out.push_str(&escape(value));
            out.push('"');
        }
        Expr::BoolLit { value, .. } => out.push_str(if *value { "true" } else { "false" }),
        Expr::ElementaryTypeExpr { ty, .. } => out.push_str(&ty.canonical_name()),
        Expr::Member { base, member } => {
            write_expr(out, base, 14);
            out.push('.');
            out.push_str(&member.name);
        }
        Expr::Index { base, index } => {
            write_expr(out, base, 14);
            out.push('[');
            write_expr(out, index, 0);
            out.push(']');
        }
        Expr::Call { callee, args } => {
            write_expr(out, callee, 14);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
        Expr::New { ty, .. } => {
            out.push_str("new ");
            out.push_str(&ty.display());
        }
        Expr::Binary { op, lhs, rhs } => {
            let prec = op.precedence() + 2;
            // `**` is right-associative; everything else is left.
            let (lmin, rmin) = if *op == BinOp::Pow { (prec + 1, prec) } else { (prec, prec + 1) };
            write_expr(out, lhs, lmin);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(out, rhs, rmin);
        }
        Expr::Unary { op, expr, prefix } => {
            if *prefix {
                out.push_str(op.symbol());
                write_expr(out, expr, 14);
            } else {
                write_expr(out, expr, 14);
                out.push_str(op.symbol());
            }
        }
        Expr::Ternary { cond, if_true, if_false } => {
            write_expr(out, cond, 2);
            out.push_str(" ? ");
            write_expr(out, if_true, 2);
            out.push_str(" : ");
            write_expr(out, if_false, 1);
        }
        Expr::Tuple { elems, .. } => {
            out.push('(');
            for (i, e) in elems.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, e, 0);
            }
            out.push(')');
        }
    }
    if needs_parens {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, parse_source_file};

    fn round_trip(src: &str) {
        let unit = parse(src).unwrap();
        let printed = print_unit(&unit);
        let reparsed = parse(&printed).unwrap_or_else(|e| {
            panic!("printed source failed to parse: {e:?}\n---\n{printed}")
        });
        let a = serde_json::to_value(&unit).unwrap();
        let b = serde_json::to_value(&reparsed).unwrap();
        assert_eq!(a, b, "round trip mismatch:\n---\n{printed}");
    }

    #[test]
    fn round_trips_book_library() {
        round_trip(
            r#"
            pragma solidity ^0.8.19;
            contract BookLibrary {
                struct Book { string title; string author; uint256 id; }
                Book[] books;
                event BookAdded(uint256 indexed id, string title);
                function addBook(string memory title, string memory author) public {
                    books.push(Book(title, author, books.length));
                    emit BookAdded(books.length - 1, title);
                }
                function getBook(uint256 id) public view returns (string memory, string memory) {
                    require(id < books.length, "unknown book");
                    Book memory b = books[id];
                    return (b.title, b.author);
                }
            }
            "#,
        );
    }

    #[test]
    fn round_trips_control_flow() {
        round_trip(
            r#"
            contract Flow {
                uint256 total;
                enum Mode { Off, On }
                Mode mode;
                function f(uint256 n, bool flag) public returns (uint256) {
                    uint256 acc = 0;
                    for (uint256 i = 0; i < n; i++) {
                        if (i % 2 == 0) {
                            acc += i * 2;
                        } else if (i > 10) {
                            break;
                        } else {
                            continue;
                        }
                    }
                    while (acc > 100) {
                        acc -= 7;
                    }
                    total = flag ? acc : acc ** 2;
                    mode = Mode.On;
                    delete total;
                    return total;
                }
            }
            "#,
        );
    }

    #[test]
    fn precedence_is_preserved() {
        // (a + b) * c must keep its parentheses when printed.
        let src = r#"
            contract P {
                function f(uint256 a, uint256 b, uint256 c) public pure returns (uint256) {
                    return (a + b) * c - a / (b - c);
                }
            }
        "#;
        let unit = parse(src).unwrap();
        let printed = print_unit(&unit);
        assert!(printed.contains("(a + b) * c - a / (b - c)"), "{printed}");
        round_trip(src);
    }

    #[test]
    fn nested_unary_does_not_fuse_into_decrement() {
        let src = r#"
            contract N {
                function f(int256 x) public pure returns (int256) {
                    return -(-x);
                }
            }
        "#;
        let unit = parse(src).unwrap();
        let printed = print_unit(&unit);
        assert!(!printed.contains("--"), "{printed}");
        round_trip(src);
    }

    #[test]
    fn round_trips_generated_style_file() {
        let src = r#"
            pragma solidity ^0.8.19;
            library LibFooStorage {
                bytes32 internal constant POSITION = 0x1234;
                struct Layout { uint256 x; }
                function layout() internal pure returns (Layout storage s) {
                    bytes32 position = POSITION;
                    assembly {
                        s.slot := position
                    }
                }
            }
        "#;
        let file = parse_source_file(src).unwrap();
        let printed = print_file(&file);
        let reparsed = parse_source_file(&printed).unwrap_or_else(|e| {
            panic!("printed file failed to parse: {e:?}\n---\n{printed}")
        });
        assert_eq!(
            serde_json::to_value(&file).unwrap(),
            serde_json::to_value(&reparsed).unwrap(),
            "---\n{printed}"
        );
    }

    #[test]
    fn deterministic_output() {
        let src = "contract C { uint256 x; function f() public { x = 1; } }";
        let unit = parse(src).unwrap();
        assert_eq!(print_unit(&unit), print_unit(&unit));
    }
}
