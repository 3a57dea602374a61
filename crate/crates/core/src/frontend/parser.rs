//! Recursive-descent parser for the Solidity subset.
//!
//! Two entry points:
//! - [`parse`] accepts user input and enforces the single-contract subset,
//!   rejecting out-of-subset constructs with `UNSUPPORTED_CONSTRUCT` so
//!   callers can distinguish "malformed" from "not supported".
//! - [`parse_source_file`] accepts the full file grammar (libraries,
//!   imports, file-level types, inline assembly) that generated bundles use.

use crate::diagnostics::{codes, Diagnostic};
use crate::frontend::ast::*;
use crate::frontend::lexer::{lex, Token, TokenKind};
use crate::span::{Ident, Span};

pub fn parse(source: &str) -> Result<SourceUnit, Diagnostic> {
    let file = parse_source_file(source)?;
    validate_user_subset(file)
}

pub fn parse_source_file(source: &str) -> Result<SourceFile, Diagnostic> {
    let tokens = lex(source)?;
    let mut parser = Parser { source, tokens, pos: 0 };
    parser.source_file()
}

fn validate_user_subset(file: SourceFile) -> Result<SourceUnit, Diagnostic> {
    if let Some(import) = file.imports.first() {
        return Err(unsupported("import", import.span));
    }
    let mut contracts = Vec::new();
    for item in file.items {
        match item {
            TopItem::Contract(c) if c.kind == ContractKind::Contract => contracts.push(c),
            TopItem::Contract(c) => {
                return Err(unsupported("library", c.span));
            }
            TopItem::Struct(s) => {
                return Err(unsupported("file-level type declaration", s.span));
            }
            TopItem::Enum(e) => {
                return Err(unsupported("file-level type declaration", e.span));
            }
        }
    }
    if contracts.is_empty() {
        return Err(Diagnostic::error(codes::SYNTAX_ERROR, "no contract declaration found"));
    }
    if contracts.len() > 1 {
        return Err(unsupported("multiple contracts", contracts[1].span));
    }
    let contract = contracts.into_iter().next().unwrap();
    if let Some(c) = contract.constants.first() {
        return Err(unsupported("constant state variable", c.span));
    }
    for f in &contract.functions {
        if f.is_fallback {
            return Err(unsupported("fallback function", f.span));
        }
        if let Some(span) = first_assembly_span(&f.body) {
            return Err(unsupported("inline assembly", span));
        }
    }
    Ok(SourceUnit { pragma: file.pragma, contract })
}

fn first_assembly_span(block: &Block) -> Option<Span> {
    for stmt in &block.stmts {
        let found = match stmt {
            Stmt::Assembly(y) => Some(y.span),
            Stmt::Block(b) => first_assembly_span(b),
            Stmt::If { then_branch, else_branch, .. } => {
                first_assembly_span(then_branch).or_else(|| {
                    else_branch.as_deref().and_then(|s| match s {
                        Stmt::Block(b) => first_assembly_span(b),
                        Stmt::If { .. } => {
                            let wrapped = Block {
                                stmts: vec![s.clone()],
                                span: Span::default(),
                            };
                            first_assembly_span(&wrapped)
                        }
                        _ => None,
                    })
                })
            }
            Stmt::While { body, .. } | Stmt::For { body, .. } => first_assembly_span(body),
            _ => None,
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

fn unsupported(construct: &str, span: Span) -> Diagnostic {
    Diagnostic::error(
        codes::UNSUPPORTED_CONSTRUCT,
        format!("unsupported construct: {construct}"),
    )
    .at(span)
}

const LOCATION_WORDS: &[&str] = &["memory", "storage", "calldata"];

struct Parser<'a> {
    source: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Token {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx]
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn at_word(&self, w: &str) -> bool {
        self.peek().is_word(w)
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_punct(p)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &'static str) -> Result<Token, Diagnostic> {
        if self.at_punct(p) {
            Ok(self.bump())
        } else {
            Err(self.err_expected(&format!("`{p}`")))
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<Token, Diagnostic> {
        if self.at_word(w) {
            Ok(self.bump())
        } else {
            Err(self.err_expected(&format!("`{w}`")))
        }
    }

    fn expect_ident(&mut self) -> Result<Ident, Diagnostic> {
        match &self.peek().kind {
            TokenKind::Word(w) if !is_reserved(w) => {
                let tok = self.bump();
                let TokenKind::Word(w) = tok.kind else { unreachable!() };
                Ok(Ident::new(w, tok.span))
            }
            _ => Err(self.err_expected("identifier")),
        }
    }

    fn err_expected(&self, what: &str) -> Diagnostic {
        let tok = self.peek();
        Diagnostic::error(
            codes::SYNTAX_ERROR,
            format!("expected {what}, found {}", tok.describe()),
        )
        .at(tok.span)
    }

    fn unsupported_here(&self, construct: &str) -> Diagnostic {
        unsupported(construct, self.peek().span)
    }

    // -----------------------------------------------------------------
    // File level
    // -----------------------------------------------------------------

    fn source_file(&mut self) -> Result<SourceFile, Diagnostic> {
        let mut pragma = None;
        let mut imports = Vec::new();
        let mut items = Vec::new();

        // SPDX comments are stripped by the lexer; pragma comes first.
        if self.at_word("pragma") {
            pragma = Some(self.pragma_directive()?);
        }
        while self.at_word("import") {
            let span = self.bump().span;
            let path = match &self.peek().kind {
                TokenKind::Str(_) => {
                    let tok = self.bump();
                    let TokenKind::Str(s) = tok.kind else { unreachable!() };
                    s
                }
                _ => return Err(self.unsupported_here("import with bindings")),
            };
            self.expect_punct(";")?;
            imports.push(ImportDirective { path, span });
        }
        loop {
            match &self.peek().kind {
                TokenKind::Eof => break,
                TokenKind::Word(w) => match w.as_str() {
                    "contract" => items.push(TopItem::Contract(self.contract(ContractKind::Contract)?)),
                    "library" => items.push(TopItem::Contract(self.contract(ContractKind::Library)?)),
                    "struct" => items.push(TopItem::Struct(self.struct_def()?)),
                    "enum" => items.push(TopItem::Enum(self.enum_def()?)),
                    "interface" => return Err(self.unsupported_here("interface")),
                    "abstract" => return Err(self.unsupported_here("abstract contract")),
                    "import" => return Err(self.unsupported_here("import after declarations")),
                    "pragma" => return Err(self.unsupported_here("multiple pragma directives")),
                    "function" => return Err(self.unsupported_here("file-level function")),
                    "using" => return Err(self.unsupported_here("using directive")),
                    "type" => return Err(self.unsupported_here("user-defined value type")),
                    _ => return Err(self.err_expected("a contract, library, struct or enum declaration")),
                },
                _ => return Err(self.err_expected("a top-level declaration")),
            }
        }
        Ok(SourceFile { pragma, imports, items })
    }

    fn pragma_directive(&mut self) -> Result<String, Diagnostic> {
        self.expect_word("pragma")?;
        self.expect_word("solidity")?;
        let start = self.peek().span.lo as usize;
        let mut end = start;
        while !self.at_punct(";") {
            if matches!(self.peek().kind, TokenKind::Eof) {
                return Err(self.err_expected("`;`"));
            }
            end = self.bump().span.hi as usize;
        }
        self.expect_punct(";")?;
        Ok(self.source[start..end].trim().to_string())
    }

    fn contract(&mut self, kind: ContractKind) -> Result<ContractDef, Diagnostic> {
        let start = self.bump().span; // contract | library
        let name = self.expect_ident()?;
        if self.at_word("is") {
            return Err(self.unsupported_here("inheritance"));
        }
        self.expect_punct("{")?;

        let mut def = ContractDef {
            kind,
            name,
            state_vars: Vec::new(),
            constants: Vec::new(),
            structs: Vec::new(),
            enums: Vec::new(),
            events: Vec::new(),
            functions: Vec::new(),
            span: start,
        };

        while !self.at_punct("}") {
            match &self.peek().kind {
                TokenKind::Eof => return Err(self.err_expected("`}`")),
                TokenKind::Word(w) => match w.as_str() {
                    "struct" => def.structs.push(self.struct_def()?),
                    "enum" => def.enums.push(self.enum_def()?),
                    "event" => def.events.push(self.event_def()?),
                    "function" | "constructor" | "fallback" => {
                        def.functions.push(self.function_def()?)
                    }
                    "receive" => return Err(self.unsupported_here("receive function")),
                    "modifier" => return Err(self.unsupported_here("modifier")),
                    "using" => return Err(self.unsupported_here("using directive")),
                    "error" => return Err(self.unsupported_here("custom error declaration")),
                    _ => self.state_var_or_constant(&mut def)?,
                },
                _ => return Err(self.err_expected("a contract member")),
            }
        }
        let close = self.expect_punct("}")?;
        def.span = start.to(close.span);
        Ok(def)
    }

    fn struct_def(&mut self) -> Result<StructDef, Diagnostic> {
        let start = self.expect_word("struct")?.span;
        let name = self.expect_ident()?;
        self.expect_punct("{")?;
        let mut members = Vec::new();
        while !self.at_punct("}") {
            let ty = self.type_name()?;
            let member_name = self.expect_ident()?;
            let semi = self.expect_punct(";")?;
            members.push(StructMember {
                span: member_name.span.to(semi.span),
                name: member_name,
                ty,
            });
        }
        let close = self.expect_punct("}")?;
        if members.is_empty() {
            return Err(Diagnostic::error(
                codes::SYNTAX_ERROR,
                format!("struct `{}` has no members", name.name),
            )
            .at(start.to(close.span)));
        }
        Ok(StructDef { name, members, span: start.to(close.span) })
    }

    fn enum_def(&mut self) -> Result<EnumDef, Diagnostic> {
        let start = self.expect_word("enum")?.span;
        let name = self.expect_ident()?;
        self.expect_punct("{")?;
        let mut variants = vec![self.expect_ident()?];
        while self.eat_punct(",") {
            variants.push(self.expect_ident()?);
        }
        let close = self.expect_punct("}")?;
        if variants.len() > 256 {
            return Err(Diagnostic::error(
                codes::SYNTAX_ERROR,
                format!("enum `{}` has more than 256 variants", name.name),
            )
            .at(start));
        }
        Ok(EnumDef { name, variants, span: start.to(close.span) })
    }

    fn event_def(&mut self) -> Result<EventDef, Diagnostic> {
        let start = self.expect_word("event")?.span;
        let name = self.expect_ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.at_punct(")") {
            loop {
                let ty = self.type_name()?;
                let indexed = self.eat_word("indexed");
                let pname = if matches!(&self.peek().kind, TokenKind::Word(w) if !is_reserved(w)) {
                    Some(self.expect_ident()?)
                } else {
                    None
                };
                params.push(EventParam { ty, indexed, name: pname });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        if self.eat_word("anonymous") {
            return Err(self.unsupported_here("anonymous event"));
        }
        let semi = self.expect_punct(";")?;
        Ok(EventDef { name, params, span: start.to(semi.span) })
    }

    fn state_var_or_constant(&mut self, def: &mut ContractDef) -> Result<(), Diagnostic> {
        let ty = self.type_name()?;
        let mut visibility = VarVisibility::Internal;
        let mut is_constant = false;
        loop {
            if self.at_word("public") {
                self.bump();
                visibility = VarVisibility::Public;
            } else if self.at_word("private") {
                self.bump();
                visibility = VarVisibility::Private;
            } else if self.at_word("internal") {
                self.bump();
                visibility = VarVisibility::Internal;
            } else if self.at_word("constant") {
                self.bump();
                is_constant = true;
            } else if self.at_word("immutable") {
                return Err(self.unsupported_here("immutable state variable"));
            } else {
                break;
            }
        }
        let name = self.expect_ident()?;
        if is_constant {
            self.expect_punct("=")?;
            let value = self.expr()?;
            let semi = self.expect_punct(";")?;
            def.constants.push(ConstDecl {
                span: name.span.to(semi.span),
                name,
                ty,
                value,
                annotation: None,
            });
            return Ok(());
        }
        if self.at_punct("=") {
            return Err(self.unsupported_here("state variable initializer"));
        }
        let semi = self.expect_punct(";")?;
        def.state_vars.push(VarDecl {
            span: name.span.to(semi.span),
            name,
            ty,
            visibility,
        });
        Ok(())
    }

    fn function_def(&mut self) -> Result<FuncDef, Diagnostic> {
        let intro = self.bump(); // function | constructor | fallback
        let TokenKind::Word(intro_word) = &intro.kind else { unreachable!() };
        let (name, is_constructor, is_fallback) = match intro_word.as_str() {
            "constructor" => (Ident::new("constructor", intro.span), true, false),
            "fallback" => (Ident::new("fallback", intro.span), false, true),
            _ => (self.expect_ident()?, false, false),
        };

        self.expect_punct("(")?;
        let params = self.param_list()?;
        self.expect_punct(")")?;

        let mut visibility: Option<Visibility> = None;
        let mut mutability = Mutability::Nonpayable;
        loop {
            let Some(word) = self.peek_word() else { break };
            match word.as_str() {
                "external" | "public" | "internal" | "private" => {
                    let v = match word.as_str() {
                        "external" => Visibility::External,
                        "public" => Visibility::Public,
                        "internal" => Visibility::Internal,
                        _ => Visibility::Private,
                    };
                    self.bump();
                    visibility = Some(v);
                }
                "pure" => {
                    self.bump();
                    mutability = Mutability::Pure;
                }
                "view" => {
                    self.bump();
                    mutability = Mutability::View;
                }
                "payable" => {
                    self.bump();
                    mutability = Mutability::Payable;
                }
                "virtual" => return Err(self.unsupported_here("virtual function")),
                "override" => return Err(self.unsupported_here("override")),
                "returns" => break,
                _ => return Err(self.unsupported_here(&format!("modifier `{word}`"))),
            }
        }

        let mut returns = Vec::new();
        if self.eat_word("returns") {
            self.expect_punct("(")?;
            returns = self.param_list()?;
            self.expect_punct(")")?;
            if returns.is_empty() {
                return Err(self.err_expected("a return type"));
            }
        }

        let visibility = match visibility {
            Some(v) => v,
            None if is_constructor => Visibility::Public,
            None => {
                return Err(Diagnostic::error(
                    codes::SYNTAX_ERROR,
                    format!("function `{}` has no visibility specifier", name.name),
                )
                .at(intro.span));
            }
        };
        if is_fallback && visibility != Visibility::External {
            return Err(Diagnostic::error(
                codes::SYNTAX_ERROR,
                "fallback function must be external",
            )
            .at(intro.span));
        }

        if self.at_punct(";") {
            return Err(self.unsupported_here("function without body"));
        }
        let body = self.block()?;
        let body_span = body.span;
        Ok(FuncDef {
            span: intro.span.to(body_span),
            name,
            is_constructor,
            is_fallback,
            params,
            returns,
            visibility,
            mutability,
            body,
            body_span,
            reads: Default::default(),
            writes: Default::default(),
            calls: Default::default(),
        })
    }

    fn peek_word(&self) -> Option<String> {
        match &self.peek().kind {
            TokenKind::Word(w) => Some(w.clone()),
            _ => None,
        }
    }

    fn param_list(&mut self) -> Result<Vec<Param>, Diagnostic> {
        let mut params = Vec::new();
        if self.at_punct(")") {
            return Ok(params);
        }
        loop {
            let ty = self.type_name()?;
            let span = self.peek().span;
            let mut location = None;
            if let Some(word) = self.peek_word() {
                if LOCATION_WORDS.contains(&word.as_str()) {
                    self.bump();
                    location = Some(match word.as_str() {
                        "memory" => DataLocation::Memory,
                        "storage" => DataLocation::Storage,
                        _ => DataLocation::Calldata,
                    });
                }
            }
            let name = if matches!(&self.peek().kind, TokenKind::Word(w) if !is_reserved(w)) {
                Some(self.expect_ident()?)
            } else {
                None
            };
            params.push(Param { ty, location, name, span });
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(params)
    }

    // -----------------------------------------------------------------
    // Types
    // -----------------------------------------------------------------

    fn type_name(&mut self) -> Result<TypeName, Diagnostic> {
        let base = self.base_type()?;
        self.type_suffixes(base)
    }

    fn base_type(&mut self) -> Result<TypeName, Diagnostic> {
        match &self.peek().kind {
            TokenKind::Word(w) => {
                if w == "mapping" {
                    self.bump();
                    self.expect_punct("(")?;
                    let key = self.type_name()?;
                    self.expect_punct("=>")?;
                    let value = self.type_name()?;
                    self.expect_punct(")")?;
                    if !matches!(
                        key,
                        TypeName::Elementary(_) | TypeName::User { .. }
                    ) {
                        return Err(Diagnostic::error(
                            codes::SYNTAX_ERROR,
                            "mapping keys must be elementary or enum types",
                        )
                        .at(self.peek().span));
                    }
                    return Ok(TypeName::Mapping {
                        key: Box::new(key),
                        value: Box::new(value),
                    });
                }
                if let Some(elem) = ElementaryType::from_keyword(w) {
                    self.bump();
                    return Ok(TypeName::Elementary(elem));
                }
                if is_reserved(w) {
                    return Err(self.err_expected("a type name"));
                }
                let mut path = vec![self.expect_ident()?];
                while self.at_punct(".") && matches!(&self.peek_at(1).kind, TokenKind::Word(_)) {
                    self.bump();
                    path.push(self.expect_ident()?);
                }
                Ok(TypeName::User { path })
            }
            _ => Err(self.err_expected("a type name")),
        }
    }

    fn type_suffixes(&mut self, mut ty: TypeName) -> Result<TypeName, Diagnostic> {
        while self.at_punct("[") {
            self.bump();
            if self.eat_punct("]") {
                ty = TypeName::Array { elem: Box::new(ty), len: None };
                continue;
            }
            let len_tok = self.bump();
            let TokenKind::Number(text) = &len_tok.kind else {
                return Err(Diagnostic::error(
                    codes::SYNTAX_ERROR,
                    "array length must be a literal number",
                )
                .at(len_tok.span));
            };
            let len: u64 = text.replace('_', "").parse().map_err(|_| {
                Diagnostic::error(codes::SYNTAX_ERROR, "array length out of range")
                    .at(len_tok.span)
            })?;
            if len == 0 {
                return Err(Diagnostic::error(
                    codes::SYNTAX_ERROR,
                    "array length must be positive",
                )
                .at(len_tok.span));
            }
            self.expect_punct("]")?;
            ty = TypeName::Array { elem: Box::new(ty), len: Some(len) };
        }
        Ok(ty)
    }

    // -----------------------------------------------------------------
    // Statements
    // -----------------------------------------------------------------

    fn block(&mut self) -> Result<Block, Diagnostic> {
        let open = self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.at_punct("}") {
            if matches!(self.peek().kind, TokenKind::Eof) {
                return Err(self.err_expected("`}`"));
            }
            stmts.push(self.stmt()?);
        }
        let close = self.expect_punct("}")?;
        Ok(Block { stmts, span: open.span.to(close.span) })
    }

    fn stmt_as_block(&mut self) -> Result<Block, Diagnostic> {
        if self.at_punct("{") {
            return self.block();
        }
        let stmt = self.stmt()?;
        let span = Span::default();
        Ok(Block { stmts: vec![stmt], span })
    }

    fn stmt(&mut self) -> Result<Stmt, Diagnostic> {
        if self.at_punct("{") {
            return Ok(Stmt::Block(self.block()?));
        }
        let Some(word) = self.peek_word() else {
            return self.expr_or_assign_stmt(true);
        };
        match word.as_str() {
            "if" => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let then_branch = self.stmt_as_block()?;
                let else_branch = if self.eat_word("else") {
                    if self.at_word("if") {
                        Some(Box::new(self.stmt()?))
                    } else {
                        Some(Box::new(Stmt::Block(self.stmt_as_block()?)))
                    }
                } else {
                    None
                };
                Ok(Stmt::If { cond, then_branch, else_branch })
            }
            "while" => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let body = self.stmt_as_block()?;
                Ok(Stmt::While { cond, body })
            }
            "for" => {
                self.bump();
                self.expect_punct("(")?;
                let init = if self.at_punct(";") {
                    None
                } else {
                    Some(Box::new(self.simple_stmt()?))
                };
                self.expect_punct(";")?;
                let cond = if self.at_punct(";") { None } else { Some(self.expr()?) };
                self.expect_punct(";")?;
                let update = if self.at_punct(")") {
                    None
                } else {
                    Some(Box::new(self.simple_stmt()?))
                };
                self.expect_punct(")")?;
                let body = self.stmt_as_block()?;
                Ok(Stmt::For { init, cond, update, body })
            }
            "return" => {
                self.bump();
                let values = if self.at_punct(";") {
                    Vec::new()
                } else {
                    match self.expr()? {
                        Expr::Tuple { elems, .. } => elems,
                        e => vec![e],
                    }
                };
                self.expect_punct(";")?;
                Ok(Stmt::Return { values })
            }
            "require" => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                let message = if self.eat_punct(",") {
                    match &self.peek().kind {
                        TokenKind::Str(_) => {
                            let tok = self.bump();
                            let TokenKind::Str(s) = tok.kind else { unreachable!() };
                            Some(s)
                        }
                        _ => return Err(self.err_expected("a string literal message")),
                    }
                } else {
                    None
                };
                self.expect_punct(")")?;
                self.expect_punct(";")?;
                Ok(Stmt::Require { cond, message })
            }
            "revert" => {
                self.bump();
                let message = if self.eat_punct("(") {
                    let msg = match &self.peek().kind {
                        TokenKind::Str(_) => {
                            let tok = self.bump();
                            let TokenKind::Str(s) = tok.kind else { unreachable!() };
                            Some(s)
                        }
                        _ => None,
                    };
                    self.expect_punct(")")?;
                    msg
                } else {
                    None
                };
                self.expect_punct(";")?;
                Ok(Stmt::Revert { message })
            }
            "emit" => {
                self.bump();
                let event = self.expect_ident()?;
                self.expect_punct("(")?;
                let mut args = Vec::new();
                if !self.at_punct(")") {
                    loop {
                        args.push(self.expr()?);
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
                self.expect_punct(")")?;
                self.expect_punct(";")?;
                Ok(Stmt::Emit { event, args })
            }
            "delete" => {
                self.bump();
                let target = self.expr()?;
                self.expect_punct(";")?;
                Ok(Stmt::Delete { target })
            }
            "break" => {
                self.bump();
                self.expect_punct(";")?;
                Ok(Stmt::Break)
            }
            "continue" => {
                self.bump();
                self.expect_punct(";")?;
                Ok(Stmt::Continue)
            }
            "assembly" => {
                self.bump();
                let block = self.yul_block()?;
                Ok(Stmt::Assembly(block))
            }
            "unchecked" => Err(self.unsupported_here("unchecked block")),
            "try" => Err(self.unsupported_here("try statement")),
            "do" => Err(self.unsupported_here("do-while loop")),
            "assert" => Err(self.unsupported_here("assert statement")),
            "selfdestruct" => Err(self.unsupported_here("selfdestruct")),
            _ => {
                let stmt = self.simple_stmt()?;
                self.expect_punct(";")?;
                Ok(stmt)
            }
        }
    }

    /// Variable declaration, assignment or expression, without the
    /// trailing semicolon (shared between statements and for-headers).
    fn simple_stmt(&mut self) -> Result<Stmt, Diagnostic> {
        if let Some(decl) = self.try_var_decl()? {
            return Ok(decl);
        }
        self.expr_or_assign(false)
    }

    fn expr_or_assign_stmt(&mut self, _consume_semi: bool) -> Result<Stmt, Diagnostic> {
        let stmt = self.expr_or_assign(false)?;
        self.expect_punct(";")?;
        Ok(stmt)
    }

    fn expr_or_assign(&mut self, _unused: bool) -> Result<Stmt, Diagnostic> {
        let target = self.expr()?;
        let assign_op = match &self.peek().kind {
            TokenKind::Punct(p) => match *p {
                "=" => Some(AssignOp::Assign),
                "+=" => Some(AssignOp::Add),
                "-=" => Some(AssignOp::Sub),
                "*=" => Some(AssignOp::Mul),
                "/=" => Some(AssignOp::Div),
                "%=" => Some(AssignOp::Mod),
                "&=" => Some(AssignOp::BitAnd),
                "|=" => Some(AssignOp::BitOr),
                "^=" => Some(AssignOp::BitXor),
                "<<=" => Some(AssignOp::Shl),
                ">>=" => Some(AssignOp::Shr),
                _ => None,
            },
            _ => None,
        };
        if let Some(op) = assign_op {
            self.bump();
            let value = self.expr()?;
            if matches!(target, Expr::Tuple { .. }) {
                return Err(self.unsupported_here("tuple assignment"));
            }
            return Ok(Stmt::Assign { target, op, value });
        }
        Ok(Stmt::Expr(target))
    }

    /// Attempt to parse `Type [location] name [= init]`; backtracks and
    /// returns `None` when the tokens are an expression instead.
    fn try_var_decl(&mut self) -> Result<Option<Stmt>, Diagnostic> {
        let snapshot = self.pos;
        let looks_like_type = match &self.peek().kind {
            TokenKind::Word(w) => {
                w == "mapping" || ElementaryType::from_keyword(w).is_some() || !is_reserved(w)
            }
            _ => false,
        };
        if !looks_like_type {
            return Ok(None);
        }
        let ty = match self.type_name() {
            Ok(ty) => ty,
            Err(_) => {
                self.pos = snapshot;
                return Ok(None);
            }
        };
        // A declaration continues with a data location or a plain name.
        let mut location = None;
        if let Some(word) = self.peek_word() {
            if LOCATION_WORDS.contains(&word.as_str()) {
                self.bump();
                location = Some(match word.as_str() {
                    "memory" => DataLocation::Memory,
                    "storage" => DataLocation::Storage,
                    _ => DataLocation::Calldata,
                });
            }
        }
        let is_name = matches!(&self.peek().kind, TokenKind::Word(w) if !is_reserved(w));
        if !is_name {
            if location.is_some() {
                return Err(self.err_expected("a variable name"));
            }
            self.pos = snapshot;
            return Ok(None);
        }
        let name = self.expect_ident()?;
        let init = if self.eat_punct("=") { Some(self.expr()?) } else { None };
        Ok(Some(Stmt::VarDecl { ty, location, name, init }))
    }

    // -----------------------------------------------------------------
    // Expressions
    // -----------------------------------------------------------------

    fn expr(&mut self) -> Result<Expr, Diagnostic> {
        let cond = self.binary_expr(0)?;
        if self.eat_punct("?") {
            let if_true = self.expr()?;
            self.expect_punct(":")?;
            let if_false = self.expr()?;
            return Ok(Expr::Ternary {
                cond: Box::new(cond),
                if_true: Box::new(if_true),
                if_false: Box::new(if_false),
            });
        }
        Ok(cond)
    }

    fn binary_expr(&mut self, min_prec: u8) -> Result<Expr, Diagnostic> {
        let mut lhs = self.unary_expr()?;
        loop {
            let Some(op) = self.peek_binop() else { break };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            // All subset binary operators are left-associative except `**`.
            let next_min = if op == BinOp::Pow { prec } else { prec + 1 };
            let rhs = self.binary_expr(next_min)?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        let TokenKind::Punct(p) = &self.peek().kind else { return None };
        Some(match *p {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Mod,
            "**" => BinOp::Pow,
            "<<" => BinOp::Shl,
            ">>" => BinOp::Shr,
            "&" => BinOp::BitAnd,
            "|" => BinOp::BitOr,
            "^" => BinOp::BitXor,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "&&" => BinOp::And,
            "||" => BinOp::Or,
            _ => return None,
        })
    }

    fn unary_expr(&mut self) -> Result<Expr, Diagnostic> {
        let op = match &self.peek().kind {
            TokenKind::Punct("!") => Some(UnOp::Not),
            TokenKind::Punct("-") => Some(UnOp::Neg),
            TokenKind::Punct("~") => Some(UnOp::BitNot),
            TokenKind::Punct("++") => Some(UnOp::Inc),
            TokenKind::Punct("--") => Some(UnOp::Dec),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let expr = self.unary_expr()?;
            return Ok(Expr::Unary { op, expr: Box::new(expr), prefix: true });
        }
        self.postfix_expr()
    }

    fn postfix_expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut expr = self.primary_expr()?;
        loop {
            if self.at_punct("(") {
                self.bump();
                let mut args = Vec::new();
                if !self.at_punct(")") {
                    loop {
                        args.push(self.expr()?);
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
                self.expect_punct(")")?;
                expr = Expr::Call { callee: Box::new(expr), args };
            } else if self.at_punct("[") {
                self.bump();
                let index = self.expr()?;
                self.expect_punct("]")?;
                expr = Expr::Index { base: Box::new(expr), index: Box::new(index) };
            } else if self.at_punct(".") && matches!(&self.peek_at(1).kind, TokenKind::Word(_)) {
                self.bump();
                let member_tok = self.bump();
                let TokenKind::Word(m) = member_tok.kind else { unreachable!() };
                expr = Expr::Member {
                    base: Box::new(expr),
                    member: Ident::new(m, member_tok.span),
                };
            } else if self.at_punct("++") {
                self.bump();
                expr = Expr::Unary { op: UnOp::Inc, expr: Box::new(expr), prefix: false };
            } else if self.at_punct("--") {
                self.bump();
                expr = Expr::Unary { op: UnOp::Dec, expr: Box::new(expr), prefix: false };
            } else {
                break;
            }
        }
        Ok(expr)
    }

    fn primary_expr(&mut self) -> Result<Expr, Diagnostic> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Number(text) => {
                self.bump();
                Ok(Expr::Number { text: text.clone(), span: tok.span })
            }
            TokenKind::Str(value) => {
                self.bump();
                Ok(Expr::StringLit { value: value.clone(), span: tok.span })
            }
            TokenKind::Punct("(") => {
                self.bump();
                let mut elems = vec![self.expr()?];
                while self.eat_punct(",") {
                    elems.push(self.expr()?);
                }
                self.expect_punct(")")?;
                if elems.len() == 1 {
                    Ok(elems.pop().unwrap())
                } else {
                    Ok(Expr::Tuple { elems, span: tok.span })
                }
            }
            TokenKind::Word(w) => match w.as_str() {
                "true" => {
                    self.bump();
                    Ok(Expr::BoolLit { value: true, span: tok.span })
                }
                "false" => {
                    self.bump();
                    Ok(Expr::BoolLit { value: false, span: tok.span })
                }
                "new" => {
                    self.bump();
                    let ty = self.type_name()?;
                    if !matches!(ty, TypeName::Array { len: None, .. }) {
                        return Err(self.unsupported_here("`new` on a non-array type"));
                    }
                    Ok(Expr::New { ty, span: tok.span })
                }
                _ => {
                    if let Some(elem) = ElementaryType::from_keyword(w) {
                        self.bump();
                        // Only meaningful as a conversion callee.
                        return Ok(Expr::ElementaryTypeExpr { ty: elem, span: tok.span });
                    }
                    if is_reserved(w) {
                        return Err(self.err_expected("an expression"));
                    }
                    let ident = self.expect_ident()?;
                    Ok(Expr::Ident(ident))
                }
            },
            _ => Err(self.err_expected("an expression")),
        }
    }

    // -----------------------------------------------------------------
    // Inline assembly (mini-Yul, generated code only)
    // -----------------------------------------------------------------

    fn yul_block(&mut self) -> Result<YulBlock, Diagnostic> {
        let open = self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.at_punct("}") {
            if matches!(self.peek().kind, TokenKind::Eof) {
                return Err(self.err_expected("`}`"));
            }
            stmts.push(self.yul_stmt()?);
        }
        let close = self.expect_punct("}")?;
        Ok(YulBlock { stmts, span: open.span.to(close.span) })
    }

    fn yul_stmt(&mut self) -> Result<YulStmt, Diagnostic> {
        if self.at_word("let") {
            self.bump();
            let name = self.expect_ident()?;
            self.expect_punct(":=")?;
            let value = self.yul_expr()?;
            return Ok(YulStmt::Let { name, value });
        }
        if self.at_word("if") {
            self.bump();
            let cond = self.yul_expr()?;
            let body = self.yul_block()?;
            return Ok(YulStmt::If { cond, body });
        }
        if self.at_word("switch") {
            self.bump();
            let expr = self.yul_expr()?;
            let mut cases = Vec::new();
            let mut default = None;
            loop {
                if self.eat_word("case") {
                    let lit = match &self.peek().kind {
                        TokenKind::Number(n) => {
                            let n = n.clone();
                            self.bump();
                            n
                        }
                        _ => return Err(self.err_expected("a literal switch case")),
                    };
                    cases.push((lit, self.yul_block()?));
                } else if self.eat_word("default") {
                    default = Some(self.yul_block()?);
                    break;
                } else {
                    break;
                }
            }
            if cases.is_empty() && default.is_none() {
                return Err(self.err_expected("`case` or `default`"));
            }
            return Ok(YulStmt::Switch { expr, cases, default });
        }
        // Assignment to a path, or a bare call.
        let expr = self.yul_expr()?;
        if self.at_punct(":=") {
            let YulExpr::Path(target) = expr else {
                return Err(self.err_expected("an assignable Yul path"));
            };
            self.bump();
            let value = self.yul_expr()?;
            return Ok(YulStmt::Assign { target, value });
        }
        Ok(YulStmt::Expr(expr))
    }

    fn yul_expr(&mut self) -> Result<YulExpr, Diagnostic> {
        match &self.peek().kind {
            TokenKind::Number(n) => {
                let n = n.clone();
                self.bump();
                Ok(YulExpr::Literal(n))
            }
            TokenKind::Word(w) => {
                let word = w.clone();
                let tok = self.bump();
                if self.at_punct("(") {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.at_punct(")") {
                        loop {
                            args.push(self.yul_expr()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(")")?;
                    return Ok(YulExpr::Call { name: Ident::new(word, tok.span), args });
                }
                let mut path = vec![Ident::new(word, tok.span)];
                while self.at_punct(".") {
                    self.bump();
                    let m = self.bump();
                    let TokenKind::Word(mw) = m.kind else {
                        return Err(self.err_expected("a Yul path segment"));
                    };
                    path.push(Ident::new(mw, m.span));
                }
                Ok(YulExpr::Path(path))
            }
            _ => Err(self.err_expected("a Yul expression")),
        }
    }
}

/// Words with grammatical meaning that can never be identifiers.
fn is_reserved(word: &str) -> bool {
    matches!(
        word,
        "contract"
            | "library"
            | "interface"
            | "abstract"
            | "struct"
            | "enum"
            | "event"
            | "function"
            | "constructor"
            | "fallback"
            | "receive"
            | "modifier"
            | "mapping"
            | "pragma"
            | "import"
            | "using"
            | "is"
            | "if"
            | "else"
            | "while"
            | "for"
            | "return"
            | "returns"
            | "require"
            | "revert"
            | "emit"
            | "delete"
            | "break"
            | "continue"
            | "assembly"
            | "new"
            | "true"
            | "false"
            | "public"
            | "private"
            | "internal"
            | "external"
            | "pure"
            | "view"
            | "payable"
            | "constant"
            | "immutable"
            | "memory"
            | "storage"
            | "calldata"
            | "indexed"
            | "anonymous"
            | "virtual"
            | "override"
            | "unchecked"
            | "try"
            | "catch"
            | "do"
            | "assert"
            | "selfdestruct"
            | "type"
            | "error"
    )
}
