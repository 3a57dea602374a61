//! Syntax tree for the supported Solidity subset.
//!
//! The tree is purely syntactic apart from the `reads`/`writes`/`calls`
//! sets on [`FuncDef`], which the resolver fills in. Spans are excluded
//! from serialization so two parses of equivalent text compare equal
//! structurally via their serialized form.

use crate::span::{Ident, Span};
use serde::Serialize;
use std::collections::BTreeSet;

/// A whole parsed file: pragma, imports and top-level items.
///
/// User input is restricted to a single contract (see
/// [`SourceUnit`]); generated bundles use the full file shape.
#[derive(Debug, Clone, Serialize)]
pub struct SourceFile {
    pub pragma: Option<String>,
    pub imports: Vec<ImportDirective>,
    pub items: Vec<TopItem>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImportDirective {
    pub path: String,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, Serialize)]
pub enum TopItem {
    Contract(ContractDef),
    Struct(StructDef),
    Enum(EnumDef),
}

/// The validated single-contract view of a parsed file.
#[derive(Debug, Clone, Serialize)]
pub struct SourceUnit {
    pub pragma: Option<String>,
    pub contract: ContractDef,
}

impl SourceUnit {
    pub fn name(&self) -> &str {
        &self.contract.name.name
    }

    /// External and public functions in declaration order, constructors
    /// included (they surface as `initialize` after facetization).
    pub fn externally_callable(&self) -> impl Iterator<Item = &FuncDef> {
        self.contract.functions.iter().filter(|f| {
            f.is_constructor
                || matches!(f.visibility, Visibility::External | Visibility::Public)
        })
    }

    pub fn find_function(&self, name: &str) -> Option<&FuncDef> {
        self.contract.functions.iter().find(|f| f.name.name == name)
    }

    pub fn find_state_var(&self, name: &str) -> Option<&VarDecl> {
        self.contract.state_vars.iter().find(|v| v.name.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ContractKind {
    Contract,
    Library,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractDef {
    pub kind: ContractKind,
    pub name: Ident,
    pub state_vars: Vec<VarDecl>,
    pub constants: Vec<ConstDecl>,
    pub structs: Vec<StructDef>,
    pub enums: Vec<EnumDef>,
    pub events: Vec<EventDef>,
    pub functions: Vec<FuncDef>,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarVisibility {
    Internal,
    Public,
    Private,
}

#[derive(Debug, Clone, Serialize)]
pub struct VarDecl {
    pub name: Ident,
    pub ty: TypeName,
    pub visibility: VarVisibility,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstDecl {
    pub name: Ident,
    pub ty: TypeName,
    pub value: Expr,
    /// Trailing annotation comment, e.g. the namespace string behind a
    /// storage position constant.
    pub annotation: Option<String>,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructDef {
    pub name: Ident,
    pub members: Vec<StructMember>,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructMember {
    pub name: Ident,
    pub ty: TypeName,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumDef {
    pub name: Ident,
    pub variants: Vec<Ident>,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, Serialize)]
pub struct EventDef {
    pub name: Ident,
    pub params: Vec<EventParam>,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, Serialize)]
pub struct EventParam {
    pub ty: TypeName,
    pub indexed: bool,
    pub name: Option<Ident>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    External,
    Public,
    Internal,
    Private,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mutability {
    Pure,
    View,
    Payable,
    Nonpayable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DataLocation {
    Memory,
    Storage,
    Calldata,
}

#[derive(Debug, Clone, Serialize)]
pub struct Param {
    pub ty: TypeName,
    pub location: Option<DataLocation>,
    pub name: Option<Ident>,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuncDef {
    pub name: Ident,
    pub is_constructor: bool,
    /// Catch-all entry point; only valid in generated code.
    pub is_fallback: bool,
    pub params: Vec<Param>,
    pub returns: Vec<Param>,
    pub visibility: Visibility,
    pub mutability: Mutability,
    pub body: Block,
    #[serde(skip)]
    pub span: Span,
    #[serde(skip)]
    pub body_span: Span,
    /// State variables read, populated by the resolver.
    pub reads: BTreeSet<String>,
    /// State variables written or mutated, populated by the resolver.
    pub writes: BTreeSet<String>,
    /// Contract functions invoked directly, populated by the resolver.
    pub calls: BTreeSet<String>,
}

impl FuncDef {
    pub fn is_internal(&self) -> bool {
        matches!(self.visibility, Visibility::Internal | Visibility::Private)
    }
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ElementaryType {
    Bool,
    Address,
    /// Bit width, a multiple of 8 in 8..=256.
    Uint(u16),
    Int(u16),
    /// Byte width in 1..=32.
    FixedBytes(u8),
    String,
    Bytes,
}

impl ElementaryType {
    /// The canonical name used in signatures and layouts.
    pub fn canonical_name(&self) -> String {
        match self {
            ElementaryType::Bool => "bool".to_string(),
            ElementaryType::Address => "address".to_string(),
            ElementaryType::Uint(bits) => format!("uint{bits}"),
            ElementaryType::Int(bits) => format!("int{bits}"),
            ElementaryType::FixedBytes(n) => format!("bytes{n}"),
            ElementaryType::String => "string".to_string(),
            ElementaryType::Bytes => "bytes".to_string(),
        }
    }

    /// Parse a type keyword, normalizing the `uint`/`int`/`byte` aliases.
    pub fn from_keyword(word: &str) -> Option<ElementaryType> {
        match word {
            "bool" => return Some(ElementaryType::Bool),
            "address" => return Some(ElementaryType::Address),
            "string" => return Some(ElementaryType::String),
            "bytes" => return Some(ElementaryType::Bytes),
            "uint" => return Some(ElementaryType::Uint(256)),
            "int" => return Some(ElementaryType::Int(256)),
            "byte" => return Some(ElementaryType::FixedBytes(1)),
            _ => {}
        }
        if let Some(rest) = word.strip_prefix("uint") {
            let bits: u16 = rest.parse().ok()?;
            if bits >= 8 && bits <= 256 && bits % 8 == 0 {
                return Some(ElementaryType::Uint(bits));
            }
            return None;
        }
        if let Some(rest) = word.strip_prefix("int") {
            let bits: u16 = rest.parse().ok()?;
            if bits >= 8 && bits <= 256 && bits % 8 == 0 {
                return Some(ElementaryType::Int(bits));
            }
            return None;
        }
        if let Some(rest) = word.strip_prefix("bytes") {
            let n: u8 = rest.parse().ok()?;
            if n >= 1 && n <= 32 {
                return Some(ElementaryType::FixedBytes(n));
            }
            return None;
        }
        None
    }
}

#[derive(Debug, Clone, Serialize)]
pub enum TypeName {
    Elementary(ElementaryType),
    Array {
        elem: Box<TypeName>,
        /// `None` for dynamic arrays.
        len: Option<u64>,
    },
    Mapping {
        key: Box<TypeName>,
        value: Box<TypeName>,
    },
    /// `Book` or a qualified path like `LibFoo.Layout`.
    User { path: Vec<Ident> },
}

impl TypeName {
    pub fn user(name: impl Into<String>) -> TypeName {
        TypeName::User { path: vec![Ident::synthetic(name)] }
    }

    pub fn span(&self) -> Span {
        match self {
            TypeName::User { path } => path
                .first()
                .map(|i| i.span)
                .unwrap_or_default(),
            _ => Span::default(),
        }
    }

    /// Source-level rendering, e.g. `mapping(uint256 => Book)`.
    pub fn display(&self) -> String {
        match self {
            TypeName::Elementary(e) => e.canonical_name(),
            TypeName::Array { elem, len: Some(n) } => format!("{}[{n}]", elem.display()),
            TypeName::Array { elem, len: None } => format!("{}[]", elem.display()),
            TypeName::Mapping { key, value } => {
                format!("mapping({} => {})", key.display(), value.display())
            }
            TypeName::User { path } => path
                .iter()
                .map(|i| i.name.as_str())
                .collect::<Vec<_>>()
                .join("."),
        }
    }
}

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AssignOp {
    Assign,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
}

impl AssignOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            AssignOp::Assign => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
            AssignOp::Mul => "*=",
            AssignOp::Div => "/=",
            AssignOp::Mod => "%=",
            AssignOp::BitAnd => "&=",
            AssignOp::BitOr => "|=",
            AssignOp::BitXor => "^=",
            AssignOp::Shl => "<<=",
            AssignOp::Shr => ">>=",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub enum Stmt {
    Block(Block),
    VarDecl {
        ty: TypeName,
        location: Option<DataLocation>,
        name: Ident,
        init: Option<Expr>,
    },
    Expr(Expr),
    Assign {
        target: Expr,
        op: AssignOp,
        value: Expr,
    },
    If {
        cond: Expr,
        then_branch: Block,
        else_branch: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Block,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        update: Option<Box<Stmt>>,
        body: Block,
    },
    Return {
        values: Vec<Expr>,
    },
    Require {
        cond: Expr,
        message: Option<String>,
    },
    Revert {
        message: Option<String>,
    },
    Emit {
        event: Ident,
        args: Vec<Expr>,
    },
    Delete {
        target: Expr,
    },
    Break,
    Continue,
    Assembly(YulBlock),
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
    Shl,
    Shr,
    BitAnd,
    BitOr,
    BitXor,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Pow => "**",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::BitAnd => "&",
            BinOp::BitOr => "|",
            BinOp::BitXor => "^",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding power; higher binds tighter. Mirrors the Solidity grammar.
    pub fn precedence(&self) -> u8 {
        match self {
            BinOp::Pow => 10,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 9,
            BinOp::Add | BinOp::Sub => 8,
            BinOp::Shl | BinOp::Shr => 7,
            BinOp::BitAnd => 6,
            BinOp::BitXor => 5,
            BinOp::BitOr => 4,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Eq | BinOp::Ne => 2,
            BinOp::And => 1,
            BinOp::Or => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UnOp {
    Not,
    Neg,
    BitNot,
    Inc,
    Dec,
}

impl UnOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            UnOp::Not => "!",
            UnOp::Neg => "-",
            UnOp::BitNot => "~",
            UnOp::Inc => "++",
            UnOp::Dec => "--",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub enum Expr {
    Ident(Ident),
    Number {
        text: String,
        #[serde(skip)]
        span: Span,
    },
    StringLit {
        value: String,
        #[serde(skip)]
        span: Span,
    },
    BoolLit {
        value: bool,
        #[serde(skip)]
        span: Span,
    },
    /// A bare elementary type used as a conversion callee: `address(0)`.
    ElementaryTypeExpr {
        ty: ElementaryType,
        #[serde(skip)]
        span: Span,
    },
    Member {
        base: Box<Expr>,
        member: Ident,
    },
    Index {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    Call {
        callee: Box<Expr>,
        args: Vec<Expr>,
    },
    /// `new T[](len)` appears as `Call { callee: New, args: [len] }`.
    New {
        ty: TypeName,
        #[serde(skip)]
        span: Span,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary {
        op: UnOp,
        expr: Box<Expr>,
        prefix: bool,
    },
    Ternary {
        cond: Box<Expr>,
        if_true: Box<Expr>,
        if_false: Box<Expr>,
    },
    Tuple {
        elems: Vec<Expr>,
        #[serde(skip)]
        span: Span,
    },
}

impl Expr {
    pub fn ident(name: impl Into<String>) -> Expr {
        Expr::Ident(Ident::synthetic(name))
    }

    pub fn number(text: impl Into<String>) -> Expr {
        Expr::Number { text: text.into(), span: Span::default() }
    }

    pub fn member(base: Expr, member: impl Into<String>) -> Expr {
        Expr::Member { base: Box::new(base), member: Ident::synthetic(member) }
    }

    pub fn index(base: Expr, index: Expr) -> Expr {
        Expr::Index { base: Box::new(base), index: Box::new(index) }
    }

    pub fn call(callee: Expr, args: Vec<Expr>) -> Expr {
        Expr::Call { callee: Box::new(callee), args }
    }

    pub fn span(&self) -> Span {
        match self {
            Expr::Ident(i) => i.span,
            Expr::Number { span, .. }
            | Expr::StringLit { span, .. }
            | Expr::BoolLit { span, .. }
            | Expr::ElementaryTypeExpr { span, .. }
            | Expr::New { span, .. }
            | Expr::Tuple { span, .. } => *span,
            Expr::Member { base, member } => base.span().to(member.span),
            Expr::Index { base, .. } => base.span(),
            Expr::Call { callee, .. } => callee.span(),
            Expr::Binary { lhs, .. } => lhs.span(),
            Expr::Unary { expr, .. } => expr.span(),
            Expr::Ternary { cond, .. } => cond.span(),
        }
    }

    /// The leftmost identifier of a member/index chain, if any.
    /// `books[i].title` resolves to `books`.
    pub fn root_ident(&self) -> Option<&Ident> {
        match self {
            Expr::Ident(i) => Some(i),
            Expr::Member { base, .. } => base.root_ident(),
            Expr::Index { base, .. } => base.root_ident(),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Inline assembly (generated code only)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct YulBlock {
    pub stmts: Vec<YulStmt>,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, Serialize)]
pub enum YulStmt {
    Let { name: Ident, value: YulExpr },
    Assign { target: Vec<Ident>, value: YulExpr },
    Expr(YulExpr),
    If { cond: YulExpr, body: YulBlock },
    Switch {
        expr: YulExpr,
        cases: Vec<(String, YulBlock)>,
        default: Option<YulBlock>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub enum YulExpr {
    /// `x` or a suffixed path like `s.slot`.
    Path(Vec<Ident>),
    Literal(String),
    Call { name: Ident, args: Vec<YulExpr> },
}
