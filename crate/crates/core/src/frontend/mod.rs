//! Lexing, parsing and resolution for the Solidity subset.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod resolver;

pub use ast::{SourceFile, SourceUnit};
pub use parser::{parse, parse_source_file};
pub use resolver::{resolve, resolve_bundle};
