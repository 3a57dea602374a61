//! Core library for converting single-file Solidity contracts into
//! EIP-2535 diamond systems, analyzing selector clashes and storage
//! collision risks, and managing the upgrade lifecycle.

pub mod cli;
pub mod codegen;
pub mod diagnostics;
pub mod facetizer;
pub mod frontend;
pub mod hash;
pub mod layout;
pub mod security;
pub mod span;
pub mod types;
pub mod upgrade;
