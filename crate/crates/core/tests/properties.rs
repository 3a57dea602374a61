//! Property tests for the spec-level invariants: layout non-overlap and
//! monotonicity, print/parse round-trip stability, effect-analysis
//! soundness against a token-scan oracle, and clash-detection
//! completeness against brute-force pairwise comparison.

mod common;

use common::random_contract;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seam_core::codegen::print_unit;
use seam_core::frontend::ast::{ElementaryType, TypeName, VarDecl, VarVisibility};
use seam_core::frontend::lexer::{lex, TokenKind};
use seam_core::frontend::{parse, resolve};
use seam_core::layout::compute_layout;
use seam_core::security::compute_selector;
use seam_core::span::{Ident, Span};
use seam_core::types::TypeTable;

// ---------------------------------------------------------------------
// Layout properties
// ---------------------------------------------------------------------

/// Two predefined structs available to generated layouts.
const STRUCT_HEADER: &str = r#"
    contract Header {
        struct S1 { uint128 a; uint128 b; }
        struct S2 { string s; S1 p; uint64 n; }
    }
"#;

fn struct_table() -> TypeTable {
    let unit = parse(STRUCT_HEADER).unwrap();
    TypeTable::from_contract(&unit.contract).unwrap()
}

fn elementary_strategy() -> impl Strategy<Value = TypeName> {
    prop_oneof![
        Just(TypeName::Elementary(ElementaryType::Bool)),
        Just(TypeName::Elementary(ElementaryType::Address)),
        (1u16..=32).prop_map(|n| TypeName::Elementary(ElementaryType::Uint(n * 8))),
        (1u16..=32).prop_map(|n| TypeName::Elementary(ElementaryType::Int(n * 8))),
        (1u8..=32).prop_map(|n| TypeName::Elementary(ElementaryType::FixedBytes(n))),
        Just(TypeName::Elementary(ElementaryType::String)),
        Just(TypeName::Elementary(ElementaryType::Bytes)),
    ]
}

fn type_strategy() -> impl Strategy<Value = TypeName> {
    let leaf = prop_oneof![
        elementary_strategy(),
        Just(TypeName::user("S1")),
        Just(TypeName::user("S2")),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            (inner.clone(), 1u64..=4).prop_map(|(elem, len)| TypeName::Array {
                elem: Box::new(elem),
                len: Some(len),
            }),
            inner.clone().prop_map(|elem| TypeName::Array { elem: Box::new(elem), len: None }),
            inner.prop_map(|value| TypeName::Mapping {
                key: Box::new(TypeName::Elementary(ElementaryType::Uint(256))),
                value: Box::new(value),
            }),
        ]
    })
}

fn var_decls(types: Vec<TypeName>) -> Vec<VarDecl> {
    types
        .into_iter()
        .enumerate()
        .map(|(i, ty)| VarDecl {
            name: Ident::synthetic(format!("v{i}")),
            ty,
            visibility: VarVisibility::Internal,
            span: Span::default(),
        })
        .collect()
}

/// Byte-interval view of an entry for overlap checks.
fn intervals(layout: &seam_core::layout::StorageLayout) -> Vec<(u64, u64, String)> {
    layout
        .entries
        .iter()
        .map(|e| {
            let size = layout.entry_packed_size(e);
            if size < 32 || (e.num_slots == 1 && e.offset == 0 && size == 32) {
                let start = e.slot * 32 + e.offset as u64;
                (start, start + size, e.label.clone())
            } else {
                (e.slot * 32, (e.slot + e.num_slots) * 32, e.label.clone())
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn layout_entries_never_overlap_or_straddle(types in proptest::collection::vec(type_strategy(), 1..10)) {
        let table = struct_table();
        let vars = var_decls(types);
        let layout = compute_layout(&vars, &table).unwrap();

        // No straddling: packed entries stay inside one slot.
        for e in &layout.entries {
            let size = layout.entry_packed_size(e);
            if size < 32 {
                prop_assert!(e.offset as u64 + size <= 32, "{} straddles a slot", e.label);
            } else {
                prop_assert_eq!(e.offset, 0, "whole-slot entry {} not aligned", &e.label);
            }
        }

        // Pairwise disjoint byte ranges.
        let mut ranges = intervals(&layout);
        ranges.sort();
        for pair in ranges.windows(2) {
            prop_assert!(
                pair[0].1 <= pair[1].0,
                "{} [{}, {}) overlaps {} [{}, {})",
                pair[0].2, pair[0].0, pair[0].1, pair[1].2, pair[1].0, pair[1].1
            );
        }

        // Entries are ordered by position.
        let positions: Vec<(u64, u8)> = layout.entries.iter().map(|e| (e.slot, e.offset)).collect();
        let mut sorted = positions.clone();
        sorted.sort();
        prop_assert_eq!(positions, sorted);
    }

    #[test]
    fn layout_is_append_monotonic(
        types in proptest::collection::vec(type_strategy(), 1..8),
        extra in type_strategy(),
    ) {
        let table = struct_table();
        let base_vars = var_decls(types.clone());
        let mut extended_types = types;
        extended_types.push(extra);
        let extended_vars = var_decls(extended_types);

        let base = compute_layout(&base_vars, &table).unwrap();
        let extended = compute_layout(&extended_vars, &table).unwrap();
        prop_assert_eq!(&extended.entries[..base.entries.len()], &base.entries[..]);
    }
}

// ---------------------------------------------------------------------
// Round-trip stability over generated contracts and the corpus
// ---------------------------------------------------------------------

#[test]
fn print_parse_round_trip_on_random_contracts() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0707);
    for case in 0..300 {
        let source = random_contract(&mut rng);
        let unit = parse(&source).unwrap();
        let printed = print_unit(&unit);
        let reparsed = parse(&printed)
            .unwrap_or_else(|e| panic!("case {case}: reprint failed to parse: {e:?}\n{printed}"));
        assert_eq!(
            serde_json::to_value(&unit).unwrap(),
            serde_json::to_value(&reparsed).unwrap(),
            "case {case}: round trip not stable\n{printed}"
        );
        // Printing is a fixpoint after one round.
        assert_eq!(printed, print_unit(&reparsed), "case {case}");
    }
}

#[test]
fn print_parse_round_trip_on_corpus() {
    for source in [
        include_str!("corpus/layout/01_packing.sol"),
        include_str!("corpus/layout/02_small_values.sol"),
        include_str!("corpus/layout/03_dynamic_heads.sol"),
        include_str!("corpus/layout/04_struct_inline.sol"),
        include_str!("corpus/layout/05_book.sol"),
        include_str!("corpus/layout/06_fixed_arrays.sol"),
        include_str!("corpus/layout/07_nested_struct.sol"),
        include_str!("corpus/layout/08_mappings.sol"),
        include_str!("corpus/layout/09_enums.sol"),
        include_str!("corpus/layout/10_bytes_fixed.sol"),
        include_str!("corpus/layout/11_array_of_structs.sol"),
        include_str!("corpus/layout/12_mixed_tail.sol"),
    ] {
        let unit = parse(source).unwrap();
        let printed = print_unit(&unit);
        let reparsed = parse(&printed).unwrap();
        assert_eq!(
            serde_json::to_value(&unit).unwrap(),
            serde_json::to_value(&reparsed).unwrap(),
            "corpus round trip failed:\n{printed}"
        );
    }
}

// ---------------------------------------------------------------------
// Effect soundness: token-scan oracle
// ---------------------------------------------------------------------

/// Brute-force oracle: lex the function body and collect every
/// identifier token (not preceded by `.`) that names a state variable.
/// Soundness requires each to appear in reads or writes.
#[test]
fn effect_analysis_is_sound_against_token_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xeff);
    let mut scanned = 0usize;
    for _ in 0..300 {
        let source = random_contract(&mut rng);
        let unit = resolve(parse(&source).unwrap()).unwrap();
        let state_vars: Vec<&str> = unit
            .contract
            .state_vars
            .iter()
            .map(|v| v.name.name.as_str())
            .collect();
        for f in &unit.contract.functions {
            let body_text = f.body_span.slice(&source);
            let tokens = lex(body_text).unwrap();
            let mut prev_was_dot = false;
            for token in &tokens {
                if let TokenKind::Word(w) = &token.kind {
                    if !prev_was_dot && state_vars.contains(&w.as_str()) {
                        // Locals shadowing state never occur in the
                        // generator's naming scheme.
                        assert!(
                            f.reads.contains(w) || f.writes.contains(w),
                            "state var `{w}` appears in `{}` but not in reads/writes\n{source}",
                            f.name.name
                        );
                        scanned += 1;
                    }
                }
                prev_was_dot = matches!(&token.kind, TokenKind::Punct("."));
            }
        }
    }
    assert!(scanned > 500, "oracle exercised too few references: {scanned}");
}

// ---------------------------------------------------------------------
// Clash completeness: brute force over signature sets
// ---------------------------------------------------------------------

#[test]
fn clash_detection_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc1a5);
    use rand::Rng;
    for case in 0..200 {
        // Random signature pool; sometimes inject the known colliding
        // pair so both branches are exercised.
        let n = rng.gen_range(2..20);
        let mut signatures: Vec<String> = (0..n)
            .map(|i| format!("fn{}_{i}(uint{})", rng.gen_range(0..1000u32), 8 * rng.gen_range(1..=32u32)))
            .collect();
        if rng.gen_bool(0.3) {
            signatures.push("burn(uint256)".to_string());
            signatures.push("collate_propagate_storage(bytes16)".to_string());
        }

        let selectors: Vec<[u8; 4]> = signatures
            .iter()
            .map(|s| compute_selector(s).unwrap())
            .collect();

        // Brute force: any pair with equal selectors?
        let mut brute_force_clash = false;
        for i in 0..selectors.len() {
            for j in i + 1..selectors.len() {
                if selectors[i] == selectors[j] {
                    brute_force_clash = true;
                }
            }
        }

        // Detector view: group by selector.
        let mut table = seam_core::security::SelectorTable::default();
        for (sig, sel) in signatures.iter().zip(&selectors) {
            table.insert(
                *sel,
                seam_core::security::SelectorEntry {
                    signature: sig.clone(),
                    facet: "F".to_string(),
                    origin: seam_core::security::SelectorOrigin::UserFacet,
                },
            );
        }
        assert_eq!(
            !table.is_clash_free(),
            brute_force_clash,
            "case {case}: detector disagrees with brute force"
        );
    }
}
