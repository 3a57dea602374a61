//! Exercises the C ABI the way a foreign binding would: C strings in,
//! opaque handles out, explicit frees.

use seam_ffi::*;
use std::ffi::{CStr, CString};

const BOOKS: &str = r#"
    contract BookLibrary {
        struct Book { string title; string author; uint256 id; }
        Book[] books;
        function addBook(string memory title, string memory author) public {
            books.push(Book(title, author, books.length));
        }
        function getBook(uint256 id) public view returns (string memory) {
            require(id < books.length, "unknown book");
            return books[id].title;
        }
    }
"#;

fn cstring(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn result_json(result: *mut SeamResult) -> serde_json::Value {
    let ptr = seam_result_json(result);
    assert!(!ptr.is_null(), "expected a JSON payload");
    let text = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap();
    serde_json::from_str(text).unwrap()
}

#[test]
fn selector_through_the_c_abi() {
    let sig = cstring("transfer(address,uint256)");
    let mut out = [0u8; 4];
    let status = unsafe { seam_selector(sig.as_ptr(), out.as_mut_ptr()) };
    assert_eq!(status, SeamStatus::Ok);
    assert_eq!(out, [0xa9, 0x05, 0x9c, 0xbb]);

    let bad = cstring("f( )");
    let status = unsafe { seam_selector(bad.as_ptr(), out.as_mut_ptr()) };
    assert_eq!(status, SeamStatus::InvalidArgument);

    let status = unsafe { seam_selector(std::ptr::null(), out.as_mut_ptr()) };
    assert_eq!(status, SeamStatus::InvalidArgument);
}

#[test]
fn storage_slot_through_the_c_abi() {
    let ns = cstring("seam.storage.v1.BookFacet");
    let mut out = [0u8; 32];
    let status = unsafe { seam_diamond_storage_slot(ns.as_ptr(), out.as_mut_ptr()) };
    assert_eq!(status, SeamStatus::Ok);
    assert_eq!(
        format!("0x{}", hex_of(&out)),
        "0xd1d88974f70b8b0c881fc0dda88eecdc5d4aad9183b2af8fe29dc41806157d66"
    );

    let empty = cstring("");
    let status = unsafe { seam_diamond_storage_slot(empty.as_ptr(), out.as_mut_ptr()) };
    assert_eq!(status, SeamStatus::InvalidArgument);
}

fn hex_of(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn analyze_and_convert_round_trip() {
    let source = cstring(BOOKS);
    let result = unsafe { seam_analyze_source(source.as_ptr(), std::ptr::null()) };
    assert_eq!(seam_result_status(result), SeamStatus::Ok);
    let payload = result_json(result);
    assert_eq!(payload["contractName"], "BookLibrary");
    assert_eq!(payload["facets"][0]["name"], "AddBookFacet");
    assert!(payload["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .any(|d| d["code"] == "SLOT_ARRAY_OF_STRUCTS"));
    unsafe { seam_result_free(result) };

    let opts = cstring(r#"{"applyFixes": true, "version": 1}"#);
    let result = unsafe { seam_convert_source(source.as_ptr(), opts.as_ptr()) };
    assert_eq!(seam_result_status(result), SeamStatus::Ok);
    assert!(seam_result_error(result).is_null());
    let payload = result_json(result);
    let files = payload["files"].as_object().unwrap();
    assert!(files.contains_key("Diamond.sol"));
    assert!(files.contains_key("facets/AddBookFacet.sol"));
    assert!(files["libraries/LibAddBookFacetStorage.sol"]
        .as_str()
        .unwrap()
        .contains("mapping(uint256 => Book) books;"));
    assert_eq!(payload["manifest"]["contractName"], "BookLibrary");
    unsafe { seam_result_free(result) };
}

#[test]
fn convert_blocks_on_error_diagnostics() {
    let source = cstring(
        r#"
        contract C {
            uint256 a;
            uint256 b;
            function burn(uint256 x) public { a = x; }
            function collate_propagate_storage(bytes16 d) public { b = 1; }
        }
        "#,
    );
    let result = unsafe { seam_convert_source(source.as_ptr(), std::ptr::null()) };
    assert_eq!(seam_result_status(result), SeamStatus::AnalysisError);
    let err = unsafe { CStr::from_ptr(seam_result_error(result)) };
    assert!(err.to_str().unwrap().contains("error diagnostics"));
    // The payload still carries the diagnostics for display.
    let payload = result_json(result);
    assert!(payload["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .any(|d| d["code"] == "SEL_CLASH"));
    unsafe { seam_result_free(result) };
}

#[test]
fn parse_errors_surface_as_status() {
    let source = cstring("contract C is Base { }");
    let result = unsafe { seam_analyze_source(source.as_ptr(), std::ptr::null()) };
    assert_eq!(seam_result_status(result), SeamStatus::ParseError);
    let err = unsafe { CStr::from_ptr(seam_result_error(result)) };
    assert!(err.to_str().unwrap().contains("inheritance"));
    assert!(seam_result_json(result).is_null());
    unsafe { seam_result_free(result) };
}

#[test]
fn validate_upgrade_through_the_c_abi() {
    // Build two manifests via convert, then feed them back.
    let v1_src = cstring(BOOKS);
    let v1 = unsafe { seam_convert_source(v1_src.as_ptr(), std::ptr::null()) };
    assert_eq!(seam_result_status(v1), SeamStatus::Ok);
    let m1 = result_json(v1)["manifest"].clone();
    unsafe { seam_result_free(v1) };

    let v2_src = cstring(&BOOKS.replace(
        "struct Book { string title; string author; uint256 id; }",
        "struct Book { string title; string author; uint256 id; uint256 pages; }",
    ).replace(
        "Book(title, author, books.length)",
        "Book(title, author, books.length, 0)",
    ));
    let v2 = unsafe { seam_convert_source(v2_src.as_ptr(), std::ptr::null()) };
    assert_eq!(seam_result_status(v2), SeamStatus::Ok);
    let m2 = result_json(v2)["manifest"].clone();
    unsafe { seam_result_free(v2) };

    let old_json = cstring(&serde_json::to_string(&m1).unwrap());
    let new_json = cstring(&serde_json::to_string(&m2).unwrap());
    let result = unsafe { seam_validate_upgrade(old_json.as_ptr(), new_json.as_ptr()) };
    assert_eq!(seam_result_status(result), SeamStatus::AnalysisError);
    let report = result_json(result);
    assert_eq!(report["verdict"], "incompatible");
    unsafe { seam_result_free(result) };

    // Identical manifests are compatible.
    let result = unsafe { seam_validate_upgrade(old_json.as_ptr(), old_json.as_ptr()) };
    assert_eq!(seam_result_status(result), SeamStatus::Ok);
    unsafe { seam_result_free(result) };

    // Garbage manifests are a manifest error.
    let garbage = cstring("{\"not\": \"a manifest\"}");
    let result = unsafe { seam_validate_upgrade(garbage.as_ptr(), old_json.as_ptr()) };
    assert_eq!(seam_result_status(result), SeamStatus::ManifestError);
    unsafe { seam_result_free(result) };
}

#[test]
fn null_handles_are_tolerated() {
    assert_eq!(seam_result_status(std::ptr::null()), SeamStatus::InvalidArgument);
    assert!(seam_result_json(std::ptr::null()).is_null());
    assert!(seam_result_error(std::ptr::null()).is_null());
    unsafe { seam_result_free(std::ptr::null_mut()) };
    let version = unsafe { CStr::from_ptr(seam_version()) };
    assert!(!version.to_str().unwrap().is_empty());
}

#[test]
fn header_is_generated_with_the_full_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("seam.h");
    let text = std::fs::read_to_string(&header).expect("cbindgen header exists");
    for symbol in [
        "typedef enum SeamStatus",
        "typedef struct SeamResult SeamResult;",
        "seam_analyze_source",
        "seam_convert_source",
        "seam_validate_upgrade",
        "seam_result_status",
        "seam_result_json",
        "seam_result_error",
        "seam_result_free",
        "seam_selector",
        "seam_diamond_storage_slot",
        "seam_version",
    ] {
        assert!(text.contains(symbol), "header missing `{symbol}`");
    }
}
