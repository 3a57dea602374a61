//! C ABI over the core pipeline so other languages can bind.
//!
//! The surface follows the opaque-handle pattern: operations return a
//! `SeamResult*` owning a status code, a JSON payload and an error
//! message; accessors borrow from the handle and `seam_result_free`
//! releases it. All functions are panic-safe and tolerate NULL inputs.

use seam_core::facetizer::{build_access_graph, partition_facets, FacetizerConfig};
use seam_core::frontend::{parse, resolve};
use seam_core::{codegen, diagnostics, layout, security, upgrade};
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeamStatus {
    Ok = 0,
    /// A pointer was NULL or a string was not valid UTF-8.
    InvalidArgument = 1,
    /// The source failed to parse or resolve.
    ParseError = 2,
    /// The pipeline ran but produced error diagnostics.
    AnalysisError = 3,
    /// Manifest input failed schema validation.
    ManifestError = 4,
    /// Unexpected internal failure.
    InternalError = 5,
}

/// Opaque result handle. Query with the `seam_result_*` accessors and
/// release with `seam_result_free`.
pub struct SeamResult {
    status: SeamStatus,
    json: Option<CString>,
    error: Option<CString>,
}

impl SeamResult {
    fn ok(json: String) -> *mut SeamResult {
        Box::into_raw(Box::new(SeamResult {
            status: SeamStatus::Ok,
            json: CString::new(json).ok(),
            error: None,
        }))
    }

    fn fail(status: SeamStatus, message: String) -> *mut SeamResult {
        Box::into_raw(Box::new(SeamResult {
            status,
            json: None,
            error: CString::new(message.replace('\0', " ")).ok(),
        }))
    }

    fn fail_with_json(status: SeamStatus, message: String, json: String) -> *mut SeamResult {
        Box::into_raw(Box::new(SeamResult {
            status,
            json: CString::new(json).ok(),
            error: CString::new(message.replace('\0', " ")).ok(),
        }))
    }
}

fn guarded(f: impl FnOnce() -> *mut SeamResult) -> *mut SeamResult {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(_) => SeamResult::fail(SeamStatus::InternalError, "internal panic".to_string()),
    }
}

/// # Safety
/// `ptr` must be NULL or a NUL-terminated C string valid for the call.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, *mut SeamResult> {
    if ptr.is_null() {
        return Err(SeamResult::fail(
            SeamStatus::InvalidArgument,
            "NULL pointer argument".to_string(),
        ));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        SeamResult::fail(SeamStatus::InvalidArgument, "argument is not valid UTF-8".to_string())
    })
}

#[derive(Default, serde::Deserialize)]
#[serde(rename_all = "camelCase", default)]
struct Options {
    max_facets: Option<usize>,
    namespace_prefix: Option<String>,
    apply_fixes: bool,
    version: Option<u64>,
}

fn parse_options(json: &str) -> Result<Options, String> {
    if json.trim().is_empty() {
        return Ok(Options::default());
    }
    serde_json::from_str(json).map_err(|e| format!("invalid options JSON: {e}"))
}

fn facetizer_config(opts: &Options) -> FacetizerConfig {
    FacetizerConfig {
        max_facets: opts.max_facets,
        facet_map: None,
        namespace_prefix: opts.namespace_prefix.clone(),
    }
}

struct Pipeline {
    unit: seam_core::frontend::SourceUnit,
    plan: seam_core::facetizer::FacetPlan,
    diagnostics: Vec<diagnostics::Diagnostic>,
}

fn run_pipeline(source: &str, opts: &Options) -> Result<Pipeline, (SeamStatus, String)> {
    let mut unit = resolve(parse(source).map_err(|d| (SeamStatus::ParseError, d.message.clone()))?)
        .map_err(|d| (SeamStatus::ParseError, d.message.clone()))?;
    let config = facetizer_config(opts);
    let mut fixed = false;
    loop {
        let graph = build_access_graph(&unit);
        let (plan, mut diags) = partition_facets(&unit, &graph, &config)
            .map_err(|e| (SeamStatus::AnalysisError, e.to_string()))?;
        let (table, clashes) = security::detect_selector_clashes(&unit, &plan)
            .map_err(|e| (SeamStatus::AnalysisError, e.to_string()))?;
        diags.extend(clashes);
        let risks = security::detect_collision_risks(&unit, &plan);
        diags.extend(risks.clone());

        if opts.apply_fixes && !fixed {
            fixed = true;
            let mut next = unit.clone();
            let mut changed = false;
            for diag in &risks {
                if let Some(diagnostics::Suggestion::ArrayToMapping { variable, .. }) =
                    &diag.suggestion
                {
                    if let Ok(rewritten) = security::apply_array_to_mapping(&next, variable) {
                        next = rewritten;
                        changed = true;
                    }
                }
            }
            if !table.is_clash_free() {
                let fixes = security::suggest_all_fixes(&table)
                    .map_err(|e| (SeamStatus::AnalysisError, e.to_string()))?;
                if !fixes.is_empty() {
                    next = security::apply_renames(next, &fixes);
                    next = resolve(next)
                        .map_err(|d| (SeamStatus::InternalError, d.message.clone()))?;
                    changed = true;
                }
            }
            if changed {
                unit = next;
                continue;
            }
        }
        return Ok(Pipeline { unit, plan, diagnostics: diags });
    }
}

/// Analyze a contract; the payload carries diagnostics and the facet
/// partition summary.
///
/// # Safety
/// `source` and `options_json` must be NULL or valid NUL-terminated C
/// strings. `options_json` may be NULL for defaults.
#[no_mangle]
pub unsafe extern "C" fn seam_analyze_source(
    source: *const c_char,
    options_json: *const c_char,
) -> *mut SeamResult {
    guarded(|| {
        let source = match read_str(source) {
            Ok(s) => s,
            Err(r) => return r,
        };
        let opts_text = if options_json.is_null() {
            ""
        } else {
            match read_str(options_json) {
                Ok(s) => s,
                Err(r) => return r,
            }
        };
        let opts = match parse_options(opts_text) {
            Ok(o) => o,
            Err(e) => return SeamResult::fail(SeamStatus::InvalidArgument, e),
        };
        match run_pipeline(source, &opts) {
            Ok(p) => {
                let payload = serde_json::json!({
                    "contractName": p.plan.contract_name,
                    "diagnostics": p.diagnostics,
                    "facets": p.plan.facets.iter().map(|f| {
                        serde_json::json!({
                            "name": f.name,
                            "externalFunctions": f.external_functions,
                            "ownedStateVars": f.owned_state_vars,
                            "storageNamespace": f.storage_namespace,
                        })
                    }).collect::<Vec<_>>(),
                });
                SeamResult::ok(serde_json::to_string_pretty(&payload).unwrap())
            }
            Err((status, message)) => SeamResult::fail(status, message),
        }
    })
}

/// Convert a contract; the payload carries the generated files keyed by
/// relative path, the manifest, and all diagnostics.
///
/// # Safety
/// Same contract as [`seam_analyze_source`].
#[no_mangle]
pub unsafe extern "C" fn seam_convert_source(
    source: *const c_char,
    options_json: *const c_char,
) -> *mut SeamResult {
    guarded(|| {
        let source = match read_str(source) {
            Ok(s) => s,
            Err(r) => return r,
        };
        let opts_text = if options_json.is_null() {
            ""
        } else {
            match read_str(options_json) {
                Ok(s) => s,
                Err(r) => return r,
            }
        };
        let opts = match parse_options(opts_text) {
            Ok(o) => o,
            Err(e) => return SeamResult::fail(SeamStatus::InvalidArgument, e),
        };
        match run_pipeline(source, &opts) {
            Ok(p) => {
                if diagnostics::has_errors(&p.diagnostics) {
                    let payload = serde_json::json!({ "diagnostics": p.diagnostics });
                    return SeamResult::fail_with_json(
                        SeamStatus::AnalysisError,
                        "error diagnostics present; bundle not generated".to_string(),
                        serde_json::to_string_pretty(&payload).unwrap(),
                    );
                }
                match codegen::generate_bundle(&p.unit, &p.plan, opts.version.unwrap_or(1)) {
                    Ok(bundle) => {
                        let payload = serde_json::json!({
                            "diagnostics": p.diagnostics,
                            "files": bundle.files,
                            "manifest": bundle.manifest,
                        });
                        SeamResult::ok(serde_json::to_string_pretty(&payload).unwrap())
                    }
                    Err(e) => SeamResult::fail(SeamStatus::InternalError, e.to_string()),
                }
            }
            Err((status, message)) => SeamResult::fail(status, message),
        }
    })
}

/// Validate an upgrade between two manifest JSON documents; the payload
/// is the compatibility report.
///
/// # Safety
/// Both arguments must be valid NUL-terminated C strings.
#[no_mangle]
pub unsafe extern "C" fn seam_validate_upgrade(
    old_manifest_json: *const c_char,
    new_manifest_json: *const c_char,
) -> *mut SeamResult {
    guarded(|| {
        let old_text = match read_str(old_manifest_json) {
            Ok(s) => s,
            Err(r) => return r,
        };
        let new_text = match read_str(new_manifest_json) {
            Ok(s) => s,
            Err(r) => return r,
        };
        let old = match codegen::Manifest::from_json(old_text) {
            Ok(m) => m,
            Err(e) => return SeamResult::fail(SeamStatus::ManifestError, e.to_string()),
        };
        let new = match codegen::Manifest::from_json(new_text) {
            Ok(m) => m,
            Err(e) => return SeamResult::fail(SeamStatus::ManifestError, e.to_string()),
        };
        let report = upgrade::validate_upgrade(&old, &new);
        let json = serde_json::to_string_pretty(&report).unwrap();
        if report.is_compatible() {
            SeamResult::ok(json)
        } else {
            SeamResult::fail_with_json(
                SeamStatus::AnalysisError,
                "upgrade is incompatible".to_string(),
                json,
            )
        }
    })
}

/// Status of a result handle. NULL yields `InvalidArgument`.
#[no_mangle]
pub extern "C" fn seam_result_status(result: *const SeamResult) -> SeamStatus {
    if result.is_null() {
        return SeamStatus::InvalidArgument;
    }
    unsafe { (*result).status }
}

/// Borrowed JSON payload, or NULL when the call produced none. Valid
/// until `seam_result_free`.
#[no_mangle]
pub extern "C" fn seam_result_json(result: *const SeamResult) -> *const c_char {
    if result.is_null() {
        return std::ptr::null();
    }
    unsafe {
        (*result)
            .json
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(std::ptr::null())
    }
}

/// Borrowed error message, or NULL on success. Valid until
/// `seam_result_free`.
#[no_mangle]
pub extern "C" fn seam_result_error(result: *const SeamResult) -> *const c_char {
    if result.is_null() {
        return std::ptr::null();
    }
    unsafe {
        (*result)
            .error
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(std::ptr::null())
    }
}

/// Release a result handle. NULL is a no-op; double-free is undefined.
///
/// # Safety
/// `result` must be NULL or a pointer returned by this library that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn seam_result_free(result: *mut SeamResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// 4-byte selector of a canonical signature, written to `out`.
///
/// # Safety
/// `signature` must be a valid NUL-terminated C string and `out` must
/// point to at least 4 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn seam_selector(signature: *const c_char, out: *mut u8) -> SeamStatus {
    if signature.is_null() || out.is_null() {
        return SeamStatus::InvalidArgument;
    }
    let Ok(sig) = CStr::from_ptr(signature).to_str() else {
        return SeamStatus::InvalidArgument;
    };
    match catch_unwind(|| security::compute_selector(sig)) {
        Ok(Ok(selector)) => {
            std::ptr::copy_nonoverlapping(selector.as_ptr(), out, 4);
            SeamStatus::Ok
        }
        Ok(Err(_)) => SeamStatus::InvalidArgument,
        Err(_) => SeamStatus::InternalError,
    }
}

/// Diamond-storage base slot (keccak-256 of the namespace), written to
/// the 32-byte `out` buffer.
///
/// # Safety
/// `namespace` must be a valid NUL-terminated C string and `out` must
/// point to at least 32 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn seam_diamond_storage_slot(
    namespace: *const c_char,
    out: *mut u8,
) -> SeamStatus {
    if namespace.is_null() || out.is_null() {
        return SeamStatus::InvalidArgument;
    }
    let Ok(ns) = CStr::from_ptr(namespace).to_str() else {
        return SeamStatus::InvalidArgument;
    };
    match catch_unwind(|| layout::diamond_storage_slot(ns)) {
        Ok(Ok(slot)) => {
            std::ptr::copy_nonoverlapping(slot.as_ptr(), out, 32);
            SeamStatus::Ok
        }
        Ok(Err(_)) => SeamStatus::InvalidArgument,
        Err(_) => SeamStatus::InternalError,
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn seam_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}
