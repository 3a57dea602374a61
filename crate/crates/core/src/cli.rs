//! Command-line entry point wiring the pipeline: convert, analyze,
//! validate-upgrade, plan, changelog inspection and revert planning.
//!
//! Exit codes: 0 success, 1 diagnostics with errors (or incompatible
//! upgrade), 2 usage or I/O errors. Results go to stdout, diagnostics
//! and logs to stderr.

use crate::codegen::manifest::{Manifest, MANIFEST_FILE_NAME};
use crate::codegen::{generate_bundle, GeneratedBundle};
use crate::diagnostics::{codes, has_errors, Diagnostic, Suggestion};
use crate::facetizer::{build_access_graph, partition_facets, FacetizerConfig, FacetPlan};
use crate::frontend::{parse, resolve, SourceUnit};
use crate::security::{
    apply_array_to_mapping, apply_renames, detect_collision_risks, detect_selector_clashes,
    suggest_all_fixes, TransformError,
};
use crate::upgrade::changelog::{entry_for, Changelog};
use crate::upgrade::plan::{genesis_plan, revert_plan, upgrade_plan};
use crate::upgrade::{diff_selectors, validate_upgrade, CompatibilityReport, Verdict};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::{IsTerminal, Read, Write};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "seam",
    version,
    about = "Convert Solidity contracts into EIP-2535 diamonds and manage their upgrade lifecycle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct FacetizerArgs {
    /// Upper bound on the number of facets; smallest components merge.
    #[arg(long)]
    max_facets: Option<usize>,
    /// TOML or JSON file mapping facet names to function lists.
    #[arg(long, value_name = "FILE")]
    facet_map: Option<PathBuf>,
    /// Storage namespace prefix.
    #[arg(long, default_value = crate::facetizer::DEFAULT_NAMESPACE_PREFIX)]
    namespace_prefix: String,
}

impl FacetizerArgs {
    fn to_config(&self) -> Result<FacetizerConfig, String> {
        let facet_map = match &self.facet_map {
            Some(path) => Some(
                FacetizerConfig::load_facet_map(path).map_err(|e| e.to_string())?,
            ),
            None => None,
        };
        Ok(FacetizerConfig {
            max_facets: self.max_facets,
            facet_map,
            namespace_prefix: Some(self.namespace_prefix.clone()),
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a contract into a diamond bundle plus manifest.
    Convert {
        /// Input .sol file, or `-` for standard input.
        input: PathBuf,
        /// Output directory for the generated tree.
        #[arg(short, long, value_name = "DIR")]
        out: PathBuf,
        /// Apply suggested fixes (selector renames, array-to-mapping).
        #[arg(long)]
        apply_fixes: bool,
        /// Emit the bundle even when error diagnostics are present.
        #[arg(long)]
        force: bool,
        /// Version stamped into the manifest.
        #[arg(long, default_value_t = 1)]
        version: u64,
        #[command(flatten)]
        facetizer: FacetizerArgs,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Run the analyses and print diagnostics without generating code.
    Analyze {
        /// Input .sol file, or `-` for standard input.
        input: PathBuf,
        #[command(flatten)]
        facetizer: FacetizerArgs,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Check storage and selector compatibility of two manifests.
    ValidateUpgrade {
        old_manifest: PathBuf,
        new_manifest: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Diff two manifests, emit the deployment plan and extend the
    /// changelog.
    Plan {
        old_manifest: PathBuf,
        new_manifest: PathBuf,
        #[arg(long, value_name = "FILE")]
        changelog: PathBuf,
        /// Directory receiving plan.<version>.json.
        #[arg(long, value_name = "DIR", default_value = ".")]
        out_dir: PathBuf,
        /// Free-text note recorded in the changelog entry.
        #[arg(long, default_value = "")]
        note: String,
        /// Proceed despite an incompatible storage verdict.
        #[arg(long)]
        force: bool,
    },
    /// Inspect a changelog: the chain, or one version's selector map.
    Changelog {
        file: PathBuf,
        /// Reconstruct the selector map of this version.
        #[arg(long, value_name = "N")]
        at: Option<u64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Plan a revert to an earlier version.
    RevertPlan {
        changelog: PathBuf,
        /// Target version to restore.
        #[arg(long, value_name = "N")]
        to: u64,
        /// Manifest of the currently deployed version.
        #[arg(long, value_name = "FILE")]
        current: PathBuf,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out_dir: PathBuf,
    },
}

/// Run the CLI; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/version output.
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match cli.command {
        Command::Convert { input, out, apply_fixes, force, version, facetizer, format } => {
            cmd_convert(&input, &out, apply_fixes, force, version, &facetizer, format)
        }
        Command::Analyze { input, facetizer, format } => cmd_analyze(&input, &facetizer, format),
        Command::ValidateUpgrade { old_manifest, new_manifest, format } => {
            cmd_validate_upgrade(&old_manifest, &new_manifest, format)
        }
        Command::Plan { old_manifest, new_manifest, changelog, out_dir, note, force } => {
            cmd_plan(&old_manifest, &new_manifest, &changelog, &out_dir, &note, force)
        }
        Command::Changelog { file, at, format } => cmd_changelog(&file, at, format),
        Command::RevertPlan { changelog, to, current, out_dir } => {
            cmd_revert_plan(&changelog, to, &current, &out_dir)
        }
    }
}

fn color_enabled() -> bool {
    std::env::var_os("SEAM_NO_COLOR").is_none() && std::io::stderr().is_terminal()
}

fn eprint_diags(diags: &[Diagnostic]) {
    let color = color_enabled();
    for d in diags {
        eprintln!("{}", d.render(color));
    }
}

fn print_diags_json(diags: &[Diagnostic]) {
    let value = serde_json::json!({ "diagnostics": diags });
    println!("{}", serde_json::to_string_pretty(&value).unwrap());
}

fn usage_error(message: impl AsRef<str>) -> i32 {
    eprintln!("error: {}", message.as_ref());
    EXIT_USAGE
}

fn read_source(input: &Path) -> Result<String, String> {
    if input.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("failed to read stdin: {e}"))?;
        return Ok(buf);
    }
    std::fs::read_to_string(input).map_err(|e| format!("{}: {e}", input.display()))
}

fn load_manifest(path: &Path) -> Result<Manifest, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Manifest::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

struct PipelineResult {
    unit: SourceUnit,
    plan: FacetPlan,
    diagnostics: Vec<Diagnostic>,
}

/// parse -> resolve -> facetize -> security analyses. With `apply_fixes`
/// the suggested renames and array transforms are applied and the
/// pipeline re-runs once on the rewritten contract.
fn run_pipeline(
    source: &str,
    config: &FacetizerConfig,
    apply_fixes: bool,
) -> Result<PipelineResult, Diagnostic> {
    let mut unit = resolve(parse(source)?)?;
    let mut applied: Vec<Diagnostic> = Vec::new();

    loop {
        let mut diagnostics = Vec::new();
        for var in &unit.contract.state_vars {
            if var.visibility == crate::frontend::ast::VarVisibility::Public {
                diagnostics.push(
                    Diagnostic::warning(
                        codes::PUBLIC_GETTER_DROPPED,
                        format!(
                            "public state variable `{}` loses its auto-generated getter; declare an explicit getter function",
                            var.name.name
                        ),
                    )
                    .at(var.span),
                );
            }
        }

        let graph = build_access_graph(&unit);
        let (plan, facet_diags) = partition_facets(&unit, &graph, config)
            .map_err(|e| Diagnostic::error(codes::FACET_MAP_INVALID, e.to_string()))?;
        diagnostics.extend(facet_diags);

        let (selector_table, clash_diags) = detect_selector_clashes(&unit, &plan)
            .map_err(|e| Diagnostic::error(codes::SEL_CLASH, e.to_string()))?;
        diagnostics.extend(clash_diags.clone());
        let risk_diags = detect_collision_risks(&unit, &plan);
        diagnostics.extend(risk_diags.clone());

        if apply_fixes && applied.is_empty() {
            let mut changed = false;
            let mut next = unit.clone();

            // Array-to-mapping transforms for flagged variables.
            for diag in &risk_diags {
                if let Some(Suggestion::ArrayToMapping { variable, .. }) = &diag.suggestion {
                    match apply_array_to_mapping(&next, variable) {
                        Ok(rewritten) => {
                            changed = true;
                            applied.push(Diagnostic::info(
                                codes::SLOT_ARRAY_OF_STRUCTS,
                                format!(
                                    "applied array-to-mapping transform to `{variable}`"
                                ),
                            ));
                            next = rewritten;
                        }
                        Err(e @ TransformError::UnsupportedUsage { .. }) => {
                            applied.push(Diagnostic::warning(
                                codes::TRANSFORM_UNSUPPORTED_USAGE,
                                format!("could not transform `{variable}`: {e}"),
                            ));
                        }
                        Err(e) => {
                            applied.push(Diagnostic::warning(
                                codes::TRANSFORM_UNSUPPORTED_USAGE,
                                e.to_string(),
                            ));
                        }
                    }
                }
            }

            // Selector renames.
            if !selector_table.is_clash_free() {
                let fixes = suggest_all_fixes(&selector_table)
                    .map_err(|e| Diagnostic::error(codes::SEL_CLASH, e.to_string()))?;
                if !fixes.is_empty() {
                    for fix in &fixes {
                        if let Suggestion::RenameFunction { old_signature, new_signature, .. } =
                            fix
                        {
                            applied.push(Diagnostic::info(
                                codes::SEL_CLASH,
                                format!("renamed `{old_signature}` to `{new_signature}`"),
                            ));
                        }
                    }
                    next = apply_renames(next, &fixes);
                    next = resolve(next)?;
                    changed = true;
                }
            }

            if changed {
                unit = next;
                continue;
            }
        }

        diagnostics.extend(applied.clone());
        diagnostics.sort_by_key(|d| std::cmp::Reverse(d.severity));
        return Ok(PipelineResult { unit, plan, diagnostics });
    }
}

fn cmd_analyze(input: &Path, facetizer: &FacetizerArgs, format: OutputFormat) -> i32 {
    let source = match read_source(input) {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    let config = match facetizer.to_config() {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    match run_pipeline(&source, &config, false) {
        Ok(result) => {
            match format {
                OutputFormat::Json => print_diags_json(&result.diagnostics),
                OutputFormat::Text => {
                    eprint_diags(&result.diagnostics);
                    println!(
                        "{}: {} facet(s), {} diagnostic(s)",
                        result.plan.contract_name,
                        result.plan.facets.len(),
                        result.diagnostics.len()
                    );
                    for facet in &result.plan.facets {
                        println!(
                            "  {} -> {} function(s), {} variable(s), namespace {}",
                            facet.name,
                            facet.external_functions.len(),
                            facet.owned_state_vars.len(),
                            facet.storage_namespace
                        );
                    }
                }
            }
            if has_errors(&result.diagnostics) {
                EXIT_DIAGNOSTICS
            } else {
                EXIT_OK
            }
        }
        Err(diag) => {
            match format {
                OutputFormat::Json => print_diags_json(std::slice::from_ref(&diag)),
                OutputFormat::Text => eprint_diags(std::slice::from_ref(&diag)),
            }
            EXIT_DIAGNOSTICS
        }
    }
}

fn cmd_convert(
    input: &Path,
    out: &Path,
    apply_fixes: bool,
    force: bool,
    version: u64,
    facetizer: &FacetizerArgs,
    format: OutputFormat,
) -> i32 {
    let source = match read_source(input) {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    let config = match facetizer.to_config() {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    let result = match run_pipeline(&source, &config, apply_fixes) {
        Ok(r) => r,
        Err(diag) => {
            match format {
                OutputFormat::Json => print_diags_json(std::slice::from_ref(&diag)),
                OutputFormat::Text => eprint_diags(std::slice::from_ref(&diag)),
            }
            return EXIT_DIAGNOSTICS;
        }
    };

    if format == OutputFormat::Text {
        eprint_diags(&result.diagnostics);
    }
    if has_errors(&result.diagnostics) && !force {
        if format == OutputFormat::Json {
            print_diags_json(&result.diagnostics);
        }
        eprintln!("error diagnostics present; rerun with --force to emit the bundle anyway");
        return EXIT_DIAGNOSTICS;
    }

    let bundle = match generate_bundle(&result.unit, &result.plan, version) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("codegen failed: {e}");
            return EXIT_DIAGNOSTICS;
        }
    };
    if let Err(e) = write_bundle(out, &bundle) {
        return usage_error(e);
    }

    match format {
        OutputFormat::Json => {
            let value = serde_json::json!({
                "diagnostics": result.diagnostics,
                "outputDir": out.display().to_string(),
                "files": bundle.files.keys().collect::<Vec<_>>(),
                "manifest": MANIFEST_FILE_NAME,
                "version": version,
            });
            println!("{}", serde_json::to_string_pretty(&value).unwrap());
        }
        OutputFormat::Text => {
            println!(
                "wrote {} file(s) and {} to {}",
                bundle.files.len(),
                MANIFEST_FILE_NAME,
                out.display()
            );
        }
    }
    if has_errors(&result.diagnostics) {
        EXIT_DIAGNOSTICS
    } else {
        EXIT_OK
    }
}

fn write_bundle(out: &Path, bundle: &GeneratedBundle) -> Result<(), String> {
    for (rel, text) in &bundle.files {
        let path = out.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
        }
        std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let manifest_path = out.join(MANIFEST_FILE_NAME);
    std::fs::write(&manifest_path, bundle.manifest.to_canonical_json())
        .map_err(|e| format!("{}: {e}", manifest_path.display()))?;
    Ok(())
}

fn print_report(report: &CompatibilityReport, format: OutputFormat) {
    match format {
        OutputFormat::Json => {
            println!("{}", serde_json::to_string_pretty(report).unwrap());
        }
        OutputFormat::Text => {
            eprint_diags(&report.findings);
            let verdict = match report.verdict {
                Verdict::Compatible => "compatible",
                Verdict::CompatibleWithWarnings => "compatible (with warnings)",
                Verdict::Incompatible => "INCOMPATIBLE",
            };
            println!("verdict: {verdict}");
        }
    }
}

fn cmd_validate_upgrade(old_path: &Path, new_path: &Path, format: OutputFormat) -> i32 {
    let old = match load_manifest(old_path) {
        Ok(m) => m,
        Err(e) => return usage_error(e),
    };
    let new = match load_manifest(new_path) {
        Ok(m) => m,
        Err(e) => return usage_error(e),
    };
    let report = validate_upgrade(&old, &new);
    print_report(&report, format);
    if report.is_compatible() {
        EXIT_OK
    } else {
        EXIT_DIAGNOSTICS
    }
}

fn cmd_plan(
    old_path: &Path,
    new_path: &Path,
    changelog_path: &Path,
    out_dir: &Path,
    note: &str,
    force: bool,
) -> i32 {
    let old = match load_manifest(old_path) {
        Ok(m) => m,
        Err(e) => return usage_error(e),
    };
    let new = match load_manifest(new_path) {
        Ok(m) => m,
        Err(e) => return usage_error(e),
    };

    let mut log = if changelog_path.exists() {
        match Changelog::load(changelog_path) {
            Ok(l) => l,
            Err(e) => return usage_error(e.to_string()),
        }
    } else {
        Changelog::new(old.contract_name.clone())
    };

    // Bootstrap: an empty changelog first records the old manifest as
    // genesis so the chain always starts at version 1.
    if log.entries.is_empty() {
        let (genesis_cuts, genesis) = match genesis_plan(&old) {
            Ok(v) => v,
            Err(e) => return usage_error(e.to_string()),
        };
        let entry = entry_for(&log, &old, genesis_cuts, "genesis");
        if let Err(e) = log.append(entry) {
            return usage_error(e.to_string());
        }
        let path = out_dir.join(genesis.file_name());
        if let Err(e) = std::fs::create_dir_all(out_dir) {
            return usage_error(format!("{}: {e}", out_dir.display()));
        }
        if let Err(e) = std::fs::write(&path, genesis.to_canonical_json()) {
            return usage_error(format!("{}: {e}", path.display()));
        }
        eprintln!("recorded genesis (version 1) and wrote {}", path.display());
    } else {
        // The old manifest must be the chain head.
        let head = log.entries.last().unwrap();
        if head.manifest_fingerprint != old.fingerprint() {
            eprintln!(
                "error: old manifest fingerprint {} does not match changelog head {} (version {})",
                old.fingerprint(),
                head.manifest_fingerprint,
                head.version
            );
            return EXIT_DIAGNOSTICS;
        }
    }

    let report = validate_upgrade(&old, &new);
    print_report(&report, OutputFormat::Text);
    if !report.is_compatible() && !force {
        eprintln!("upgrade is incompatible; rerun with --force to plan it anyway");
        return EXIT_DIAGNOSTICS;
    }

    let cuts = match diff_selectors(&old, &new) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_DIAGNOSTICS;
        }
    };
    let to_version = log.head_version().unwrap_or(0) + 1;
    let plan = match upgrade_plan(&old, &new, &cuts, to_version) {
        Ok(p) => p,
        Err(e) => return usage_error(e.to_string()),
    };

    // Sanity: folding the recorded cuts must reproduce the new manifest's
    // selector map.
    {
        let mut map = match log.selector_map_at(log.head_version().unwrap()) {
            Ok(m) => m,
            Err(e) => return usage_error(e.to_string()),
        };
        if crate::upgrade::diff::apply_cuts(&mut map, &cuts).is_err() {
            eprintln!("internal error: derived cuts do not apply to the old selector map");
            return EXIT_DIAGNOSTICS;
        }
        let expected: std::collections::BTreeMap<[u8; 4], String> = new
            .facets
            .iter()
            .flat_map(|f| {
                f.selectors.iter().filter_map(|s| {
                    crate::hash::from_hex_fixed::<4>(&s.selector)
                        .map(|sel| (sel, f.name.clone()))
                })
            })
            .collect();
        if map != expected {
            eprintln!("internal error: derived cuts do not reproduce the new selector map");
            return EXIT_DIAGNOSTICS;
        }
    }

    let entry = entry_for(&log, &new, cuts.clone(), note);
    if let Err(e) = log.append(entry) {
        return usage_error(e.to_string());
    }
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return usage_error(format!("{}: {e}", out_dir.display()));
    }
    let plan_path = out_dir.join(plan.file_name());
    if let Err(e) = std::fs::write(&plan_path, plan.to_canonical_json()) {
        return usage_error(format!("{}: {e}", plan_path.display()));
    }
    if let Err(e) = log.save(changelog_path) {
        return usage_error(e.to_string());
    }

    println!(
        "planned upgrade to version {to_version}: {} cut(s), plan written to {}, changelog extended",
        cuts.len(),
        plan_path.display()
    );
    if !report.is_compatible() {
        EXIT_DIAGNOSTICS
    } else {
        EXIT_OK
    }
}

fn cmd_changelog(file: &Path, at: Option<u64>, format: OutputFormat) -> i32 {
    let log = match Changelog::load(file) {
        Ok(l) => l,
        Err(e) => return usage_error(e.to_string()),
    };
    match at {
        Some(version) => match log.selector_map_at(version) {
            Ok(map) => {
                match format {
                    OutputFormat::Json => {
                        let rendered: std::collections::BTreeMap<String, &String> = map
                            .iter()
                            .map(|(sel, facet)| (crate::hash::to_hex(sel), facet))
                            .collect();
                        let value = serde_json::json!({
                            "version": version,
                            "selectors": rendered,
                        });
                        println!("{}", serde_json::to_string_pretty(&value).unwrap());
                    }
                    OutputFormat::Text => {
                        println!("selector map at version {version}:");
                        for (sel, facet) in &map {
                            println!("  {} -> {}", crate::hash::to_hex(sel), facet);
                        }
                    }
                }
                EXIT_OK
            }
            Err(e) => usage_error(e.to_string()),
        },
        None => {
            match format {
                OutputFormat::Json => println!("{}", log.to_canonical_json()),
                OutputFormat::Text => {
                    println!("changelog for {} ({} entries):", log.contract_name, log.entries.len());
                    for entry in &log.entries {
                        println!(
                            "  v{} <- {} at {} | {} cut(s) | {} | {}",
                            entry.version,
                            entry
                                .parent_version
                                .map(|v| format!("v{v}"))
                                .unwrap_or_else(|| "genesis".to_string()),
                            entry.timestamp_utc,
                            entry.cuts.len(),
                            entry.manifest_fingerprint,
                            if entry.note.is_empty() { "-" } else { &entry.note }
                        );
                    }
                }
            }
            EXIT_OK
        }
    }
}

fn cmd_revert_plan(changelog_path: &Path, to: u64, current_path: &Path, out_dir: &Path) -> i32 {
    let log = match Changelog::load(changelog_path) {
        Ok(l) => l,
        Err(e) => return usage_error(e.to_string()),
    };
    let current = match load_manifest(current_path) {
        Ok(m) => m,
        Err(e) => return usage_error(e),
    };
    let (cuts, report, plan) = match revert_plan(&log, to, &current) {
        Ok(v) => v,
        Err(e) => return usage_error(e.to_string()),
    };
    eprint_diags(&report.findings);
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return usage_error(format!("{}: {e}", out_dir.display()));
    }
    let path = out_dir.join(format!("plan.revert-to-{to}.json"));
    if let Err(e) = std::fs::write(&path, plan.to_canonical_json()) {
        return usage_error(format!("{}: {e}", path.display()));
    }
    println!(
        "revert to version {to}: {} cut(s), plan written to {}{}",
        cuts.len(),
        path.display(),
        if plan.irreversible == Some(true) {
            " (IRREVERSIBLE: storage shape changed since)"
        } else {
            ""
        }
    );
    let _ = std::io::stdout().flush();
    if report.is_compatible() {
        EXIT_OK
    } else {
        EXIT_DIAGNOSTICS
    }
}
