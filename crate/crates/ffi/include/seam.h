/* C interface for the seam diamond converter. */

#ifndef SEAM_H
#define SEAM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status of an FFI call.
 */
typedef enum SeamStatus {
  SEAM_STATUS_OK = 0,
  /**
   * A pointer was NULL or a string was not valid UTF-8.
   */
  SEAM_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The source failed to parse or resolve.
   */
  SEAM_STATUS_PARSE_ERROR = 2,
  /**
   * The pipeline ran but produced error diagnostics.
   */
  SEAM_STATUS_ANALYSIS_ERROR = 3,
  /**
   * Manifest input failed schema validation.
   */
  SEAM_STATUS_MANIFEST_ERROR = 4,
  /**
   * Unexpected internal failure.
   */
  SEAM_STATUS_INTERNAL_ERROR = 5,
} SeamStatus;

/**
 * Opaque result handle. Query with the `seam_result_*` accessors and
 * release with `seam_result_free`.
 */
typedef struct SeamResult SeamResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Analyze a contract; the payload carries diagnostics and the facet
 * partition summary.
 *
 * # Safety
 * `source` and `options_json` must be NULL or valid NUL-terminated C
 * strings. `options_json` may be NULL for defaults.
 */
struct SeamResult *seam_analyze_source(const char *source, const char *options_json);

/**
 * Convert a contract; the payload carries the generated files keyed by
 * relative path, the manifest, and all diagnostics.
 *
 * # Safety
 * Same contract as [`seam_analyze_source`].
 */
struct SeamResult *seam_convert_source(const char *source, const char *options_json);

/**
 * Validate an upgrade between two manifest JSON documents; the payload
 * is the compatibility report.
 *
 * # Safety
 * Both arguments must be valid NUL-terminated C strings.
 */
struct SeamResult *seam_validate_upgrade(const char *old_manifest_json,
                                         const char *new_manifest_json);

/**
 * Status of a result handle. NULL yields `InvalidArgument`.
 */
enum SeamStatus seam_result_status(const struct SeamResult *result);

/**
 * Borrowed JSON payload, or NULL when the call produced none. Valid
 * until `seam_result_free`.
 */
const char *seam_result_json(const struct SeamResult *result);

/**
 * Borrowed error message, or NULL on success. Valid until
 * `seam_result_free`.
 */
const char *seam_result_error(const struct SeamResult *result);

/**
 * Release a result handle. NULL is a no-op; double-free is undefined.
 *
 * # Safety
 * `result` must be NULL or a pointer returned by this library that has
 * not been freed yet.
 */
void seam_result_free(struct SeamResult *result);

/**
 * 4-byte selector of a canonical signature, written to `out`.
 *
 * # Safety
 * `signature` must be a valid NUL-terminated C string and `out` must
 * point to at least 4 writable bytes.
 */
enum SeamStatus seam_selector(const char *signature, uint8_t *out);

/**
 * Diamond-storage base slot (keccak-256 of the namespace), written to
 * the 32-byte `out` buffer.
 *
 * # Safety
 * `namespace` must be a valid NUL-terminated C string and `out` must
 * point to at least 32 writable bytes.
 */
enum SeamStatus seam_diamond_storage_slot(const char *namespace_, uint8_t *out);

/**
 * Library version as a static string; do not free.
 */
const char *seam_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEAM_H */
