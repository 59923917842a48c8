/* SPDX-License-Identifier: Apache-2.0 */

#ifndef SLAAC_SIM_H
#define SLAAC_SIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SlaacStatus {
  SLAAC_STATUS_OK = 0,
  SLAAC_STATUS_NULL_POINTER = 1,
  SLAAC_STATUS_INVALID_UTF8 = 2,
  SLAAC_STATUS_PARSE = 3,
  SLAAC_STATUS_VALIDATION = 4,
  SLAAC_STATUS_SIMULATION = 5,
  SLAAC_STATUS_INVARIANT = 6,
  SLAAC_STATUS_EXPECTATION_FAILED = 7,
} SlaacStatus;

/**
 * Simulation engine plus the scenario it was built from.
 */
typedef struct SlaacEngine SlaacEngine;

/**
 * Parsed, validated scenario.
 */
typedef struct SlaacScenario SlaacScenario;

/**
 * Attack outcome of the last measurement.
 */
typedef struct SlaacAttackFlags {
  bool dos_success;
  bool mitm_success;
  bool dualstack_success;
} SlaacAttackFlags;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or NULL. Valid
 * until the next failing call on the same thread.
 */
const char *slaac_last_error(void);

/**
 * Parses scenario text.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be writable.
 */
enum SlaacStatus slaac_scenario_parse(const char *text, struct SlaacScenario **out);

/**
 * Canonical text of a scenario.
 *
 * # Safety
 * `scenario` must come from [`slaac_scenario_parse`] or be NULL.
 */
char *slaac_scenario_normalized(const struct SlaacScenario *scenario);

/**
 * # Safety
 * `scenario` must come from [`slaac_scenario_parse`] or be NULL.
 */
void slaac_scenario_free(struct SlaacScenario *scenario);

/**
 * Builds an engine for `scenario`. When `override_seed` is true, `seed`
 * replaces the scenario's seed. The scenario handle stays owned by the
 * caller.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum SlaacStatus slaac_engine_new(const struct SlaacScenario *scenario,
                                  bool override_seed,
                                  uint64_t seed,
                                  struct SlaacEngine **out);

/**
 * Runs the engine to the scenario's end time.
 *
 * # Safety
 * `engine` must be a live handle.
 */
enum SlaacStatus slaac_engine_run(struct SlaacEngine *engine);

/**
 * Trace text so far, one record per line.
 *
 * # Safety
 * `engine` must be a live handle or NULL.
 */
char *slaac_engine_trace(const struct SlaacEngine *engine);

/**
 * All measurement snapshots taken so far.
 *
 * # Safety
 * `engine` must be a live handle or NULL.
 */
char *slaac_engine_metrics(const struct SlaacEngine *engine);

/**
 * Attack flags of the last measurement; all false before any.
 *
 * # Safety
 * `engine` must be a live handle; `out` must be writable.
 */
enum SlaacStatus slaac_engine_attack_flags(const struct SlaacEngine *engine,
                                           struct SlaacAttackFlags *out);

/**
 * Evaluates the scenario's `expect` lines. Writes the number of failures
 * to `failed` (if not NULL) and returns `ExpectationFailed` when nonzero.
 *
 * # Safety
 * `engine` must be a live handle; `failed` must be writable or NULL.
 */
enum SlaacStatus slaac_engine_check(const struct SlaacEngine *engine, uint32_t *failed);

/**
 * # Safety
 * `engine` must come from [`slaac_engine_new`] or be NULL.
 */
void slaac_engine_free(struct SlaacEngine *engine);

/**
 * # Safety
 * `s` must come from this library or be NULL.
 */
void slaac_string_free(char *s);

/**
 * Modified EUI-64 interface identifier of a 6-byte MAC.
 *
 * # Safety
 * `mac` must point to 6 readable bytes.
 */
uint64_t slaac_derive_eui64(const uint8_t *mac);

/**
 * Valid lifetime after an unauthenticated prefix update.
 */
uint32_t slaac_apply_two_hour_rule(uint32_t remaining, uint32_t received);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLAAC_SIM_H */
