#ifndef GREEDY_DEGRADE_H
#define GREEDY_DEGRADE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GdStatus {
  GD_STATUS_OK = 0,
  GD_STATUS_NULL_POINTER = 1,
  /**
   * Malformed channel, JSON, index or size.
   */
  GD_STATUS_INVALID_INPUT = 2,
  /**
   * A bound was evaluated outside the range where it is stated.
   */
  GD_STATUS_BOUND_RANGE = 3,
  /**
   * Exhaustive search refused an alphabet that is too large.
   */
  GD_STATUS_GUARD = 4,
  /**
   * The operation needs a binary-input channel.
   */
  GD_STATUS_NOT_BINARY = 5,
  GD_STATUS_BUFFER_TOO_SMALL = 6,
  GD_STATUS_PANIC = 7,
} GdStatus;

typedef enum GdOracleMethod {
  GD_ORACLE_METHOD_BRUTE_FORCE = 0,
  GD_ORACLE_METHOD_DYNAMIC_PROGRAMMING = 1,
} GdOracleMethod;

/**
 * A validated channel together with its input distribution.
 */
typedef struct GdChannel GdChannel;

/**
 * Result of a greedy degrade run.
 */
typedef struct GdReport GdReport;

/**
 * One merge: the two merged letters, named by their smallest original
 * output index, the loss in nats and the alphabet size before the merge.
 */
typedef struct GdMergeStep {
  size_t a;
  size_t b;
  double delta;
  size_t size_before;
} GdMergeStep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *gd_last_error_message(void);

/**
 * Builds a channel from `rows`, a row-major `num_inputs x num_outputs`
 * array of `W(y|x)`, and `input_dist` of length `num_inputs`.
 *
 * # Safety
 * `rows` and `input_dist` must point to arrays of the stated lengths.
 */
enum GdStatus gd_channel_new(const double *rows,
                             size_t num_inputs,
                             size_t num_outputs,
                             const double *input_dist,
                             struct GdChannel **out);

/**
 * Parses a channel file: `{"input_dist": [...], "channel": [[...], ...]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string.
 */
enum GdStatus gd_channel_from_json(const char *json, bool renormalize, struct GdChannel **out);

/**
 * Seeded random channel with flat-Dirichlet rows and input distribution.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum GdStatus gd_channel_random(size_t num_inputs,
                                size_t num_outputs,
                                uint64_t seed,
                                struct GdChannel **out);

/**
 * # Safety
 * `channel` must be null or a handle from this library not yet freed.
 */
void gd_channel_free(struct GdChannel *channel);

/**
 * Input alphabet size as given, including zero-probability inputs; 0 for null.
 *
 * # Safety
 * `channel` must be null or a live handle.
 */
size_t gd_channel_num_inputs(const struct GdChannel *channel);

/**
 * Output alphabet size as given, including zero-mass outputs; 0 for null.
 *
 * # Safety
 * `channel` must be null or a live handle.
 */
size_t gd_channel_num_outputs(const struct GdChannel *channel);

/**
 * Mutual information in nats.
 *
 * # Safety
 * `channel` must be a live handle and `out` valid for writes.
 */
enum GdStatus gd_channel_mutual_information(const struct GdChannel *channel, double *out);

/**
 * Greedy merging down to at most `target` output letters.
 *
 * # Safety
 * `channel` must be a live handle and `out` valid for writes.
 */
enum GdStatus gd_degrade(const struct GdChannel *channel, size_t target, struct GdReport **out);

/**
 * # Safety
 * `report` must be null or a handle from this library not yet freed.
 */
void gd_report_free(struct GdReport *report);

/**
 * Total mutual-information loss in nats.
 *
 * # Safety
 * `report` must be a live handle and `out` valid for writes.
 */
enum GdStatus gd_report_total_delta(const struct GdReport *report, double *out);

/**
 * Number of merges performed; 0 for null.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t gd_report_num_steps(const struct GdReport *report);

/**
 * # Safety
 * `report` must be a live handle and `out` valid for writes.
 */
enum GdStatus gd_report_step(const struct GdReport *report, size_t index, struct GdMergeStep *out);

/**
 * Copies the degrading map (original output -> merged output) into `buf`.
 * `needed` receives the map length; with `buf` null only `needed` is set.
 *
 * # Safety
 * `buf` must be null or valid for `capacity` writes; `needed` valid for writes.
 */
enum GdStatus gd_report_map(const struct GdReport *report,
                            size_t *buf,
                            size_t capacity,
                            size_t *needed);

/**
 * The merged channel as a new handle.
 *
 * # Safety
 * `report` must be a live handle and `out` valid for writes.
 */
enum GdStatus gd_report_result(const struct GdReport *report, struct GdChannel **out);

/**
 * The report as JSON; release it with [`gd_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` valid for writes.
 */
enum GdStatus gd_report_to_json(const struct GdReport *report, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void gd_string_free(char *s);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum GdStatus gd_mu(size_t num_inputs, double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum GdStatus gd_nu(size_t num_inputs, double *out);

/**
 * Per-merge bound at alphabet size `num_outputs`; needs `num_outputs > 2 num_inputs`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum GdStatus gd_theorem1_rhs(size_t num_inputs, size_t num_outputs, double *out);

/**
 * Cumulative bound for target size `target`; needs `target >= 2 num_inputs`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum GdStatus gd_corollary_rhs(size_t num_inputs, size_t target, double *out);

/**
 * Optimal loss over all degradings to at most `target` letters. Brute force
 * handles up to 12 output letters; the DP needs a binary input.
 *
 * # Safety
 * `channel` must be a live handle and `out` valid for writes.
 */
enum GdStatus gd_oracle_optimal(const struct GdChannel *channel,
                                size_t target,
                                enum GdOracleMethod method,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GREEDY_DEGRADE_H */
