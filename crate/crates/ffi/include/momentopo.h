#ifndef MOMENTOPO_H
#define MOMENTOPO_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result codes of every fallible call.
typedef enum MtStatus {
  MT_STATUS_OK = 0,
  MT_STATUS_INVALID_ARGUMENT = 1,
  MT_STATUS_OUT_OF_RANGE = 2,
  MT_STATUS_ALIASING = 3,
  MT_STATUS_NUMERICAL_DIVERGENCE = 4,
  MT_STATUS_PARSE = 5,
  MT_STATUS_VALIDATION = 6,
  MT_STATUS_SCHEMA_VERSION = 7,
  MT_STATUS_IO = 8,
  MT_STATUS_CONFIG = 9,
  MT_STATUS_NULL_POINTER = 10,
  // A Rust panic was caught at the boundary.
  MT_STATUS_INTERNAL = 11,
} MtStatus;

// Object description plus true topology and excitation protocol.
typedef struct MtFixture MtFixture;

// Hypothesis errors and selection for one trial.
typedef struct MtReport MtReport;

// A recorded trial.
typedef struct MtTrial MtTrial;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *mt_last_error(void);

// Library version as a static NUL-terminated string.
const char *mt_version(void);

// Looks up a built-in fixture such as `"revolute-demo"`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum MtStatus mt_fixture_builtin(const char *name, struct MtFixture **out);

// Loads and validates a fixture TOML file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum MtStatus mt_fixture_load(const char *path, struct MtFixture **out);

// # Safety
// `fixture` must come from this library and not be used afterwards.
void mt_fixture_free(struct MtFixture *fixture);

// Number of joints of the fixture's object; 0 for a null handle.
//
// # Safety
// `fixture` must be null or a live handle.
size_t mt_fixture_joint_count(const struct MtFixture *fixture);

// Simulates one exploration trial of `duration` seconds.
//
// # Safety
// `fixture` must be a live handle and `out` a valid pointer.
enum MtStatus mt_simulate(const struct MtFixture *fixture,
                          uint64_t seed,
                          double duration,
                          struct MtTrial **out);

// Reads a `trial/v1` file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum MtStatus mt_trial_read(const char *path, struct MtTrial **out);

// Writes a trial in the `trial/v1` format.
//
// # Safety
// `trial` must be a live handle and `path` a NUL-terminated string.
enum MtStatus mt_trial_write(const struct MtTrial *trial, const char *path);

// # Safety
// `trial` must come from this library and not be used afterwards.
void mt_trial_free(struct MtTrial *trial);

// Number of samples; 0 for a null handle.
//
// # Safety
// `trial` must be null or a live handle.
size_t mt_trial_sample_count(const struct MtTrial *trial);

// Fraction of samples flagged as moving; 0 for a null handle.
//
// # Safety
// `trial` must be null or a live handle.
double mt_trial_motion_fraction(const struct MtTrial *trial);

// Copies the recorded true topology (for example `"R"`) into `buf`.
// Returns the size needed, or 0 when the trial carries no true topology.
//
// # Safety
// `trial` must be null or a live handle; `buf` must hold `len` bytes.
size_t mt_trial_true_topology(const struct MtTrial *trial, char *buf, size_t len);

// Scores every candidate topology of the trial's object against the trial
// and selects the best. `smoothing_window` must be odd; pass 0 for the
// default.
//
// # Safety
// `trial` must be a live handle and `out` a valid pointer.
enum MtStatus mt_estimate(const struct MtTrial *trial,
                          size_t smoothing_window,
                          struct MtReport **out);

// # Safety
// `report` must come from this library and not be used afterwards.
void mt_report_free(struct MtReport *report);

// Number of scored candidates; 0 for a null handle.
//
// # Safety
// `report` must be null or a live handle.
size_t mt_report_candidate_count(const struct MtReport *report);

// Error of candidate `index` and its topology string.
//
// # Safety
// `report` must be a live handle, `error` a valid pointer or null, and
// `buf` must hold `len` bytes or be null.
enum MtStatus mt_report_candidate(const struct MtReport *report,
                                  size_t index,
                                  double *error,
                                  char *buf,
                                  size_t len,
                                  size_t *needed);

// Copies the selected topology into `buf` and returns the size needed;
// 0 for a null handle.
//
// # Safety
// `report` must be null or a live handle; `buf` must hold `len` bytes.
size_t mt_report_selected(const struct MtReport *report, char *buf, size_t len);

// Whether the candidates were too close to call or the object barely moved.
//
// # Safety
// `report` must be null or a live handle.
bool mt_report_inconclusive(const struct MtReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOMENTOPO_H */
