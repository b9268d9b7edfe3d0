#ifndef SIGTOPO_H
#define SIGTOPO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a call.
typedef enum SigtopoStatus {
  SIGTOPO_STATUS_OK = 0,
  SIGTOPO_STATUS_NULL_POINTER = 1,
  SIGTOPO_STATUS_INVALID_ARGUMENT = 2,
  SIGTOPO_STATUS_IO = 3,
  SIGTOPO_STATUS_PARSE = 4,
  SIGTOPO_STATUS_ANALYSIS = 5,
  SIGTOPO_STATUS_BUFFER_TOO_SMALL = 6,
  SIGTOPO_STATUS_PANIC = 7,
} SigtopoStatus;

// Loaded multichannel recording.
typedef struct SigtopoRecording SigtopoRecording;

// Result of a sliding-window analysis, one point per window.
typedef struct SigtopoTrajectory SigtopoTrajectory;

// Analysis parameters. Obtain defaults from [`sigtopo_config_default`].
typedef struct SigtopoConfig {
  double lambda1;
  double lambda2;
  // Window length in samples.
  size_t window;
  size_t deg;
  size_t max_dim;
  double r2_threshold;
  size_t stride;
  // Worker threads; 0 uses every core.
  size_t threads;
  double tol;
  size_t max_iter;
} SigtopoConfig;

// Invariants of the complex on the window ending at `t` seconds.
typedef struct SigtopoPoint {
  double t;
  size_t b0;
  size_t b1;
  double pe_total;
  double pe_dim0;
  double pe_dim1;
  size_t edges;
  size_t triangles;
} SigtopoPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL if it succeeded.
// The pointer stays valid until the next call on this thread.
const char *sigtopo_last_error(void);

// Reads an EDF file. With `n_channels == 0` every signal is kept, otherwise
// the named channels in the given order.
//
// # Safety
// `path` must be a NUL-terminated string, `channels` must point to
// `n_channels` such strings, and `out` must be writable.
enum SigtopoStatus sigtopo_recording_load_edf(const char *path,
                                              const char *const *channels,
                                              size_t n_channels,
                                              struct SigtopoRecording **out);

// Reads a CSV file with a header row of channel names, sampled at `rate` Hz.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum SigtopoStatus sigtopo_recording_load_csv(const char *path,
                                              double rate,
                                              struct SigtopoRecording **out);

// Builds a recording from `n_channels` rows of `n_samples` values stored
// row after row. Channels are named `c0`, `c1`, ...
//
// # Safety
// `data` must point to `n_channels * n_samples` doubles and `out` be writable.
enum SigtopoStatus sigtopo_recording_from_samples(const double *data,
                                                  size_t n_channels,
                                                  size_t n_samples,
                                                  double rate,
                                                  struct SigtopoRecording **out);

// Block-mean resampling to `target_rate`, returned as a new recording.
//
// # Safety
// `rec` must be a live handle and `out` writable.
enum SigtopoStatus sigtopo_recording_resample(const struct SigtopoRecording *rec,
                                              double target_rate,
                                              struct SigtopoRecording **out);

// # Safety
// `rec` must be NULL or a live handle; it is invalid afterwards.
void sigtopo_recording_free(struct SigtopoRecording *rec);

// Number of channels; 0 for NULL.
//
// # Safety
// `rec` must be NULL or a live handle.
size_t sigtopo_recording_channel_count(const struct SigtopoRecording *rec);

// Samples per channel; 0 for NULL.
//
// # Safety
// `rec` must be NULL or a live handle.
size_t sigtopo_recording_sample_count(const struct SigtopoRecording *rec);

// Sampling rate in Hz; 0 for NULL.
//
// # Safety
// `rec` must be NULL or a live handle.
double sigtopo_recording_rate(const struct SigtopoRecording *rec);

struct SigtopoConfig sigtopo_config_default(void);

// Runs the sliding-window analysis over every channel of `rec`.
//
// # Safety
// `rec` must be a live handle, `config` must point to a config, and `out`
// must be writable.
enum SigtopoStatus sigtopo_analyze(const struct SigtopoRecording *rec,
                                   const struct SigtopoConfig *config,
                                   struct SigtopoTrajectory **out);

// Number of points; 0 for NULL.
//
// # Safety
// `traj` must be NULL or a live handle.
size_t sigtopo_trajectory_len(const struct SigtopoTrajectory *traj);

// Copies point `index` into `out`.
//
// # Safety
// `traj` must be a live handle and `out` writable.
enum SigtopoStatus sigtopo_trajectory_get(const struct SigtopoTrajectory *traj,
                                          size_t index,
                                          struct SigtopoPoint *out);

// # Safety
// `traj` must be NULL or a live handle; it is invalid afterwards.
void sigtopo_trajectory_free(struct SigtopoTrajectory *traj);

// Number of coefficients of a signature of a `dim`-dimensional path
// truncated at `deg`.
size_t sigtopo_signature_len(size_t dim, size_t deg);

// Truncated signature of the piecewise-linear path through `n_points`
// points. `values` holds the points one after another, `dim` values each;
// `times` must increase strictly. Levels 1..=deg are written to `out` in
// order, each in lexicographic word order. `written` receives the
// coefficient count, also when the buffer is too small.
//
// # Safety
// `times` must point to `n_points` doubles, `values` to `n_points * dim`,
// `out` to `capacity`, and `written` must be writable.
enum SigtopoStatus sigtopo_path_signature(const double *times,
                                          const double *values,
                                          size_t n_points,
                                          size_t dim,
                                          size_t deg,
                                          double *out,
                                          size_t capacity,
                                          size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIGTOPO_H */
