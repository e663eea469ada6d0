#ifndef XZDELEGATE_H
#define XZDELEGATE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum XzStatus {
  XZ_STATUS_OK = 0,
  XZ_STATUS_NULL_POINTER = 1,
  XZ_STATUS_INVALID_UTF8 = 2,
  XZ_STATUS_CONFIG = 3,
  XZ_STATUS_PARSE = 4,
  XZ_STATUS_INVALID_ARGUMENT = 5,
  XZ_STATUS_RUNTIME = 6,
  XZ_STATUS_OUT_OF_RANGE = 7,
  XZ_STATUS_PANIC = 8,
} XzStatus;

typedef enum XzCommand {
  XZ_COMMAND_COMPILE = 0,
  XZ_COMMAND_SPECTRUM = 1,
  XZ_COMMAND_VGS = 2,
  XZ_COMMAND_QPIP1 = 3,
  XZ_COMMAND_QPIP0 = 4,
  XZ_COMMAND_BLIND = 5,
} XzCommand;

// A parsed experiment configuration.
typedef struct XzConfig XzConfig;

// A compiled Hamiltonian together with its history state.
typedef struct XzHamiltonian XzHamiltonian;

// A finished command with its JSON record and optional trace.
typedef struct XzReport XzReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The message of the last failed call on this thread, or NULL. Valid until
// the next failing call on the same thread.
const char *xz_last_error(void);

// Library version as a static NUL-terminated string.
const char *xz_version(void);

// Parses a TOML configuration.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a valid pointer.
enum XzStatus xz_config_from_toml(const char *toml, struct XzConfig **out);

// # Safety
// `cfg` must be a live handle from [`xz_config_from_toml`].
enum XzStatus xz_config_set_seed(struct XzConfig *cfg, uint64_t seed);

// # Safety
// `cfg` must be a live handle from [`xz_config_from_toml`].
enum XzStatus xz_config_set_trials(struct XzConfig *cfg, size_t trials);

// # Safety
// `cfg` must be NULL or a handle from [`xz_config_from_toml`] not yet freed.
void xz_config_free(struct XzConfig *cfg);

// Runs `command` under `cfg`.
//
// # Safety
// `cfg` must be a live handle and `out` a valid pointer.
enum XzStatus xz_run(const struct XzConfig *cfg, enum XzCommand command, struct XzReport **out);

// The JSON record, owned by `report`.
//
// # Safety
// `report` must be a live handle from [`xz_run`].
const char *xz_report_json(const struct XzReport *report);

// The per-trial trace, or NULL when the command produces none.
//
// # Safety
// `report` must be a live handle from [`xz_run`].
const char *xz_report_trace(const struct XzReport *report);

// # Safety
// `report` must be NULL or a handle from [`xz_run`] not yet freed.
void xz_report_free(struct XzReport *report);

// Number of identity gates appended to a circuit of `gates` gates for
// output error `epsilon`.
//
// # Safety
// `out` must be a valid pointer.
enum XzStatus xz_padding_for(size_t gates, double epsilon, size_t *out);

// Compiles a circuit in the text format on input `x` (a `0`/`1` string).
// A negative `padding` selects the padding implied by `epsilon`.
//
// # Safety
// `circuit` and `x` must be NUL-terminated strings and `out` a valid pointer.
enum XzStatus xz_hamiltonian_compile(const char *circuit,
                                     const char *x,
                                     double epsilon,
                                     int64_t padding,
                                     struct XzHamiltonian **out);

// # Safety
// `h` must be a live handle from [`xz_hamiltonian_compile`].
size_t xz_hamiltonian_qubits(const struct XzHamiltonian *h);

// # Safety
// `h` must be a live handle from [`xz_hamiltonian_compile`].
size_t xz_hamiltonian_term_count(const struct XzHamiltonian *h);

// # Safety
// `h` must be a live handle from [`xz_hamiltonian_compile`].
size_t xz_hamiltonian_padded_steps(const struct XzHamiltonian *h);

// Term `index` as a weight and X/Z masks over little-endian wires.
//
// # Safety
// `h` must be a live handle and the output pointers valid.
enum XzStatus xz_hamiltonian_term(const struct XzHamiltonian *h,
                                  size_t index,
                                  double *alpha,
                                  uint64_t *xmask,
                                  uint64_t *zmask);

// Acceptance probability of the single-shot energy test on the history
// state. Computed once and cached on the handle.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum XzStatus xz_hamiltonian_history_accept(struct XzHamiltonian *h, double *out);

// # Safety
// `h` must be NULL or a handle from [`xz_hamiltonian_compile`] not yet freed.
void xz_hamiltonian_free(struct XzHamiltonian *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XZDELEGATE_H */
