#ifndef CELLSCHED_H
#define CELLSCHED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Comparison outcome codes used by the reward functions.
 */
#define CS_LESS -1

#define CS_EQUAL 0

#define CS_GREATER 1

typedef enum {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_ARGUMENT = 2,
  CS_STATUS_CONFIG = 3,
  CS_STATUS_CONTRACT = 4,
  CS_STATUS_NON_FINITE = 5,
  CS_STATUS_IO = 6,
  CS_STATUS_CHECKPOINT = 7,
  CS_STATUS_PANIC = 8,
} CsStatus;

/**
 * Opaque trained-agent handle.
 */
typedef struct CsAgent CsAgent;

/**
 * Opaque simulator handle.
 */
typedef struct CsEnv CsEnv;

/**
 * Outcome of one TTI.
 */
typedef struct {
  uint64_t tti;
  uint64_t delivered_bits;
  bool ack;
  bool retransmission;
  uint8_t mcs_index;
} CsStepResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` as a
 * NUL-terminated string, truncating if needed. Returns the full message
 * length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t cs_last_error_message(char *buf, size_t len);

/**
 * Creates an environment. `sim_toml` holds simulator settings as TOML
 * and may be null for defaults.
 *
 * # Safety
 * `sim_toml` must be null or a NUL-terminated string; `out` must be
 * writable.
 */
CsStatus cs_env_new(const char *sim_toml, CsEnv **out);

/**
 * # Safety
 * `env` must be null or a handle from [`cs_env_new`] not yet freed.
 */
void cs_env_free(CsEnv *env);

/**
 * Number of UEs, or 0 for a null handle.
 *
 * # Safety
 * `env` must be null or a live handle.
 */
size_t cs_env_n_ue(const CsEnv *env);

/**
 * Starts an episode and writes the first observation (`I_n` and `T_n`,
 * `n` values each).
 *
 * # Safety
 * `env` must be a live handle; `inst` and `avg` valid for `n` doubles.
 */
CsStatus cs_env_reset(CsEnv *env, uint64_t seed, double *inst, double *avg, size_t n);

/**
 * Writes the current observation.
 *
 * # Safety
 * As for [`cs_env_reset`].
 */
CsStatus cs_env_observe(const CsEnv *env, double *inst, double *avg, size_t n);

/**
 * Serves `ue` for one TTI.
 *
 * # Safety
 * `env` must be a live handle and `out` writable.
 */
CsStatus cs_env_step(CsEnv *env, size_t ue, CsStepResult *out);

/**
 * # Safety
 * `inst` and `avg` valid for `n` doubles; `out` writable.
 */
CsStatus cs_pf_select(const double *inst, const double *avg, size_t n, size_t *out);

/**
 * # Safety
 * `inst` valid for `n` doubles; `out` writable.
 */
CsStatus cs_maxci_select(const double *inst, size_t n, size_t *out);

/**
 * # Safety
 * `out` writable.
 */
CsStatus cs_rr_select(uint64_t tti, size_t n, size_t *out);

/**
 * # Safety
 * `v` valid for `n` doubles; `out` writable.
 */
CsStatus cs_jain_index(const double *v, size_t n, double *out);

/**
 * Writes `CS_GREATER`, `CS_EQUAL` or `CS_LESS`.
 *
 * # Safety
 * `out` writable.
 */
CsStatus cs_compare_metrics(double mine, double theirs, double rel_tol, int32_t *out);

/**
 * # Safety
 * `out` writable.
 */
CsStatus cs_direct_reward(double inst_throughput,
                          double jfi,
                          double alpha,
                          double beta,
                          double tp_scale,
                          double *out);

/**
 * # Safety
 * `out` writable.
 */
CsStatus cs_dual_reward(int32_t tp_cmp, int32_t jfi_cmp, double alpha, double beta, double *out);

/**
 * # Safety
 * `out` writable.
 */
CsStatus cs_expert_reward(int32_t tp_cmp, int32_t jfi_cmp, double alpha, double beta, double *out);

/**
 * Writes the `2n` network inputs for an observation.
 *
 * # Safety
 * `inst` and `avg` valid for `n` doubles, `state` for `2n`.
 */
CsStatus cs_normalize_state(const double *inst, const double *avg, size_t n, double *state);

/**
 * Loads a checkpoint written by `cellsched train`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
CsStatus cs_agent_load(const char *path, CsAgent **out);

/**
 * # Safety
 * `agent` must be null or a handle from [`cs_agent_load`] not yet freed.
 */
void cs_agent_free(CsAgent *agent);

/**
 * Number of UEs the agent schedules, or 0 for a null handle.
 *
 * # Safety
 * `agent` must be null or a live handle.
 */
size_t cs_agent_n_ue(const CsAgent *agent);

/**
 * Noise-free action for a normalized state of `2n` values. Writes the `n`
 * metrics to `action` (may be null) and the scheduled UE to `ue`.
 *
 * # Safety
 * `agent` must be a live handle, `state` valid for `2n` doubles, `action`
 * null or valid for `n`, `ue` writable.
 */
CsStatus cs_agent_act(const CsAgent *agent,
                      const double *state,
                      size_t n,
                      double *action,
                      size_t *ue);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CELLSCHED_H */
