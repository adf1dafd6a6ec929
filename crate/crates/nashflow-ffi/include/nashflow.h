/* C interface for the nashflow solver. Generated by the crate build script; edit the Rust sources instead. */

#ifndef NASHFLOW_H
#define NASHFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum nf_status {
  NF_OK = 0,
  NF_ERR_INVALID_INPUT = 1,
  NF_ERR_DIMENSION = 2,
  NF_ERR_DOMAIN = 3,
  NF_ERR_IO = 4,
  NF_ERR_FORMAT = 5,
  NF_ERR_NULL = 6,
  NF_ERR_UTF8 = 7,
  NF_ERR_PANIC = 8,
} nf_status;

/**
 * Time-stepping scheme selector for [`nf_flow_config`].
 */
typedef enum nf_scheme {
  NF_SCHEME_PROJECTED_EULER = 0,
  NF_SCHEME_PROXIMAL_IMPLICIT = 1,
  NF_SCHEME_INTERIOR_RK4 = 2,
} nf_scheme;

/**
 * Opaque flow-result handle holding the recorded trajectory.
 */
typedef struct nf_flow_result nf_flow_result;

/**
 * Opaque game handle.
 */
typedef struct nf_game nf_game;

/**
 * Plain-data mirror of the integrator configuration.
 */
typedef struct nf_flow_config {
  enum nf_scheme scheme;
  double h;
  double t_max;
  double gap_tol;
  size_t record_every;
  double inner_tol;
  size_t inner_max;
} nf_flow_config;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread; never free it.
 */
const char *nf_last_error(void);

/**
 * Build a game from flat buffers: `action_counts` has `num_players`
 * entries, `costs` holds the players' dense cost tensors concatenated in
 * player order (each row-major over joint actions, first player's action
 * slowest). `costs_len` must equal `num_players · ∏ action_counts`.
 */
enum nf_status nf_game_new(size_t num_players,
                           const size_t *action_counts,
                           const double *costs,
                           size_t costs_len,
                           struct nf_game **out);

/**
 * Load a game from a `.game` file (see the library documentation for the
 * format). `path` must be NUL-terminated UTF-8.
 */
enum nf_status nf_game_load(const char *path, struct nf_game **out);

/**
 * The built-in closed-form 2×2 zero-sum benchmark game.
 */
enum nf_status nf_game_appendix_b(struct nf_game **out);

/**
 * Release a game handle. NULL is a no-op.
 */
void nf_game_free(struct nf_game *game);

/**
 * Number of players, or 0 if `game` is NULL.
 */
size_t nf_game_num_players(const struct nf_game *game);

/**
 * Action count of `player` (0-based), or 0 on NULL/out-of-range input.
 */
size_t nf_game_action_count(const struct nf_game *game, size_t player);

/**
 * 1 if the costs sum to zero across players at every joint action, else 0.
 */
int nf_game_is_zero_sum(const struct nf_game *game);

/**
 * Expected cost of `player` (0-based) at a flat mixed profile.
 */
enum nf_status nf_expected_cost(const struct nf_game *game,
                                const double *profile,
                                size_t profile_len,
                                size_t player,
                                double *out);

/**
 * Own-strategy cost gradient of `player`: component k is the player's cost
 * when they switch to pure action k while everyone else keeps the profile.
 * `out` must hold the player's action count.
 */
enum nf_status nf_own_gradient(const struct nf_game *game,
                               const double *profile,
                               size_t profile_len,
                               size_t player,
                               double *out,
                               size_t out_len);

/**
 * Nash gap (total exploitability) of a flat mixed profile; zero exactly at
 * equilibria.
 */
enum nf_status nf_nash_gap(const struct nf_game *game,
                           const double *profile,
                           size_t profile_len,
                           double *out);

/**
 * Index (0-based) of a best-response pure action for `player`; ties go to
 * the lowest index.
 */
enum nf_status nf_best_response(const struct nf_game *game,
                                const double *profile,
                                size_t profile_len,
                                size_t player,
                                size_t *out_action);

/**
 * Euclidean projection of `v` onto the probability simplex; `out` must hold
 * `len` entries (in-place use, `out == v`, is allowed).
 */
enum nf_status nf_simplex_project(const double *v, size_t len, double *out);

/**
 * Fill `out` with the default integrator configuration for `game`:
 * projected Euler, h = min(0.1/L, 1) for the game's gradient Lipschitz
 * bound L, t_max = 100, gap_tol = 1e-2, full-resolution recording.
 */
enum nf_status nf_flow_config_default(const struct nf_game *game, struct nf_flow_config *out);

/**
 * Integrate the projected subgradient flow. `x0` may be NULL for a uniform
 * start, otherwise it is a flat profile of length `x0_len`. On success the
 * caller owns the returned handle and must free it with
 * [`nf_flow_result_free`].
 */
enum nf_status nf_integrate(const struct nf_game *game,
                            const double *x0,
                            size_t x0_len,
                            const struct nf_flow_config *config,
                            struct nf_flow_result **out);

/**
 * Release a flow-result handle. NULL is a no-op.
 */
void nf_flow_result_free(struct nf_flow_result *result);

/**
 * Number of recorded instants (including t = 0), or 0 for NULL.
 */
size_t nf_flow_result_len(const struct nf_flow_result *result);

/**
 * Length of a flat profile for this result (sum of action counts), or 0.
 */
size_t nf_flow_result_strategy_len(const struct nf_flow_result *result);

/**
 * 0 when the run stopped because the gap tolerance was met, 1 when the time
 * horizon ran out, -1 for NULL.
 */
int nf_flow_result_stop_reason(const struct nf_flow_result *result);

/**
 * Time of a recorded instant.
 */
enum nf_status nf_flow_result_time(const struct nf_flow_result *result, size_t index, double *out);

/**
 * Gap of the Cesàro mean at a recorded instant.
 */
enum nf_status nf_flow_result_gap(const struct nf_flow_result *result, size_t index, double *out);

/**
 * Raw state at a recorded instant, flattened into `out`.
 */
enum nf_status nf_flow_result_state(const struct nf_flow_result *result,
                                    size_t index,
                                    double *out,
                                    size_t out_len);

/**
 * Cesàro mean at a recorded instant, flattened into `out`.
 */
enum nf_status nf_flow_result_cesaro(const struct nf_flow_result *result,
                                     size_t index,
                                     double *out,
                                     size_t out_len);

/**
 * Pure-action monotonicity check. On success writes a verdict code
 * (0 certified-exhaustive, 1 certified-sampled, 2 violated) and the worst
 * per-player margin observed.
 */
enum nf_status nf_pure_monotonicity(const struct nf_game *game,
                                    uint64_t cap,
                                    double tol,
                                    uint64_t seed,
                                    int *verdict,
                                    double *worst_margin);

/**
 * Sampled variational monotonicity check; same outputs as
 * [`nf_pure_monotonicity`].
 */
enum nf_status nf_variational_monotonicity(const struct nf_game *game,
                                           uint64_t n_samples,
                                           double tol,
                                           uint64_t seed,
                                           int *verdict,
                                           double *worst_margin);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NASHFLOW_H */
