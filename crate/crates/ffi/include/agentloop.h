#ifndef AGENTLOOP_H
#define AGENTLOOP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdint.h>
#include <stddef.h>

/**
 * Result of every fallible call.
 */
typedef enum AlStatus {
  AL_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  AL_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  AL_STATUS_INVALID_UTF8 = 2,
  /**
   * An argument was out of range or inconsistent.
   */
  AL_STATUS_INVALID_ARGUMENT = 3,
  /**
   * A JSON or pattern argument did not parse.
   */
  AL_STATUS_PARSE = 4,
  /**
   * The environment reported an error while stepping.
   */
  AL_STATUS_ENVIRONMENT = 5,
  /**
   * The library panicked; the handle involved should be freed.
   */
  AL_STATUS_PANIC = 6,
} AlStatus;

/**
 * Opaque handle to a running scenario.
 */
typedef struct AlSimulation AlSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *al_version(void);

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *al_last_error_message(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void al_string_free(char *s);

/**
 * Single porter serving random lock and unlock requests drawn from `seed`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AlStatus al_porter_new(uint64_t seed, struct AlSimulation **out);

/**
 * Paranoid, claustrophobe and porter sharing one door.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AlStatus al_porter_mas_new(struct AlSimulation **out);

/**
 * Toroidal Game of Life with a random initial grid.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AlStatus al_gol_random_new(size_t width,
                                size_t height,
                                uint64_t seed,
                                struct AlSimulation **out);

/**
 * Game of Life seeded from a `.`/`#` pattern. With `width` and `height`
 * both 0 the grid is the pattern's size; otherwise the pattern is placed
 * in the top-left corner of a grid that size.
 *
 * # Safety
 * `pattern` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AlStatus al_gol_pattern_new(const char *pattern,
                                 size_t width,
                                 size_t height,
                                 struct AlSimulation **out);

/**
 * Excuse-writing student with the built-in offline generator. NULL names
 * fall back to the defaults.
 *
 * # Safety
 * Non-NULL names must be NUL-terminated strings; `out` must be valid.
 */
enum AlStatus al_excuse_new(const char *name, const char *teacher_name, struct AlSimulation **out);

/**
 * Runs `steps` environment steps and returns their trace records as JSON
 * lines, each terminated by `\n`.
 *
 * # Safety
 * `sim` must be a live handle and `out_jsonl` a valid pointer.
 */
enum AlStatus al_sim_run(struct AlSimulation *sim, size_t steps, char **out_jsonl);

/**
 * One environment step; same output as `al_sim_run(sim, 1, out_jsonl)`.
 *
 * # Safety
 * `sim` must be a live handle and `out_jsonl` a valid pointer.
 */
enum AlStatus al_sim_step(struct AlSimulation *sim, char **out_jsonl);

/**
 * Current environment state as canonical JSON.
 *
 * # Safety
 * `sim` must be a live handle and `out_json` a valid pointer.
 */
enum AlStatus al_sim_state_json(struct AlSimulation *sim, char **out_json);

/**
 * Number of steps run so far.
 *
 * # Safety
 * `sim` must be a live handle and `out_step` a valid pointer.
 */
enum AlStatus al_sim_current_step(struct AlSimulation *sim, uint64_t *out_step);

/**
 * Releases a simulation. NULL is ignored.
 *
 * # Safety
 * `sim` must come from this library and not have been freed already.
 */
void al_sim_free(struct AlSimulation *sim);

/**
 * Applies default belief revision. Both inputs and the output are belief
 * bases in canonical JSON.
 *
 * # Safety
 * Inputs must be NUL-terminated strings and `out_json` a valid pointer.
 */
enum AlStatus al_default_revise_json(const char *beliefs_json,
                                     const char *percepts_json,
                                     char **out_json);

/**
 * Builds an action message. `actions_json` is a JSON array of batches,
 * each an array of actions.
 *
 * # Safety
 * Inputs must be NUL-terminated strings and `out_message` a valid pointer.
 */
enum AlStatus al_encode_action_message(const char *agent_id,
                                       const char *actions_json,
                                       char **out_message);

/**
 * Splits an action message into its agent id and its batches (canonical
 * JSON).
 *
 * # Safety
 * `message` must be a NUL-terminated string; both out pointers valid.
 */
enum AlStatus al_decode_action_message(const char *message,
                                       char **out_agent_id,
                                       char **out_actions_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AGENTLOOP_H */
