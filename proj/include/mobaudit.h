#ifndef MOBAUDIT_H
#define MOBAUDIT_H

/*
 * C interface to the mobility-panel audit toolkit. All state lives in an
 * opaque session: set string-valued options, run a command, read the JSON
 * result. Every returned string is owned by the session and stays valid
 * until the next mobaudit_run call or mobaudit_session_free.
 *
 * Commands: synth, link, impute, audit:measurement, audit:disparate,
 * audit:joint, audit:interaction, policy:rank, policy:allocate, report.
 */

#ifdef __cplusplus
extern "C" {
#endif

#ifndef MOBAUDIT_API
#if defined(MOBAUDIT_BUILD) && defined(__GNUC__)
#define MOBAUDIT_API __attribute__((visibility("default")))
#else
#define MOBAUDIT_API
#endif
#endif

typedef enum mobaudit_status {
  MOBAUDIT_OK = 0,
  MOBAUDIT_ERR_VALIDATION = 1, /* bad inputs, options, or invariants */
  MOBAUDIT_ERR_NUMERIC = 2     /* degenerate or unstable computation */
} mobaudit_status;

typedef struct mobaudit_session mobaudit_session;

/* Returns NULL only on allocation failure. */
MOBAUDIT_API mobaudit_session* mobaudit_session_new(void);
MOBAUDIT_API void mobaudit_session_free(mobaudit_session* session);

/* Sets one option (e.g. "out", "election-date", "seed"). Unknown keys are
 * rejected. Options persist across runs until cleared. */
MOBAUDIT_API mobaudit_status mobaudit_set_option(mobaudit_session* session, const char* key,
                                                 const char* value);
MOBAUDIT_API void mobaudit_clear_options(mobaudit_session* session);

/* Runs a command with the session's options. On success the JSON result is
 * available from mobaudit_result_json; on failure the message is available
 * from mobaudit_last_error and the status maps to the CLI exit code. */
MOBAUDIT_API mobaudit_status mobaudit_run(mobaudit_session* session, const char* command);

MOBAUDIT_API const char* mobaudit_result_json(const mobaudit_session* session);
MOBAUDIT_API const char* mobaudit_last_error(const mobaudit_session* session);

MOBAUDIT_API const char* mobaudit_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MOBAUDIT_H */
