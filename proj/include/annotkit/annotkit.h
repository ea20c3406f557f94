/* annotkit C API.
 *
 * All functions return ANNOTKIT_OK or an error status; on error the message is
 * available from annotkit_last_error() on the calling thread. Strings returned
 * through out-parameters are owned by the caller and released with
 * annotkit_free(). Command reports are UTF-8 JSON objects.
 */
#ifndef ANNOTKIT_ANNOTKIT_H
#define ANNOTKIT_ANNOTKIT_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ANNOTKIT_API __declspec(dllexport)
#else
#define ANNOTKIT_API __attribute__((visibility("default")))
#endif

typedef enum annotkit_status {
  ANNOTKIT_OK = 0,
  ANNOTKIT_E_INVALID_ARGUMENT = 1,
  ANNOTKIT_E_IO = 2,
  ANNOTKIT_E_PARSE = 3,
  ANNOTKIT_E_VALIDATION = 4,
  ANNOTKIT_E_REFERENCE = 5,
  ANNOTKIT_E_UNDEFINED = 6,
  ANNOTKIT_E_CONFLICT = 7,
  ANNOTKIT_E_STATE = 8,
  ANNOTKIT_E_LOCKED = 9,
  ANNOTKIT_E_INTERNAL = 10
} annotkit_status;

typedef struct annotkit_project annotkit_project;
typedef struct annotkit_server annotkit_server;

ANNOTKIT_API const char* annotkit_version(void);

/* Stable machine-readable name, e.g. "E_VALIDATION". */
ANNOTKIT_API const char* annotkit_status_name(annotkit_status status);

/* Message of the last failed call on this thread; "" if none. */
ANNOTKIT_API const char* annotkit_last_error(void);

ANNOTKIT_API void annotkit_free(char* string);

/* Creates a store at `root` from a manifest JSON object. `report` may be NULL. */
ANNOTKIT_API annotkit_status annotkit_init(const char* root, const char* manifest_json, char** report);

/* Opens a store, taking its exclusive lock until annotkit_close(). */
ANNOTKIT_API annotkit_status annotkit_open(const char* root, annotkit_project** project);
ANNOTKIT_API void annotkit_close(annotkit_project* project);

/* Runs a command ("status", "plan", "merge", ...) with a JSON object of
 * arguments (NULL for none). */
ANNOTKIT_API annotkit_status annotkit_run(annotkit_project* project, const char* command,
                                          const char* args_json, char** report);

typedef struct annotkit_server_options {
  const char* host;  /* NULL for 127.0.0.1 */
  int port;          /* 0 picks a free port */
  const char* stage; /* NULL for the stage awaiting resolution */
} annotkit_server_options;

/* Starts the resolution API in the background. The project must stay open
 * while the server exists. */
ANNOTKIT_API annotkit_status annotkit_server_start(annotkit_project* project, const annotkit_server_options* options,
                                                   annotkit_server** server);
ANNOTKIT_API int annotkit_server_port(const annotkit_server* server);
/* Blocks until every conflict is resolved or annotkit_server_stop() is called. */
ANNOTKIT_API void annotkit_server_wait(annotkit_server* server);
ANNOTKIT_API void annotkit_server_stop(annotkit_server* server);
/* Final session state as JSON. */
ANNOTKIT_API annotkit_status annotkit_server_state(const annotkit_server* server, char** state);
ANNOTKIT_API void annotkit_server_destroy(annotkit_server* server);

#ifdef __cplusplus
}
#endif

#endif
