// Copyright 2026 The dlflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DLFLOW_DLFLOW_H
#define DLFLOW_DLFLOW_H

#include <stddef.h>

#if defined(_WIN32)
#define DLFLOW_API __declspec(dllexport)
#else
#define DLFLOW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Zero is success; every failure sets dlflow_last_error(). */
typedef enum dlflow_status {
  DLFLOW_OK = 0,
  DLFLOW_E_INVALID_ARGUMENT = 1,
  DLFLOW_E_NOT_FOUND = 2,
  DLFLOW_E_DUPLICATE_NAME = 3,
  DLFLOW_E_INVALID_NAME = 4,
  DLFLOW_E_PATH_ESCAPE = 5,
  DLFLOW_E_UNKNOWN_TRANSFORM = 6,
  DLFLOW_E_MISSING_INPUT_REPO = 7,
  DLFLOW_E_TRANSFORM_FAILURE = 8,
  DLFLOW_E_INVALID_FRACTION = 9,
  DLFLOW_E_DANGLING_PATH = 10,
  DLFLOW_E_MALFORMED_ROW = 11,
  DLFLOW_E_NON_MONOTONIC_STEP = 12,
  DLFLOW_E_NO_COMPLETED_TRIALS = 13,
  DLFLOW_E_LEARNER_ERROR = 14,
  DLFLOW_E_DATA_NOT_FOUND = 15,
  DLFLOW_E_INVALID_CONFIG = 16,
  DLFLOW_E_MISSING_CHECKPOINT = 17,
  DLFLOW_E_PERMISSION_DENIED = 18,
  DLFLOW_E_WRONG_STAGE = 19,
  DLFLOW_E_GATE_FAILED = 20,
  DLFLOW_E_MISSING_TEST_METRICS = 21,
  DLFLOW_E_SELF_REVIEW_DENIED = 22,
  DLFLOW_E_MISSING_ARTIFACT = 23,
  DLFLOW_E_NO_PRODUCTION_VERSION = 24,
  DLFLOW_E_ENDPOINT_CONFLICT = 25,
  DLFLOW_E_MALFORMED_PAYLOAD = 26,
  DLFLOW_E_ILLEGAL_TRANSITION = 27,
  DLFLOW_E_SHAPE_MISMATCH = 28,
  DLFLOW_E_NON_FINITE_LOSS = 29,
  DLFLOW_E_EMPTY_DATASET = 30,
  DLFLOW_E_IO = 31,
  DLFLOW_E_INTERNAL = 32
} dlflow_status;

typedef struct dlflow_context dlflow_context;
typedef struct dlflow_server dlflow_server;

DLFLOW_API const char* dlflow_version(void);

/* Kebab-case name of a status, e.g. "gate-failed". */
DLFLOW_API const char* dlflow_status_name(int status);

/* Message of the last failed call on this thread; "" after a success. */
DLFLOW_API const char* dlflow_last_error(void);

/* Opens the store at `root`. A NULL root reads DLFLOW_ROOT (default
   ".dlflow"); a negative `deterministic` reads DLFLOW_DETERMINISTIC. */
DLFLOW_API int dlflow_open(const char* root, int deterministic, dlflow_context** out);
DLFLOW_API void dlflow_close(dlflow_context* ctx);

/* Runs one command. `args_json` is a JSON object or NULL; on success
   `*out_json` receives a JSON document to release with dlflow_free(). */
DLFLOW_API int dlflow_call(dlflow_context* ctx, const char* op, const char* args_json, char** out_json);

/* Newline-separated list of the names dlflow_call() accepts. */
DLFLOW_API int dlflow_commands(char** out);

/* Commits `count` files given as byte buffers. */
DLFLOW_API int dlflow_commit(dlflow_context* ctx, const char* repo, const char* branch, const char* author,
                             const char* message, size_t count, const char* const* paths,
                             const char* const* data, const size_t* sizes, char** out_json);

/* Reads one file; `*out` holds `*size` bytes plus a trailing NUL. */
DLFLOW_API int dlflow_read_file(dlflow_context* ctx, const char* repo, const char* ref, const char* path,
                                char** out, size_t* size);

/* Scores a raw request body such as {"data": "some text"}. */
DLFLOW_API int dlflow_predict(dlflow_context* ctx, const char* deployment, const char* body, size_t size,
                              char** out_json);

/* HTTP front end. Port 0 picks a free port, reported in `*bound_port`. */
DLFLOW_API int dlflow_server_start(dlflow_context* ctx, const char* host, int port, dlflow_server** out,
                                   int* bound_port);
/* Blocks until the server stops. */
DLFLOW_API int dlflow_server_wait(dlflow_server* server);
/* Stops serving and wakes dlflow_server_wait(); the handle stays valid. */
DLFLOW_API void dlflow_server_stop(dlflow_server* server);
/* Releases a stopped server. */
DLFLOW_API void dlflow_server_free(dlflow_server* server);

DLFLOW_API void dlflow_free(void* p);

#ifdef __cplusplus
}
#endif

#endif /* DLFLOW_DLFLOW_H */
