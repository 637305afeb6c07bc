#ifndef VARINT_H
#define VARINT_H

/* C interface to the variational integrator library. All entry points return
 * an exit code: 0 success, 2 configuration error, 3 solver failure, 4 I/O
 * error. On failure varint_last_error() returns a JSON document
 * {"error": {"code", "field", "message"}} describing the problem; the string
 * stays valid until the next library call on the same thread. */

#ifdef __cplusplus
extern "C" {
#endif

#define VARINT_OK 0
#define VARINT_ERR_CONFIG 2
#define VARINT_ERR_SOLVER 3
#define VARINT_ERR_IO 4

/* Executes the JSON run configuration at config_path and writes the
 * trajectory CSV and summary JSON named in its output section. */
int varint_run(const char* config_path);

/* Same, with the configuration document passed as a string. */
int varint_run_json(const char* config_text);

/* Filon quadrature weights b_i(i*theta) on npoints Lobatto nodes in [0, 1].
 * re and im must hold npoints doubles each. npoints >= 2. */
int varint_filon_weights(int npoints, double theta, double* re, double* im);

/* Conservation diagnostics of a trajectory CSV. */
typedef struct varint_summary varint_summary;

int varint_diagnose(const char* csv_path, varint_summary** out);

/* JSON rendering of the summary; owned by the handle. */
const char* varint_summary_json(const varint_summary* summary);

void varint_summary_free(varint_summary* summary);

/* JSON error document for the most recent failed call on this thread, or an
 * empty string when the last call succeeded. */
const char* varint_last_error(void);

#ifdef __cplusplus
}
#endif

#endif /* VARINT_H */
