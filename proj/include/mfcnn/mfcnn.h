/*
 * C interface to the mfcnn 1-D convolutional network library.
 *
 * Every function returns an mfcnn_status. On failure a thread-local message is
 * available from mfcnn_last_error() until the next call on the same thread.
 * Handles are opaque and owned by the caller; release them with the matching
 * *_free function. Strings returned through char** are heap-allocated and
 * must be released with mfcnn_string_free().
 */
#ifndef MFCNN_H
#define MFCNN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MFCNN_BUILDING)
#    define MFCNN_API __declspec(dllexport)
#  else
#    define MFCNN_API __declspec(dllimport)
#  endif
#else
#  define MFCNN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mfcnn_status {
  MFCNN_OK = 0,
  MFCNN_ERR_LENGTH = 1,
  MFCNN_ERR_SHAPE = 2,
  MFCNN_ERR_DOMAIN = 3,
  MFCNN_ERR_ZERO_ENERGY = 4,
  MFCNN_ERR_CONFIG = 5,
  MFCNN_ERR_TAPE_MISMATCH = 6,
  MFCNN_ERR_IO = 7,
  MFCNN_ERR_INVALID_ARGUMENT = 8,
  MFCNN_ERR_BUFFER_TOO_SMALL = 9,
  MFCNN_ERR_INTERNAL = 10
} mfcnn_status;

typedef struct mfcnn_config mfcnn_config;
typedef struct mfcnn_network mfcnn_network;

MFCNN_API const char* mfcnn_version(void);
MFCNN_API const char* mfcnn_status_name(mfcnn_status status);
MFCNN_API const char* mfcnn_last_error(void);
MFCNN_API void mfcnn_string_free(char* s);

/* ---- Signal kernels. Output lengths are written to *out_len; when `out` is
 * NULL only the length is reported. MFCNN_ERR_BUFFER_TOO_SMALL when
 * out_capacity is short. */
MFCNN_API mfcnn_status mfcnn_xcorr_valid(const double* x, size_t n, const double* w, size_t m,
                                         double* out, size_t out_capacity, size_t* out_len);
MFCNN_API mfcnn_status mfcnn_xcorr_same(const double* x, size_t n, const double* w, size_t m,
                                        double* out, size_t out_capacity, size_t* out_len);
MFCNN_API mfcnn_status mfcnn_conv_full(const double* a, size_t n, const double* b, size_t m,
                                       double* out, size_t out_capacity, size_t* out_len);
MFCNN_API mfcnn_status mfcnn_softmax(const double* y, size_t n, double* out);
MFCNN_API mfcnn_status mfcnn_energy(const double* x, size_t n, double* out);

/* ---- Matched filtering. `templates` holds template_count signals laid out
 * back to back; template_lengths[k] gives each length. */
MFCNN_API mfcnn_status mfcnn_detect_feature(const double* x, size_t n, const double* templates,
                                            const size_t* template_lengths, size_t template_count,
                                            size_t* winner, double* peak_values,
                                            size_t* peak_indices);

/* ---- Pipeline configuration. */
MFCNN_API mfcnn_status mfcnn_config_preset(const char* name, mfcnn_config** out);
MFCNN_API mfcnn_status mfcnn_config_parse(const char* json_text, mfcnn_config** out);
MFCNN_API mfcnn_status mfcnn_config_load(const char* path, mfcnn_config** out);
/* Keys: seed, epochs, lr, lr_bias, keep_prob, realizations, test_count,
 * schedule ("standard" | "layerwise"). */
MFCNN_API mfcnn_status mfcnn_config_set(mfcnn_config* cfg, const char* key, const char* value);
MFCNN_API mfcnn_status mfcnn_config_to_json(const mfcnn_config* cfg, char** out_json);
MFCNN_API void mfcnn_config_free(mfcnn_config* cfg);

/* ---- Networks. */
MFCNN_API mfcnn_status mfcnn_network_create(const mfcnn_config* cfg, mfcnn_network** out);
MFCNN_API mfcnn_status mfcnn_network_load(const char* model_path, mfcnn_network** out);
MFCNN_API mfcnn_status mfcnn_network_save(const mfcnn_network* net, const char* model_path);
MFCNN_API mfcnn_status mfcnn_network_config(const mfcnn_network* net, mfcnn_config** out);
MFCNN_API mfcnn_status mfcnn_network_info(const mfcnn_network* net, size_t* input_length,
                                          size_t* output_length, size_t* parameter_count,
                                          size_t* dense_weight_count);
/* Sets every weight and bias to zero. */
MFCNN_API mfcnn_status mfcnn_network_zero(mfcnn_network* net);
MFCNN_API mfcnn_status mfcnn_network_forward(const mfcnn_network* net, const double* x, size_t n,
                                             double* out, size_t out_capacity);
MFCNN_API void mfcnn_network_free(mfcnn_network* net);

/* ---- Commands. Reports are JSON documents. */
MFCNN_API mfcnn_status mfcnn_run_train(const mfcnn_config* cfg, const char* out_dir,
                                       int write_gnuplot, char** report_json);
MFCNN_API mfcnn_status mfcnn_run_eval(const mfcnn_network* net, const mfcnn_config* cfg,
                                      size_t count, char** report_json);
/* report has "passed"; the call itself succeeds on a threshold breach. */
MFCNN_API mfcnn_status mfcnn_run_gradcheck(const mfcnn_config* cfg, size_t trials, double h,
                                           char** report_json);
MFCNN_API mfcnn_status mfcnn_run_matched(const char* signal_csv_path,
                                         const char* templates_csv_path, const char* out_dir,
                                         int equal_energy, char** report_json);
MFCNN_API mfcnn_status mfcnn_run_matched_simulation(const mfcnn_config* cfg, size_t trials,
                                                    uint64_t seed, int equal_energy,
                                                    char** report_json);
MFCNN_API mfcnn_status mfcnn_run_shapes(const char* arch_path, char** report_json);
MFCNN_API mfcnn_status mfcnn_param_budget(uint64_t k, uint64_t k2, uint64_t m2,
                                          uint64_t* direct, uint64_t* factored,
                                          double* ratio, int* beneficial);
MFCNN_API mfcnn_status mfcnn_dump_dataset(const mfcnn_config* cfg, size_t count,
                                          const char* csv_path);

#ifdef __cplusplus
}
#endif

#endif /* MFCNN_H */
