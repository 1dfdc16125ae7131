/*
 * aknn — approximate kNN affinity graphs over dense vector datasets, with
 * LSH bucketing (plain and multi-probe), an exact brute-force oracle,
 * diffusion-based query re-ranking and retrieval evaluation.
 *
 * C binding of the C++ core. All objects are opaque handles created and
 * destroyed through this interface; functions report an aknn_status and
 * leave a human-readable detail in a thread-local message retrievable via
 * aknn_last_error().
 */

#ifndef AKNN_H
#define AKNN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AKNN_API __declspec(dllexport)
#else
#define AKNN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aknn_status {
  AKNN_OK = 0,
  AKNN_ERR_IO = 1,
  AKNN_ERR_FORMAT = 2,
  AKNN_ERR_INVALID_ARGUMENT = 3,
  AKNN_ERR_DIMENSION_MISMATCH = 4,
  AKNN_ERR_ZERO_NORM = 5,
  AKNN_ERR_OUT_OF_RANGE = 6,
  AKNN_ERR_STATE = 7,
  AKNN_ERR_NO_CONVERGENCE = 8,
  AKNN_ERR_INTERNAL = 9
} aknn_status;

/* Library semantic version, e.g. "1.0.0". */
AKNN_API const char* aknn_version(void);

/* Version number of the binary graph file format. */
AKNN_API uint32_t aknn_graph_format_version(void);

AKNN_API const char* aknn_status_name(aknn_status status);

/* Detail message of the last failing call on this thread ("" when none). */
AKNN_API const char* aknn_last_error(void);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */

typedef struct aknn_dataset aknn_dataset;

/* Loads an fvecs file (per record: little-endian int32 dimension followed
 * by that many little-endian float32 values). When normalize is nonzero,
 * rows are scaled to unit Euclidean norm after loading. */
AKNN_API aknn_status aknn_dataset_load_fvecs(const char* path, int normalize,
                                             aknn_dataset** out);

/* Copies count*dim floats from a caller buffer (row-major). */
AKNN_API aknn_status aknn_dataset_from_buffer(const float* data,
                                              uint64_t count, uint32_t dim,
                                              int normalize,
                                              aknn_dataset** out);

AKNN_API aknn_status aknn_dataset_save_fvecs(const aknn_dataset* ds,
                                             const char* path);

AKNN_API uint64_t aknn_dataset_count(const aknn_dataset* ds);
AKNN_API uint32_t aknn_dataset_dim(const aknn_dataset* ds);

/* Borrowed pointer to row i (dim floats); valid until the set is freed.
 * Returns NULL when i is out of range. */
AKNN_API const float* aknn_dataset_row(const aknn_dataset* ds, uint64_t i);

AKNN_API void aknn_dataset_free(aknn_dataset* ds);

/* ------------------------------------------------------------------ */
/* Graph construction                                                  */

typedef struct aknn_graph aknn_graph;

typedef enum aknn_method {
  AKNN_METHOD_LSH = 0,
  AKNN_METHOD_MULTIPROBE = 1,
  AKNN_METHOD_BRUTEFORCE = 2
} aknn_method;

typedef struct aknn_build_params {
  aknn_method method;
  uint32_t bits;    /* hyperplanes per table (code width) */
  uint32_t tables;  /* hash table count */
  double gamma;     /* multi-probe retention fraction in [0, 1] */
  float threshold;  /* minimum edge weight kept */
  uint64_t seed;    /* hyperplane / probe selection seed */
  uint32_t workers; /* 0 = hardware default */
} aknn_build_params;

/* Defaults: lsh, bits 6, tables 20, gamma 0.5, threshold 0.3, seed 42,
 * workers 0. */
AKNN_API void aknn_build_params_init(aknn_build_params* p);

typedef struct aknn_build_report {
  aknn_method method;
  uint64_t edges_considered; /* similarity evaluations, duplicates included */
  uint64_t edges_kept;       /* post-threshold, post-dedup edge count */
  double projection_seconds; /* hashing and bucket assignment */
  double creation_seconds;   /* all-pairs, merge, dedup, CSR conversion */
  uint64_t max_bucket_size;  /* largest bucket seen; 0 for brute force */
} aknn_build_report;

/* Builds the affinity graph for ds. report may be NULL. The graph is
 * deterministic for a fixed seed, for any worker count. */
AKNN_API aknn_status aknn_graph_build(const aknn_dataset* ds,
                                      const aknn_build_params* params,
                                      aknn_graph** out,
                                      aknn_build_report* report);

/* Binary graph file, little-endian: magic "AKNN", uint32 version, uint64 n,
 * uint64 nnz, float32 threshold, then nnz sorted upper-triangular records
 * of (uint32 row, uint32 col, float32 weight). */
AKNN_API aknn_status aknn_graph_save(const aknn_graph* g, const char* path);
AKNN_API aknn_status aknn_graph_load(const char* path, aknn_graph** out);

AKNN_API uint64_t aknn_graph_nodes(const aknn_graph* g);
AKNN_API uint64_t aknn_graph_edges(const aknn_graph* g);
AKNN_API float aknn_graph_threshold(const aknn_graph* g);

/* Symmetric lookup: weight stored at (min(i,j), max(i,j)). *present is set
 * to 1 and *weight filled when the edge exists, else *present = 0. */
AKNN_API aknn_status aknn_graph_lookup(const aknn_graph* g, uint64_t i,
                                       uint64_t j, float* weight,
                                       int* present);

AKNN_API void aknn_graph_free(aknn_graph* g);

/* Fraction of oracle edges present in approx; both graphs must share node
 * count and threshold. */
AKNN_API aknn_status aknn_edge_recall(const aknn_graph* approx,
                                      const aknn_graph* oracle,
                                      double* recall);

/* ------------------------------------------------------------------ */
/* Diffusion                                                           */

typedef struct aknn_diffuser aknn_diffuser;

typedef struct aknn_diffusion_params {
  double alpha;       /* damping in (0, 1) */
  uint32_t k_seed;    /* seeds per query */
  double tolerance;   /* relative residual target */
  uint32_t max_iters; /* solver iteration cap */
  uint32_t row_topk;  /* 0 = off; per-node edge truncation before
                         normalization */
  uint32_t workers;   /* batch parallelism across queries; 0 = default */
} aknn_diffusion_params;

/* Defaults: alpha 0.99, k_seed 10, tolerance 1e-6, max_iters 200,
 * row_topk 0, workers 0. */
AKNN_API void aknn_diffusion_params_init(aknn_diffusion_params* p);

/* Prepares diffusion over a dataset/graph pair: applies the optional
 * row_topk truncation and the symmetric normalization once, then serves any
 * number of queries. The dataset handle must stay alive for the diffuser's
 * lifetime. */
AKNN_API aknn_status aknn_diffuser_create(const aknn_dataset* ds,
                                          const aknn_graph* g,
                                          const aknn_diffusion_params* params,
                                          aknn_diffuser** out);

/* Number of nodes with no incident edge; such nodes can only be reached by
 * seeding them directly. */
AKNN_API uint64_t aknn_diffuser_isolated_nodes(const aknn_diffuser* d);

/* Ranks every dataset item for one query of dataset dimensionality.
 * out_ids/out_scores receive count entries in descending score order.
 * converged/iterations may be NULL. A solver that hits the iteration cap
 * reports converged = 0 but still returns its best ranking. */
AKNN_API aknn_status aknn_diffuser_run(const aknn_diffuser* d,
                                       const float* query, uint32_t dim,
                                       uint32_t* out_ids, float* out_scores,
                                       int* converged, uint32_t* iterations);

AKNN_API void aknn_diffuser_free(aknn_diffuser* d);

typedef struct aknn_diffuse_stats {
  uint64_t queries;
  uint64_t nonconverged;
  uint64_t isolated_nodes;
} aknn_diffuse_stats;

/* Diffuses every row of queries against ds/g and writes the rankings file:
 * one line per query of (query_index, item_id, score) triples in rank
 * order, scores with 6 decimal places. stats may be NULL. */
AKNN_API aknn_status aknn_diffuse_to_file(const aknn_dataset* ds,
                                          const aknn_graph* g,
                                          const aknn_dataset* queries,
                                          const aknn_diffusion_params* params,
                                          const char* rankings_path,
                                          aknn_diffuse_stats* stats);

/* ------------------------------------------------------------------ */
/* Evaluation                                                          */

typedef struct aknn_groundtruth aknn_groundtruth;
typedef struct aknn_rankings aknn_rankings;

/* Ground-truth text file: per query a block
 *   query <index>
 *   relevant <id> <id> ...
 *   ignore <id> ...        (optional)
 */
AKNN_API aknn_status aknn_groundtruth_load(const char* path,
                                           aknn_groundtruth** out);
AKNN_API uint64_t aknn_groundtruth_count(const aknn_groundtruth* gt);

/* Query index of ground-truth block `ordinal` (file order). */
AKNN_API aknn_status aknn_groundtruth_query_index(const aknn_groundtruth* gt,
                                                  uint64_t ordinal,
                                                  uint64_t* query_index);
AKNN_API void aknn_groundtruth_free(aknn_groundtruth* gt);

AKNN_API aknn_status aknn_rankings_load(const char* path,
                                        aknn_rankings** out);
AKNN_API uint64_t aknn_rankings_count(const aknn_rankings* r);
AKNN_API void aknn_rankings_free(aknn_rankings* r);

/* Average precision of the ranking matching ground-truth block `ordinal`.
 * Ignored ids are dropped from the ranking before scoring. */
AKNN_API aknn_status aknn_average_precision(const aknn_rankings* r,
                                            const aknn_groundtruth* gt,
                                            uint64_t ordinal, double* ap);

AKNN_API aknn_status aknn_mean_average_precision(const aknn_rankings* r,
                                                 const aknn_groundtruth* gt,
                                                 double* map);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* AKNN_H */
