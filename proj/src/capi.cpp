// C binding. Exceptions from the core are caught at this boundary and
// translated into status codes plus a thread-local detail message.

#include "aknn.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "core/descriptor_set.hpp"
#include "core/diffusion.hpp"
#include "core/error.hpp"
#include "core/eval.hpp"
#include "core/graph_build.hpp"
#include "core/lsh.hpp"
#include "core/parallel.hpp"
#include "core/sparse.hpp"

struct aknn_dataset {
  aknn::DescriptorSet ds;
};

struct aknn_graph {
  aknn::CsrMatrix csr;
};

struct aknn_diffuser {
  const aknn_dataset* ds = nullptr;
  aknn::CsrMatrix normalized;
  uint64_t isolated = 0;
  aknn::DiffusionParams params;
};

struct aknn_groundtruth {
  aknn::GroundTruth gt;
};

struct aknn_rankings {
  std::vector<aknn::RankedList> lists;
};

namespace {

thread_local std::string t_last_error;

aknn_status to_c_status(aknn::Status s) {
  switch (s) {
    case aknn::Status::ok: return AKNN_OK;
    case aknn::Status::io_error: return AKNN_ERR_IO;
    case aknn::Status::format_error: return AKNN_ERR_FORMAT;
    case aknn::Status::invalid_argument: return AKNN_ERR_INVALID_ARGUMENT;
    case aknn::Status::dimension_mismatch: return AKNN_ERR_DIMENSION_MISMATCH;
    case aknn::Status::zero_norm: return AKNN_ERR_ZERO_NORM;
    case aknn::Status::out_of_range: return AKNN_ERR_OUT_OF_RANGE;
    case aknn::Status::bad_state: return AKNN_ERR_STATE;
    case aknn::Status::no_convergence: return AKNN_ERR_NO_CONVERGENCE;
    case aknn::Status::internal: return AKNN_ERR_INTERNAL;
  }
  return AKNN_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
aknn_status guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return AKNN_OK;
  } catch (const aknn::Error& e) {
    t_last_error = e.what();
    return to_c_status(e.status());
  } catch (const std::bad_alloc&) {
    t_last_error = "out of memory";
    return AKNN_ERR_INTERNAL;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return AKNN_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return AKNN_ERR_INTERNAL;
  }
}

aknn_status require(bool ok, const char* message) {
  if (ok) return AKNN_OK;
  t_last_error = message;
  return AKNN_ERR_INVALID_ARGUMENT;
}

aknn::BuildMethod to_core_method(aknn_method m) {
  switch (m) {
    case AKNN_METHOD_LSH: return aknn::BuildMethod::lsh;
    case AKNN_METHOD_MULTIPROBE: return aknn::BuildMethod::multi_probe;
    case AKNN_METHOD_BRUTEFORCE: return aknn::BuildMethod::brute_force;
  }
  aknn::raise(aknn::Status::invalid_argument, "unknown build method");
}

aknn_method to_c_method(aknn::BuildMethod m) {
  switch (m) {
    case aknn::BuildMethod::lsh: return AKNN_METHOD_LSH;
    case aknn::BuildMethod::multi_probe: return AKNN_METHOD_MULTIPROBE;
    case aknn::BuildMethod::brute_force: return AKNN_METHOD_BRUTEFORCE;
  }
  return AKNN_METHOD_LSH;
}

aknn::DiffusionParams to_core_params(const aknn_diffusion_params& p) {
  aknn::DiffusionParams core;
  core.alpha = p.alpha;
  core.k_seed = p.k_seed;
  core.tolerance = p.tolerance;
  core.max_iters = p.max_iters;
  core.row_topk = p.row_topk;
  core.workers = p.workers;
  return core;
}

// Shared by diffuser_create and diffuse_to_file: row truncation (optional)
// followed by symmetric normalization.
std::unique_ptr<aknn_diffuser> make_diffuser(const aknn_dataset* ds,
                                             const aknn_graph* g,
                                             const aknn_diffusion_params& p) {
  if (ds->ds.count() != g->csr.n) {
    aknn::raise(aknn::Status::invalid_argument,
                "dataset count " + std::to_string(ds->ds.count()) +
                    " does not match graph size " + std::to_string(g->csr.n));
  }
  auto handle = std::make_unique<aknn_diffuser>();
  handle->ds = ds;
  handle->params = to_core_params(p);
  const aknn::CsrMatrix* base = &g->csr;
  aknn::CsrMatrix truncated;
  if (handle->params.row_topk > 0) {
    truncated = aknn::row_topk_filter(g->csr, handle->params.row_topk);
    base = &truncated;
  }
  auto normalized = aknn::sym_normalize(*base);
  handle->normalized = std::move(normalized.matrix);
  handle->isolated = normalized.isolated.size();
  return handle;
}

}  // namespace

extern "C" {

const char* aknn_version(void) { return "1.0.0"; }

uint32_t aknn_graph_format_version(void) { return aknn::kGraphFormatVersion; }

const char* aknn_status_name(aknn_status status) {
  switch (status) {
    case AKNN_OK: return "ok";
    case AKNN_ERR_IO: return "io_error";
    case AKNN_ERR_FORMAT: return "format_error";
    case AKNN_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case AKNN_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case AKNN_ERR_ZERO_NORM: return "zero_norm";
    case AKNN_ERR_OUT_OF_RANGE: return "out_of_range";
    case AKNN_ERR_STATE: return "bad_state";
    case AKNN_ERR_NO_CONVERGENCE: return "no_convergence";
    case AKNN_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* aknn_last_error(void) { return t_last_error.c_str(); }

/* ---- datasets ---- */

aknn_status aknn_dataset_load_fvecs(const char* path, int normalize,
                                    aknn_dataset** out) {
  if (auto st = require(path && out, "null argument")) return st;
  return guarded([&] {
    auto handle = std::make_unique<aknn_dataset>();
    handle->ds = aknn::load_fvecs(path);
    if (normalize && handle->ds.count() > 0) {
      handle->ds = aknn::l2_normalize(handle->ds);
    }
    *out = handle.release();
  });
}

aknn_status aknn_dataset_from_buffer(const float* data, uint64_t count,
                                     uint32_t dim, int normalize,
                                     aknn_dataset** out) {
  if (auto st = require(out != nullptr, "null output argument")) return st;
  return guarded([&] {
    auto handle = std::make_unique<aknn_dataset>();
    handle->ds = aknn::make_descriptor_set(data, count, dim);
    if (normalize && count > 0) handle->ds = aknn::l2_normalize(handle->ds);
    *out = handle.release();
  });
}

aknn_status aknn_dataset_save_fvecs(const aknn_dataset* ds,
                                    const char* path) {
  if (auto st = require(ds && path, "null argument")) return st;
  return guarded([&] { aknn::save_fvecs(ds->ds, path); });
}

uint64_t aknn_dataset_count(const aknn_dataset* ds) {
  return ds ? ds->ds.count() : 0;
}

uint32_t aknn_dataset_dim(const aknn_dataset* ds) {
  return ds ? ds->ds.dim : 0;
}

const float* aknn_dataset_row(const aknn_dataset* ds, uint64_t i) {
  if (ds == nullptr || i >= ds->ds.count()) return nullptr;
  return ds->ds.row(i);
}

void aknn_dataset_free(aknn_dataset* ds) { delete ds; }

/* ---- graph construction ---- */

void aknn_build_params_init(aknn_build_params* p) {
  if (p == nullptr) return;
  p->method = AKNN_METHOD_LSH;
  p->bits = 6;
  p->tables = 20;
  p->gamma = 0.5;
  p->threshold = 0.3f;
  p->seed = 42;
  p->workers = 0;
}

aknn_status aknn_graph_build(const aknn_dataset* ds,
                             const aknn_build_params* params,
                             aknn_graph** out, aknn_build_report* report) {
  if (auto st = require(ds && params && out, "null argument")) return st;
  return guarded([&] {
    aknn::GraphResult res;
    switch (to_core_method(params->method)) {
      case aknn::BuildMethod::lsh: {
        const auto family = aknn::make_hash_family(
            params->bits, params->tables, ds->ds.dim, params->seed);
        res = aknn::build_lsh_graph(ds->ds, family, params->threshold,
                                    params->workers);
        break;
      }
      case aknn::BuildMethod::multi_probe: {
        const auto family = aknn::make_hash_family(
            params->bits, params->tables, ds->ds.dim, params->seed);
        res = aknn::build_multiprobe_graph(ds->ds, family, params->gamma,
                                           params->threshold, params->workers);
        break;
      }
      case aknn::BuildMethod::brute_force:
        res = aknn::build_bruteforce_graph(ds->ds, params->threshold,
                                           params->workers);
        break;
    }
    if (report != nullptr) {
      report->method = to_c_method(res.report.method);
      report->edges_considered = res.report.edges_considered;
      report->edges_kept = res.report.edges_kept;
      report->projection_seconds = res.report.projection_seconds;
      report->creation_seconds = res.report.creation_seconds;
      report->max_bucket_size = res.report.max_bucket_size;
    }
    auto handle = std::make_unique<aknn_graph>();
    handle->csr = std::move(res.graph);
    *out = handle.release();
  });
}

aknn_status aknn_graph_save(const aknn_graph* g, const char* path) {
  if (auto st = require(g && path, "null argument")) return st;
  return guarded([&] { aknn::save_graph(g->csr, path); });
}

aknn_status aknn_graph_load(const char* path, aknn_graph** out) {
  if (auto st = require(path && out, "null argument")) return st;
  return guarded([&] {
    auto handle = std::make_unique<aknn_graph>();
    handle->csr = aknn::load_graph(path);
    *out = handle.release();
  });
}

uint64_t aknn_graph_nodes(const aknn_graph* g) { return g ? g->csr.n : 0; }

uint64_t aknn_graph_edges(const aknn_graph* g) { return g ? g->csr.nnz() : 0; }

float aknn_graph_threshold(const aknn_graph* g) {
  return g ? g->csr.threshold : 0.f;
}

aknn_status aknn_graph_lookup(const aknn_graph* g, uint64_t i, uint64_t j,
                              float* weight, int* present) {
  if (auto st = require(g && weight && present, "null argument")) return st;
  return guarded([&] {
    const auto w = aknn::sym_lookup(g->csr, i, j);
    *present = w.has_value() ? 1 : 0;
    *weight = w.value_or(0.f);
  });
}

void aknn_graph_free(aknn_graph* g) { delete g; }

aknn_status aknn_edge_recall(const aknn_graph* approx,
                             const aknn_graph* oracle, double* recall) {
  if (auto st = require(approx && oracle && recall, "null argument")) {
    return st;
  }
  return guarded([&] { *recall = aknn::edge_recall(approx->csr, oracle->csr); });
}

/* ---- diffusion ---- */

void aknn_diffusion_params_init(aknn_diffusion_params* p) {
  if (p == nullptr) return;
  p->alpha = 0.99;
  p->k_seed = 10;
  p->tolerance = 1e-6;
  p->max_iters = 200;
  p->row_topk = 0;
  p->workers = 0;
}

aknn_status aknn_diffuser_create(const aknn_dataset* ds, const aknn_graph* g,
                                 const aknn_diffusion_params* params,
                                 aknn_diffuser** out) {
  if (auto st = require(ds && g && params && out, "null argument")) return st;
  return guarded([&] { *out = make_diffuser(ds, g, *params).release(); });
}

uint64_t aknn_diffuser_isolated_nodes(const aknn_diffuser* d) {
  return d ? d->isolated : 0;
}

aknn_status aknn_diffuser_run(const aknn_diffuser* d, const float* query,
                              uint32_t dim, uint32_t* out_ids,
                              float* out_scores, int* converged,
                              uint32_t* iterations) {
  if (auto st = require(d && query && out_ids && out_scores, "null argument")) {
    return st;
  }
  return guarded([&] {
    const auto res = aknn::diffuse_query(std::span<const float>(query, dim),
                                         d->ds->ds, d->normalized, d->params);
    for (size_t i = 0; i < res.ranking.entries.size(); ++i) {
      out_ids[i] = res.ranking.entries[i].id;
      out_scores[i] = static_cast<float>(res.ranking.entries[i].score);
    }
    if (converged != nullptr) *converged = res.converged ? 1 : 0;
    if (iterations != nullptr) *iterations = res.iterations;
  });
}

void aknn_diffuser_free(aknn_diffuser* d) { delete d; }

aknn_status aknn_diffuse_to_file(const aknn_dataset* ds, const aknn_graph* g,
                                 const aknn_dataset* queries,
                                 const aknn_diffusion_params* params,
                                 const char* rankings_path,
                                 aknn_diffuse_stats* stats) {
  if (auto st = require(ds && g && queries && params && rankings_path,
                        "null argument")) {
    return st;
  }
  return guarded([&] {
    const auto diffuser = make_diffuser(ds, g, *params);

    const uint64_t nq = queries->ds.count();
    if (queries->ds.dim != ds->ds.dim && nq > 0) {
      aknn::raise(aknn::Status::dimension_mismatch,
                  "query dimension " + std::to_string(queries->ds.dim) +
                      " does not match dataset dimension " +
                      std::to_string(ds->ds.dim));
    }

    std::vector<aknn::RankedList> rankings(nq);
    std::vector<uint8_t> ok(nq, 1);
    aknn::parallel_chunks(nq, params->workers,
                          [&](unsigned, uint64_t begin, uint64_t end) {
                            for (uint64_t qi = begin; qi < end; ++qi) {
                              auto res = aknn::diffuse_query(
                                  queries->ds.row_span(qi), ds->ds,
                                  diffuser->normalized, diffuser->params, qi);
                              ok[qi] = res.converged ? 1 : 0;
                              rankings[qi] = std::move(res.ranking);
                            }
                          });
    aknn::save_rankings(rankings, rankings_path);

    if (stats != nullptr) {
      stats->queries = nq;
      stats->nonconverged = 0;
      for (uint64_t qi = 0; qi < nq; ++qi) {
        if (!ok[qi]) ++stats->nonconverged;
      }
      stats->isolated_nodes = diffuser->isolated;
    }
  });
}

/* ---- evaluation ---- */

aknn_status aknn_groundtruth_load(const char* path, aknn_groundtruth** out) {
  if (auto st = require(path && out, "null argument")) return st;
  return guarded([&] {
    auto handle = std::make_unique<aknn_groundtruth>();
    handle->gt = aknn::load_ground_truth(path);
    *out = handle.release();
  });
}

uint64_t aknn_groundtruth_count(const aknn_groundtruth* gt) {
  return gt ? gt->gt.entries.size() : 0;
}

aknn_status aknn_groundtruth_query_index(const aknn_groundtruth* gt,
                                         uint64_t ordinal,
                                         uint64_t* query_index) {
  if (auto st = require(gt && query_index, "null argument")) return st;
  return guarded([&] {
    if (ordinal >= gt->gt.entries.size()) {
      aknn::raise(aknn::Status::out_of_range,
                  "ground-truth block " + std::to_string(ordinal) +
                      " out of range");
    }
    *query_index = gt->gt.entries[ordinal].query_index;
  });
}

void aknn_groundtruth_free(aknn_groundtruth* gt) { delete gt; }

aknn_status aknn_rankings_load(const char* path, aknn_rankings** out) {
  if (auto st = require(path && out, "null argument")) return st;
  return guarded([&] {
    auto handle = std::make_unique<aknn_rankings>();
    handle->lists = aknn::load_rankings(path);
    *out = handle.release();
  });
}

uint64_t aknn_rankings_count(const aknn_rankings* r) {
  return r ? r->lists.size() : 0;
}

void aknn_rankings_free(aknn_rankings* r) { delete r; }

aknn_status aknn_average_precision(const aknn_rankings* r,
                                   const aknn_groundtruth* gt,
                                   uint64_t ordinal, double* ap) {
  if (auto st = require(r && gt && ap, "null argument")) return st;
  return guarded([&] {
    if (ordinal >= gt->gt.entries.size()) {
      aknn::raise(aknn::Status::out_of_range,
                  "ground-truth block " + std::to_string(ordinal) +
                      " out of range");
    }
    const auto& entry = gt->gt.entries[ordinal];
    for (const auto& list : r->lists) {
      if (list.query_index == entry.query_index) {
        *ap = aknn::average_precision(list, entry);
        return;
      }
    }
    aknn::raise(aknn::Status::invalid_argument,
                "no ranking for query " + std::to_string(entry.query_index));
  });
}

aknn_status aknn_mean_average_precision(const aknn_rankings* r,
                                        const aknn_groundtruth* gt,
                                        double* map) {
  if (auto st = require(r && gt && map, "null argument")) return st;
  return guarded(
      [&] { *map = aknn::mean_average_precision(r->lists, gt->gt); });
}

} /* extern "C" */
