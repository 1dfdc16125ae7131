#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/descriptor_set.hpp"
#include "core/sparse.hpp"

namespace aknn {

// Query scores propagate over the graph by solving
//   (I - alpha * S) f = (1 - alpha) * y
// with S the symmetrically normalized affinity matrix and y the seed vector.
// alpha < 1 and spectral_radius(S) <= 1 make the system positive definite,
// so conjugate gradient applies.
struct DiffusionParams {
  double alpha = 0.99;
  uint32_t k_seed = 10;
  double tolerance = 1e-6;  // relative residual target
  uint32_t max_iters = 200;
  uint32_t row_topk = 0;  // 0 = off; row truncation before normalization
  unsigned workers = 0;   // batch-level parallelism across queries
};

// Seed vector: similarity mass at the k_seed nearest dataset items.
struct SeedVector {
  uint64_t size = 0;  // logical length (dataset count)
  std::vector<uint32_t> indices;
  std::vector<float> values;  // similarities clamped below at 0
};

// Picks the k_seed items with the largest cosine similarity to q, ties
// broken by lower index.
SeedVector seed_vector(std::span<const float> q, const DescriptorSet& ds,
                       uint32_t k_seed);

struct SolveResult {
  std::vector<double> scores;
  bool converged = false;
  uint32_t iterations = 0;
  double relative_residual = 0.0;
};

// Conjugate gradient on (I - alpha*S) f = (1-alpha) y, to
// ||residual|| <= tolerance * ||(1-alpha) y||. On non-convergence the best
// iterate comes back with converged = false; it is not an error.
SolveResult solve_diffusion(const CsrMatrix& S, const SeedVector& y,
                            const DiffusionParams& p);

struct RankedEntry {
  uint32_t id;
  double score;
};

// Descending-score ordering of all item ids for one query; ties broken by
// ascending id. The query itself is not excluded here — evaluators decide
// what to ignore.
struct RankedList {
  uint64_t query_index = 0;
  std::vector<RankedEntry> entries;
};

struct QueryResult {
  RankedList ranking;
  bool converged = false;
  uint32_t iterations = 0;
};

// seed_vector + solve_diffusion + sort. S must already be normalized.
QueryResult diffuse_query(std::span<const float> q, const DescriptorSet& ds,
                          const CsrMatrix& S, const DiffusionParams& p,
                          uint64_t query_index = 0);

// Keeps, per node, its row_topk strongest incident edges over the symmetric
// closure; an edge survives when either endpoint retains it. Applied before
// normalization when DiffusionParams::row_topk is set.
CsrMatrix row_topk_filter(const CsrMatrix& m, uint32_t k);

}  // namespace aknn
