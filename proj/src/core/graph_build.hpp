#pragma once

#include <cstdint>
#include <span>

#include "core/descriptor_set.hpp"
#include "core/lsh.hpp"
#include "core/sparse.hpp"

namespace aknn {

enum class BuildMethod { lsh, multi_probe, brute_force };

const char* build_method_name(BuildMethod m);

// Build accounting. The two phases are timed separately: projection covers
// hashing and bucket assignment, creation covers all-pairs scoring, the
// sort-dedup merge and CSR conversion. edges_considered counts similarity
// evaluations including re-evaluations of the same pair in other buckets;
// edges_kept is the post-threshold, post-dedup edge count.
struct BuildReport {
  BuildMethod method = BuildMethod::lsh;
  uint64_t edges_considered = 0;
  uint64_t edges_kept = 0;
  double projection_seconds = 0.0;
  double creation_seconds = 0.0;
  uint64_t max_bucket_size = 0;  // largest bucket seen; 0 for brute force
};

struct GraphResult {
  CsrMatrix graph;
  BuildReport report;
};

// Scores every unordered pair in the bucket and pushes it into out. Returns
// the number of similarity evaluations (|bucket| choose 2).
uint64_t bucket_allpairs(std::span<const uint32_t> bucket,
                         const DescriptorSet& ds, CooMatrix& out);

// Bucket assignment, per-bucket all-pairs into one shared COO, one global
// sort-dedup, CSR. Workers own private COO lists that are concatenated
// before the final sort-dedup; the worker count cannot change the graph.
GraphResult build_lsh_graph(const DescriptorSet& ds, const HashFamily& f,
                            float threshold, unsigned workers = 0);

// Same pipeline over multi-probe bucket assignment.
GraphResult build_multiprobe_graph(const DescriptorSet& ds,
                                   const HashFamily& f, double gamma,
                                   float threshold, unsigned workers = 0);

// Evaluates all count-choose-2 pairs; the exact reference graph used as the
// recall and accuracy oracle.
GraphResult build_bruteforce_graph(const DescriptorSet& ds, float threshold,
                                   unsigned workers = 0);

}  // namespace aknn
