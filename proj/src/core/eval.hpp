#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "core/diffusion.hpp"
#include "core/sparse.hpp"

namespace aknn {

// Relevance judgments for one query. Ignored ids are neither rewarded nor
// penalized: they are dropped from the ranking before scoring. A query that
// appears among the candidates should be listed as ignored by the ground
// truth; the evaluator does not special-case it.
struct GroundTruthEntry {
  uint64_t query_index = 0;
  std::unordered_set<uint32_t> relevant;
  std::unordered_set<uint32_t> ignored;
};

struct GroundTruth {
  std::vector<GroundTruthEntry> entries;
};

// Ground-truth file: UTF-8 text, one block per query:
//   query <index>
//   relevant <id> <id> ...
//   ignore <id> ...        (optional)
GroundTruth load_ground_truth(const std::string& path);

// Mean over the relevant items of precision at their rank; relevant items
// never retrieved contribute zero. Only the rank order of the list matters.
double average_precision(const RankedList& ranking,
                         const GroundTruthEntry& gt);

// Arithmetic mean of per-query AP. Rankings are matched to ground-truth
// blocks by query index; exactly one ranking per block is required.
double mean_average_precision(const std::vector<RankedList>& rankings,
                              const GroundTruth& gt);

// |edges(approx) ∩ edges(oracle)| / |edges(oracle)| over (row, col) pairs.
// Both graphs must share n and threshold. An empty oracle yields 1.
double edge_recall(const CsrMatrix& approx, const CsrMatrix& oracle);

// Rankings file: one line per query holding (query_index, item_id, score)
// triples space-separated in rank order; scores carry 6 decimal places.
void save_rankings(const std::vector<RankedList>& rankings,
                   const std::string& path);
std::vector<RankedList> load_rankings(const std::string& path);

}  // namespace aknn
