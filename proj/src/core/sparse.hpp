#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace aknn {

// One upper-triangular affinity entry: row < col, weight >= the matrix
// threshold. The diagonal is never stored; diffusion supplies it implicitly.
struct CooEntry {
  uint32_t row;
  uint32_t col;
  float weight;
};

inline bool operator==(const CooEntry& a, const CooEntry& b) {
  return a.row == b.row && a.col == b.col && a.weight == b.weight;
}

// Build form of the affinity graph. Entries accumulate in push order,
// possibly with duplicates from different hash tables; one sort_dedup pass
// canonicalizes before conversion to CSR.
class CooMatrix {
 public:
  CooMatrix(uint64_t n, float threshold);

  // Stores (min(i,j), max(i,j), w) when w >= threshold; below-threshold
  // weights are never materialized. Self-loops and out-of-range ids are
  // errors.
  void push(uint64_t i, uint64_t j, float w) {
    if (i >= n_ || j >= n_) raise_out_of_range(i, j);
    if (i == j) raise_self_loop(i);
    sorted_dedup_ = false;
    if (!(w >= threshold_)) return;
    const uint32_t r = static_cast<uint32_t>(i < j ? i : j);
    const uint32_t c = static_cast<uint32_t>(i < j ? j : i);
    entries_.push_back(CooEntry{r, c, w});
  }

  // Sorts by (row, col) and keeps one entry per coordinate. Duplicate
  // weights come from re-evaluating the same pair and are expected equal;
  // if they differ the maximum survives.
  void sort_dedup();

  // Merge contract: workers build private matrices, a single thread
  // concatenates them, then one final sort_dedup runs.
  void append(const CooMatrix& other);

  uint64_t n() const { return n_; }
  float threshold() const { return threshold_; }
  bool sorted_dedup() const { return sorted_dedup_; }
  const std::vector<CooEntry>& entries() const { return entries_; }
  void reserve(size_t n) { entries_.reserve(n); }

 private:
  [[noreturn]] void raise_out_of_range(uint64_t i, uint64_t j) const;
  [[noreturn]] void raise_self_loop(uint64_t i) const;

  uint64_t n_;
  float threshold_;
  std::vector<CooEntry> entries_;
  bool sorted_dedup_ = true;  // vacuously sorted while empty
};

// Solve form: compressed rows over the upper-triangular entry set. The
// logical matrix is the symmetric closure; lookups and products fold the
// lower triangle in on the fly.
struct CsrMatrix {
  uint64_t n = 0;
  float threshold = 0.f;
  std::vector<uint64_t> row_ptr;  // n + 1 offsets
  std::vector<uint32_t> col_idx;
  std::vector<float> values;

  uint64_t nnz() const { return col_idx.size(); }
};

// Requires a sort_dedup'd matrix.
CsrMatrix coo_to_csr(const CooMatrix& m);

// Expands back to the sorted triplet list (round-trip helper).
std::vector<CooEntry> csr_to_entries(const CsrMatrix& m);

// Weight stored at (min(i,j), max(i,j)), if any. Symmetric by construction.
std::optional<float> sym_lookup(const CsrMatrix& m, uint64_t i, uint64_t j);

struct NormalizeResult {
  CsrMatrix matrix;
  std::vector<uint32_t> isolated;  // nodes with zero degree, rows left empty
};

// S = D^-1/2 W D^-1/2 over the symmetrized matrix, with deg_i the sum of
// weights incident to i. Requires non-negative weights.
NormalizeResult sym_normalize(const CsrMatrix& m);

// Graph file, little-endian: magic "AKNN", uint32 version, uint64 n,
// uint64 nnz, float32 threshold, then nnz records of (uint32 row,
// uint32 col, float32 weight), sorted, upper-triangular.
inline constexpr uint32_t kGraphFormatVersion = 1;

void save_graph(const CsrMatrix& m, const std::string& path);
CsrMatrix load_graph(const std::string& path);

}  // namespace aknn
