#include "core/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace aknn {

CooMatrix::CooMatrix(uint64_t n, float threshold)
    : n_(n), threshold_(threshold) {
  if (n > std::numeric_limits<uint32_t>::max()) {
    raise(Status::invalid_argument, "node count exceeds uint32 id space");
  }
}

void CooMatrix::raise_out_of_range(uint64_t i, uint64_t j) const {
  raise(Status::out_of_range, "id out of range: (" + std::to_string(i) + ", " +
                                  std::to_string(j) + "), n=" +
                                  std::to_string(n_));
}

void CooMatrix::raise_self_loop(uint64_t i) const {
  raise(Status::invalid_argument, "self-loop at id " + std::to_string(i));
}

void CooMatrix::sort_dedup() {
  std::sort(entries_.begin(), entries_.end(),
            [](const CooEntry& a, const CooEntry& b) {
              if (a.row != b.row) return a.row < b.row;
              if (a.col != b.col) return a.col < b.col;
              return a.weight > b.weight;
            });
  size_t out = 0;
  for (size_t i = 0; i < entries_.size();) {
    size_t j = i;
    float best = entries_[i].weight;
    while (j < entries_.size() && entries_[j].row == entries_[i].row &&
           entries_[j].col == entries_[i].col) {
      best = std::max(best, entries_[j].weight);
      ++j;
    }
    entries_[out] = CooEntry{entries_[i].row, entries_[i].col, best};
    ++out;
    i = j;
  }
  entries_.resize(out);
  sorted_dedup_ = true;
}

void CooMatrix::append(const CooMatrix& other) {
  if (other.n_ != n_) {
    raise(Status::invalid_argument, "merge of matrices with different n");
  }
  if (other.threshold_ != threshold_) {
    raise(Status::invalid_argument,
          "merge of matrices with different thresholds");
  }
  entries_.insert(entries_.end(), other.entries_.begin(),
                  other.entries_.end());
  if (!other.entries_.empty()) sorted_dedup_ = false;
}

CsrMatrix coo_to_csr(const CooMatrix& m) {
  if (!m.sorted_dedup()) {
    raise(Status::bad_state, "coo_to_csr requires a sort_dedup'd matrix");
  }
  CsrMatrix csr;
  csr.n = m.n();
  csr.threshold = m.threshold();
  csr.row_ptr.assign(m.n() + 1, 0);
  csr.col_idx.reserve(m.entries().size());
  csr.values.reserve(m.entries().size());
  for (const CooEntry& e : m.entries()) {
    csr.row_ptr[e.row + 1]++;
    csr.col_idx.push_back(e.col);
    csr.values.push_back(e.weight);
  }
  for (uint64_t r = 0; r < m.n(); ++r) {
    csr.row_ptr[r + 1] += csr.row_ptr[r];
  }
  return csr;
}

std::vector<CooEntry> csr_to_entries(const CsrMatrix& m) {
  std::vector<CooEntry> out;
  out.reserve(m.nnz());
  for (uint64_t r = 0; r < m.n; ++r) {
    for (uint64_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
      out.push_back(
          CooEntry{static_cast<uint32_t>(r), m.col_idx[k], m.values[k]});
    }
  }
  return out;
}

std::optional<float> sym_lookup(const CsrMatrix& m, uint64_t i, uint64_t j) {
  if (i >= m.n || j >= m.n) {
    raise(Status::out_of_range, "id out of range: (" + std::to_string(i) +
                                    ", " + std::to_string(j) + "), n=" +
                                    std::to_string(m.n));
  }
  const uint32_t r = static_cast<uint32_t>(std::min(i, j));
  const uint32_t c = static_cast<uint32_t>(std::max(i, j));
  const auto begin = m.col_idx.begin() + ptrdiff_t(m.row_ptr[r]);
  const auto end = m.col_idx.begin() + ptrdiff_t(m.row_ptr[r + 1]);
  const auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return std::nullopt;
  return m.values[size_t(it - m.col_idx.begin())];
}

NormalizeResult sym_normalize(const CsrMatrix& m) {
  std::vector<double> degree(m.n, 0.0);
  for (uint64_t r = 0; r < m.n; ++r) {
    for (uint64_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
      if (m.values[k] < 0.f) {
        raise(Status::invalid_argument,
              "negative weight at (" + std::to_string(r) + ", " +
                  std::to_string(m.col_idx[k]) + ")");
      }
      degree[r] += m.values[k];
      degree[m.col_idx[k]] += m.values[k];
    }
  }

  NormalizeResult res;
  res.matrix.n = m.n;
  res.matrix.threshold = 0.f;  // normalized weights no longer honor th
  res.matrix.row_ptr = m.row_ptr;
  res.matrix.col_idx = m.col_idx;
  res.matrix.values.resize(m.values.size());
  for (uint64_t r = 0; r < m.n; ++r) {
    for (uint64_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
      const double d = degree[r] * degree[m.col_idx[k]];
      res.matrix.values[k] =
          static_cast<float>(double(m.values[k]) / std::sqrt(d));
    }
  }
  for (uint64_t i = 0; i < m.n; ++i) {
    if (degree[i] == 0.0) res.isolated.push_back(static_cast<uint32_t>(i));
  }
  return res;
}

namespace {

constexpr char kMagic[4] = {'A', 'K', 'N', 'N'};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
void read_pod(std::ifstream& in, T& v, const char* what) {
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (in.gcount() != sizeof(v)) {
    raise(Status::format_error, std::string("truncated graph file: ") + what);
  }
}

}  // namespace

void save_graph(const CsrMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Status::io_error, "cannot open '" + path + "' for writing");
  out.write(kMagic, 4);
  write_pod(out, kGraphFormatVersion);
  write_pod(out, m.n);
  const uint64_t nnz = m.nnz();
  write_pod(out, nnz);
  write_pod(out, m.threshold);
  for (uint64_t r = 0; r < m.n; ++r) {
    const uint32_t row = static_cast<uint32_t>(r);
    for (uint64_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
      write_pod(out, row);
      write_pod(out, m.col_idx[k]);
      write_pod(out, m.values[k]);
    }
  }
  if (!out) raise(Status::io_error, "write failed for '" + path + "'");
}

CsrMatrix load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Status::io_error, "cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    raise(Status::format_error, "not a graph file (bad magic)");
  }
  uint32_t version = 0;
  read_pod(in, version, "version");
  if (version != kGraphFormatVersion) {
    raise(Status::format_error,
          "unsupported graph format version " + std::to_string(version));
  }
  uint64_t n = 0, nnz = 0;
  float th = 0.f;
  read_pod(in, n, "n");
  read_pod(in, nnz, "nnz");
  read_pod(in, th, "threshold");
  if (n > std::numeric_limits<uint32_t>::max()) {
    raise(Status::format_error, "node count exceeds uint32 id space");
  }

  // 12 bytes per record; the payload must match the header before anything
  // is allocated.
  const std::streamoff header_end = in.tellg();
  in.seekg(0, std::ios::end);
  const std::streamoff file_end = in.tellg();
  in.seekg(header_end);
  if (file_end - header_end != std::streamoff(nnz) * 12) {
    raise(Status::format_error,
          "graph file size does not match the declared entry count");
  }

  CsrMatrix csr;
  csr.n = n;
  csr.threshold = th;
  csr.row_ptr.assign(n + 1, 0);
  csr.col_idx.resize(nnz);
  csr.values.resize(nnz);

  uint32_t prev_row = 0, prev_col = 0;
  for (uint64_t e = 0; e < nnz; ++e) {
    uint32_t row = 0, col = 0;
    float w = 0.f;
    read_pod(in, row, "entry row");
    read_pod(in, col, "entry col");
    read_pod(in, w, "entry weight");
    if (row >= col || col >= n) {
      raise(Status::format_error,
            "entry " + std::to_string(e) + " is not strictly upper-triangular");
    }
    if (e > 0 && (row < prev_row || (row == prev_row && col <= prev_col))) {
      raise(Status::format_error,
            "entries are not sorted at record " + std::to_string(e));
    }
    if (!(w >= th)) {
      raise(Status::format_error, "entry " + std::to_string(e) +
                                      " is below the stored threshold");
    }
    csr.row_ptr[row + 1]++;
    csr.col_idx[e] = col;
    csr.values[e] = w;
    prev_row = row;
    prev_col = col;
  }
  for (uint64_t r = 0; r < n; ++r) csr.row_ptr[r + 1] += csr.row_ptr[r];
  return csr;
}

}  // namespace aknn
