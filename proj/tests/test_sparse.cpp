#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <vector>

#ifdef AKNN_HAVE_EIGEN
#include <Eigen/Dense>
#endif

#include "core/random.hpp"
#include "core/sparse.hpp"

using aknn::CooEntry;
using aknn::CooMatrix;
using aknn::coo_to_csr;
using aknn::csr_to_entries;
using aknn::CsrMatrix;
using aknn::Error;
using aknn::load_graph;
using aknn::save_graph;
using aknn::Status;
using aknn::sym_lookup;
using aknn::sym_normalize;

TEST_CASE("push stores the canonical upper-triangular orientation") {
  CooMatrix m(5, 0.3f);
  m.push(3, 1, 0.7f);
  REQUIRE(m.entries().size() == 1);
  CHECK(m.entries()[0].row == 1);
  CHECK(m.entries()[0].col == 3);
  CHECK(m.entries()[0].weight == 0.7f);
}

TEST_CASE("push drops weights below the threshold") {
  CooMatrix m(5, 0.3f);
  m.push(1, 3, 0.29f);
  CHECK(m.entries().empty());
  m.push(1, 3, 0.3f);  // boundary value is kept
  CHECK(m.entries().size() == 1);
}

TEST_CASE("push rejects self-loops and out-of-range ids") {
  CooMatrix m(5, 0.3f);
  CHECK_THROWS_WITH_AS(m.push(2, 2, 0.9f), doctest::Contains("self-loop"),
                       Error);
  try {
    m.push(0, 5, 0.9f);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.status() == Status::out_of_range);
  }
}

TEST_CASE("sort_dedup removes exact duplicates") {
  CooMatrix m(5, 0.0f);
  m.push(0, 1, 0.9f);
  m.push(0, 1, 0.9f);
  m.push(1, 2, 0.5f);
  m.sort_dedup();
  const std::vector<CooEntry> expect = {{0, 1, 0.9f}, {1, 2, 0.5f}};
  CHECK(m.entries() == expect);
  CHECK(m.sorted_dedup());
}

TEST_CASE("sort_dedup orders by (row, col)") {
  CooMatrix m(5, 0.0f);
  m.push(1, 2, 0.5f);
  m.push(0, 1, 0.9f);
  m.sort_dedup();
  const std::vector<CooEntry> expect = {{0, 1, 0.9f}, {1, 2, 0.5f}};
  CHECK(m.entries() == expect);
}

TEST_CASE("sort_dedup on an empty matrix is a no-op") {
  CooMatrix m(4, 0.0f);
  m.sort_dedup();
  CHECK(m.entries().empty());
}

TEST_CASE("sort_dedup keeps the maximum of diverging duplicates") {
  CooMatrix m(4, 0.0f);
  m.push(2, 0, 0.4f);
  m.push(0, 2, 0.6f);
  m.push(2, 0, 0.5f);
  m.sort_dedup();
  REQUIRE(m.entries().size() == 1);
  CHECK(m.entries()[0].weight == 0.6f);
}

// Set-semantics oracle: map of (row, col) -> max weight.
TEST_CASE("sort_dedup matches a set-semantics oracle on random multisets") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const uint64_t n = 2 + aknn::uniform_below(rng, 49);
    CooMatrix m(n, 0.0f);
    std::map<std::pair<uint32_t, uint32_t>, float> oracle;
    const int pushes = int(aknn::uniform_below(rng, 120));
    for (int k = 0; k < pushes; ++k) {
      uint64_t i = aknn::uniform_below(rng, n);
      uint64_t j = aknn::uniform_below(rng, n);
      if (i == j) continue;
      const float w = float(aknn::uniform_below(rng, 1000)) / 1000.0f;
      m.push(i, j, w);
      const auto key = std::make_pair(uint32_t(std::min(i, j)),
                                      uint32_t(std::max(i, j)));
      auto it = oracle.find(key);
      if (it == oracle.end()) {
        oracle[key] = w;
      } else {
        it->second = std::max(it->second, w);
      }
    }
    m.sort_dedup();
    REQUIRE(m.entries().size() == oracle.size());
    size_t idx = 0;
    for (const auto& [key, w] : oracle) {  // std::map iterates sorted
      CHECK(m.entries()[idx].row == key.first);
      CHECK(m.entries()[idx].col == key.second);
      CHECK(m.entries()[idx].weight == w);
      ++idx;
    }
  }
}

TEST_CASE("coo_to_csr lays rows out correctly") {
  CooMatrix m(3, 0.0f);
  m.push(0, 1, 0.9f);
  m.push(1, 2, 0.5f);
  m.sort_dedup();
  const CsrMatrix csr = coo_to_csr(m);
  CHECK(csr.row_ptr == std::vector<uint64_t>{0, 1, 2, 2});
  CHECK(csr.col_idx == std::vector<uint32_t>{1, 2});
  CHECK(csr.values == std::vector<float>{0.9f, 0.5f});
}

TEST_CASE("coo_to_csr of an empty matrix has empty rows") {
  CooMatrix m(2, 0.0f);
  m.sort_dedup();
  const CsrMatrix csr = coo_to_csr(m);
  CHECK(csr.row_ptr == std::vector<uint64_t>{0, 0, 0});
  CHECK(csr.nnz() == 0);
}

TEST_CASE("coo_to_csr single entry") {
  CooMatrix m(2, 0.0f);
  m.push(0, 1, 0.4f);
  m.sort_dedup();
  const CsrMatrix csr = coo_to_csr(m);
  CHECK(csr.row_ptr == std::vector<uint64_t>{0, 1, 1});
  CHECK(csr.col_idx == std::vector<uint32_t>{1});
  CHECK(csr.values == std::vector<float>{0.4f});
}

TEST_CASE("coo_to_csr refuses an unsorted matrix") {
  CooMatrix m(3, 0.0f);
  m.push(0, 1, 0.9f);
  try {
    coo_to_csr(m);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.status() == Status::bad_state);
  }
}

TEST_CASE("CSR expands back to the sorted COO exactly") {
  std::mt19937_64 rng(77);
  const uint64_t n = 40;
  CooMatrix m(n, 0.0f);
  for (int k = 0; k < 300; ++k) {
    uint64_t i = aknn::uniform_below(rng, n);
    uint64_t j = aknn::uniform_below(rng, n);
    if (i == j) continue;
    m.push(i, j, float(aknn::uniform_below(rng, 1000)) / 999.0f);
  }
  m.sort_dedup();
  const CsrMatrix csr = coo_to_csr(m);
  CHECK(csr_to_entries(csr) == m.entries());
}

TEST_CASE("sym_lookup folds in the lower triangle") {
  CooMatrix m(5, 0.0f);
  m.push(1, 3, 0.7f);
  m.sort_dedup();
  const CsrMatrix csr = coo_to_csr(m);
  CHECK(sym_lookup(csr, 3, 1) == 0.7f);
  CHECK(sym_lookup(csr, 1, 3) == 0.7f);
  CHECK_FALSE(sym_lookup(csr, 0, 2).has_value());
  CHECK_THROWS_AS(sym_lookup(csr, 0, 9), Error);
}

TEST_CASE("sym_lookup is symmetric on random queries") {
  std::mt19937_64 rng(5);
  const uint64_t n = 30;
  CooMatrix m(n, 0.0f);
  for (int k = 0; k < 150; ++k) {
    uint64_t i = aknn::uniform_below(rng, n);
    uint64_t j = aknn::uniform_below(rng, n);
    if (i == j) continue;
    m.push(i, j, float(k % 17) / 17.0f);
  }
  m.sort_dedup();
  const CsrMatrix csr = coo_to_csr(m);
  for (int q = 0; q < 1000; ++q) {
    const uint64_t i = aknn::uniform_below(rng, n);
    const uint64_t j = aknn::uniform_below(rng, n);
    CHECK(sym_lookup(csr, i, j) == sym_lookup(csr, j, i));
  }
}

TEST_CASE("sym_normalize handles unit degrees") {
  CooMatrix m(2, 0.0f);
  m.push(0, 1, 1.0f);
  m.sort_dedup();
  const auto res = sym_normalize(coo_to_csr(m));
  CHECK(res.isolated.empty());
  CHECK(sym_lookup(res.matrix, 0, 1) == 1.0f);
}

TEST_CASE("sym_normalize scales a chain by the degree geometric mean") {
  CooMatrix m(3, 0.0f);
  m.push(0, 1, 1.0f);
  m.push(1, 2, 1.0f);
  m.sort_dedup();
  const auto res = sym_normalize(coo_to_csr(m));
  // degrees (1, 2, 1): both edges become 1/sqrt(2)
  const float expected = 0.70710678f;
  CHECK(*sym_lookup(res.matrix, 0, 1) ==
        doctest::Approx(expected).epsilon(1e-6));
  CHECK(*sym_lookup(res.matrix, 1, 2) ==
        doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("sym_normalize flags isolated nodes") {
  CooMatrix m(2, 0.0f);
  m.sort_dedup();
  const auto res = sym_normalize(coo_to_csr(m));
  CHECK(res.matrix.nnz() == 0);
  CHECK(res.isolated == std::vector<uint32_t>{0, 1});
}

TEST_CASE("sym_normalize rejects negative weights") {
  CooMatrix m(2, -1.0f);
  m.push(0, 1, -0.5f);
  m.sort_dedup();
  CHECK_THROWS_AS(sym_normalize(coo_to_csr(m)), Error);
}

namespace {

// Random connected graph: a spanning path plus extra random edges.
CsrMatrix random_connected(uint64_t n, std::mt19937_64& rng) {
  CooMatrix m(n, 0.0f);
  for (uint64_t i = 0; i + 1 < n; ++i) {
    m.push(i, i + 1, 0.05f + float(aknn::uniform_below(rng, 1000)) / 1000.0f);
  }
  for (uint64_t k = 0; k < 2 * n; ++k) {
    const uint64_t i = aknn::uniform_below(rng, n);
    const uint64_t j = aknn::uniform_below(rng, n);
    if (i == j) continue;
    m.push(i, j, 0.05f + float(aknn::uniform_below(rng, 1000)) / 1000.0f);
  }
  m.sort_dedup();
  return coo_to_csr(m);
}

}  // namespace

#ifdef AKNN_HAVE_EIGEN
TEST_CASE("normalized matrices have spectral radius at most 1") {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 20; ++trial) {
    const uint64_t n = 5 + aknn::uniform_below(rng, 96);
    const CsrMatrix csr = random_connected(n, rng);
    const auto res = sym_normalize(csr);

    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(long(n), long(n));
    for (const auto& e : csr_to_entries(res.matrix)) {
      dense(e.row, e.col) = e.weight;
      dense(e.col, e.row) = e.weight;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    const double largest =
        std::max(std::fabs(solver.eigenvalues().minCoeff()),
                 std::fabs(solver.eigenvalues().maxCoeff()));
    CHECK(largest <= 1.0 + 1e-6);
  }
}
#endif

TEST_CASE("normalized matrices stay symmetric under lookup") {
  std::mt19937_64 rng(8);
  const CsrMatrix csr = random_connected(60, rng);
  const auto res = sym_normalize(csr);
  for (int q = 0; q < 500; ++q) {
    const uint64_t i = aknn::uniform_below(rng, csr.n);
    const uint64_t j = aknn::uniform_below(rng, csr.n);
    const auto a = sym_lookup(res.matrix, i, j);
    const auto b = sym_lookup(res.matrix, j, i);
    REQUIRE(a.has_value() == b.has_value());
    if (a) CHECK(std::fabs(*a - *b) <= 1e-7f);
  }
}

TEST_CASE("graph file round-trips") {
  std::mt19937_64 rng(99);
  const CsrMatrix csr = random_connected(37, rng);
  const auto path =
      (std::filesystem::temp_directory_path() / "sp_roundtrip.aknn").string();
  save_graph(csr, path);
  const CsrMatrix back = load_graph(path);
  CHECK(back.n == csr.n);
  CHECK(back.threshold == csr.threshold);
  CHECK(back.row_ptr == csr.row_ptr);
  CHECK(back.col_idx == csr.col_idx);
  CHECK(back.values == csr.values);
}

TEST_CASE("graph loader rejects malformed files") {
  const auto dir = std::filesystem::temp_directory_path();

  const auto bad_magic = (dir / "sp_badmagic.aknn").string();
  {
    std::ofstream out(bad_magic, std::ios::binary);
    out << "NOPE";
  }
  CHECK_THROWS_AS(load_graph(bad_magic), Error);

  const auto truncated = (dir / "sp_trunc.aknn").string();
  {
    std::ofstream out(truncated, std::ios::binary);
    out << "AKNN";
  }
  CHECK_THROWS_AS(load_graph(truncated), Error);

  CHECK_THROWS_AS(load_graph("/nonexistent/file.aknn"), Error);
}

TEST_CASE("merge contract: append then one final sort_dedup") {
  CooMatrix a(6, 0.1f);
  CooMatrix b(6, 0.1f);
  a.push(0, 1, 0.5f);
  a.push(2, 3, 0.4f);
  b.push(1, 0, 0.5f);
  b.push(4, 5, 0.9f);
  a.append(b);
  a.sort_dedup();
  const std::vector<CooEntry> expect = {
      {0, 1, 0.5f}, {2, 3, 0.4f}, {4, 5, 0.9f}};
  CHECK(a.entries() == expect);

  CooMatrix wrong_n(5, 0.1f);
  CHECK_THROWS_AS(a.append(wrong_n), Error);
}
