// Black-box checks of the shared-library surface: only aknn.h, no core
// headers.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "aknn.h"

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

// Clustered rows around axis-aligned-ish unit centers.
std::vector<float> clustered_rows(uint64_t n, uint32_t dim, uint32_t clusters,
                                  uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> gauss(0.f, 1.f);
  std::vector<float> centers(size_t(clusters) * dim);
  for (auto& v : centers) v = gauss(rng);
  std::vector<float> rows(size_t(n) * dim);
  for (uint64_t i = 0; i < n; ++i) {
    const float* c = centers.data() + (i % clusters) * dim;
    for (uint32_t k = 0; k < dim; ++k) {
      rows[i * dim + k] = c[k] + 0.25f * gauss(rng);
    }
  }
  return rows;
}

struct Handles {  // tiny RAII helpers for the opaque types
  template <typename T, void (*F)(T*)>
  struct Owner {
    T* p = nullptr;
    ~Owner() { F(p); }
    T** out() { return &p; }
    T* get() const { return p; }
  };
};

using DatasetOwner = Handles::Owner<aknn_dataset, aknn_dataset_free>;
using GraphOwner = Handles::Owner<aknn_graph, aknn_graph_free>;
using DiffuserOwner = Handles::Owner<aknn_diffuser, aknn_diffuser_free>;
using GtOwner = Handles::Owner<aknn_groundtruth, aknn_groundtruth_free>;
using RankingsOwner = Handles::Owner<aknn_rankings, aknn_rankings_free>;

}  // namespace

TEST_CASE("version strings are exposed") {
  CHECK(std::strlen(aknn_version()) > 0);
  CHECK(aknn_graph_format_version() == 1);
  CHECK(std::string(aknn_status_name(AKNN_OK)) == "ok");
  CHECK(std::string(aknn_status_name(AKNN_ERR_IO)) == "io_error");
}

TEST_CASE("datasets build from buffers and normalize") {
  const std::vector<float> rows = {3.f, 4.f, 0.f, 2.f};
  DatasetOwner ds;
  REQUIRE(aknn_dataset_from_buffer(rows.data(), 2, 2, 1, ds.out()) == AKNN_OK);
  CHECK(aknn_dataset_count(ds.get()) == 2);
  CHECK(aknn_dataset_dim(ds.get()) == 2);
  const float* r0 = aknn_dataset_row(ds.get(), 0);
  REQUIRE(r0 != nullptr);
  CHECK(r0[0] == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(r0[1] == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(aknn_dataset_row(ds.get(), 2) == nullptr);
}

TEST_CASE("null arguments and zero rows report errors") {
  CHECK(aknn_dataset_load_fvecs(nullptr, 1, nullptr) ==
        AKNN_ERR_INVALID_ARGUMENT);

  DatasetOwner missing;
  const aknn_status st =
      aknn_dataset_load_fvecs("/nonexistent/x.fvecs", 1, missing.out());
  CHECK(st == AKNN_ERR_IO);
  CHECK(std::strlen(aknn_last_error()) > 0);

  const std::vector<float> zero = {0.f, 0.f};
  DatasetOwner bad;
  CHECK(aknn_dataset_from_buffer(zero.data(), 1, 2, 1, bad.out()) ==
        AKNN_ERR_ZERO_NORM);
}

TEST_CASE("fvecs files round-trip through the C surface") {
  const auto rows = clustered_rows(32, 8, 4, 7);
  DatasetOwner ds;
  REQUIRE(aknn_dataset_from_buffer(rows.data(), 32, 8, 1, ds.out()) ==
          AKNN_OK);
  const std::string path = temp_path("capi_roundtrip.fvecs");
  REQUIRE(aknn_dataset_save_fvecs(ds.get(), path.c_str()) == AKNN_OK);

  DatasetOwner back;
  REQUIRE(aknn_dataset_load_fvecs(path.c_str(), 0, back.out()) == AKNN_OK);
  REQUIRE(aknn_dataset_count(back.get()) == 32);
  CHECK(std::memcmp(aknn_dataset_row(back.get(), 0),
                    aknn_dataset_row(ds.get(), 0), 8 * sizeof(float)) == 0);
}

TEST_CASE("graphs build, persist and answer symmetric lookups") {
  const auto rows = clustered_rows(300, 16, 6, 11);
  DatasetOwner ds;
  REQUIRE(aknn_dataset_from_buffer(rows.data(), 300, 16, 1, ds.out()) ==
          AKNN_OK);

  aknn_build_params params;
  aknn_build_params_init(&params);
  CHECK(params.bits == 6);
  CHECK(params.tables == 20);
  CHECK(params.threshold == 0.3f);
  params.seed = 99;

  GraphOwner lsh;
  aknn_build_report report;
  REQUIRE(aknn_graph_build(ds.get(), &params, lsh.out(), &report) == AKNN_OK);
  CHECK(report.method == AKNN_METHOD_LSH);
  CHECK(report.edges_kept == aknn_graph_edges(lsh.get()));
  CHECK(report.edges_kept <= report.edges_considered);
  CHECK(report.max_bucket_size > 0);
  CHECK(aknn_graph_nodes(lsh.get()) == 300);
  CHECK(aknn_graph_threshold(lsh.get()) == 0.3f);

  const std::string path = temp_path("capi_graph.aknn");
  REQUIRE(aknn_graph_save(lsh.get(), path.c_str()) == AKNN_OK);
  GraphOwner loaded;
  REQUIRE(aknn_graph_load(path.c_str(), loaded.out()) == AKNN_OK);
  CHECK(aknn_graph_edges(loaded.get()) == aknn_graph_edges(lsh.get()));

  params.method = AKNN_METHOD_BRUTEFORCE;
  GraphOwner bf;
  REQUIRE(aknn_graph_build(ds.get(), &params, bf.out(), nullptr) == AKNN_OK);

  // every lsh edge appears in the oracle with the identical weight
  uint64_t checked = 0;
  for (uint64_t i = 0; i < 300 && checked < 500; ++i) {
    for (uint64_t j = i + 1; j < 300 && checked < 500; ++j) {
      float wl = 0.f, wb = 0.f;
      int pl = 0, pb = 0;
      REQUIRE(aknn_graph_lookup(lsh.get(), i, j, &wl, &pl) == AKNN_OK);
      REQUIRE(aknn_graph_lookup(bf.get(), j, i, &wb, &pb) == AKNN_OK);
      if (pl) {
        CHECK(pb == 1);
        CHECK(wl == wb);
        ++checked;
      }
    }
  }
  CHECK(checked > 0);

  double recall = 0.0;
  REQUIRE(aknn_edge_recall(lsh.get(), bf.get(), &recall) == AKNN_OK);
  CHECK(recall > 0.0);
  CHECK(recall <= 1.0);
}

TEST_CASE("builds are deterministic for any worker count") {
  const auto rows = clustered_rows(400, 12, 8, 21);
  DatasetOwner ds;
  REQUIRE(aknn_dataset_from_buffer(rows.data(), 400, 12, 1, ds.out()) ==
          AKNN_OK);

  aknn_build_params params;
  aknn_build_params_init(&params);
  params.method = AKNN_METHOD_MULTIPROBE;
  params.seed = 5;

  auto build_file = [&](uint32_t workers, const std::string& name) {
    params.workers = workers;
    GraphOwner g;
    REQUIRE(aknn_graph_build(ds.get(), &params, g.out(), nullptr) == AKNN_OK);
    const std::string path = temp_path(name);
    REQUIRE(aknn_graph_save(g.get(), path.c_str()) == AKNN_OK);
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };

  const std::string bytes1 = build_file(1, "capi_w1.aknn");
  const std::string bytes4 = build_file(4, "capi_w4.aknn");
  REQUIRE(!bytes1.empty());
  CHECK(bytes1 == bytes4);
}

TEST_CASE("unknown build methods are rejected") {
  const auto rows = clustered_rows(10, 4, 2, 3);
  DatasetOwner ds;
  REQUIRE(aknn_dataset_from_buffer(rows.data(), 10, 4, 1, ds.out()) ==
          AKNN_OK);
  aknn_build_params params;
  aknn_build_params_init(&params);
  params.method = static_cast<aknn_method>(42);
  GraphOwner g;
  CHECK(aknn_graph_build(ds.get(), &params, g.out(), nullptr) ==
        AKNN_ERR_INVALID_ARGUMENT);
}

TEST_CASE("diffusion ranks cluster mates first") {
  const uint32_t dim = 16;
  const uint64_t n = 200;
  const auto rows = clustered_rows(n, dim, 4, 17);
  DatasetOwner ds;
  REQUIRE(aknn_dataset_from_buffer(rows.data(), n, dim, 1, ds.out()) ==
          AKNN_OK);

  aknn_build_params bparams;
  aknn_build_params_init(&bparams);
  bparams.method = AKNN_METHOD_BRUTEFORCE;
  GraphOwner graph;
  REQUIRE(aknn_graph_build(ds.get(), &bparams, graph.out(), nullptr) ==
          AKNN_OK);

  aknn_diffusion_params dparams;
  aknn_diffusion_params_init(&dparams);
  CHECK(dparams.alpha == 0.99);
  CHECK(dparams.k_seed == 10);

  DiffuserOwner diffuser;
  REQUIRE(aknn_diffuser_create(ds.get(), graph.get(), &dparams,
                               diffuser.out()) == AKNN_OK);

  // query = dataset row 0 (cluster 0 under round-robin labels)
  std::vector<uint32_t> ids(n);
  std::vector<float> scores(n);
  int converged = 0;
  uint32_t iters = 0;
  REQUIRE(aknn_diffuser_run(diffuser.get(), aknn_dataset_row(ds.get(), 0), dim,
                            ids.data(), scores.data(), &converged,
                            &iters) == AKNN_OK);
  CHECK(converged == 1);
  CHECK(iters > 0);
  CHECK(ids[0] % 4 == 0);  // a cluster mate tops the ranking
  for (uint64_t k = 1; k < n; ++k) CHECK(scores[k - 1] >= scores[k]);

  // most of the top quarter should be cluster mates (id % 4 == 0)
  int mates = 0;
  for (uint64_t k = 0; k < n / 4; ++k) mates += (ids[k] % 4 == 0) ? 1 : 0;
  CHECK(mates > int(n / 8));
}

TEST_CASE("batch diffusion writes rankings that evaluate cleanly") {
  const uint32_t dim = 12;
  const uint64_t n = 120;
  const uint32_t clusters = 4;
  const auto rows = clustered_rows(n + clusters, dim, clusters, 77);

  DatasetOwner ds;
  REQUIRE(aknn_dataset_from_buffer(rows.data(), n, dim, 1, ds.out()) ==
          AKNN_OK);
  DatasetOwner queries;  // one held-out row per cluster
  REQUIRE(aknn_dataset_from_buffer(rows.data() + n * dim, clusters, dim, 1,
                                   queries.out()) == AKNN_OK);

  aknn_build_params bparams;
  aknn_build_params_init(&bparams);
  bparams.method = AKNN_METHOD_BRUTEFORCE;
  GraphOwner graph;
  REQUIRE(aknn_graph_build(ds.get(), &bparams, graph.out(), nullptr) ==
          AKNN_OK);

  aknn_diffusion_params dparams;
  aknn_diffusion_params_init(&dparams);

  const std::string rankings_path = temp_path("capi_rankings.txt");
  aknn_diffuse_stats stats{};
  REQUIRE(aknn_diffuse_to_file(ds.get(), graph.get(), queries.get(), &dparams,
                               rankings_path.c_str(), &stats) == AKNN_OK);
  CHECK(stats.queries == clusters);
  CHECK(stats.nonconverged == 0);

  // ground truth: query q's cluster mates are ids with id % clusters == q
  const std::string gt_path = temp_path("capi_gt.txt");
  {
    std::ofstream out(gt_path);
    for (uint32_t q = 0; q < clusters; ++q) {
      out << "query " << q << "\nrelevant";
      for (uint64_t id = q; id < n; id += clusters) out << " " << id;
      out << "\n";
    }
  }

  RankingsOwner rankings;
  REQUIRE(aknn_rankings_load(rankings_path.c_str(), rankings.out()) ==
          AKNN_OK);
  CHECK(aknn_rankings_count(rankings.get()) == clusters);

  GtOwner gt;
  REQUIRE(aknn_groundtruth_load(gt_path.c_str(), gt.out()) == AKNN_OK);
  REQUIRE(aknn_groundtruth_count(gt.get()) == clusters);
  uint64_t qidx = 0;
  REQUIRE(aknn_groundtruth_query_index(gt.get(), 2, &qidx) == AKNN_OK);
  CHECK(qidx == 2);

  double ap = 0.0;
  REQUIRE(aknn_average_precision(rankings.get(), gt.get(), 0, &ap) == AKNN_OK);
  CHECK(ap > 0.5);

  double map = 0.0;
  REQUIRE(aknn_mean_average_precision(rankings.get(), gt.get(), &map) ==
          AKNN_OK);
  CHECK(map > 0.5);
  CHECK(map <= 1.0);
}

TEST_CASE("diffuser rejects mismatched dataset and graph") {
  const auto rows = clustered_rows(20, 6, 2, 5);
  DatasetOwner ds;
  REQUIRE(aknn_dataset_from_buffer(rows.data(), 20, 6, 1, ds.out()) ==
          AKNN_OK);
  DatasetOwner small;
  REQUIRE(aknn_dataset_from_buffer(rows.data(), 10, 6, 1, small.out()) ==
          AKNN_OK);

  aknn_build_params bparams;
  aknn_build_params_init(&bparams);
  bparams.method = AKNN_METHOD_BRUTEFORCE;
  GraphOwner graph;
  REQUIRE(aknn_graph_build(ds.get(), &bparams, graph.out(), nullptr) ==
          AKNN_OK);

  aknn_diffusion_params dparams;
  aknn_diffusion_params_init(&dparams);
  DiffuserOwner diffuser;
  CHECK(aknn_diffuser_create(small.get(), graph.get(), &dparams,
                             diffuser.out()) == AKNN_ERR_INVALID_ARGUMENT);
}
