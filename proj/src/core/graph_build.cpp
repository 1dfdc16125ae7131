#include "core/graph_build.hpp"

#include <chrono>

#include "core/parallel.hpp"

namespace aknn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_buildable(const DescriptorSet& ds) {
  if (ds.count() < 2) {
    raise(Status::invalid_argument,
          "graph construction needs at least 2 items, got " +
              std::to_string(ds.count()));
  }
}

// All-pairs over every bucket of every table. Buckets are independent work
// units; worker w takes buckets w, w+workers, ... so one oversized bucket
// cannot starve the rest.
GraphResult conquer_buckets(const DescriptorSet& ds, const BucketTable& bt,
                            float threshold, unsigned workers,
                            BuildMethod method, double projection_seconds) {
  const auto t0 = Clock::now();
  const unsigned nworkers = resolve_workers(workers);

  std::vector<CooMatrix> partial(nworkers, CooMatrix(ds.count(), threshold));
  std::vector<uint64_t> considered(nworkers, 0);
  parallel_chunks(nworkers, nworkers, [&](unsigned, uint64_t wb, uint64_t) {
    const auto w = static_cast<unsigned>(wb);
    for (size_t b = w; b < bt.buckets.size(); b += nworkers) {
      considered[w] += bucket_allpairs(bt.buckets[b], ds, partial[w]);
    }
  });

  CooMatrix coo = std::move(partial[0]);
  for (unsigned w = 1; w < nworkers; ++w) coo.append(partial[w]);
  coo.sort_dedup();

  GraphResult res;
  res.graph = coo_to_csr(coo);
  res.report.method = method;
  for (uint64_t c : considered) res.report.edges_considered += c;
  res.report.edges_kept = res.graph.nnz();
  res.report.projection_seconds = projection_seconds;
  res.report.creation_seconds = seconds_since(t0);
  res.report.max_bucket_size = bt.max_bucket_size();
  return res;
}

}  // namespace

const char* build_method_name(BuildMethod m) {
  switch (m) {
    case BuildMethod::lsh: return "lsh";
    case BuildMethod::multi_probe: return "multiprobe";
    case BuildMethod::brute_force: return "bruteforce";
  }
  return "unknown";
}

uint64_t bucket_allpairs(std::span<const uint32_t> bucket,
                         const DescriptorSet& ds, CooMatrix& out) {
  const size_t m = bucket.size();
  for (size_t a = 0; a + 1 < m; ++a) {
    const float* ra = ds.row(bucket[a]);
    for (size_t b = a + 1; b < m; ++b) {
      const float w = dot_product(ra, ds.row(bucket[b]), ds.dim);
      out.push(bucket[a], bucket[b], w);
    }
  }
  return m < 2 ? 0 : uint64_t(m) * (m - 1) / 2;
}

GraphResult build_lsh_graph(const DescriptorSet& ds, const HashFamily& f,
                            float threshold, unsigned workers) {
  check_buildable(ds);
  const auto t0 = Clock::now();
  const BucketTable bt = assign_buckets(f, ds, workers);
  const double projection = seconds_since(t0);
  return conquer_buckets(ds, bt, threshold, workers, BuildMethod::lsh,
                         projection);
}

GraphResult build_multiprobe_graph(const DescriptorSet& ds,
                                   const HashFamily& f, double gamma,
                                   float threshold, unsigned workers) {
  check_buildable(ds);
  const auto t0 = Clock::now();
  const BucketTable bt = assign_buckets_multiprobe(f, ds, gamma, workers);
  const double projection = seconds_since(t0);
  return conquer_buckets(ds, bt, threshold, workers, BuildMethod::multi_probe,
                         projection);
}

GraphResult build_bruteforce_graph(const DescriptorSet& ds, float threshold,
                                   unsigned workers) {
  check_buildable(ds);
  const auto t0 = Clock::now();
  const uint64_t n = ds.count();
  const unsigned nworkers = resolve_workers(workers);

  // Row i carries n-1-i pairs, so rows are dealt round-robin to keep the
  // load even. The entry set is the same for any worker count and the final
  // sort-dedup restores a canonical order.
  std::vector<CooMatrix> partial(nworkers, CooMatrix(n, threshold));
  parallel_chunks(nworkers, nworkers, [&](unsigned, uint64_t wb, uint64_t) {
    const auto w = static_cast<unsigned>(wb);
    CooMatrix& local = partial[w];
    for (uint64_t i = w; i < n; i += nworkers) {
      const float* ri = ds.row(i);
      for (uint64_t j = i + 1; j < n; ++j) {
        local.push(i, j, dot_product(ri, ds.row(j), ds.dim));
      }
    }
  });

  CooMatrix coo = std::move(partial[0]);
  for (unsigned w = 1; w < nworkers; ++w) coo.append(partial[w]);
  coo.sort_dedup();

  GraphResult res;
  res.graph = coo_to_csr(coo);
  res.report.method = BuildMethod::brute_force;
  res.report.edges_considered = n * (n - 1) / 2;
  res.report.edges_kept = res.graph.nnz();
  res.report.projection_seconds = 0.0;
  res.report.creation_seconds = seconds_since(t0);
  return res;
}

}  // namespace aknn
