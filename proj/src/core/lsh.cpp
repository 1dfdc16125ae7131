#include "core/lsh.hpp"

#include <algorithm>
#include <cmath>

#include "core/parallel.hpp"
#include "core/random.hpp"

namespace aknn {

namespace {

void check_family_args(uint32_t delta, uint32_t tables, uint32_t dim) {
  if (delta == 0 || delta > 30) {
    raise(Status::invalid_argument,
          "bits per code must be in [1, 30], got " + std::to_string(delta));
  }
  if (tables == 0) raise(Status::invalid_argument, "table count must be > 0");
  if (dim == 0) raise(Status::invalid_argument, "dimension must be > 0");
}

}  // namespace

HashFamily make_hash_family(uint32_t delta, uint32_t tables, uint32_t dim,
                            uint64_t seed) {
  check_family_args(delta, tables, dim);
  HashFamily f;
  f.delta = delta;
  f.tables = tables;
  f.dim = dim;
  f.rng_seed = seed;
  f.hyperplanes.resize(size_t(tables) * delta * dim);
  for (uint32_t t = 0; t < tables; ++t) {
    NormalSampler sampler(mix_seed(seed, t));
    float* dst = f.hyperplanes.data() + size_t(t) * delta * dim;
    for (size_t k = 0; k < size_t(delta) * dim; ++k) {
      dst[k] = static_cast<float>(sampler.next());
    }
  }
  return f;
}

HashFamily make_hash_family_explicit(uint32_t delta, uint32_t tables,
                                     uint32_t dim,
                                     std::vector<float> hyperplanes,
                                     uint64_t seed) {
  check_family_args(delta, tables, dim);
  if (hyperplanes.size() != size_t(tables) * delta * dim) {
    raise(Status::invalid_argument,
          "expected " + std::to_string(size_t(tables) * delta * dim) +
              " hyperplane values, got " + std::to_string(hyperplanes.size()));
  }
  HashFamily f;
  f.delta = delta;
  f.tables = tables;
  f.dim = dim;
  f.rng_seed = seed;
  f.hyperplanes = std::move(hyperplanes);
  return f;
}

uint32_t hash_code(const HashFamily& f, uint32_t table,
                   std::span<const float> x) {
  if (table >= f.tables) {
    raise(Status::out_of_range, "table index " + std::to_string(table) +
                                    " out of range, tables=" +
                                    std::to_string(f.tables));
  }
  if (x.size() != f.dim) {
    raise(Status::dimension_mismatch,
          "vector dimension " + std::to_string(x.size()) +
              " does not match family dimension " + std::to_string(f.dim));
  }
  uint32_t code = 0;
  for (uint32_t bit = 0; bit < f.delta; ++bit) {
    if (dot_product(x.data(), f.plane(table, bit), f.dim) >= 0.f) {
      code |= 1u << bit;
    }
  }
  return code;
}

uint64_t BucketTable::max_bucket_size() const {
  uint64_t best = 0;
  for (const auto& b : buckets) best = std::max<uint64_t>(best, b.size());
  return best;
}

namespace {

// Codes of all items in all tables, items parallelized. codes[i * tables + t]
// depends only on the data, so worker count cannot change it.
std::vector<uint32_t> compute_codes(const HashFamily& f,
                                    const DescriptorSet& ds,
                                    unsigned workers) {
  if (ds.dim != f.dim) {
    raise(Status::dimension_mismatch,
          "dataset dimension " + std::to_string(ds.dim) +
              " does not match family dimension " + std::to_string(f.dim));
  }
  std::vector<uint32_t> codes(ds.count() * f.tables);
  parallel_chunks(ds.count(), workers,
                  [&](unsigned, uint64_t begin, uint64_t end) {
                    for (uint64_t i = begin; i < end; ++i) {
                      for (uint32_t t = 0; t < f.tables; ++t) {
                        codes[i * f.tables + t] = hash_code(f, t, ds.row_span(i));
                      }
                    }
                  });
  return codes;
}

BucketTable make_empty_table(const HashFamily& f) {
  BucketTable bt;
  bt.delta = f.delta;
  bt.tables = f.tables;
  bt.buckets.resize(size_t(f.tables) << f.delta);
  return bt;
}

}  // namespace

BucketTable assign_buckets(const HashFamily& f, const DescriptorSet& ds,
                           unsigned workers) {
  const std::vector<uint32_t> codes = compute_codes(f, ds, workers);
  BucketTable bt = make_empty_table(f);
  for (uint64_t i = 0; i < ds.count(); ++i) {
    for (uint32_t t = 0; t < f.tables; ++t) {
      const uint32_t code = codes[i * f.tables + t];
      bt.buckets[(size_t(t) << f.delta) | code].push_back(
          static_cast<uint32_t>(i));
    }
  }
  return bt;
}

std::vector<uint32_t> probe_neighbors(uint32_t code, uint32_t delta,
                                      double gamma, std::mt19937_64& rng) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    raise(Status::invalid_argument,
          "gamma must lie in [0, 1], got " + std::to_string(gamma));
  }
  if (code >= (1u << delta)) {
    raise(Status::out_of_range, "code " + std::to_string(code) +
                                    " out of range for delta=" +
                                    std::to_string(delta));
  }
  const uint32_t take =
      static_cast<uint32_t>(std::lround(gamma * double(delta)));
  std::vector<uint32_t> neighbors(delta);
  for (uint32_t b = 0; b < delta; ++b) neighbors[b] = code ^ (1u << b);
  // Partial Fisher-Yates: the first `take` slots end up a uniform draw
  // without replacement.
  for (uint32_t k = 0; k < take; ++k) {
    const uint64_t pick = k + uniform_below(rng, delta - k);
    std::swap(neighbors[k], neighbors[pick]);
  }
  neighbors.resize(take);
  return neighbors;
}

BucketTable assign_buckets_multiprobe(const HashFamily& f,
                                      const DescriptorSet& ds, double gamma,
                                      unsigned workers) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    raise(Status::invalid_argument,
          "gamma must lie in [0, 1], got " + std::to_string(gamma));
  }
  const std::vector<uint32_t> codes = compute_codes(f, ds, workers);
  const uint32_t take =
      static_cast<uint32_t>(std::lround(gamma * double(f.delta)));
  const uint32_t per_item = 1 + take;

  // Probe codes per (item, table), drawn from an rng seeded by
  // (family seed, item, table): identical for any worker count.
  std::vector<uint32_t> targets(ds.count() * f.tables * per_item);
  parallel_chunks(
      ds.count(), workers, [&](unsigned, uint64_t begin, uint64_t end) {
        for (uint64_t i = begin; i < end; ++i) {
          for (uint32_t t = 0; t < f.tables; ++t) {
            const uint32_t home = codes[i * f.tables + t];
            uint32_t* dst = targets.data() + (i * f.tables + t) * per_item;
            dst[0] = home;
            std::mt19937_64 rng(mix_seed(f.rng_seed, i, t));
            const auto probes = probe_neighbors(home, f.delta, gamma, rng);
            for (uint32_t k = 0; k < take; ++k) dst[1 + k] = probes[k];
          }
        }
      });

  BucketTable bt = make_empty_table(f);
  for (uint64_t i = 0; i < ds.count(); ++i) {
    for (uint32_t t = 0; t < f.tables; ++t) {
      const uint32_t* src = targets.data() + (i * f.tables + t) * per_item;
      for (uint32_t k = 0; k < per_item; ++k) {
        bt.buckets[(size_t(t) << f.delta) | src[k]].push_back(
            static_cast<uint32_t>(i));
      }
    }
  }
  return bt;
}

}  // namespace aknn
