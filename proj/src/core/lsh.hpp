#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "core/descriptor_set.hpp"
#include "core/error.hpp"

namespace aknn {

// Sign-random-projection family: `tables` independent hash tables, each
// defined by `delta` hyperplanes drawn i.i.d. from a standard normal. A table
// maps a vector to a delta-bit code, so a family spans tables * 2^delta
// buckets. Hyperplanes are a pure function of rng_seed; table t draws from
// its own sub-stream, which makes the tables of a smaller family a prefix of
// any larger family built from the same seed.
struct HashFamily {
  uint32_t delta = 0;
  uint32_t tables = 0;
  uint32_t dim = 0;
  uint64_t rng_seed = 0;
  std::vector<float> hyperplanes;  // tables * delta * dim

  const float* plane(uint32_t table, uint32_t bit) const {
    return hyperplanes.data() + (size_t(table) * delta + bit) * dim;
  }

  uint32_t buckets_per_table() const { return 1u << delta; }
  uint64_t bucket_count() const { return uint64_t(buckets_per_table()) * tables; }
};

HashFamily make_hash_family(uint32_t delta, uint32_t tables, uint32_t dim,
                            uint64_t seed);

// Builds a family around caller-chosen hyperplanes (tables * delta * dim
// values); unit tests use this to pin codes by hand.
HashFamily make_hash_family_explicit(uint32_t delta, uint32_t tables,
                                     uint32_t dim,
                                     std::vector<float> hyperplanes,
                                     uint64_t seed = 0);

// delta-bit code of x under one table. Bit i is 1 iff dot(x, plane_i) >= 0
// (a zero projection counts as 1); bit 0 is the least significant bit.
uint32_t hash_code(const HashFamily& f, uint32_t table,
                   std::span<const float> x);

// Per table, 2^delta buckets of item ids. Under plain assignment the buckets
// of one table partition the ids; under multi-probe an id lands in its home
// bucket plus up to round(gamma * delta) probed neighbors.
struct BucketTable {
  uint32_t delta = 0;
  uint32_t tables = 0;
  std::vector<std::vector<uint32_t>> buckets;  // tables << delta lists

  std::span<const uint32_t> bucket(uint32_t table, uint32_t code) const {
    return buckets[(size_t(table) << delta) | code];
  }

  uint64_t max_bucket_size() const;
};

BucketTable assign_buckets(const HashFamily& f, const DescriptorSet& ds,
                           unsigned workers = 0);

// From the delta codes at Hamming distance exactly 1, draws
// round(gamma * delta) codes uniformly without replacement. gamma = 1 keeps
// the whole 1-neighborhood, gamma = 0 none.
std::vector<uint32_t> probe_neighbors(uint32_t code, uint32_t delta,
                                      double gamma, std::mt19937_64& rng);

// Multi-probe assignment: every item is projected into its home bucket and
// its probed neighbors in every table, at projection time. The probe draw is
// seeded per (item, table) from the family seed, so results do not depend on
// worker count.
BucketTable assign_buckets_multiprobe(const HashFamily& f,
                                      const DescriptorSet& ds, double gamma,
                                      unsigned workers = 0);

}  // namespace aknn
