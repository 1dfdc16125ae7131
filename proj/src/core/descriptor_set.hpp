#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace aknn {

// Row-major collection of d-dimensional float vectors. Item ids are the dense
// row indices 0..count-1; a mapping to external names (when one exists) lives
// in a sidecar text file, one name per line. Immutable once built.
struct DescriptorSet {
  uint32_t dim = 0;
  std::vector<float> data;  // count * dim

  uint64_t count() const { return dim == 0 ? 0 : data.size() / dim; }

  const float* row(uint64_t i) const { return data.data() + i * dim; }

  std::span<const float> row_span(uint64_t i) const {
    return {row(i), dim};
  }
};

// Shared dot-product kernel. Four accumulators fix the summation order while
// keeping the loop pipelined; every caller sees bit-identical results for the
// same operands.
inline float dot_product(const float* __restrict a, const float* __restrict b,
                         uint32_t d) {
  float s0 = 0.f, s1 = 0.f, s2 = 0.f, s3 = 0.f;
  uint32_t k = 0;
  for (; k + 4 <= d; k += 4) {
    s0 += a[k] * b[k];
    s1 += a[k + 1] * b[k + 1];
    s2 += a[k + 2] * b[k + 2];
    s3 += a[k + 3] * b[k + 3];
  }
  for (; k < d; ++k) s0 += a[k] * b[k];
  return (s0 + s1) + (s2 + s3);
}

// fvecs: per record a little-endian int32 dimension followed by that many
// little-endian float32 values. All records must share one dimension.
DescriptorSet load_fvecs(const std::string& path);
void save_fvecs(const DescriptorSet& ds, const std::string& path);

// Sidecar names file: UTF-8, one name per line, line i maps to id i.
std::vector<std::string> load_names(const std::string& path);

// Builds a set from a caller buffer, validating that every entry is finite.
DescriptorSet make_descriptor_set(const float* data, uint64_t count,
                                  uint32_t dim);

// Scales every row to unit Euclidean norm. A zero row is an error naming the
// offending id.
DescriptorSet l2_normalize(const DescriptorSet& ds);

// Dot product of two unit vectors; errors on dimension mismatch.
float cosine_similarity(std::span<const float> a, std::span<const float> b);

}  // namespace aknn
