#include "core/descriptor_set.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

namespace aknn {

namespace {

void check_finite(const std::vector<float>& data, uint32_t dim) {
  for (size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      raise(Status::format_error,
            "non-finite value at row " + std::to_string(i / dim) +
                ", component " + std::to_string(i % dim));
    }
  }
}

}  // namespace

DescriptorSet load_fvecs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Status::io_error, "cannot open '" + path + "'");

  DescriptorSet ds;
  uint64_t record = 0;
  for (;;) {
    int32_t d = 0;
    in.read(reinterpret_cast<char*>(&d), sizeof(d));
    if (in.gcount() == 0 && in.eof()) break;
    if (in.gcount() != sizeof(d)) {
      raise(Status::format_error,
            "truncated record header at record " + std::to_string(record));
    }
    if (d <= 0) {
      raise(Status::format_error, "record " + std::to_string(record) +
                                      " has dimension " + std::to_string(d));
    }
    if (record == 0) {
      ds.dim = static_cast<uint32_t>(d);
    } else if (static_cast<uint32_t>(d) != ds.dim) {
      raise(Status::format_error,
            "inconsistent dimension at record " + std::to_string(record) +
                ": got " + std::to_string(d) + ", expected " +
                std::to_string(ds.dim));
    }
    const size_t offset = ds.data.size();
    ds.data.resize(offset + ds.dim);
    in.read(reinterpret_cast<char*>(ds.data.data() + offset),
            std::streamsize(ds.dim) * 4);
    if (in.gcount() != std::streamsize(ds.dim) * 4) {
      raise(Status::format_error,
            "truncated record " + std::to_string(record));
    }
    ++record;
  }
  check_finite(ds.data, ds.dim == 0 ? 1 : ds.dim);
  return ds;
}

void save_fvecs(const DescriptorSet& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Status::io_error, "cannot open '" + path + "' for writing");
  const int32_t d = static_cast<int32_t>(ds.dim);
  for (uint64_t i = 0; i < ds.count(); ++i) {
    out.write(reinterpret_cast<const char*>(&d), sizeof(d));
    out.write(reinterpret_cast<const char*>(ds.row(i)),
              std::streamsize(ds.dim) * 4);
  }
  if (!out) raise(Status::io_error, "write failed for '" + path + "'");
}

std::vector<std::string> load_names(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Status::io_error, "cannot open '" + path + "'");
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    names.push_back(line);
  }
  return names;
}

DescriptorSet make_descriptor_set(const float* data, uint64_t count,
                                  uint32_t dim) {
  if (count > 0 && dim == 0) {
    raise(Status::invalid_argument, "dimension must be positive");
  }
  if (count > 0 && data == nullptr) {
    raise(Status::invalid_argument, "null data pointer");
  }
  DescriptorSet ds;
  ds.dim = dim;
  ds.data.assign(data, data + count * dim);
  check_finite(ds.data, dim == 0 ? 1 : dim);
  return ds;
}

DescriptorSet l2_normalize(const DescriptorSet& ds) {
  DescriptorSet out;
  out.dim = ds.dim;
  out.data.resize(ds.data.size());
  for (uint64_t i = 0; i < ds.count(); ++i) {
    const float* src = ds.row(i);
    double norm2 = 0.0;
    for (uint32_t k = 0; k < ds.dim; ++k) {
      norm2 += double(src[k]) * double(src[k]);
    }
    const double norm = std::sqrt(norm2);
    if (!(norm > 0.0) || !std::isfinite(1.0 / norm)) {
      raise(Status::zero_norm, "zero-norm row, id=" + std::to_string(i));
    }
    const double inv = 1.0 / norm;
    float* dst = out.data.data() + i * ds.dim;
    for (uint32_t k = 0; k < ds.dim; ++k) {
      dst[k] = static_cast<float>(src[k] * inv);
    }
  }
  return out;
}

float cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    raise(Status::dimension_mismatch,
          "dimension mismatch: " + std::to_string(a.size()) + " vs " +
              std::to_string(b.size()));
  }
  return dot_product(a.data(), b.data(), static_cast<uint32_t>(a.size()));
}

}  // namespace aknn
