#include "core/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aknn {

namespace {

void check_params(const DiffusionParams& p) {
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) {
    raise(Status::invalid_argument,
          "alpha must lie in (0, 1), got " + std::to_string(p.alpha));
  }
  if (p.k_seed == 0) {
    raise(Status::invalid_argument, "k_seed must be positive");
  }
  if (!(p.tolerance > 0.0)) {
    raise(Status::invalid_argument, "tolerance must be positive");
  }
}

// out = x - alpha * S * x over the upper-triangular storage; each stored
// entry contributes to both endpoints.
void apply_system(const CsrMatrix& S, double alpha,
                  const std::vector<double>& x, std::vector<double>& out) {
  const uint64_t n = S.n;
  std::fill(out.begin(), out.end(), 0.0);
  for (uint64_t r = 0; r < n; ++r) {
    const double xr = x[r];
    double acc = 0.0;
    for (uint64_t k = S.row_ptr[r]; k < S.row_ptr[r + 1]; ++k) {
      const uint32_t c = S.col_idx[k];
      const double w = S.values[k];
      acc += w * x[c];
      out[c] += w * xr;
    }
    out[r] += acc;
  }
  for (uint64_t i = 0; i < n; ++i) out[i] = x[i] - alpha * out[i];
}

}  // namespace

SeedVector seed_vector(std::span<const float> q, const DescriptorSet& ds,
                       uint32_t k_seed) {
  if (q.size() != ds.dim) {
    raise(Status::dimension_mismatch,
          "query dimension " + std::to_string(q.size()) +
              " does not match dataset dimension " + std::to_string(ds.dim));
  }
  if (k_seed == 0) raise(Status::invalid_argument, "k_seed must be positive");
  if (k_seed > ds.count()) {
    raise(Status::invalid_argument,
          "k_seed " + std::to_string(k_seed) + " exceeds dataset count " +
              std::to_string(ds.count()));
  }

  const uint64_t n = ds.count();
  std::vector<float> sims(n);
  for (uint64_t i = 0; i < n; ++i) {
    sims[i] = dot_product(q.data(), ds.row(i), ds.dim);
  }

  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::partial_sort(order.begin(), order.begin() + k_seed, order.end(),
                    [&](uint32_t a, uint32_t b) {
                      if (sims[a] != sims[b]) return sims[a] > sims[b];
                      return a < b;
                    });

  SeedVector y;
  y.size = n;
  y.indices.assign(order.begin(), order.begin() + k_seed);
  std::sort(y.indices.begin(), y.indices.end());
  y.values.reserve(k_seed);
  for (uint32_t idx : y.indices) y.values.push_back(std::max(sims[idx], 0.f));
  return y;
}

SolveResult solve_diffusion(const CsrMatrix& S, const SeedVector& y,
                            const DiffusionParams& p) {
  check_params(p);
  if (y.size != S.n) {
    raise(Status::dimension_mismatch,
          "seed length " + std::to_string(y.size) +
              " does not match graph size " + std::to_string(S.n));
  }

  const uint64_t n = S.n;
  std::vector<double> b(n, 0.0);
  double b_norm2 = 0.0;
  for (size_t k = 0; k < y.indices.size(); ++k) {
    const double v = (1.0 - p.alpha) * double(y.values[k]);
    b[y.indices[k]] = v;
    b_norm2 += v * v;
  }
  if (b_norm2 == 0.0) {
    raise(Status::invalid_argument, "seed vector has no mass");
  }
  const double target = p.tolerance * std::sqrt(b_norm2);

  // CG from x = 0: components with no path from the seed stay exactly zero.
  std::vector<double> x(n, 0.0);
  std::vector<double> r = b;
  std::vector<double> d = b;
  std::vector<double> q(n, 0.0);
  std::vector<double> best_x = x;

  double rs = b_norm2;
  double best_rs = rs;
  SolveResult res;

  if (std::sqrt(rs) <= target) {  // possible only for pathological tolerance
    res.scores = std::move(x);
    res.converged = true;
    res.relative_residual = std::sqrt(rs / b_norm2);
    return res;
  }

  for (uint32_t it = 0; it < p.max_iters; ++it) {
    apply_system(S, p.alpha, d, q);
    double dq = 0.0;
    for (uint64_t i = 0; i < n; ++i) dq += d[i] * q[i];
    if (dq <= 0.0) break;  // numerically lost positive definiteness
    const double step = rs / dq;
    for (uint64_t i = 0; i < n; ++i) x[i] += step * d[i];
    for (uint64_t i = 0; i < n; ++i) r[i] -= step * q[i];
    double rs_next = 0.0;
    for (uint64_t i = 0; i < n; ++i) rs_next += r[i] * r[i];
    res.iterations = it + 1;
    if (rs_next < best_rs) {
      best_rs = rs_next;
      best_x = x;
    }
    if (std::sqrt(rs_next) <= target) {
      res.converged = true;
      res.scores = std::move(x);
      res.relative_residual = std::sqrt(rs_next / b_norm2);
      return res;
    }
    const double beta = rs_next / rs;
    for (uint64_t i = 0; i < n; ++i) d[i] = r[i] + beta * d[i];
    rs = rs_next;
  }

  res.converged = false;
  res.scores = std::move(best_x);
  res.relative_residual = std::sqrt(best_rs / b_norm2);
  return res;
}

QueryResult diffuse_query(std::span<const float> q, const DescriptorSet& ds,
                          const CsrMatrix& S, const DiffusionParams& p,
                          uint64_t query_index) {
  if (ds.count() != S.n) {
    raise(Status::invalid_argument,
          "dataset count " + std::to_string(ds.count()) +
              " does not match graph size " + std::to_string(S.n));
  }
  const SeedVector y = seed_vector(q, ds, p.k_seed);
  SolveResult solved = solve_diffusion(S, y, p);

  QueryResult out;
  out.converged = solved.converged;
  out.iterations = solved.iterations;
  out.ranking.query_index = query_index;
  out.ranking.entries.resize(S.n);
  for (uint64_t i = 0; i < S.n; ++i) {
    out.ranking.entries[i] =
        RankedEntry{static_cast<uint32_t>(i), solved.scores[i]};
  }
  std::sort(out.ranking.entries.begin(), out.ranking.entries.end(),
            [](const RankedEntry& a, const RankedEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.id < b.id;
            });
  return out;
}

CsrMatrix row_topk_filter(const CsrMatrix& m, uint32_t k) {
  if (k == 0) return m;

  struct Incident {
    uint32_t other;
    float weight;
  };
  std::vector<std::vector<Incident>> rows(m.n);
  for (uint64_t r = 0; r < m.n; ++r) {
    for (uint64_t e = m.row_ptr[r]; e < m.row_ptr[r + 1]; ++e) {
      const uint32_t c = m.col_idx[e];
      rows[r].push_back({c, m.values[e]});
      rows[c].push_back({static_cast<uint32_t>(r), m.values[e]});
    }
  }

  CooMatrix kept(m.n, m.threshold);
  for (uint64_t i = 0; i < m.n; ++i) {
    auto& inc = rows[i];
    const size_t keep = std::min<size_t>(k, inc.size());
    std::partial_sort(inc.begin(), inc.begin() + ptrdiff_t(keep), inc.end(),
                      [](const Incident& a, const Incident& b) {
                        if (a.weight != b.weight) return a.weight > b.weight;
                        return a.other < b.other;
                      });
    for (size_t t = 0; t < keep; ++t) {
      kept.push(i, inc[t].other, inc[t].weight);
    }
  }
  kept.sort_dedup();
  return coo_to_csr(kept);
}

}  // namespace aknn
