#include "core/eval.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aknn {

GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Status::io_error, "cannot open '" + path + "'");

  GroundTruth gt;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;  // blank line
    if (tag == "query") {
      uint64_t idx = 0;
      if (!(ss >> idx)) {
        raise(Status::format_error,
              "line " + std::to_string(lineno) + ": query needs an index");
      }
      gt.entries.emplace_back();
      gt.entries.back().query_index = idx;
    } else if (tag == "relevant" || tag == "ignore") {
      if (gt.entries.empty()) {
        raise(Status::format_error, "line " + std::to_string(lineno) + ": '" +
                                        tag + "' before any query block");
      }
      auto& entry = gt.entries.back();
      auto& target = (tag == "relevant") ? entry.relevant : entry.ignored;
      uint32_t id = 0;
      while (ss >> id) target.insert(id);
      if (!ss.eof()) {
        raise(Status::format_error,
              "line " + std::to_string(lineno) + ": malformed id list");
      }
    } else {
      raise(Status::format_error, "line " + std::to_string(lineno) +
                                      ": unknown tag '" + tag + "'");
    }
  }
  for (const auto& entry : gt.entries) {
    for (uint32_t id : entry.ignored) {
      if (entry.relevant.count(id)) {
        raise(Status::format_error,
              "query " + std::to_string(entry.query_index) + ": id " +
                  std::to_string(id) + " is both relevant and ignored");
      }
    }
  }
  return gt;
}

double average_precision(const RankedList& ranking,
                         const GroundTruthEntry& gt) {
  if (gt.relevant.empty()) {
    raise(Status::invalid_argument,
          "query " + std::to_string(gt.query_index) +
              " has an empty relevant set");
  }
  uint64_t rank = 0;  // position among non-ignored items
  uint64_t hits = 0;
  double sum = 0.0;
  for (const RankedEntry& e : ranking.entries) {
    if (gt.ignored.count(e.id)) continue;
    ++rank;
    if (gt.relevant.count(e.id)) {
      ++hits;
      sum += double(hits) / double(rank);
    }
  }
  return sum / double(gt.relevant.size());
}

double mean_average_precision(const std::vector<RankedList>& rankings,
                              const GroundTruth& gt) {
  if (rankings.size() != gt.entries.size()) {
    raise(Status::invalid_argument,
          "query count mismatch: " + std::to_string(rankings.size()) +
              " rankings vs " + std::to_string(gt.entries.size()) +
              " ground-truth blocks");
  }
  double sum = 0.0;
  for (const auto& entry : gt.entries) {
    const RankedList* match = nullptr;
    for (const auto& r : rankings) {
      if (r.query_index == entry.query_index) {
        match = &r;
        break;
      }
    }
    if (match == nullptr) {
      raise(Status::invalid_argument,
            "no ranking for query " + std::to_string(entry.query_index));
    }
    sum += average_precision(*match, entry);
  }
  return sum / double(gt.entries.size());
}

double edge_recall(const CsrMatrix& approx, const CsrMatrix& oracle) {
  if (approx.n != oracle.n) {
    raise(Status::invalid_argument,
          "size mismatch: " + std::to_string(approx.n) + " vs " +
              std::to_string(oracle.n));
  }
  if (approx.threshold != oracle.threshold) {
    raise(Status::invalid_argument,
          "threshold mismatch: " + std::to_string(approx.threshold) + " vs " +
              std::to_string(oracle.threshold));
  }
  if (oracle.nnz() == 0) return 1.0;

  uint64_t common = 0;
  for (uint64_t r = 0; r < oracle.n; ++r) {
    uint64_t a = approx.row_ptr[r];
    const uint64_t a_end = approx.row_ptr[r + 1];
    for (uint64_t k = oracle.row_ptr[r]; k < oracle.row_ptr[r + 1]; ++k) {
      const uint32_t c = oracle.col_idx[k];
      while (a < a_end && approx.col_idx[a] < c) ++a;
      if (a < a_end && approx.col_idx[a] == c) ++common;
    }
  }
  return double(common) / double(oracle.nnz());
}

void save_rankings(const std::vector<RankedList>& rankings,
                   const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) {
    raise(Status::io_error, "cannot open '" + path + "' for writing");
  }
  for (const RankedList& list : rankings) {
    bool first = true;
    for (const RankedEntry& e : list.entries) {
      std::fprintf(f, "%s%" PRIu64 " %u %.6f", first ? "" : " ",
                   list.query_index, e.id, e.score);
      first = false;
    }
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) {
    raise(Status::io_error, "write failed for '" + path + "'");
  }
}

std::vector<RankedList> load_rankings(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Status::io_error, "cannot open '" + path + "'");
  std::vector<RankedList> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    RankedList list;
    bool first = true;
    uint64_t qidx = 0;
    uint32_t id = 0;
    double score = 0.0;
    while (ss >> qidx) {
      if (!(ss >> id >> score)) {
        raise(Status::format_error,
              "line " + std::to_string(lineno) + ": incomplete triple");
      }
      if (first) {
        list.query_index = qidx;
        first = false;
      } else if (qidx != list.query_index) {
        raise(Status::format_error,
              "line " + std::to_string(lineno) +
                  ": mixed query indices in one line");
      }
      list.entries.push_back(RankedEntry{id, score});
    }
    if (!ss.eof()) {
      raise(Status::format_error,
            "line " + std::to_string(lineno) + ": malformed triple");
    }
    if (!first) out.push_back(std::move(list));
  }
  return out;
}

}  // namespace aknn
