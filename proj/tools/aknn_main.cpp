// aknn command-line front end. All functionality goes through the C API in
// aknn.h; this file only parses flags, wires files together and formats
// output.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aknn.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct RuntimeFailure {
  std::string message;
};

[[noreturn]] void fail(const std::string& message) {
  throw RuntimeFailure{message};
}

[[noreturn]] void fail_status(const std::string& what, aknn_status st) {
  fail(what + ": " + aknn_status_name(st) + " (" + aknn_last_error() + ")");
}

void check(aknn_status st, const std::string& what) {
  if (st != AKNN_OK) fail_status(what, st);
}

// Refuses to clobber an existing file unless --force was given.
void guard_output(const std::string& path, bool force) {
  if (!force && std::filesystem::exists(path)) {
    fail("output file '" + path + "' exists; pass --force to overwrite");
  }
}

struct DatasetDeleter {
  void operator()(aknn_dataset* p) const { aknn_dataset_free(p); }
};
struct GraphDeleter {
  void operator()(aknn_graph* p) const { aknn_graph_free(p); }
};
struct GroundTruthDeleter {
  void operator()(aknn_groundtruth* p) const { aknn_groundtruth_free(p); }
};
struct RankingsDeleter {
  void operator()(aknn_rankings* p) const { aknn_rankings_free(p); }
};

using DatasetPtr = std::unique_ptr<aknn_dataset, DatasetDeleter>;
using GraphPtr = std::unique_ptr<aknn_graph, GraphDeleter>;
using GroundTruthPtr = std::unique_ptr<aknn_groundtruth, GroundTruthDeleter>;
using RankingsPtr = std::unique_ptr<aknn_rankings, RankingsDeleter>;

DatasetPtr load_dataset(const std::string& path, bool normalize,
                        int verbosity, const char* what) {
  aknn_dataset* raw = nullptr;
  check(aknn_dataset_load_fvecs(path.c_str(), normalize ? 1 : 0, &raw),
        std::string("loading ") + what + " '" + path + "'");
  DatasetPtr ds(raw);
  if (verbosity > 0) {
    std::cerr << what << ": " << aknn_dataset_count(ds.get()) << " vectors, dim "
              << aknn_dataset_dim(ds.get()) << "\n";
  }
  return ds;
}

GraphPtr load_graph_file(const std::string& path) {
  aknn_graph* raw = nullptr;
  check(aknn_graph_load(path.c_str(), &raw), "loading graph '" + path + "'");
  return GraphPtr(raw);
}

json report_to_json(const aknn_build_report& report,
                    const aknn_build_params& params) {
  json j;
  switch (report.method) {
    case AKNN_METHOD_LSH: j["method"] = "lsh"; break;
    case AKNN_METHOD_MULTIPROBE: j["method"] = "multiprobe"; break;
    case AKNN_METHOD_BRUTEFORCE: j["method"] = "bruteforce"; break;
  }
  json p;
  p["threshold"] = params.threshold;
  p["workers"] = params.workers;
  if (report.method != AKNN_METHOD_BRUTEFORCE) {
    p["bits"] = params.bits;
    p["tables"] = params.tables;
    p["seed"] = params.seed;
  }
  if (report.method == AKNN_METHOD_MULTIPROBE) p["gamma"] = params.gamma;
  j["parameters"] = p;
  j["edges_considered"] = report.edges_considered;
  j["edges_kept"] = report.edges_kept;
  j["projection_seconds"] = report.projection_seconds;
  j["creation_seconds"] = report.creation_seconds;
  return j;
}

aknn_method parse_method(const std::string& name) {
  if (name == "lsh") return AKNN_METHOD_LSH;
  if (name == "multiprobe") return AKNN_METHOD_MULTIPROBE;
  if (name == "bruteforce") return AKNN_METHOD_BRUTEFORCE;
  fail("unknown method '" + name + "'");
}

struct BuildFlags {
  std::string input;
  std::string method = "lsh";
  bool multi_probe = false;
  uint32_t bits = 6;
  uint32_t tables = 20;
  double gamma = 0.5;
  float threshold = 0.3f;
  uint64_t seed = 42;
  uint32_t workers = 0;
  std::string output;
  std::string report_path;
  bool no_normalize = false;
  bool force = false;
  uint64_t max_bucket_warn = 0;
};

struct DiffuseFlags {
  std::string graph;
  std::string input;
  std::string queries;
  double alpha = 0.99;
  uint32_t k_seed = 10;
  double tol = 1e-6;
  uint32_t max_iters = 200;
  uint32_t row_topk = 0;
  uint32_t workers = 0;
  std::string output;
  bool no_normalize = false;
  bool strict = false;
  bool force = false;
};

int run_build(const BuildFlags& flags, int verbosity) {
  guard_output(flags.output, flags.force);
  if (!flags.report_path.empty()) guard_output(flags.report_path, flags.force);

  const DatasetPtr ds =
      load_dataset(flags.input, !flags.no_normalize, verbosity, "dataset");

  aknn_build_params params;
  aknn_build_params_init(&params);
  params.method = flags.multi_probe ? AKNN_METHOD_MULTIPROBE
                                    : parse_method(flags.method);
  params.bits = flags.bits;
  params.tables = flags.tables;
  params.gamma = flags.gamma;
  params.threshold = flags.threshold;
  params.seed = flags.seed;
  params.workers = flags.workers;

  aknn_graph* raw = nullptr;
  aknn_build_report report;
  check(aknn_graph_build(ds.get(), &params, &raw, &report), "building graph");
  GraphPtr graph(raw);

  if (flags.max_bucket_warn > 0 &&
      report.max_bucket_size > flags.max_bucket_warn) {
    std::cerr << "warning: largest bucket holds " << report.max_bucket_size
              << " items (warn threshold " << flags.max_bucket_warn
              << "); all-pairs cost grows quadratically in bucket size\n";
  }

  check(aknn_graph_save(graph.get(), flags.output.c_str()),
        "writing graph '" + flags.output + "'");

  const json j = report_to_json(report, params);
  if (!flags.report_path.empty()) {
    std::ofstream out(flags.report_path);
    if (!out) fail("cannot open report file '" + flags.report_path + "'");
    out << j.dump(2) << "\n";
  }
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int run_diffuse(const DiffuseFlags& flags, int verbosity) {
  guard_output(flags.output, flags.force);

  const DatasetPtr ds =
      load_dataset(flags.input, !flags.no_normalize, verbosity, "dataset");
  const DatasetPtr queries =
      load_dataset(flags.queries, !flags.no_normalize, verbosity, "queries");
  const GraphPtr graph = load_graph_file(flags.graph);

  aknn_diffusion_params params;
  aknn_diffusion_params_init(&params);
  params.alpha = flags.alpha;
  params.k_seed = flags.k_seed;
  params.tolerance = flags.tol;
  params.max_iters = flags.max_iters;
  params.row_topk = flags.row_topk;
  params.workers = flags.workers;

  aknn_diffuse_stats stats{};
  check(aknn_diffuse_to_file(ds.get(), graph.get(), queries.get(), &params,
                             flags.output.c_str(), &stats),
        "diffusing queries");

  if (stats.isolated_nodes > 0) {
    std::cerr << "warning: " << stats.isolated_nodes
              << " isolated node(s); they receive mass only when seeded\n";
  }
  if (stats.nonconverged > 0) {
    std::cerr << "warning: " << stats.nonconverged << " of " << stats.queries
              << " queries did not reach tolerance " << flags.tol << " within "
              << flags.max_iters << " iterations\n";
    if (flags.strict) fail("non-convergence with --strict");
  }
  std::cout << "diffused " << stats.queries << " queries -> " << flags.output
            << "\n";
  return kExitOk;
}

int run_evaluate(const std::string& rankings_path, const std::string& gt_path) {
  aknn_rankings* rraw = nullptr;
  check(aknn_rankings_load(rankings_path.c_str(), &rraw),
        "loading rankings '" + rankings_path + "'");
  RankingsPtr rankings(rraw);

  aknn_groundtruth* graw = nullptr;
  check(aknn_groundtruth_load(gt_path.c_str(), &graw),
        "loading ground truth '" + gt_path + "'");
  GroundTruthPtr gt(graw);

  const uint64_t nq = aknn_groundtruth_count(gt.get());
  for (uint64_t i = 0; i < nq; ++i) {
    uint64_t qidx = 0;
    check(aknn_groundtruth_query_index(gt.get(), i, &qidx), "reading block");
    double ap = 0.0;
    check(aknn_average_precision(rankings.get(), gt.get(), i, &ap),
          "scoring query " + std::to_string(qidx));
    std::printf("query %llu ap %.6f\n", (unsigned long long)qidx, ap);
  }
  double map = 0.0;
  check(aknn_mean_average_precision(rankings.get(), gt.get(), &map),
        "computing mAP");
  std::printf("mAP %.6f\n", map);
  return kExitOk;
}

int run_graph_recall(const std::string& approx_path,
                     const std::string& oracle_path) {
  const GraphPtr approx = load_graph_file(approx_path);
  const GraphPtr oracle = load_graph_file(oracle_path);
  double recall = 0.0;
  check(aknn_edge_recall(approx.get(), oracle.get(), &recall),
        "computing edge recall");
  std::printf("edge_recall %.6f\n", recall);
  std::printf("approx_edges %llu\n",
              (unsigned long long)aknn_graph_edges(approx.get()));
  std::printf("oracle_edges %llu\n",
              (unsigned long long)aknn_graph_edges(oracle.get()));
  return kExitOk;
}

int run_bench(const BuildFlags& flags, const std::vector<std::string>& methods,
              int verbosity) {
  if (!flags.output.empty()) guard_output(flags.output, flags.force);
  const DatasetPtr ds =
      load_dataset(flags.input, !flags.no_normalize, verbosity, "dataset");

  json results = json::array();
  for (const std::string& name : methods) {
    aknn_build_params params;
    aknn_build_params_init(&params);
    params.method = parse_method(name);
    params.bits = flags.bits;
    params.tables = flags.tables;
    params.gamma = flags.gamma;
    params.threshold = flags.threshold;
    params.seed = flags.seed;
    params.workers = flags.workers;

    if (verbosity > 0) std::cerr << "bench: building " << name << "\n";
    aknn_graph* raw = nullptr;
    aknn_build_report report;
    check(aknn_graph_build(ds.get(), &params, &raw, &report),
          "building " + name + " graph");
    GraphPtr graph(raw);
    results.push_back(report_to_json(report, params));
  }

  if (!flags.output.empty()) {
    std::ofstream out(flags.output);
    if (!out) fail("cannot open output file '" + flags.output + "'");
    out << results.dump(2) << "\n";
  }
  std::cout << results.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate kNN affinity graphs with LSH bucketing, "
               "diffusion re-ranking and retrieval evaluation"};
  app.require_subcommand(1);
  const std::string version_line = std::string("aknn ") + aknn_version() +
                                   " (graph format v" +
                                   std::to_string(aknn_graph_format_version()) +
                                   ")";
  app.set_version_flag("--version", version_line);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "increase log output on stderr");

  BuildFlags build;
  std::vector<std::string> bench_methods;

  auto* cmd_build = app.add_subcommand("build-graph", "construct an affinity graph");
  cmd_build->add_option("--input", build.input, "dataset .fvecs file")->required();
  cmd_build->add_option("--method", build.method, "lsh | multiprobe | bruteforce")
      ->check(CLI::IsMember({"lsh", "multiprobe", "bruteforce"}));
  cmd_build->add_flag("--multi-probe", build.multi_probe,
                      "shorthand for --method multiprobe");
  cmd_build->add_option("--bits", build.bits, "hyperplanes per table");
  cmd_build->add_option("--tables", build.tables, "hash table count");
  auto* build_gamma = cmd_build->add_option(
      "--gamma", build.gamma, "multi-probe retention fraction in [0,1]");
  cmd_build->add_option("--threshold", build.threshold, "minimum edge weight");
  cmd_build->add_option("--seed", build.seed, "hash family seed");
  cmd_build->add_option("--workers", build.workers, "worker threads (0 = auto)");
  cmd_build->add_option("--output", build.output, "graph file to write")->required();
  cmd_build->add_option("--report", build.report_path, "report JSON to write");
  cmd_build->add_flag("--no-normalize", build.no_normalize,
                      "input rows are already unit-norm");
  cmd_build->add_flag("--force", build.force, "overwrite existing outputs");
  cmd_build->add_option("--max-bucket-warn", build.max_bucket_warn,
                        "warn when a bucket exceeds this size (0 = off)");

  DiffuseFlags diffuse;
  auto* cmd_diffuse = app.add_subcommand("diffuse", "rank queries by graph diffusion");
  cmd_diffuse->add_option("--graph", diffuse.graph, "graph file")->required();
  cmd_diffuse->add_option("--input", diffuse.input, "dataset .fvecs file")->required();
  cmd_diffuse->add_option("--queries", diffuse.queries, "query .fvecs file")->required();
  cmd_diffuse->add_option("--alpha", diffuse.alpha, "damping factor in (0,1)");
  cmd_diffuse->add_option("--k-seed", diffuse.k_seed, "seeds per query");
  cmd_diffuse->add_option("--tol", diffuse.tol, "relative residual target");
  cmd_diffuse->add_option("--max-iters", diffuse.max_iters, "solver iteration cap");
  cmd_diffuse->add_option("--row-topk", diffuse.row_topk,
                          "per-node edge truncation before normalization (0 = off)");
  cmd_diffuse->add_option("--workers", diffuse.workers, "worker threads (0 = auto)");
  cmd_diffuse->add_option("--output", diffuse.output, "rankings file to write")->required();
  cmd_diffuse->add_flag("--no-normalize", diffuse.no_normalize,
                        "inputs are already unit-norm");
  cmd_diffuse->add_flag("--strict", diffuse.strict,
                        "treat non-convergence as a failure");
  cmd_diffuse->add_flag("--force", diffuse.force, "overwrite existing outputs");

  std::string eval_rankings, eval_gt;
  auto* cmd_eval = app.add_subcommand("evaluate", "per-query AP and mAP");
  cmd_eval->add_option("--rankings", eval_rankings, "rankings file")->required();
  cmd_eval->add_option("--gt", eval_gt, "ground-truth file")->required();

  std::string recall_approx, recall_oracle;
  auto* cmd_recall = app.add_subcommand("graph-recall",
                                        "edge recall of a graph against an oracle");
  cmd_recall->add_option("--approx", recall_approx, "approximate graph file")->required();
  cmd_recall->add_option("--oracle", recall_oracle, "exact graph file")->required();

  auto* cmd_bench = app.add_subcommand("bench",
                                       "build one dataset with several methods");
  cmd_bench->add_option("--input", build.input, "dataset .fvecs file")->required();
  cmd_bench->add_option("--methods", bench_methods,
                        "comma-separated list of lsh,multiprobe,bruteforce")
      ->required()
      ->delimiter(',')
      ->check(CLI::IsMember({"lsh", "multiprobe", "bruteforce"}));
  cmd_bench->add_option("--bits", build.bits, "hyperplanes per table");
  cmd_bench->add_option("--tables", build.tables, "hash table count");
  auto* bench_gamma = cmd_bench->add_option(
      "--gamma", build.gamma, "multi-probe retention fraction in [0,1]");
  cmd_bench->add_option("--threshold", build.threshold, "minimum edge weight");
  cmd_bench->add_option("--seed", build.seed, "hash family seed");
  cmd_bench->add_option("--workers", build.workers, "worker threads (0 = auto)");
  cmd_bench->add_option("--output", build.output, "also write the JSON here");
  cmd_bench->add_flag("--no-normalize", build.no_normalize,
                      "input rows are already unit-norm");
  cmd_bench->add_flag("--force", build.force, "overwrite existing outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (cmd_build->parsed()) {
      const bool explicit_method = cmd_build->count("--method") > 0;
      if (build.multi_probe && explicit_method && build.method != "multiprobe") {
        std::cerr << "conflicting flags: --multi-probe with --method "
                  << build.method << "\n";
        return kExitUsage;
      }
      const std::string method =
          build.multi_probe ? "multiprobe" : build.method;
      if (method == "bruteforce" && build_gamma->count() > 0) {
        std::cerr << "conflicting flags: --gamma has no effect with --method "
                     "bruteforce\n";
        return kExitUsage;
      }
      if (method == "lsh" && build_gamma->count() > 0) {
        std::cerr << "conflicting flags: --gamma requires --method multiprobe\n";
        return kExitUsage;
      }
      return run_build(build, verbosity);
    }
    if (cmd_diffuse->parsed()) return run_diffuse(diffuse, verbosity);
    if (cmd_eval->parsed()) return run_evaluate(eval_rankings, eval_gt);
    if (cmd_recall->parsed()) return run_graph_recall(recall_approx, recall_oracle);
    if (cmd_bench->parsed()) {
      if (bench_gamma->count() > 0 &&
          std::find(bench_methods.begin(), bench_methods.end(),
                    "multiprobe") == bench_methods.end()) {
        std::cerr << "conflicting flags: --gamma requires a multiprobe run\n";
        return kExitUsage;
      }
      return run_bench(build, bench_methods, verbosity);
    }
  } catch (const RuntimeFailure& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
