// mfng: fit, sample and inspect multifractal network generator measures.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 runtime failure.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfng/mfng.hpp"

namespace {

using namespace mfng;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string full(double x) { return io::format_double(x); }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void print(std::ostream& out, bool csv) const {
    if (csv) {
      auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << io::csv_field(cells[i]);
        out << '\n';
      };
      line(header);
      for (const auto& r : rows) line(r);
      return;
    }
    std::vector<std::size_t> width(header.size(), 0);
    auto measure = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) width[i] = std::max(width[i], cells[i].size());
    };
    measure(header);
    for (const auto& r : rows) measure(r);
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        out << cells[i];
        if (i + 1 < cells.size()) out << std::string(width[i] - cells[i].size() + 2, ' ');
      }
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
  }
};

// features with no placements at this n (S_d with d >= n, C_t with t > n) have expectation 0
double expected_at(const GeneratingMeasure& w, std::int64_t n, Feature f) {
  if (f.kind == Feature::Kind::Star && f.order > n - 1) return 0.0;
  if (f.kind == Feature::Kind::Clique && f.order > n) return 0.0;
  return expected_feature(w, n, f);
}

FeatureVector expected_at(const GeneratingMeasure& w, std::int64_t n, const FeatureSpec& spec) {
  FeatureVector out;
  for (Feature f : spec) out.set(f, expected_at(w, n, f));
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path);
  return out;
}

struct MomentsArgs {
  std::string measure;
  std::int64_t nodes = 0;
  std::string features = "E,S2,S3,S4,C3,C4";
  std::string format = "text";
};

int run_moments(const MomentsArgs& a) {
  const auto w = io::read_measure_file(a.measure);
  const auto spec = parse_feature_spec(a.features);
  const auto expected = expected_at(w, a.nodes, spec);
  const auto em = edge_moments(w, a.nodes);
  const bool csv = a.format == "csv";
  Table t{{"feature", "expected"}, {}};
  for (Feature f : spec) t.rows.push_back({f.name(), csv ? full(expected.get(f)) : fmt("%.6g", expected.get(f))});
  t.rows.push_back({"E_std", csv ? full(em.std) : fmt("%.6g", em.std)});
  t.print(std::cout, csv);
  return kOk;
}

struct GraphArgs {
  std::string graph;
  std::string features = "E,S2,S3,S4,C3,C4";
  std::string format = "text";
  std::string out;
};

int run_features(const GraphArgs& a) {
  const auto g = io::load_graph(a.graph);
  const auto spec = parse_feature_spec(a.features);
  const bool csv = a.format == "csv";
  Table t{{"feature", "count"}, {}};
  t.rows.push_back({"V", std::to_string(g.num_nodes())});
  for (Feature f : spec) t.rows.push_back({f.name(), std::to_string(count_feature(g, f))});
  t.print(std::cout, csv);
  return kOk;
}

int run_degree_dist(const GraphArgs& a) {
  const auto dd = degree_distribution(io::load_graph(a.graph));
  if (a.out.empty()) {
    io::write_degree_csv(std::cout, dd);
  } else {
    auto out = open_out(a.out);
    io::write_degree_csv(out, dd);
  }
  return kOk;
}

struct FitArgs {
  std::string graph;
  int m = 2;
  std::string k = "auto";
  int restarts = 200;
  std::uint64_t seed = 0;
  std::string out;
  std::string features = "E,S2,S3,S4,C3,C4";
  unsigned threads = 1;
};

int run_fit(const FitArgs& a) {
  const auto g = io::load_graph(a.graph);
  const auto n = static_cast<std::int64_t>(g.num_nodes());
  const auto spec = parse_feature_spec(a.features);
  const auto target = feature_vector(g, spec);

  FitConfig cfg;
  cfg.m = a.m;
  cfg.restarts = a.restarts;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  if (a.k != "auto") {
    try {
      cfg.k = std::stoi(a.k);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--k", "expected an integer or 'auto'");
    }
  }
  const auto depths = depth_candidates(cfg, n);
  const auto result = fit(target, n, cfg);
  io::write_measure_file(a.out, result.measure);

  std::cout << "nodes " << n << "  m " << a.m << "  k tried";
  for (int k : depths) std::cout << ' ' << k;
  std::cout << "\nbest k " << result.k << "  restart " << result.restart << "  objective "
            << fmt("%.6g", result.objective) << '\n';
  for (const auto& d : result.per_depth)
    std::cout << "  k=" << d.k << "  best objective " << fmt("%.6g", d.best_objective) << "  (restart "
              << d.best_restart << ")\n";
  Table t{{"feature"}, {{"actual"}, {"ratio"}}};
  for (Feature f : spec) {
    t.header.push_back(f.name());
    t.rows[0].push_back(fmt("%.3g", target.get(f)));
    t.rows[1].push_back(result.ratios.contains(f) ? fmt("%.2f", result.ratios.get(f)) : "-");
  }
  t.print(std::cout, false);
  std::cout << "measure written to " << a.out << '\n';
  return kOk;
}

struct SampleArgs {
  std::string measure;
  std::size_t nodes = 0;
  std::string method = "fast";
  double accuracy = 1.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  int max_attempts = 50;
  std::int64_t max_rejected = 10000;
};

int run_sample(const SampleArgs& a) {
  const auto w = io::read_measure_file(a.measure);
  FastSamplerConfig cfg;
  cfg.accuracy = a.accuracy;
  cfg.max_attempts_per_box = a.max_attempts;
  cfg.max_rejected_boxes = a.max_rejected;
  Rng rng(a.seed);
  Graph g;
  if (a.method == "naive") g = naive_sample(a.nodes, w, rng);
  else if (a.method == "intersection") g = sample_by_intersection(a.nodes, LevelSchedule::uniform(w), rng);
  else if (a.method == "fast") g = fast_sample(a.nodes, w, cfg, rng);
  else if (a.method == "noisy") g = noisy_sample(a.nodes, w, a.noise, cfg, rng, NoisyMethod::Fast);
  else if (a.method == "noisy-exact") g = noisy_sample(a.nodes, w, a.noise, cfg, rng, NoisyMethod::Exact);
  else throw CLI::ValidationError("--method", "unknown method " + a.method);

  std::vector<std::string> header{"mfng sample", "measure: " + a.measure, "method: " + a.method,
                                  "seed: " + std::to_string(a.seed)};
  if (a.method == "fast" || a.method.starts_with("noisy")) header.push_back("accuracy: " + full(a.accuracy));
  if (a.method.starts_with("noisy")) header.push_back("noise: " + full(a.noise));
  auto out = open_out(a.out);
  io::write_edge_list(out, g, header);
  std::cout << "wrote " << g.num_edges() << " edges on " << g.num_nodes() << " nodes to " << a.out << '\n';
  return kOk;
}

struct CompareArgs {
  std::string graph;
  std::string measure;
  std::string features = "E,S2,S3,S4,C3,C4";
  std::string format = "text";
};

int run_compare(const CompareArgs& a) {
  const auto g = io::load_graph(a.graph);
  const auto w = io::read_measure_file(a.measure);
  const auto n = static_cast<std::int64_t>(g.num_nodes());
  const auto spec = parse_feature_spec(a.features);
  const bool csv = a.format == "csv";
  Table t{{"feature", "actual", "expected", "ratio"}, {}};
  for (Feature f : spec) {
    const auto actual = count_feature(g, f);
    const double expected = n >= 2 ? expected_at(w, n, f) : 0.0;
    const std::string ratio =
        actual > 0 ? (csv ? full(expected / static_cast<double>(actual)) : fmt("%.4f", expected / static_cast<double>(actual)))
                   : "";
    t.rows.push_back({f.name(), std::to_string(actual), csv ? full(expected) : fmt("%.6g", expected), ratio});
  }
  t.print(std::cout, csv);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multifractal network generator: moments, fitting and sampling"};
  app.require_subcommand(1);

  MomentsArgs moments;
  auto* cmd_moments = app.add_subcommand("moments", "Expected feature counts of a measure");
  cmd_moments->add_option("--measure", moments.measure, "Measure JSON file")->required();
  cmd_moments->add_option("--nodes", moments.nodes, "Node count")->required()->check(CLI::Range(std::int64_t{2}, INT64_MAX));
  cmd_moments->add_option("--features", moments.features, "Comma-separated features");
  cmd_moments->add_option("--format", moments.format)->check(CLI::IsMember({"text", "csv"}));

  GraphArgs features;
  auto* cmd_features = app.add_subcommand("features", "Exact feature counts of a graph");
  cmd_features->add_option("--graph", features.graph, "Edge list file")->required();
  cmd_features->add_option("--features", features.features, "Comma-separated features");
  cmd_features->add_option("--format", features.format)->check(CLI::IsMember({"text", "csv"}));

  GraphArgs degree;
  auto* cmd_degree = app.add_subcommand("degree-dist", "Degree histogram and CCDF as CSV");
  cmd_degree->add_option("--graph", degree.graph, "Edge list file")->required();
  cmd_degree->add_option("--out", degree.out, "Output CSV (stdout if omitted)");

  FitArgs fitargs;
  auto* cmd_fit = app.add_subcommand("fit", "Method-of-moments fit of a measure to a graph");
  cmd_fit->add_option("--graph", fitargs.graph, "Edge list file")->required();
  cmd_fit->add_option("--m", fitargs.m, "Category count")->required()->check(CLI::Range(1, 16));
  cmd_fit->add_option("--k", fitargs.k, "Depth, or 'auto' to sweep around ceil(log_m n)");
  cmd_fit->add_option("--restarts", fitargs.restarts)->check(CLI::PositiveNumber);
  cmd_fit->add_option("--seed", fitargs.seed);
  cmd_fit->add_option("--out", fitargs.out, "Output measure JSON")->required();
  cmd_fit->add_option("--features", fitargs.features, "Comma-separated features to fit");
  cmd_fit->add_option("--threads", fitargs.threads)->check(CLI::PositiveNumber);

  SampleArgs sample;
  auto* cmd_sample = app.add_subcommand("sample", "Sample a graph from a measure");
  cmd_sample->add_option("--measure", sample.measure, "Measure JSON file")->required();
  cmd_sample->add_option("--nodes", sample.nodes)->required()->check(CLI::PositiveNumber);
  cmd_sample->add_option("--method", sample.method)
      ->check(CLI::IsMember({"fast", "naive", "intersection", "noisy", "noisy-exact"}));
  cmd_sample->add_option("--accuracy", sample.accuracy, "Accuracy factor lambda")->check(CLI::PositiveNumber);
  cmd_sample->add_option("--noise", sample.noise, "Noise level b")->check(CLI::Range(0.0, 1.0));
  cmd_sample->add_option("--seed", sample.seed);
  cmd_sample->add_option("--out", sample.out, "Output edge list")->required();
  cmd_sample->add_option("--max-attempts", sample.max_attempts)->check(CLI::PositiveNumber);
  cmd_sample->add_option("--max-rejected", sample.max_rejected)->check(CLI::PositiveNumber);

  CompareArgs compare;
  auto* cmd_compare = app.add_subcommand("compare", "Actual vs expected feature counts");
  cmd_compare->add_option("--graph", compare.graph, "Edge list file")->required();
  cmd_compare->add_option("--measure", compare.measure, "Measure JSON file")->required();
  cmd_compare->add_option("--features", compare.features, "Comma-separated features");
  cmd_compare->add_option("--format", compare.format)->check(CLI::IsMember({"text", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (cmd_moments->parsed()) return run_moments(moments);
    if (cmd_features->parsed()) return run_features(features);
    if (cmd_degree->parsed()) return run_degree_dist(degree);
    if (cmd_fit->parsed()) return run_fit(fitargs);
    if (cmd_sample->parsed()) return run_sample(sample);
    if (cmd_compare->parsed()) return run_compare(compare);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == Errc::Stalled ? kRuntime : kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
