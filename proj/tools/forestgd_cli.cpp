// forestgd command-line front end.
//
//   forestgd gen-graph   --gen SPEC --out PATH
//   forestgd exact       (--graph PATH | --gen SPEC) (--signal PATH | --signal-gen G) --q F
//   forestgd smooth      ... --q F --n-samples N --alpha {safe|empirical|oracle|FLOAT}
//   forestgd sweep-alpha ... --q F --n-samples N --realizations R --alpha-grid LO:HI:COUNT
//   forestgd denoise     ... --noise-std F --q-grid LIST --n-samples N --realizations R
//   forestgd ssl         (--graph PATH --labels PATH | --gen cliques:...) --mu F --sigma F ...
//
// Exit codes: 0 ok, 2 usage, 3 data error, 4 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "forestgd/forestgd.hpp"

namespace {

using namespace forestgd;
using Json = nlohmann::ordered_json;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string graph_path;
  std::string gen_spec;
  std::string coords_path;
  std::string signal_path;
  std::string signal_gen;
  std::string labels_path;
  std::string labeled_set_path;
  double q = 1.0;
  double mu = 1.0;
  double sigma = 0.0;
  std::size_t samples = 10;
  std::string alpha = "safe";
  std::uint64_t seed = 0;
  std::size_t realizations = 200;
  double noise_std = 5.0;
  std::string alpha_grid = "0:0.5:51";
  std::string q_grid;
  std::string labels_per_class = "1";
  std::size_t repeats = 100;
  std::size_t threads = 0;
  bool resample_per_class = false;
  std::string out;
  std::string format = "csv";
};

// "name:key=value,key=value"
struct Spec {
  std::string name;
  std::map<std::string, std::string> params;

  double number(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw UsageError("--gen " + name + ": missing parameter '" + key + "'");
    auto v = detail::parse_number<double>(it->second);
    if (!v) throw UsageError("--gen " + name + ": invalid value for '" + key + "'");
    return *v;
  }
  std::size_t count(const std::string& key) const {
    const double v = number(key);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw UsageError("--gen " + name + ": '" + key + "' must be a nonnegative integer");
    }
    return static_cast<std::size_t>(v);
  }
};

Spec parse_spec(const std::string& text) {
  Spec s;
  auto colon = text.find(':');
  s.name = text.substr(0, colon);
  if (colon == std::string::npos) return s;
  for (auto field : detail::split_fields(std::string_view(text).substr(colon + 1), ",")) {
    auto eq = field.find('=');
    if (eq == std::string_view::npos) throw UsageError("malformed spec field '" + std::string(field) + "'");
    s.params[std::string(field.substr(0, eq))] = std::string(field.substr(eq + 1));
  }
  return s;
}

struct LoadedGraph {
  Graph graph;
  std::optional<model::Cliques> cliques;  // set when generated from cliques:...
};

LoadedGraph make_graph(const ExperimentConfig& cfg) {
  if (!cfg.graph_path.empty() && !cfg.gen_spec.empty()) throw UsageError("--graph and --gen are mutually exclusive");
  if (!cfg.graph_path.empty()) return {load_graph(cfg.graph_path), std::nullopt};
  if (cfg.gen_spec.empty()) throw UsageError("a graph source is required (--graph PATH or --gen SPEC)");
  auto spec = parse_spec(cfg.gen_spec);
  if (spec.name == "regular") {
    return {gen_graph(model::Regular{spec.count("d")}, spec.count("n"), cfg.seed), std::nullopt};
  }
  if (spec.name == "ba") {
    return {gen_graph(model::BarabasiAlbert{spec.count("k")}, spec.count("n"), cfg.seed), std::nullopt};
  }
  if (spec.name == "grid") {
    return {gen_graph(model::Grid{spec.count("rows"), spec.count("cols")}, 0, cfg.seed), std::nullopt};
  }
  if (spec.name == "knn") {
    NodePositions pts = cfg.coords_path.empty() ? random_positions(spec.count("n"), cfg.seed)
                                                : load_coordinates(cfg.coords_path);
    return {gen_graph(model::Knn{pts, spec.count("k")}, 0, cfg.seed), std::nullopt};
  }
  if (spec.name == "cliques") {
    model::Cliques c{spec.count("count"), spec.count("size")};
    return {gen_graph(c, 0, cfg.seed), c};
  }
  throw UsageError("unknown generator '" + spec.name + "' (regular, ba, grid, knn, cliques)");
}

Vector make_signal(const ExperimentConfig& cfg, const Graph& g, const std::string& fallback) {
  if (!cfg.signal_path.empty() && !cfg.signal_gen.empty()) {
    throw UsageError("--signal and --signal-gen are mutually exclusive");
  }
  if (!cfg.signal_path.empty()) return load_signal(cfg.signal_path, g.num_vertices());
  const std::string gen = cfg.signal_gen.empty() ? fallback : cfg.signal_gen;
  if (gen.empty()) throw UsageError("a signal source is required (--signal PATH or --signal-gen G)");
  if (gen == "normal") return standard_normal_signal(g.num_vertices(), cfg.seed);
  if (gen == "smooth") return smooth_signal(g);
  if (gen.rfind("constant", 0) == 0) {
    auto colon = gen.find(':');
    auto v = colon == std::string::npos ? std::optional<double>(0.0)
                                        : detail::parse_number<double>(std::string_view(gen).substr(colon + 1));
    if (!v) throw UsageError("--signal-gen constant:VALUE needs a number");
    return Vector(g.num_vertices(), *v);
  }
  throw UsageError("unknown signal generator '" + gen + "' (normal, smooth, constant:C)");
}

AlphaStrategy parse_alpha(const std::string& text) {
  if (text == "safe") return AlphaStrategy::safe();
  if (text == "empirical") return AlphaStrategy::empirical();
  if (text == "oracle") return AlphaStrategy::oracle_optimal();
  if (auto v = detail::parse_number<double>(text)) return AlphaStrategy::fixed(*v);
  throw UsageError("--alpha must be safe, empirical, oracle or a number");
}

// "LO:HI:COUNT" (linear) or a comma-separated list.
std::vector<double> parse_grid(const std::string& text, bool log_spaced) {
  std::vector<double> out;
  auto parts = detail::split_fields(text, ":");
  if (parts.size() == 3) {
    auto lo = detail::parse_number<double>(parts[0]);
    auto hi = detail::parse_number<double>(parts[1]);
    auto n = detail::parse_number<std::size_t>(parts[2]);
    if (!lo || !hi || !n || *n == 0) throw UsageError("grid must be LO:HI:COUNT");
    out = log_spaced ? log_grid(*lo, *hi, *n) : linear_grid(*lo, *hi, *n);
  } else {
    for (auto f : detail::split_fields(text, ",")) {
      auto v = detail::parse_number<double>(f);
      if (!v) throw UsageError("invalid grid value '" + std::string(f) + "'");
      out.push_back(*v);
    }
  }
  if (out.empty()) throw UsageError("grid is empty");
  return out;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string csv_number(double v) { return std::isnan(v) ? "NA" : format_double(v); }

void emit(const ExperimentConfig& cfg, const std::string& text) {
  if (cfg.out.empty() || cfg.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.out, std::ios::binary);
  if (!out) throw DataError("cannot write " + cfg.out);
  out << text;
}

void check_format(const ExperimentConfig& cfg) {
  if (cfg.format != "csv" && cfg.format != "json") throw UsageError("--format must be csv or json");
}

std::string estimate_output(const ExperimentConfig& cfg, const Vector& estimate, Json meta) {
  if (cfg.format == "json") {
    Json j;
    j["schema"] = "1";
    j["estimate"] = estimate;
    for (auto& [k, v] : meta.items()) j[k] = v;
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "node,value\n";
  for (std::size_t i = 0; i < estimate.size(); ++i) out << i << ',' << format_double(estimate[i]) << '\n';
  return out.str();
}

int cmd_gen_graph(const ExperimentConfig& cfg) {
  auto g = make_graph(cfg).graph;
  std::ostringstream out;
  write_edge_list(out, g);
  emit(cfg, out.str());
  return 0;
}

int cmd_exact(const ExperimentConfig& cfg) {
  check_format(cfg);
  auto lg = make_graph(cfg);
  auto p = SmoothingProblem::uniform(lg.graph, make_signal(cfg, lg.graph, ""), cfg.q);
  auto res = solve_exact_cg(p);
  Json meta;
  meta["method"] = "exact";
  meta["q"] = cfg.q;
  meta["cg_iterations"] = res.iterations;
  meta["relative_residual"] = res.relative_residual;
  emit(cfg, estimate_output(cfg, res.x, meta));
  return 0;
}

int cmd_smooth(const ExperimentConfig& cfg) {
  check_format(cfg);
  auto lg = make_graph(cfg);
  auto p = SmoothingProblem::uniform(lg.graph, make_signal(cfg, lg.graph, ""), cfg.q);
  MonteCarloOptions opts;
  opts.threads = cfg.threads;
  auto res = run_monte_carlo(p, cfg.samples, parse_alpha(cfg.alpha), cfg.seed, opts);
  const auto& d = res.diagnostics;
  Json meta;
  meta["method"] = res.alpha_used == 0.0 ? "xbar" : "zbar";
  meta["q"] = cfg.q;
  meta["alpha"] = res.alpha_used;
  meta["diagnostics"] = {{"samples", d.samples},
                         {"alpha_strategy", d.alpha_strategy},
                         {"trace_var_xbar", number_or_null(d.trace_var_xbar)},
                         {"trace_var_ybar", number_or_null(d.trace_var_ybar)},
                         {"trace_cov_xy", number_or_null(d.trace_cov_xy)},
                         {"walk_steps", d.walk_steps},
                         {"constant_signal", d.constant_signal},
                         {"zero_variance_fallback", d.zero_variance_fallback},
                         {"alpha_from_same_samples", d.alpha_from_same_samples},
                         {"message", d.message}};
  if (!d.message.empty()) std::cerr << "forestgd: " << d.message << '\n';
  emit(cfg, estimate_output(cfg, res.estimate, meta));
  return 0;
}

int cmd_sweep_alpha(const ExperimentConfig& cfg) {
  check_format(cfg);
  auto lg = make_graph(cfg);
  auto y = make_signal(cfg, lg.graph, "normal");
  SweepConfig sc;
  sc.q = cfg.q;
  sc.samples = cfg.samples;
  sc.realizations = cfg.realizations;
  sc.alpha_grid = parse_grid(cfg.alpha_grid, false);
  sc.seed = cfg.seed;
  sc.threads = cfg.threads;
  auto r = sweep_alpha(lg.graph, y, sc);
  const double alpha_star = r.alpha_star.value_or(std::numeric_limits<double>::quiet_NaN());
  if (cfg.format == "json") {
    Json j;
    j["schema"] = "1";
    j["q"] = cfg.q;
    j["n_samples"] = cfg.samples;
    j["realizations"] = cfg.realizations;
    j["mse_xbar"] = r.mse_xbar;
    j["alpha_safe"] = r.alpha_safe;
    j["mse_safe"] = r.mse_safe;
    j["alpha_hat_mean"] = r.mean_alpha_hat;
    j["mse_alpha_hat"] = r.mse_alpha_hat;
    j["alpha_hat_fallbacks"] = r.alpha_hat_fallbacks;
    j["alpha_star"] = number_or_null(alpha_star);
    j["fit"] = {{"a", r.fit.a}, {"b", r.fit.b}, {"c", r.fit.c}, {"r_squared", r.fit.r_squared}};
    Json curve = Json::array();
    for (const auto& row : r.rows) curve.push_back({{"alpha", row.alpha}, {"mse_zbar", row.mse_zbar}});
    j["curve"] = curve;
    emit(cfg, j.dump(2) + "\n");
    return 0;
  }
  std::ostringstream out;
  out << "alpha,mse_xbar,mse_zbar,alpha_safe,mse_safe,alpha_hat,mse_alpha_hat,alpha_star\n";
  for (const auto& row : r.rows) {
    out << format_double(row.alpha) << ',' << format_double(r.mse_xbar) << ',' << format_double(row.mse_zbar) << ','
        << format_double(r.alpha_safe) << ',' << format_double(r.mse_safe) << ',' << format_double(r.mean_alpha_hat)
        << ',' << format_double(r.mse_alpha_hat) << ',' << csv_number(alpha_star) << '\n';
  }
  emit(cfg, out.str());
  return 0;
}

int cmd_denoise(const ExperimentConfig& cfg) {
  check_format(cfg);
  auto lg = make_graph(cfg);
  auto clean = make_signal(cfg, lg.graph, "smooth");
  DenoiseConfig dc;
  dc.q_grid = cfg.q_grid.empty() ? log_grid(0.01, 10.0, 16) : parse_grid(cfg.q_grid, true);
  dc.noise_std = cfg.noise_std;
  dc.samples = cfg.samples;
  dc.realizations = cfg.realizations;
  dc.seed = cfg.seed;
  dc.threads = cfg.threads;
  auto rows = denoise(lg.graph, clean, dc);
  const double peak = peak_of(clean);
  if (cfg.format == "json") {
    Json j;
    j["schema"] = "1";
    j["psnr_peak"] = "max_abs_clean_signal";
    j["peak"] = peak;
    j["noise_std"] = cfg.noise_std;
    j["n_samples"] = cfg.samples;
    j["realizations"] = cfg.realizations;
    Json table = Json::array();
    for (const auto& r : rows) {
      table.push_back({{"q", r.q},
                       {"psnr_y", r.psnr_y},
                       {"psnr_exact", r.psnr_exact},
                       {"psnr_xbar", r.psnr_xbar},
                       {"psnr_zbar_safe", r.psnr_zbar_safe},
                       {"psnr_zbar_hat", r.psnr_zbar_hat}});
    }
    j["rows"] = table;
    emit(cfg, j.dump(2) + "\n");
    return 0;
  }
  std::ostringstream out;
  out << "# psnr peak = max|clean signal| = " << format_double(peak) << '\n';
  out << "q,psnr_y,psnr_exact,psnr_xbar,psnr_zbar_safe,psnr_zbar_hat\n";
  for (const auto& r : rows) {
    out << format_double(r.q) << ',' << format_double(r.psnr_y) << ',' << format_double(r.psnr_exact) << ','
        << format_double(r.psnr_xbar) << ',' << format_double(r.psnr_zbar_safe) << ','
        << format_double(r.psnr_zbar_hat) << '\n';
  }
  emit(cfg, out.str());
  return 0;
}

int cmd_ssl(const ExperimentConfig& cfg) {
  check_format(cfg);
  auto lg = make_graph(cfg);
  const std::size_t n = lg.graph.num_vertices();
  SSLProblem p;
  p.graph = &lg.graph;
  p.mu = cfg.mu;
  p.sigma = cfg.sigma;
  if (!cfg.labels_path.empty()) {
    auto table = load_labels(cfg.labels_path, n);
    p.labels = table.labels;
    p.num_classes = table.num_classes;
  } else if (lg.cliques) {
    for (int c : clique_membership(*lg.cliques)) p.labels.emplace_back(c);
    p.num_classes = lg.cliques->count;
  } else {
    throw UsageError("ssl needs --labels PATH (or a cliques:... generated graph)");
  }
  SSLForestOptions fopts;
  fopts.monte_carlo.threads = cfg.threads;
  fopts.resample_per_class = cfg.resample_per_class;

  std::vector<AccuracyRow> rows;
  if (!cfg.labeled_set_path.empty()) {
    p.labeled = load_labeled_set(cfg.labeled_set_path, n);
    rows.push_back({0, "exact", ssl_exact(p).accuracy, 0.0});
    const std::vector<AlphaStrategy> strategies{AlphaStrategy::fixed(0.0), AlphaStrategy::safe(),
                                                AlphaStrategy::empirical()};
    auto forest = ssl_forest_multi(p, cfg.samples, strategies, cfg.seed, fopts);
    const char* names[] = {"xbar", "zbar_safe", "zbar_empirical"};
    for (std::size_t s = 0; s < forest.size(); ++s) rows.push_back({0, names[s], forest[s].accuracy, 0.0});
  } else {
    for (double m : parse_grid(cfg.labels_per_class, false)) {
      if (m < 1 || m != static_cast<double>(static_cast<std::size_t>(m))) {
        throw UsageError("--labels-per-class values must be positive integers");
      }
      AccuracyExperimentConfig ac;
      ac.labels_per_class = static_cast<std::size_t>(m);
      ac.repeats = cfg.repeats;
      ac.samples = cfg.samples;
      ac.seed = cfg.seed;
      ac.forest = fopts;
      auto part = accuracy_experiment(p, ac);
      rows.insert(rows.end(), part.begin(), part.end());
    }
  }

  if (cfg.format == "json") {
    Json j;
    j["schema"] = "1";
    j["mu"] = cfg.mu;
    j["sigma"] = cfg.sigma;
    j["alpha_safe"] = p.safe_alpha();
    j["n_samples"] = cfg.samples;
    Json table = Json::array();
    for (const auto& r : rows) {
      table.push_back({{"m", r.labels_per_class},
                       {"method", r.method},
                       {"mean_acc", number_or_null(r.mean_accuracy)},
                       {"std_acc", number_or_null(r.std_accuracy)}});
    }
    j["rows"] = table;
    emit(cfg, j.dump(2) + "\n");
    return 0;
  }
  std::ostringstream out;
  out << "m,method,mean_acc,std_acc\n";
  for (const auto& r : rows) {
    out << r.labels_per_class << ',' << r.method << ',' << csv_number(r.mean_accuracy) << ','
        << csv_number(r.std_accuracy) << '\n';
  }
  emit(cfg, out.str());
  return 0;
}

void add_graph_options(CLI::App* sub, ExperimentConfig& cfg) {
  sub->add_option("--graph", cfg.graph_path, "Edge-list file (u v [w] per line)");
  sub->add_option("--gen", cfg.gen_spec,
                  "Generator: regular:n=N,d=D | ba:n=N,k=K | grid:rows=R,cols=C | knn:n=N,k=K | "
                  "cliques:count=C,size=S");
  sub->add_option("--coords", cfg.coords_path, "Coordinates file (x,y per line) for knn");
  sub->add_option("--seed", cfg.seed, "Random seed");
  sub->add_option("--out", cfg.out, "Output path (default stdout)");
}

void add_signal_options(CLI::App* sub, ExperimentConfig& cfg) {
  sub->add_option("--signal", cfg.signal_path, "Signal file (one value per line or node,value)");
  sub->add_option("--signal-gen", cfg.signal_gen, "Synthetic signal: normal | smooth | constant:C");
  sub->add_option("--format", cfg.format, "Output format: csv or json");
  sub->add_option("--threads", cfg.threads, "Worker threads (0: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph Tikhonov smoothing with random spanning forests"};
  app.require_subcommand(1);
  ExperimentConfig cfg;

  auto* gen = app.add_subcommand("gen-graph", "Generate a graph and write it as an edge list");
  add_graph_options(gen, cfg);

  auto* exact = app.add_subcommand("exact", "Exact smoothing K y by conjugate gradient");
  add_graph_options(exact, cfg);
  add_signal_options(exact, cfg);
  exact->add_option("--q", cfg.q, "Regularization parameter q > 0");

  auto* smooth = app.add_subcommand("smooth", "Monte Carlo forest estimate of K y");
  add_graph_options(smooth, cfg);
  add_signal_options(smooth, cfg);
  smooth->add_option("--q", cfg.q, "Regularization parameter q > 0");
  smooth->add_option("--n-samples", cfg.samples, "Number of forests N");
  smooth->add_option("--alpha", cfg.alpha, "Step size: safe | empirical | oracle | FLOAT");

  auto* sweep = app.add_subcommand("sweep-alpha", "Squared error of xbar and zbar over a step-size grid");
  add_graph_options(sweep, cfg);
  add_signal_options(sweep, cfg);
  sweep->add_option("--q", cfg.q, "Regularization parameter q > 0");
  sweep->add_option("--n-samples", cfg.samples, "Forests per estimate N");
  sweep->add_option("--realizations", cfg.realizations, "Independent estimates R");
  sweep->add_option("--alpha-grid", cfg.alpha_grid, "LO:HI:COUNT or comma list");

  auto* den = app.add_subcommand("denoise", "PSNR of noisy, exact and forest estimates over q");
  add_graph_options(den, cfg);
  add_signal_options(den, cfg);
  den->add_option("--noise-std", cfg.noise_std, "Gaussian noise standard deviation");
  den->add_option("--q-grid", cfg.q_grid, "LO:HI:COUNT (log-spaced) or comma list; default 0.01:10:16");
  den->add_option("--n-samples", cfg.samples, "Forests per estimate N");
  den->add_option("--realizations", cfg.realizations, "Noise/forest realizations averaged per q");

  auto* ssl = app.add_subcommand("ssl", "Semi-supervised classification accuracy table");
  add_graph_options(ssl, cfg);
  ssl->add_option("--labels", cfg.labels_path, "node,class_id CSV");
  ssl->add_option("--labeled-set", cfg.labeled_set_path, "Fixed labeled vertices, one id per line");
  ssl->add_option("--labels-per-class", cfg.labels_per_class, "m values: LO:HI:COUNT or comma list");
  ssl->add_option("--repeats", cfg.repeats, "Repeats per m");
  ssl->add_option("--n-samples", cfg.samples, "Forests per estimate N");
  ssl->add_option("--mu", cfg.mu, "mu > 0");
  ssl->add_option("--sigma", cfg.sigma, "sigma in [0, 1]");
  ssl->add_option("--format", cfg.format, "Output format: csv or json");
  ssl->add_option("--threads", cfg.threads, "Worker threads (0: all cores)");
  ssl->add_flag("--resample-per-class", cfg.resample_per_class, "Draw fresh forests for every class");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_graph(cfg);
    if (*exact) return cmd_exact(cfg);
    if (*smooth) {
      cfg.samples = smooth->count("--n-samples") ? cfg.samples : 10;
      return cmd_smooth(cfg);
    }
    if (*sweep) return cmd_sweep_alpha(cfg);
    if (*den) {
      if (!den->count("--n-samples")) cfg.samples = 2;
      if (!den->count("--realizations")) cfg.realizations = 20;
      return cmd_denoise(cfg);
    }
    if (*ssl) {
      if (!ssl->count("--n-samples")) cfg.samples = 50;
      return cmd_ssl(cfg);
    }
  } catch (const UsageError& e) {
    std::cerr << "forestgd: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "forestgd: " << e.what() << '\n';
    return kExitData;
  } catch (const SizeLimitError& e) {
    std::cerr << "forestgd: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "forestgd: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
