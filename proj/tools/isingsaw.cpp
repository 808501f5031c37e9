// isingsaw command-line driver: graph generation, SAW trees, verification
// suites, parameter scans and bound evaluation.
//
// Exit status: 0 success, 1 a verification check failed, 2 usage, config or
// input error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "isingsaw/bounds.hpp"
#include "isingsaw/exact_ising.hpp"
#include "isingsaw/glauber.hpp"
#include "isingsaw/graph.hpp"
#include "isingsaw/parallel.hpp"
#include "isingsaw/saw_tree.hpp"
#include "isingsaw/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace isingsaw;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

const char* const kCommands[] = {"saw", "verify", "scan", "bounds", "graph"};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Graph load_graph(const std::string& spec) {
  if (spec.rfind("file:", 0) == 0) return generate(parse_graph_spec(spec, read_file(spec.substr(5))));
  return make_graph(spec);
}

// Output directory for default file names.
fs::path output_dir() {
  const char* env = std::getenv("ISINGSAW_OUT");
  return env && *env ? fs::path(env) : fs::path(".");
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '.';
    if (!keep) c = '_';
  }
  return s;
}

std::string num(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Primary outputs are written byte-for-byte; run metadata (wall time, argv)
// goes to a sidecar "<path>.log" so reruns compare equal.
void write_output(const std::string& path, const std::string& body, const std::string& argv_line,
                  double seconds) {
  if (path == "-") {
    std::cout << body;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidInput("cannot write '" + path + "'");
    out << body;
  }
  std::ofstream log(p.string() + ".log", std::ios::binary);
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  log << "finished " << stamp << "\nelapsed_seconds " << seconds << "\nargv " << argv_line << "\n";
}

// "bc" or a number. "bc" needs a d-regular graph with d >= 3.
double resolve_beta(const std::string& text, const Graph* g) {
  if (text == "bc") {
    if (!g) throw InvalidInput("'bc' needs --graph");
    if (!g->is_regular()) throw InvalidInput("'bc' needs a regular graph; this one is irregular");
    return critical_beta(g->max_degree()).value;
  }
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || !std::isfinite(v)) throw InvalidInput("bad number '" + text + "'");
  return v;
}

// a:b:step, inclusive of b up to rounding.
std::vector<double> parse_grid(const std::string& text, const Graph* g) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() == 1) return {resolve_beta(parts[0], g)};
  if (parts.size() != 3) throw InvalidInput("grid must be a:b:step");
  const double a = resolve_beta(parts[0], g), b = resolve_beta(parts[1], g), h = resolve_beta(parts[2], g);
  if (!(h > 0) || b < a) throw InvalidInput("grid needs step > 0 and b >= a");
  const auto steps = static_cast<long long>(std::floor((b - a) / h + 1e-9));
  if (steps > 1000000) throw InvalidInput("grid too large");
  std::vector<double> grid;
  for (long long i = 0; i <= steps; ++i) grid.push_back(std::min(b, a + static_cast<double>(i) * h));
  return grid;
}

// Turns a JSON config object into "--key value" tokens.
std::vector<std::string> config_tokens(const std::string& path) {
  json cfg;
  try {
    cfg = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InvalidInput("config '" + path + "': " + e.what());
  }
  if (!cfg.is_object()) throw InvalidInput("config '" + path + "' must be a JSON object");
  std::vector<std::string> out;
  for (const auto& [key, value] : cfg.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back("--" + key);
    } else if (value.is_string()) {
      out.push_back("--" + key);
      out.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      out.push_back("--" + key);
      out.push_back(value.dump());
    } else {
      throw InvalidInput("config key '" + key + "' must be a string, number or boolean");
    }
  }
  return out;
}

// Removes --config from argv and splices its tokens in right after the
// command name, so flags given on the command line come later and win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw InvalidInput("--config needs a path");
      config = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (config.empty()) return args;
  auto cmd = std::find_if(args.begin(), args.end(), [](const std::string& a) {
    return std::find(std::begin(kCommands), std::end(kCommands), a) != std::end(kCommands);
  });
  if (cmd == args.end()) throw InvalidInput("--config needs a command");
  const auto tokens = config_tokens(config);
  args.insert(cmd + 1, tokens.begin(), tokens.end());
  return args;
}

// ---------------------------------------------------------------------------

struct SawArgs {
  std::string graph;
  int root = 0;
  std::size_t cap = kDefaultSawNodeCap;
  std::string out;
};

int cmd_saw(const SawArgs& a, const std::string& argv_line) {
  const auto t0 = std::chrono::steady_clock::now();
  const Graph g = load_graph(a.graph);
  if (a.root < 0 || a.root >= g.vertex_count()) {
    throw InvalidInput("--root " + std::to_string(a.root) + " out of range for " + std::to_string(g.vertex_count()) +
                       " vertices");
  }
  const SawTree t = build_saw_tree(g, a.root, a.cap);
  json cfg{{"command", "saw"}, {"graph", a.graph}, {"root", a.root}, {"cap", a.cap}};
  json j;
  j["config"] = cfg;
  int plus = 0, minus = 0;
  auto& nodes = j["nodes"] = json::array();
  for (const auto& node : t.nodes) {
    plus += node.pin == PinMark::plus;
    minus += node.pin == PinMark::minus;
    nodes.push_back({{"id", node.id}, {"label", node.label}, {"parent", node.parent}, {"depth", node.depth},
                     {"pin", to_string(node.pin)}});
  }
  j["summary"] = {{"nodes", t.size()}, {"plus", plus}, {"minus", minus}};
  const std::string prefix =
      a.out.empty() ? (output_dir() / ("saw_" + sanitize(a.graph) + "_r" + std::to_string(a.root))).string() : a.out;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (prefix == "-") {
    write_output("-", j.dump(2) + "\n", argv_line, secs);
    return 0;
  }
  write_output(prefix + ".dot", "// " + cfg.dump() + "\n" + to_dot(t), argv_line, secs);
  write_output(prefix + ".json", j.dump(2) + "\n", argv_line, secs);
  std::printf("saw tree: %zu nodes (%d plus, %d minus)\n  %s.dot\n  %s.json\n", t.size(), plus, minus,
              prefix.c_str(), prefix.c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all";
  VerifyOptions opt;
  std::string out;
  bool quiet = false;
};

int cmd_verify(VerifyArgs a, const std::string& argv_line) {
  const auto t0 = std::chrono::steady_clock::now();
  const SuiteReport rep = run_suite(a.suite, a.opt);
  json j;
  j["config"] = {{"command", "verify"},
                 {"suite", a.suite},
                 {"seed", a.opt.seed},
                 {"node_cap", a.opt.node_cap},
                 {"enum_cap", a.opt.enumeration_cap},
                 {"dss_fields", a.opt.dss_fields},
                 {"dirichlet_functions", a.opt.dirichlet_functions},
                 {"lsi_functions", a.opt.lsi_functions},
                 {"lsi_restarts", a.opt.lsi_restarts},
                 {"prop4_trees", a.opt.prop4_trees}};
  const json report = rep.to_json();
  for (const auto& [k, v] : report.items()) j[k] = v;
  const std::string path =
      a.out.empty() ? (output_dir() / ("verify_" + a.suite + "_seed" + std::to_string(a.opt.seed) + ".json")).string()
                    : a.out;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_output(path, j.dump(2) + "\n", argv_line, secs);

  if (!a.quiet) {
    std::printf("%-26s %-34s %9s %12s %9s  %s\n", "check", "worst instance", "count", "margin", "tol", "status");
    for (const auto& c : rep.checks) {
      std::string inst = c.instance.size() > 34 ? c.instance.substr(0, 31) + "..." : c.instance;
      std::printf("%-26s %-34s %9zu %12.3e %9.1e  %s\n", c.name.c_str(), inst.c_str(), c.count, c.margin(),
                  c.tolerance, c.pass ? "pass" : "FAIL");
    }
  }
  std::printf("%s: %zu checks, %zu passed, %zu failed (%.2fs)\n", a.suite.c_str(), rep.checks.size(), rep.passed(),
              rep.failed(), secs);
  if (path != "-") std::printf("report: %s\n", path.c_str());
  return rep.ok() ? 0 : kExitCheckFailed;
}

// ---------------------------------------------------------------------------

struct ScanArgs {
  std::string kind;
  std::string graph;
  std::string s_grid;
  std::string beta = "bc";
  double eps = 0.25;
  int max_steps = 1000000;
  bool skip_gap = false;
  int replicas = 200;
  long long steps = 100000000;
  std::uint64_t seed = 1;
  int enum_cap = kDefaultEnumerationCap;
  unsigned threads = default_threads();
  std::string out;
};

std::string scan_chi(const ScanArgs& a, const Graph& g, json& cfg) {
  if (a.s_grid.empty()) throw InvalidInput("scan chi needs --s a:b:step");
  cfg["s"] = a.s_grid;
  cfg["enum_cap"] = a.enum_cap;
  const auto grid = parse_grid(a.s_grid, &g);
  for (double s : grid) {
    if (s < 0) throw InvalidInput("scan chi: s must be nonnegative");
  }
  const int d = effective_degree(g);
  const double bc = critical_beta(d).value;
  std::vector<Susceptibility> chi(grid.size());
  parallel_for(grid.size(), a.threads, [&](std::size_t i) { chi[i] = susceptibility(g, grid[i], a.enum_cap); });
  std::string body = "d,s,chi_exact,argmax,chi_geometric,chi_lemma\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    const bool below = s < bc;
    body += std::to_string(d) + "," + num(s) + "," + num(chi[i].chi) + "," + std::to_string(chi[i].argmax) + "," +
            (below ? num(chi_geometric_bound(d, s)) : "") + "," +
            (below ? num(chi_lemma_bound(d, s, g.vertex_count())) : "") + "\n";
  }
  return body;
}

std::string scan_mixing(const ScanArgs& a, const Graph& g, json& cfg) {
  const double beta = resolve_beta(a.beta, &g);
  cfg["beta"] = a.beta;
  cfg["beta_value"] = beta;
  cfg["eps"] = a.eps;
  cfg["max_steps"] = a.max_steps;
  cfg["seed"] = a.seed;
  const ExactModel m(g, IsingParams::zero_field(g.vertex_count(), beta), a.enum_cap);
  const ChainKernel k = build_kernel(m);
  const MixingResult r = exact_mixing_time(k, a.eps, a.max_steps, a.threads, a.seed);
  json res{{"t_mix", r.t_mix},
           {"starts", r.exhaustive ? "all" : "lower-bounded max"},
           {"worst_start", r.worst_start}};
  if (!a.skip_gap) {
    const double gap = spectral_gap(k, 1e-10, 2000000, a.seed);
    res["spectral_gap"] = gap;
    res["relaxation_time"] = 1.0 / gap;
  }
  std::string body = "# result: " + res.dump() + "\nt,worst_tv\n";
  for (std::size_t t = 0; t < r.worst_tv.size(); ++t) body += std::to_string(t) + "," + num(r.worst_tv[t]) + "\n";
  return body;
}

std::string scan_coupling(const ScanArgs& a, const Graph& g, json& cfg) {
  const double beta = resolve_beta(a.beta, &g);
  cfg["beta"] = a.beta;
  cfg["beta_value"] = beta;
  cfg["replicas"] = a.replicas;
  cfg["steps"] = a.steps;
  cfg["seed"] = a.seed;
  ChainRunConfig run;
  run.seed = a.seed;
  run.steps = a.steps;
  run.replicas = a.replicas;
  const CouplingStats st = monotone_coupling_time(g, IsingParams::zero_field(g.vertex_count(), beta), run, a.threads);
  json res{{"censored", st.censored}, {"order_violations", st.order_violations}, {"mean", st.mean}};
  std::string body = "# result: " + res.dump() + "\nquantile,time\n";
  const std::pair<double, double> rows[] = {
      {0.10, st.q10}, {0.25, st.q25}, {0.50, st.median}, {0.75, st.q75}, {0.90, st.q90}};
  for (auto [q, t] : rows) body += num(q) + "," + num(t) + "\n";
  return body;
}

int cmd_scan(const ScanArgs& a, const std::string& argv_line) {
  const auto t0 = std::chrono::steady_clock::now();
  const Graph g = load_graph(a.graph);
  json cfg{{"command", "scan"}, {"kind", a.kind}, {"graph", a.graph}};
  std::string body;
  if (a.kind == "chi") body = scan_chi(a, g, cfg);
  else if (a.kind == "mixing") body = scan_mixing(a, g, cfg);
  else body = scan_coupling(a, g, cfg);
  body = "# config: " + cfg.dump() + "\n" + body;
  const std::string path =
      a.out.empty() ? (output_dir() / ("scan_" + a.kind + "_" + sanitize(a.graph) + ".csv")).string() : a.out;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_output(path, body, argv_line, secs);
  if (path != "-") std::printf("wrote %s\n", path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct BoundsArgs {
  int d = 3;
  long long n = 0;
  std::string s, beta, chi_curve = "lemma", graph, out = "-";
  double eps = 0.25, alpha = 0, mu_min = 0, gamma_inv = 0, norm_a = 0;
};

int cmd_bounds(const BoundsArgs& a, const std::string& argv_line) {
  const auto t0 = std::chrono::steady_clock::now();
  std::unique_ptr<Graph> g;
  if (!a.graph.empty()) g = std::make_unique<Graph>(load_graph(a.graph));
  const int d = g ? g->max_degree() : a.d;
  const long long n = g ? g->vertex_count() : a.n;
  const BetaCritical bc = critical_beta(d);
  json j;
  json cfg{{"command", "bounds"}, {"d", d}};
  if (n > 0) cfg["n"] = n;
  if (g) cfg["graph"] = a.graph;
  j["beta_c"] = {{"value", bc.value}, {"theta", bc.theta()}, {"identity_residual", (d - 1) * bc.theta() - 1.0}};
  if (!a.s.empty()) {
    const double s = a.s == "bc" && !g ? bc.value : resolve_beta(a.s, g.get());
    cfg["s"] = s;
    json chi{{"geometric", s < bc.value ? chi_geometric_bound(d, s) : kInf}};
    if (s < bc.value) chi["lemma_uncapped"] = chi_lemma_bound_uncapped(d, s);
    if (s < bc.value && n > 0) chi["lemma"] = chi_lemma_bound(d, s, n);
    j["chi_bounds"] = chi;
  }
  if (n >= 2) j["chi_integral_bound"] = chi_integral_bound(d, n);
  if (n >= 1) {
    const ExponentBound e = theorem1_exponent(d, n);
    j["alpha_inverse_bound"] = {{"exponent", e.exponent}, {"log10", e.log10_bound}};
    if (std::isfinite(e.bound)) j["alpha_inverse_bound"]["value"] = e.bound;
  }
  if (!a.beta.empty()) {
    const double beta = a.beta == "bc" && !g ? bc.value : resolve_beta(a.beta, g.get());
    cfg["beta"] = beta;
    const double norm_a = a.norm_a > 0 ? a.norm_a : g ? adjacency_spectral_radius(*g) : d;
    cfg["norm_a"] = norm_a;
    cfg["chi_curve"] = a.chi_curve;
    std::function<double(double)> chi;
    if (a.chi_curve == "lemma") {
      if (n <= 0) throw InvalidInput("--chi-curve lemma needs --n");
      chi = [&](double s) { return s < bc.value ? chi_lemma_bound(d, s, n) : static_cast<double>(n); };
    } else if (a.chi_curve == "exact") {
      if (!g) throw InvalidInput("--chi-curve exact needs --graph");
      chi = [&](double s) { return susceptibility(*g, s).chi; };
    } else if (a.chi_curve.rfind("const:", 0) == 0) {
      const double c = resolve_beta(a.chi_curve.substr(6), nullptr);
      chi = [c](double) { return c; };
    } else {
      throw InvalidInput("--chi-curve must be lemma, exact or const:X");
    }
    const LsiBound b = bd_lsi_bound(beta, norm_a, chi);
    j["lsi_bound"] = {{"gamma_inverse", b.value}, {"log_gamma_inverse", b.log_value}, {"integral", b.integral}};
    if (n > 0) {
      const AlphaBound ab = alpha_from_gamma(b.value, n, d, beta);
      j["alpha_from_lsi"] = {{"sharp", ab.sharp}, {"rounded", ab.rounded}, {"rounded_valid", ab.rounded_valid}};
    }
  }
  if (a.gamma_inv > 0) {
    if (n <= 0 || a.beta.empty()) throw InvalidInput("--gamma-inv needs --n and --beta");
    const AlphaBound ab = alpha_from_gamma(a.gamma_inv, n, d, resolve_beta(a.beta, g.get()));
    cfg["gamma_inv"] = a.gamma_inv;
    j["alpha_from_gamma"] = {{"sharp", ab.sharp}, {"rounded", ab.rounded}, {"rounded_valid", ab.rounded_valid}};
  }
  if (a.alpha > 0) {
    if (!(a.mu_min > 0)) throw InvalidInput("--alpha needs --mu-min");
    cfg["alpha"] = a.alpha;
    cfg["mu_min"] = a.mu_min;
    cfg["eps"] = a.eps;
    j["mixing_from_lsi"] = mixing_from_lsi(a.alpha, a.mu_min, a.eps);
  }
  json out;
  out["config"] = cfg;
  for (const auto& [k, v] : j.items()) out[k] = v;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_output(a.out, out.dump(2) + "\n", argv_line, secs);
  return 0;
}

// ---------------------------------------------------------------------------

struct GraphArgs {
  std::string graph, format = "edges", out = "-";
};

int cmd_graph(const GraphArgs& a, const std::string& argv_line) {
  const Graph g = load_graph(a.graph);
  std::string body;
  if (a.format == "edges") {
    body = "# " + a.graph + "\n" + emit_edge_list(g);
  } else if (a.format == "dot") {
    body = to_dot(g);
  } else {
    json j{{"graph", a.graph},
           {"n", g.vertex_count()},
           {"edges", g.edge_count()},
           {"max_degree", g.max_degree()},
           {"regular", g.is_regular()},
           {"connected", g.connected()}};
    if (g.connected()) j["spectral_radius"] = adjacency_spectral_radius(g);
    auto& list = j["edge_list"] = json::array();
    for (auto [u, v] : g.edges()) list.push_back({u, v});
    body = j.dump(2) + "\n";
  }
  write_output(a.out, body, argv_line, 0.0);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ising model toolkit: SAW trees, exact enumeration, Glauber dynamics and bound checks", "isingsaw"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.add_option("--config", "JSON file of option values (keys are long option names); flags override it");

  std::string argv_line;
  for (int i = 0; i < argc; ++i) argv_line += (i ? " " : "") + std::string(argv[i]);

  SawArgs saw;
  auto* saw_cmd = app.add_subcommand("saw", "Build the self-avoiding-walk tree of a graph (DOT + JSON)");
  saw_cmd->add_option("--graph", saw.graph, "Graph spec, e.g. k3, cycle:8, rr:n=10,d=3,seed=1, file:PATH")->required();
  saw_cmd->add_option("--root", saw.root, "Root vertex");
  saw_cmd->add_option("--cap", saw.cap, "Node cap");
  saw_cmd->add_option("--out", saw.out, "Output prefix (writes PREFIX.dot and PREFIX.json; '-' prints the JSON)");

  VerifyArgs ver;
  ver.opt.threads = default_threads();
  auto* ver_cmd = app.add_subcommand("verify", "Run verification suites and write a JSON report");
  std::vector<std::string> suites = suite_names();
  suites.push_back("all");
  ver_cmd->add_option("--suite", ver.suite, "Suite name")->check(CLI::IsMember(suites));
  ver_cmd->add_option("--seed", ver.opt.seed, "Master seed");
  ver_cmd->add_option("--threads", ver.opt.threads, "Worker threads")->check(CLI::PositiveNumber);
  ver_cmd->add_option("--node-cap", ver.opt.node_cap, "SAW tree node cap");
  ver_cmd->add_option("--enum-cap", ver.opt.enumeration_cap, "Enumeration cap (free spins)");
  ver_cmd->add_option("--dss-fields", ver.opt.dss_fields, "Random fields per graph in the covariance suite");
  ver_cmd->add_option("--dirichlet-functions", ver.opt.dirichlet_functions, "Random functions per model");
  ver_cmd->add_option("--lsi-functions", ver.opt.lsi_functions, "Random functions per model");
  ver_cmd->add_option("--lsi-restarts", ver.opt.lsi_restarts, "Optimizer restarts per model");
  ver_cmd->add_option("--prop4-trees", ver.opt.prop4_trees, "Random trees in the root-conditioning suite");
  ver_cmd->add_option("--out", ver.out, "Report path ('-' for stdout)");
  ver_cmd->add_flag("--quiet", ver.quiet, "Only print the summary line");

  ScanArgs scan;
  auto* scan_cmd = app.add_subcommand("scan", "Parameter scans written as CSV");
  scan_cmd->add_option("kind", scan.kind, "chi | mixing | coupling")
      ->required()
      ->check(CLI::IsMember({"chi", "mixing", "coupling"}));
  scan_cmd->add_option("--graph", scan.graph, "Graph spec")->required();
  scan_cmd->add_option("--s", scan.s_grid, "chi: grid a:b:step ('bc' allowed as an endpoint)");
  scan_cmd->add_option("--beta", scan.beta, "mixing/coupling: inverse temperature or 'bc'");
  scan_cmd->add_option("--eps", scan.eps, "mixing: TV threshold");
  scan_cmd->add_option("--max-steps", scan.max_steps, "mixing: iteration cap");
  scan_cmd->add_flag("--skip-gap", scan.skip_gap, "mixing: do not compute the spectral gap");
  scan_cmd->add_option("--replicas", scan.replicas, "coupling: replicas");
  scan_cmd->add_option("--steps", scan.steps, "coupling: per-replica step budget");
  scan_cmd->add_option("--seed", scan.seed, "Master seed");
  scan_cmd->add_option("--enum-cap", scan.enum_cap, "Enumeration cap (free spins)");
  scan_cmd->add_option("--threads", scan.threads, "Worker threads")->check(CLI::PositiveNumber);
  scan_cmd->add_option("--out", scan.out, "CSV path ('-' for stdout)");

  BoundsArgs bnd;
  auto* bnd_cmd = app.add_subcommand("bounds", "Evaluate the closed-form bounds (JSON)");
  bnd_cmd->add_option("--d", bnd.d, "Degree bound");
  bnd_cmd->add_option("--n", bnd.n, "Number of vertices");
  bnd_cmd->add_option("--graph", bnd.graph, "Take d, n and ||A|| from this graph");
  bnd_cmd->add_option("--s", bnd.s, "Evaluate the susceptibility bounds at s");
  bnd_cmd->add_option("--beta", bnd.beta, "Evaluate the log-Sobolev bound at beta (or 'bc')");
  bnd_cmd->add_option("--norm-a", bnd.norm_a, "Adjacency spectral radius (default d or from --graph)");
  bnd_cmd->add_option("--chi-curve", bnd.chi_curve, "lemma | exact | const:X");
  bnd_cmd->add_option("--gamma-inv", bnd.gamma_inv, "Inverse spectral-type constant for alpha_from_gamma");
  bnd_cmd->add_option("--alpha", bnd.alpha, "Log-Sobolev constant for the mixing bound");
  bnd_cmd->add_option("--mu-min", bnd.mu_min, "Smallest stationary probability");
  bnd_cmd->add_option("--eps", bnd.eps, "TV threshold");
  bnd_cmd->add_option("--out", bnd.out, "Output path ('-' for stdout)");

  GraphArgs gra;
  auto* gra_cmd = app.add_subcommand("graph", "Generate a graph and emit it");
  gra_cmd->add_option("--graph", gra.graph, "Graph spec")->required();
  gra_cmd->add_option("--format", gra.format, "edges | dot | json")->check(CLI::IsMember({"edges", "dot", "json"}));
  gra_cmd->add_option("--out", gra.out, "Output path ('-' for stdout)");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }

  try {
    if (saw_cmd->parsed()) return cmd_saw(saw, argv_line);
    if (ver_cmd->parsed()) return cmd_verify(ver, argv_line);
    if (scan_cmd->parsed()) return cmd_scan(scan, argv_line);
    if (bnd_cmd->parsed()) return cmd_bounds(bnd, argv_line);
    if (gra_cmd->parsed()) return cmd_graph(gra, argv_line);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
