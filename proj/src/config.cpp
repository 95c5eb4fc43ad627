#include "twnls/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "twnls/grid.hpp"
#include "twnls/spectral.hpp"
#include "twnls/twisted.hpp"
#include "twnls/verify.hpp"

namespace twnls {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  const std::string s = trim(v);
  double out = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw UsageError("--" + key + ": expected a number, got '" + v + "'");
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  const std::string s = trim(v);
  long long out = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw UsageError("--" + key + ": expected an integer, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < -2147483647 || x > 2147483647) throw UsageError("--" + key + ": value out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string s = trim(v);
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw UsageError("--" + key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) throw UsageError("--" + key + ": expected a comma-separated list");
  return out;
}

struct Key {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<Json(const RunConfig&)> get;
};

#define TWNLS_NUM(key, field, help) \
  Key { key, help, [](RunConfig& c, const std::string& v) { c.field = to_double(key, v); }, \
        [](const RunConfig& c) { return Json(c.field); } }
#define TWNLS_INT(key, field, help) \
  Key { key, help, [](RunConfig& c, const std::string& v) { c.field = to_int(key, v); }, \
        [](const RunConfig& c) { return Json(c.field); } }
#define TWNLS_STR(key, field, help) \
  Key { key, help, [](RunConfig& c, const std::string& v) { c.field = trim(v); }, \
        [](const RunConfig& c) { return Json(c.field); } }
#define TWNLS_BOOL(key, field, help) \
  Key { key, help, [](RunConfig& c, const std::string& v) { c.field = to_bool(key, v); }, \
        [](const RunConfig& c) { return Json(c.field); } }

const std::vector<Key>& registry() {
  static const std::vector<Key> keys{
      TWNLS_INT("n", n, "complex dimension"),
      TWNLS_NUM("R", R, "box half-width"),
      TWNLS_INT("N", N, "nodes per axis (even)"),
      TWNLS_INT("K", K, "spectral order"),
      TWNLS_NUM("alpha", alpha, "power of the nonlinearity"),
      TWNLS_NUM("lambda-re", lambda_re, "real part of the coupling"),
      TWNLS_NUM("lambda-im", lambda_im, "imaginary part of the coupling"),
      TWNLS_STR("f", f, "initial data: zero, gauss:A, phi:MU:NU:A, random:K:A or a grid-function file"),
      TWNLS_NUM("t0", t0, "initial time"),
      TWNLS_NUM("T", T, "half-interval length"),
      TWNLS_INT("Mt", Mt, "time nodes per side"),
      TWNLS_NUM("tol", tol, "Picard tolerance"),
      TWNLS_INT("picard-max", picard_max, "Picard iteration cap"),
      TWNLS_NUM("q", q, "time exponent of the admissible pair (0: default)"),
      TWNLS_NUM("C-cal", C_cal, "calibrated Strichartz constant"),
      TWNLS_NUM("lambda-T", lambda_T, "fraction of T0 used as step"),
      TWNLS_BOOL("t0-gate", t0_gate, "reject T above lambda-T * T0"),
      TWNLS_STR("initial", initial, "first Picard iterate: linear, constant or zero"),
      TWNLS_NUM("t", t, "propagation time"),
      TWNLS_STR("method", method, "propagator: eigen or kernel"),
      TWNLS_NUM("horizon", horizon, "continuation horizon (signed)"),
      TWNLS_NUM("blowup-factor", blowup_factor, "norm growth that stops continuation"),
      TWNLS_INT("max-segments", max_segments, "continuation segment budget"),
      TWNLS_NUM("truncation-limit", truncation_limit, "largest tolerated nonlinearity truncation"),
      Key{"eps", "perturbation sizes, comma-separated",
          [](RunConfig& c, const std::string& v) { c.eps = to_list("eps", v); },
          [](const RunConfig& c) { return Json(c.eps); }},
      TWNLS_NUM("length", length, "stability interval length"),
      TWNLS_INT("perturbation-K", perturbation_K, "spectral order of the perturbation"),
      TWNLS_STR("suite", suite, "dispersive, strichartz, commutation, nonlinearity, equivalence or all"),
      TWNLS_BOOL("refine", refine, "repeat estimates on the refined grid"),
      TWNLS_INT("probes", probes, "dispersive probe count"),
      Key{"seed", "random seed",
          [](RunConfig& c, const std::string& v) {
            const long long s = to_integer("seed", v);
            if (s < 0) throw UsageError("--seed: must be non-negative");
            c.seed = static_cast<std::uint64_t>(s);
          },
          [](const RunConfig& c) { return Json(c.seed); }},
      TWNLS_STR("out", out, "output prefix (verify: report path or prefix)"),
      TWNLS_STR("format", format, "grid-function dump format: csv or binary"),
      TWNLS_INT("threads", threads, "worker threads (0: TWISTED_NLS_THREADS or all)"),
  };
  return keys;
}

#undef TWNLS_NUM
#undef TWNLS_INT
#undef TWNLS_STR
#undef TWNLS_BOOL

const Key* find_key(const std::string& name) {
  for (const Key& k : registry())
    if (k.name == name) return &k;
  return nullptr;
}

const std::map<std::string, std::vector<std::string>>& command_table() {
  static const std::vector<std::string> common{"seed", "out", "threads"};
  static const std::vector<std::string> grid{"n", "R", "N", "K"};
  static const std::vector<std::string> spec{"alpha", "lambda-re", "lambda-im"};
  static const std::vector<std::string> solver{"t0", "T",     "Mt",       "tol",       "picard-max",
                                               "q",  "C-cal", "lambda-T", "t0-gate", "initial"};
  auto join = [](std::initializer_list<std::vector<std::string>> parts) {
    std::vector<std::string> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  };
  static const std::map<std::string, std::vector<std::string>> table{
      {"basis", join({grid, common})},
      {"propagate", join({grid, {"f", "t", "method", "format"}, common})},
      {"solve", join({grid, spec, {"f"}, solver, {"format"}, common})},
      {"continue", join({grid, spec, {"f"}, solver, {"horizon", "blowup-factor", "max-segments", "truncation-limit"},
                         common})},
      {"stability", join({grid, spec, {"f"}, solver, {"eps", "length", "perturbation-K"}, common})},
      {"verify", join({{"n", "R", "N", "alpha", "suite", "refine", "probes"}, common})},
  };
  return table;
}

const char* command_help(const std::string& c) {
  if (c == "basis") return "build the special Hermite basis and report its fidelity";
  if (c == "propagate") return "apply the linear propagator to initial data";
  if (c == "solve") return "solve the nonlinear equation by Picard iteration";
  if (c == "continue") return "continue a solution segment by segment towards a horizon";
  if (c == "stability") return "measure solution deviation under perturbed data";
  return "run the numerical estimate suites";
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"basis", "propagate", "solve", "continue", "stability", "verify"};
  return names;
}

std::vector<std::string> command_keys(const std::string& command) {
  const auto it = command_table().find(command);
  if (it == command_table().end()) throw UsageError("unknown command '" + command + "'");
  return it->second;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  const std::vector<std::string> keys = command_keys(cfg.command);
  if (std::find(keys.begin(), keys.end(), key) == keys.end())
    throw UsageError("unknown key '" + key + "' for command " + cfg.command);
  find_key(key)->set(cfg, value);
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    Json j;
    try {
      j = Json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(origin + ": invalid JSON: " + e.what());
    }
    for (const auto& [k, v] : j.items()) {
      std::string s;
      if (v.is_string()) {
        s = v.get<std::string>();
      } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i].dump();
      } else {
        s = v.dump();
      }
      set_key(cfg, k, s);
    }
    return;
  }
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string l = trim(line);
    if (l.empty() || l[0] == '#') continue;
    const auto eq = l.find('=');
    if (eq == std::string::npos)
      throw UsageError(origin + ":" + std::to_string(lineno) + ": expected key=value, got '" + l + "'");
    set_key(cfg, trim(l.substr(0, eq)), trim(l.substr(eq + 1)));
  }
}

void validate_config(const RunConfig& cfg) {
  auto fail = [](const std::string& m) { throw UsageError(m); };
  try {
    Grid(cfg.n, cfg.R, cfg.N);
  } catch (const InvalidArgument& e) {
    fail(e.what());
  }
  if (cfg.K < 0 || cfg.K > 40) fail("--K must lie in [0, 40]");
  if (cfg.threads < 0) fail("--threads must be >= 0");
  if (cfg.format != "csv" && cfg.format != "binary") fail("--format must be csv or binary");
  if (cfg.out.empty()) fail("--out must not be empty");
  const std::string& c = cfg.command;
  const bool nonlinear = c == "solve" || c == "continue" || c == "stability";
  if (nonlinear || c == "verify") {
    if (!(cfg.alpha >= 0) || !std::isfinite(cfg.alpha)) fail("--alpha must be >= 0");
    if (cfg.n >= 2 && !(cfg.alpha < 2.0 / (cfg.n - 1))) fail("--alpha must be below 2/(n-1) for n >= 2");
  }
  if (nonlinear) {
    if (cfg.q != 0) {
      const Admissibility a = is_admissible(cfg.q, cfg.alpha + 2, cfg.n);
      if (!a) fail("--q " + num_text(cfg.q) + " is not admissible with p = alpha + 2: " + a.reason);
    } else if (!is_admissible(default_q(cfg.alpha, cfg.n), cfg.alpha + 2, cfg.n)) {
      fail("no admissible q for p = alpha + 2");
    }
    if (!(cfg.T > 0)) fail("--T must be positive");
    if (cfg.Mt < 1) fail("--Mt must be at least 1");
    if (!(cfg.tol > 0)) fail("--tol must be positive");
    if (cfg.picard_max < 1) fail("--picard-max must be at least 1");
    if (!(cfg.C_cal > 0)) fail("--C-cal must be positive");
    if (!(cfg.lambda_T > 0 && cfg.lambda_T <= 1)) fail("--lambda-T must lie in (0, 1]");
    if (cfg.initial != "linear" && cfg.initial != "constant" && cfg.initial != "zero")
      fail("--initial must be linear, constant or zero");
  }
  if (c == "propagate") {
    if (cfg.method != "eigen" && cfg.method != "kernel") fail("--method must be eigen or kernel");
    if (cfg.method == "kernel") {
      if (cfg.n != 1) fail("--method kernel supports n = 1 only");
      if (cfg.N > kConvolutionCap)
        fail("--method kernel needs N <= " + std::to_string(kConvolutionCap) + " (direct convolution cap)");
      if (std::abs(std::sin(cfg.t)) < 1e-12) fail("--method kernel needs t outside pi Z");
    }
  }
  if (c == "continue") {
    if (cfg.horizon == 0 || !std::isfinite(cfg.horizon)) fail("--horizon must be nonzero");
    if (!(cfg.blowup_factor > 1)) fail("--blowup-factor must exceed 1");
    if (cfg.max_segments < 1) fail("--max-segments must be at least 1");
    if (!(cfg.truncation_limit > 0)) fail("--truncation-limit must be positive");
  }
  if (c == "stability") {
    for (double e : cfg.eps)
      if (!(e >= 0)) fail("--eps entries must be >= 0");
    if (!(cfg.length > 0)) fail("--length must be positive");
    if (cfg.perturbation_K < 0 || cfg.perturbation_K > cfg.K) fail("--perturbation-K must lie in [0, K]");
  }
  if (c == "verify") {
    if (std::find(suite_names().begin(), suite_names().end(), cfg.suite) == suite_names().end())
      fail("--suite must be one of dispersive, strichartz, commutation, nonlinearity, equivalence, all");
    if (cfg.probes < 1) fail("--probes must be at least 1");
  }
}

nlohmann::ordered_json RunConfig::to_json() const {
  Json j;
  j["command"] = command;
  for (const std::string& k : command_keys(command)) j[k] = find_key(k)->get(*this);
  return j;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Spectral solver and estimate checks for the twisted-Laplacian NLS", "twnls"};
  app.set_version_flag("--version", std::string(TWNLS_VERSION));
  app.require_subcommand(0, 1);
  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, std::string> config_file;
  for (const std::string& c : command_names()) {
    CLI::App* sub = app.add_subcommand(c, command_help(c));
    sub->add_option("--config", config_file[c], "key=value or JSON configuration file");
    for (const std::string& k : command_keys(c)) {
      const Key* key = find_key(k);
      sub->add_option("--" + k, given[c][k], key->help);
    }
  }
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help(), true);
  } catch (const CLI::CallForVersion&) {
    throw HelpRequested(std::string(TWNLS_VERSION) + "\n", true);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  if (app.get_subcommands().empty()) throw HelpRequested(app.help(), false);
  CLI::App* sub = app.get_subcommands().front();
  RunConfig cfg;
  cfg.command = sub->get_name();
  if (sub->count("--config")) {
    const std::string path = config_file[cfg.command];
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str(), path);
  }
  for (const std::string& k : command_keys(cfg.command))
    if (sub->count("--" + k)) set_key(cfg, k, given[cfg.command][k]);
  validate_config(cfg);
  return cfg;
}

NonlinearitySpec make_spec(const RunConfig& cfg) {
  return NonlinearitySpec::power(cfg.alpha, cplx(cfg.lambda_re, cfg.lambda_im));
}

SolverConfig make_solver_config(const RunConfig& cfg) {
  SolverConfig s;
  s.K = cfg.K;
  s.t0 = cfg.t0;
  s.T = cfg.T;
  s.Mt = cfg.Mt;
  s.picard_tol = cfg.tol;
  s.picard_max = cfg.picard_max;
  s.q = cfg.q;
  s.C_cal = cfg.C_cal;
  s.lambda_T = cfg.lambda_T;
  s.enforce_T0 = cfg.t0_gate;
  s.initial = cfg.initial == "constant" ? InitialIterate::constant_data
              : cfg.initial == "zero"   ? InitialIterate::zero
                                        : InitialIterate::linear_flow;
  return s;
}

}  // namespace twnls
