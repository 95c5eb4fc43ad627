#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "twnls/errors.hpp"
#include "twnls/nls.hpp"

namespace twnls {

/// Malformed command line or configuration (CLI exit code 2).
class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Thrown by parse_config when help was requested or no command was given.
class HelpRequested : public std::runtime_error {
 public:
  HelpRequested(const std::string& text, bool explicit_request)
      : std::runtime_error(text), explicit_request_(explicit_request) {}
  bool explicit_request() const { return explicit_request_; }

 private:
  bool explicit_request_;
};

struct RunConfig {
  std::string command;

  int n = 1;
  double R = 12.0;
  int N = 256;
  int K = 8;

  double alpha = 2.0;
  double lambda_re = 1.0;
  double lambda_im = 0.0;
  /// Builtin (zero, gauss:A, phi:MU:NU:A, random:K:A) or a grid-function file.
  std::string f = "gauss:0.1";

  double t0 = 0.0;
  double T = 0.1;
  int Mt = 64;
  double tol = 1e-10;
  int picard_max = 50;
  double q = 0.0;
  double C_cal = kDefaultCcal;
  double lambda_T = 0.5;
  bool t0_gate = true;
  std::string initial = "linear";

  double t = 1.0;
  std::string method = "eigen";

  double horizon = 1.0;
  double blowup_factor = 1e3;
  int max_segments = 2000;
  double truncation_limit = 1e-2;

  std::vector<double> eps{0.1, 0.05, 0.025};
  double length = 0.5;
  int perturbation_K = 4;

  std::string suite = "all";
  bool refine = true;
  int probes = 50;

  std::uint64_t seed = 1;
  std::string out = "twnls";
  std::string format = "csv";
  int threads = 0;

  /// Keys that apply to the command, with their values.
  nlohmann::ordered_json to_json() const;
};

const std::vector<std::string>& command_names();
/// Keys accepted by a command (flags --key and config-file keys).
std::vector<std::string> command_keys(const std::string& command);

/// Sets one key from its text form; throws UsageError on unknown keys or bad values.
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);
/// Applies a flat key=value file or a JSON object; flags given later override it.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin);

/// Checks parameter combinations before any computation.
void validate_config(const RunConfig& cfg);

/// args excludes the program name. Throws HelpRequested or UsageError.
RunConfig parse_config(const std::vector<std::string>& args);

NonlinearitySpec make_spec(const RunConfig& cfg);
SolverConfig make_solver_config(const RunConfig& cfg);

}  // namespace twnls
