#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msacm/mem_core.hpp"
#include "msacm/ms_engine.hpp"
#include "msacm/transforms.hpp"

namespace msacm::cli {

using json = nlohmann::json;

struct OptimizerConfig {
  int starts = 11;
  int max_evaluations = 4000;
  double tolerance = 1e-10;
  int polish_iterations = 200;
  int threads = 0;
};

struct FlagConfig {
  bool phi0 = false;
  std::optional<bool> psi;  ///< unset: the variant's default
  bool announcement_term = false;
  bool shared_shape = false;
};

struct SimulateConfig {
  std::size_t length = 3000;
  std::size_t burn_in = 500;
  double asym_prob = 0.5;
  std::string start_date = "2009-06-01";
  std::optional<int> initial_state;
  std::size_t announcements = 0;  ///< random announcement days drawn into the calendar
  ExoSpec exo;
  MsAcmParams params;
};

struct RunConfig {
  std::string input;
  std::string announcements;
  std::string out = "run";
  std::string fit_dir;  ///< where classify/diagnose read fit outputs; defaults to out
  ModelVariant model = ModelVariant::MsAcm;
  int k = 2;
  std::uint64_t seed = 1;
  OptimizerConfig optimizer;
  FlagConfig flags;
  int proxy_lag = 4;
  std::vector<int> lags{1, 5, 10};
  std::string residual_base = "onestep";
  SimulateConfig simulate;
  std::vector<std::string> compare_runs;

  json effective;    ///< canonical JSON after overrides
  std::string hash;  ///< FNV-1a of `effective` without the output location
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::optional<int> k;
  std::optional<int> starts;
  std::optional<std::string> out;
};

/// Every recognised key with its default value.
json config_template();

/// Validates `raw` (unknown keys are an input error), applies overrides, and
/// resolves relative paths against `base_dir`.
RunConfig build_config(json raw, const Overrides& overrides, const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::optional<std::filesystem::path>& path, const Overrides& overrides);

std::string fnv1a_hex(const std::string& text);

json params_to_json(const MsAcmParams& p);
MsAcmParams params_from_json(const json& j);

}  // namespace msacm::cli
