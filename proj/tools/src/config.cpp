#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "msacm/errors.hpp"

namespace msacm::cli {

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw InputError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw InputError("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError("config: '" + (where.empty() ? key : where + "." + key) + "' has the wrong type");
  }
}

std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty() || base.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (base / path).lexically_normal().string();
}

ExoSpec exo_from_json(const json& j) {
  reject_unknown(j, {"kind", "coefficient", "scale"}, "simulate.exo");
  ExoSpec e;
  const auto kind = get<std::string>(j, "kind", "simulate.exo", "zero");
  if (kind == "zero") e.kind = ExoSpec::Kind::Zero;
  else if (kind == "ar1") e.kind = ExoSpec::Kind::Ar1;
  else throw InputError("config: simulate.exo.kind must be 'zero' or 'ar1'");
  e.coefficient = get<double>(j, "coefficient", "simulate.exo", 0.0);
  e.scale = get<double>(j, "scale", "simulate.exo", 0.0);
  return e;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json params_to_json(const MsAcmParams& p) {
  json trans = json::array();
  for (Eigen::Index i = 0; i < p.trans.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < p.trans.cols(); ++j) row.push_back(p.trans(i, j));
    trans.push_back(row);
  }
  return {{"omega", p.base.omega},  {"alpha", p.base.alpha},   {"beta", p.base.beta},
          {"gamma", p.base.gamma},  {"delta", p.policy.delta}, {"phi0", p.policy.phi0},
          {"phi", p.policy.phi},    {"psi", p.policy.psi},     {"announce", p.policy.announce},
          {"trans", trans},         {"theta", p.theta}};
}

MsAcmParams params_from_json(const json& j) {
  const std::string w = "params";
  reject_unknown(j, {"omega", "alpha", "beta", "gamma", "delta", "phi0", "phi", "psi", "announce", "trans", "theta"},
                 w);
  MsAcmParams p;
  p.base.omega = get<double>(j, "omega", w, 0.0);
  p.base.alpha = get<double>(j, "alpha", w, 0.0);
  p.base.beta = get<double>(j, "beta", w, 0.0);
  p.base.gamma = get<double>(j, "gamma", w, 0.0);
  p.policy.delta = get<double>(j, "delta", w, 0.0);
  p.policy.phi0 = get<double>(j, "phi0", w, 0.0);
  p.policy.phi = get<std::vector<double>>(j, "phi", w, {});
  p.policy.psi = get<double>(j, "psi", w, 0.0);
  p.policy.announce = get<double>(j, "announce", w, 0.0);
  p.theta = get<std::vector<double>>(j, "theta", w, {1.0});
  const auto rows = get<std::vector<std::vector<double>>>(j, "trans", w, {{1.0}});
  const auto k = static_cast<Eigen::Index>(rows.size());
  p.trans.resize(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != k) {
      throw InputError("config: params.trans must be square");
    }
    for (Eigen::Index c = 0; c < k; ++c) p.trans(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  p.validate();
  return p;
}

json config_template() {
  MsAcmParams p;
  p.base = {0.853, 0.142, 0.732, 0.112};
  p.policy.delta = -0.776;
  p.policy.phi = {6.273};
  p.trans = Eigen::MatrixXd(2, 2);
  p.trans << 0.964, 0.036, 0.778, 0.222;
  p.theta = {8.852, 3.271};
  return {
      {"input", ""},
      {"announcements", ""},
      {"out", "run"},
      {"fit_dir", ""},
      {"model", "msacm"},
      {"k", 2},
      {"seed", 1},
      {"optimizer",
       {{"starts", 11}, {"max_evaluations", 4000}, {"tolerance", 1e-10}, {"polish_iterations", 200}, {"threads", 0}}},
      {"flags", {{"phi0", false}, {"psi", nullptr}, {"announcement_term", false}, {"shared_shape", false}}},
      {"proxy_lag", 4},
      {"lags", {1, 5, 10}},
      {"residual_base", "onestep"},
      {"simulate",
       {{"T", 3000},
        {"burn_in", 500},
        {"asym_prob", 0.5},
        {"start_date", "2009-06-01"},
        {"initial_state", nullptr},
        {"announcements", 144},
        {"exo", {{"kind", "ar1"}, {"coefficient", 0.99}, {"scale", 0.1}}},
        {"params", params_to_json(p)}}},
      {"compare", {{"runs", json::array()}}},
  };
}

RunConfig build_config(json raw, const Overrides& ov, const std::filesystem::path& base_dir) {
  if (raw.is_null()) raw = json::object();
  reject_unknown(raw, {"input", "announcements", "out", "fit_dir", "model", "k", "seed", "optimizer", "flags",
                       "proxy_lag", "lags", "residual_base", "simulate", "compare"},
                 "");
  if (ov.seed) raw["seed"] = *ov.seed;
  if (ov.model) raw["model"] = *ov.model;
  if (ov.k) raw["k"] = *ov.k;
  if (ov.starts) raw["optimizer"]["starts"] = *ov.starts;
  if (ov.out) raw["out"] = *ov.out;

  RunConfig c;
  c.input = resolve(get<std::string>(raw, "input", "", ""), base_dir);
  c.announcements = resolve(get<std::string>(raw, "announcements", "", ""), base_dir);
  c.out = get<std::string>(raw, "out", "", "run");
  if (c.out.empty()) throw InputError("config: 'out' must not be empty");
  c.fit_dir = resolve(get<std::string>(raw, "fit_dir", "", ""), base_dir);
  if (c.fit_dir.empty()) c.fit_dir = c.out;
  c.model = parse_variant(get<std::string>(raw, "model", "", "msacm"));
  c.k = get<int>(raw, "k", "", 2);
  if (c.model == ModelVariant::MsAcm && c.k != 2 && c.k != 3) throw InputError("config: k must be 2 or 3");
  c.seed = get<std::uint64_t>(raw, "seed", "", 1);

  if (raw.contains("optimizer")) {
    const auto& o = raw["optimizer"];
    reject_unknown(o, {"starts", "max_evaluations", "tolerance", "polish_iterations", "threads"}, "optimizer");
    c.optimizer.starts = get<int>(o, "starts", "optimizer", 11);
    c.optimizer.max_evaluations = get<int>(o, "max_evaluations", "optimizer", 4000);
    c.optimizer.tolerance = get<double>(o, "tolerance", "optimizer", 1e-10);
    c.optimizer.polish_iterations = get<int>(o, "polish_iterations", "optimizer", 200);
    c.optimizer.threads = get<int>(o, "threads", "optimizer", 0);
  }
  if (c.optimizer.starts < 1) throw InputError("config: optimizer.starts must be at least 1");
  if (c.optimizer.max_evaluations < 1) throw InputError("config: optimizer.max_evaluations must be positive");

  if (raw.contains("flags")) {
    const auto& f = raw["flags"];
    reject_unknown(f, {"phi0", "psi", "announcement_term", "shared_shape"}, "flags");
    c.flags.phi0 = get<bool>(f, "phi0", "flags", false);
    if (f.contains("psi") && !f["psi"].is_null()) c.flags.psi = get<bool>(f, "psi", "flags", false);
    c.flags.announcement_term = get<bool>(f, "announcement_term", "flags", false);
    c.flags.shared_shape = get<bool>(f, "shared_shape", "flags", false);
  }
  c.proxy_lag = get<int>(raw, "proxy_lag", "", 4);
  c.lags = get<std::vector<int>>(raw, "lags", "", {1, 5, 10});
  c.residual_base = get<std::string>(raw, "residual_base", "", "onestep");
  if (c.residual_base != "onestep" && c.residual_base != "smoothed") {
    throw InputError("config: residual_base must be 'onestep' or 'smoothed'");
  }

  const json tmpl = config_template();
  const json& sim = raw.contains("simulate") ? raw["simulate"] : tmpl["simulate"];
  reject_unknown(sim, {"T", "burn_in", "asym_prob", "start_date", "initial_state", "announcements", "exo", "params"},
                 "simulate");
  c.simulate.length = get<std::size_t>(sim, "T", "simulate", 3000);
  c.simulate.burn_in = get<std::size_t>(sim, "burn_in", "simulate", 500);
  c.simulate.asym_prob = get<double>(sim, "asym_prob", "simulate", 0.5);
  c.simulate.start_date = get<std::string>(sim, "start_date", "simulate", "2009-06-01");
  if (sim.contains("initial_state") && !sim["initial_state"].is_null()) {
    c.simulate.initial_state = get<int>(sim, "initial_state", "simulate", 0);
  }
  c.simulate.announcements = get<std::size_t>(sim, "announcements", "simulate", 0);
  c.simulate.exo = exo_from_json(sim.contains("exo") ? sim["exo"] : tmpl["simulate"]["exo"]);
  c.simulate.params = params_from_json(sim.contains("params") ? sim["params"] : tmpl["simulate"]["params"]);

  if (raw.contains("compare")) {
    reject_unknown(raw["compare"], {"runs"}, "compare");
    for (const auto& r : get<std::vector<std::string>>(raw["compare"], "runs", "compare", {})) {
      c.compare_runs.push_back(resolve(r, base_dir));
    }
  }

  c.effective = raw;
  json hashed = raw;
  hashed.erase("out");
  c.hash = fnv1a_hex(hashed.dump());
  return c;
}

RunConfig load_config(const std::optional<std::filesystem::path>& path, const Overrides& overrides) {
  json raw = json::object();
  std::filesystem::path base;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw InputError("cannot open config " + path->string());
    try {
      raw = json::parse(in);
    } catch (const json::parse_error& e) {
      throw InputError("config " + path->string() + ": " + e.what());
    }
    base = path->parent_path();
  }
  return build_config(std::move(raw), overrides, base);
}

}  // namespace msacm::cli
