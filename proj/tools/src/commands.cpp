#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "msacm/classifier.hpp"
#include "msacm/data_model.hpp"
#include "msacm/diagnostics.hpp"
#include "msacm/errors.hpp"
#include "msacm/estimation.hpp"
#include "msacm/ms_engine.hpp"

namespace msacm::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Recorded relative to the output directory so reports do not depend on where a run writes.
std::string fit_dir_label(const RunConfig& c) {
  return fs::path(c.fit_dir).lexically_proximate(c.out).generic_string();
}

std::string provenance(const RunConfig& c) {
  return "# msacm config_hash=" + c.hash + " seed=" + std::to_string(c.seed) + "\n";
}

ojson stamped(const RunConfig& c) {
  ojson j;
  j["config_hash"] = c.hash;
  j["seed"] = c.seed;
  return j;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
}

void write_json(const fs::path& path, const ojson& j) { write_file(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string fixed(double v, int digits = 6) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Rows of a comma-separated file, `#` lines dropped, header first.
std::vector<std::vector<std::string>> read_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    for (auto cell : split_csv_line(line)) cells.emplace_back(cell);
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw InputError(path.string() + ": no header row");
  return rows;
}

std::size_t column_of(const std::vector<std::string>& header, const std::string& name, const fs::path& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InputError(path.string() + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

ModelSpec spec_for(ModelVariant model, int k, const FlagConfig& flags) {
  ModelSpec spec = default_spec(model, k);
  if (model == ModelVariant::MsAcm) spec.estimate_phi0 = flags.phi0;
  if (flags.psi) spec.estimate_psi = *flags.psi && (model == ModelVariant::MsAcm || model == ModelVariant::Acm);
  spec.shared_shape = flags.shared_shape;
  if (flags.announcement_term) {
    if (model != ModelVariant::Acm) throw InputError("the announcement term is only available for --model acm");
    spec.announcement_term = true;
  }
  return spec;
}

struct LoadedSeries {
  MarketSeries series;
  std::vector<Date> missing_announcements;
  bool has_calendar = false;
};

LoadedSeries load_series(const std::string& input, const std::string& announcements, int proxy_lag) {
  if (input.empty()) throw InputError("config: 'input' (market CSV) is required");
  LoadedSeries out;
  out.series = prepare_proxy(load_market_csv(input), proxy_lag);
  if (!announcements.empty()) {
    auto aligned = align_announcements(std::move(out.series), load_calendar(announcements));
    out.series = std::move(aligned.series);
    out.missing_announcements = std::move(aligned.missing);
    out.has_calendar = true;
  }
  return out;
}

FilterOutput run_filter(const ModelSpec& spec, const MsAcmParams& params, const MarketSeries& series) {
  if (spec.variant == ModelVariant::MsAcm) return hamilton_kim_filter(params, series);
  const std::optional<double> coef =
      spec.announcement_term ? std::optional<double>(params.policy.announce) : std::nullopt;
  const auto acm = acm_filter(params, series, coef);
  const auto T = static_cast<Eigen::Index>(series.size());
  FilterOutput f;
  f.loglik = acm.loglik;
  f.predicted = Eigen::MatrixXd::Ones(T, 1);
  f.filtered = f.predicted;
  f.smoothed = f.predicted;
  f.xi_collapsed = Eigen::Map<const Eigen::VectorXd>(acm.xi.data(), T);
  f.mu_onestep = acm.mu;
  f.contributions = acm.contributions;
  f.failure_index = acm.failure_index;
  return f;
}

Group group_from_name(const std::string& s, const fs::path& path) {
  for (Group g : {Group::Plank, Group::LowPlank, Group::HighPlank, Group::Squat, Group::Jump}) {
    if (to_string(g) == s) return g;
  }
  throw InputError(path.string() + ": unknown group '" + s + "'");
}

int merged_label(Group g) { return g == Group::Squat ? 1 : g == Group::Jump ? 2 : 0; }

ojson summary_json(const Classification& c) {
  ojson j;
  ojson groups = ojson::object();
  for (const auto& g : c.groups) groups[std::string(to_string(g.group))] = {{"count", g.count}, {"center", g.center}};
  j["groups"] = groups;
  j["U"] = c.u;
  return j;
}

}  // namespace

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / ".msacm.lock") {
  fs::create_directories(dir);
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) throw TaskError("output directory " + dir.string() + " is locked by another run (" + path_.string() + ")");
  std::fclose(f);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

void cmd_simulate(const RunConfig& c) {
  const auto& sim = c.simulate;
  if (sim.length < 2) throw InputError("config: simulate.T must be at least 2");
  if (sim.announcements >= sim.length) throw InputError("config: more announcements than simulated days");
  DirectoryLock lock(c.out);

  SimulationOptions so;
  so.exo = sim.exo;
  so.asym_prob = sim.asym_prob;
  so.initial_state = sim.initial_state;
  so.burn_in = sim.burn_in;
  so.start_date = Date::parse(sim.start_date);
  const auto path = simulate(sim.params, sim.length, c.seed, so);

  std::ostringstream series;
  series << provenance(c);
  write_market_csv(series, path.series);
  write_file(fs::path(c.out) / "series.csv", series.str());

  std::ostringstream states;
  states << provenance(c) << "date,state,xi,mu\n";
  for (std::size_t t = 0; t < path.states.size(); ++t) {
    states << path.series.dates[t].iso() << ',' << path.states[t] << ',' << to_shortest(path.xi_true[t]) << ','
           << to_shortest(path.mu_true[t]) << '\n';
  }
  write_file(fs::path(c.out) / "states.csv", states.str());

  if (sim.announcements > 0) {
    // Announcement days drawn without replacement, never on the first day.
    std::vector<std::size_t> days(sim.length - 1);
    for (std::size_t i = 0; i < days.size(); ++i) days[i] = i + 1;
    std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32), 0xca1u};
    std::mt19937_64 rng(seq);
    for (std::size_t i = 0; i < sim.announcements; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, days.size() - 1);
      std::swap(days[i], days[pick(rng)]);
    }
    std::sort(days.begin(), days.begin() + static_cast<std::ptrdiff_t>(sim.announcements));
    std::ostringstream cal;
    cal << provenance(c);
    for (std::size_t i = 0; i < sim.announcements; ++i) cal << path.series.dates[days[i]].iso() << '\n';
    write_file(fs::path(c.out) / "announcements.txt", cal.str());
  }
}

void cmd_fit(const RunConfig& c) {
  const ModelSpec requested = spec_for(c.model, c.k, c.flags);
  auto loaded = load_series(c.input, c.announcements, c.proxy_lag);
  if (requested.announcement_term && !loaded.has_calendar) {
    throw InputError("the announcement term needs an announcement calendar");
  }
  const auto& series = loaded.series;
  DirectoryLock lock(c.out);
  const fs::path out(c.out);

  FitSettings settings;
  settings.starts = c.optimizer.starts;
  settings.seed = c.seed;
  settings.max_evaluations = c.optimizer.max_evaluations;
  settings.tolerance = c.optimizer.tolerance;
  settings.polish_iterations = c.optimizer.polish_iterations;
  settings.threads = c.optimizer.threads;

  FitResult fit;
  try {
    fit = fit_qml(requested, series, settings);
  } catch (const EstimationError& e) {
    write_file(out / "fit_failure.txt", provenance(c) + e.what() + "\n");
    throw;
  }
  const auto filter = run_filter(fit.spec, fit.params, series);

  ojson j = stamped(c);
  j["model"] = std::string(to_string(fit.spec.variant));
  j["k"] = fit.spec.effective_regimes();
  j["input"] = c.input;
  j["announcements"] = c.announcements;
  j["proxy_lag"] = c.proxy_lag;
  j["n_obs"] = fit.n_obs;
  j["loglik"] = fit.loglik;
  j["aic"] = fit.aic;
  j["bic"] = fit.bic;
  j["k_params"] = fit.k_params;
  j["converged"] = fit.converged;
  j["n_starts"] = fit.n_starts;
  j["best_start"] = fit.best_start;
  j["iterations"] = fit.iterations;
  j["se_warning"] = fit.se_warning;
  j["hessian_asymmetry"] = fit.hessian_asymmetry;
  ojson est = ojson::object(), se = ojson::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    est[fit.names[i]] = fit.estimates(static_cast<Eigen::Index>(i));
    se[fit.names[i]] = i < fit.se.size() ? fit.se[i] : std::nan("");
  }
  j["estimates"] = est;
  j["se"] = se;
  j["params"] = params_to_json(fit.params);
  if (fit.params.regimes() > 1) {
    const auto pi = ergodic_distribution(fit.params.trans);
    j["ergodic"] = std::vector<double>(pi.data(), pi.data() + pi.size());
    j["durations"] = expected_durations(fit.params.trans);
  }
  j["settings"] = {{"starts", settings.starts},
                   {"max_evaluations", settings.max_evaluations},
                   {"tolerance", settings.tolerance},
                   {"polish_iterations", settings.polish_iterations},
                   {"optimizer", "nelder-mead x2 + bfgs polish"},
                   {"estimate_phi0", fit.spec.estimate_phi0},
                   {"estimate_psi", fit.spec.estimate_psi},
                   {"announcement_term", fit.spec.announcement_term},
                   {"use_proxy", fit.spec.use_proxy},
                   {"shared_shape", fit.spec.shared_shape},
                   {"regime_init", "ergodic distribution"},
                   {"xi_init", "regime steady state"},
                   {"base_init", "mean of the first 50 observations"},
                   {"hessian_step", "cbrt(eps) * max(1, |z|)"},
                   {"gradient_step", "sqrt(eps) * max(1, |z|)"}};
  ojson box = ojson::object();
  for (const auto& [name, range] : fit.box) box[name] = {range.first, range.second};
  j["start_box"] = box;
  ojson starts = ojson::array();
  for (const auto& s : fit.starts) {
    starts.push_back({{"index", s.index},
                      {"initial_loglik", s.initial_loglik},
                      {"simplex_loglik", s.simplex_loglik},
                      {"final_loglik", s.final_loglik},
                      {"evaluations", s.evaluations},
                      {"converged", s.converged}});
  }
  j["starts"] = starts;
  std::vector<std::string> missing;
  for (const auto& d : loaded.missing_announcements) missing.push_back(d.iso());
  j["announcements_outside_sample"] = missing;
  j["filter_collapse_fallbacks"] = filter.collapse_fallbacks;
  write_json(out / "fit.json", j);

  std::ostringstream fcsv;
  fcsv << provenance(c);
  write_filter_csv(fcsv, series, filter);
  write_file(out / "filter.csv", fcsv.str());

  std::ostringstream table;
  table << provenance(c) << "model " << to_string(fit.spec.variant) << "  K=" << fit.spec.effective_regimes()
        << "  T=" << fit.n_obs << "\n\n";
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    char line[128];
    std::snprintf(line, sizeof line, "%-10s %12s  (%s)\n", fit.names[i].c_str(),
                  fixed(fit.estimates(static_cast<Eigen::Index>(i)), 3).c_str(),
                  fixed(i < fit.se.size() ? fit.se[i] : std::nan(""), 3).c_str());
    table << line;
  }
  table << "\nloglik " << fixed(fit.loglik, 3) << "\naic    " << fixed(fit.aic, 3) << "\nbic    "
        << fixed(fit.bic, 3) << '\n';
  if (fit.se_warning) table << "warning: Hessian singular, pseudo-inverse used for standard errors\n";
  write_file(out / "estimates.txt", table.str());

  // Tidy series for plotting the switching intercept against announcements.
  const int k = fit.params.regimes();
  std::ostringstream plot;
  plot << provenance(c) << "date,rv,phi_t,p_high,announcement\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    double phi = 0.0;
    for (int s = 0; s < k; ++s) phi += filter.smoothed(row, s) * fit.params.intercept(s);
    plot << series.dates[t].iso() << ',' << to_shortest(series.rv[t]) << ',' << to_shortest(phi) << ','
         << to_shortest(filter.smoothed(row, k - 1)) << ',' << static_cast<int>(series.lambda[t]) << '\n';
  }
  write_file(out / "plot.csv", plot.str());
}

void cmd_classify(const RunConfig& c) {
  const fs::path fit_dir(c.fit_dir);
  const json fit = read_json(fit_dir / "fit.json");
  if (fit.value("model", "") != "msacm") throw InputError("classification needs an MS-ACM fit in " + fit_dir.string());
  const auto params = params_from_json(fit.at("params"));
  const auto table = read_filter_csv(fit_dir / "filter.csv");
  const std::string cal_path = !c.announcements.empty() ? c.announcements : fit.value("announcements", "");
  if (cal_path.empty()) throw TaskError("no announcement calendar given");
  const auto cal = load_calendar(cal_path);

  std::vector<std::uint8_t> lambda(table.dates.size(), 0);
  for (std::size_t t = 0; t < table.dates.size(); ++t) lambda[t] = cal.dates.contains(table.dates[t]) ? 1 : 0;
  const int k = params.regimes();
  if (k != 2) throw TaskError("classification is defined for two-regime fits; " + fit_dir.string() + " has " + std::to_string(k));
  std::vector<double> p_high(table.dates.size());
  for (std::size_t t = 0; t < p_high.size(); ++t) p_high[t] = table.smoothed(static_cast<Eigen::Index>(t), k - 1);
  const double phi0 = params.policy.phi0;
  const double phi1 = params.intercept(k - 1) - phi0;

  auto extraction = announcement_deltas(table.dates, p_high, lambda, phi0, phi1);
  if (extraction.effects.empty()) throw TaskError("no announcement falls inside the sample (after day 0)");
  DirectoryLock lock(c.out);

  const auto level = classify_sp_level(extraction.effects);
  const auto level_merged = level.merged();
  const auto diff = classify_sp_diff(extraction.effects);
  std::optional<Classification> km;
  std::string km_error;
  try {
    km = classify_kmeans(extraction.effects);
  } catch (const InputError& e) {
    km_error = e.what();
  }

  std::ostringstream csv;
  csv << provenance(c) << "date,p_prev,p_t,delta_p,phi_prev,phi_t,sp_level,sp_level_merged,sp_diff,kmeans\n";
  for (std::size_t i = 0; i < extraction.effects.size(); ++i) {
    const auto& e = extraction.effects[i];
    csv << e.date.iso() << ',' << to_shortest(e.p_prev) << ',' << to_shortest(e.p_t) << ',' << to_shortest(e.delta_p)
        << ',' << to_shortest(e.phi_prev) << ',' << to_shortest(e.phi_t) << ',' << to_string(level.effects[i].group)
        << ',' << to_string(level_merged.effects[i].group) << ',' << to_string(diff.effects[i].group) << ','
        << (km ? std::string(to_string(km->effects[i].group)) : std::string("NA")) << '\n';
  }
  write_file(fs::path(c.out) / "classification.csv", csv.str());

  ojson j = stamped(c);
  j["fit_dir"] = fit_dir_label(c);
  j["n_announcements"] = extraction.effects.size();
  std::vector<std::string> skipped;
  for (const auto& d : extraction.skipped) skipped.push_back(d.iso());
  j["skipped_first_day"] = skipped;
  j["near_half"] = std::count_if(extraction.effects.begin(), extraction.effects.end(),
                                 [](const auto& e) { return e.near_half; });
  j["phi0"] = phi0;
  j["phi1"] = phi1;
  ojson methods;
  methods["sp_level"] = summary_json(level);
  methods["sp_level"]["merged"] = summary_json(level_merged);
  methods["sp_diff"] = summary_json(diff);
  if (km) {
    methods["kmeans"] = summary_json(*km);
    methods["kmeans"]["sign_pattern_flag"] = km->sign_pattern_flag;
  } else {
    methods["kmeans"] = {{"error", km_error}};
  }
  j["methods"] = methods;

  std::vector<const Classification*> parts{&level_merged, &diff};
  if (km) parts.push_back(&*km);
  ojson ari = ojson::array();
  for (int a = 0; a < 3; ++a) {
    ojson row = ojson::array();
    for (int b = 0; b < 3; ++b) {
      if (a >= static_cast<int>(parts.size()) || b >= static_cast<int>(parts.size())) row.push_back(nullptr);
      else row.push_back(adjusted_rand(parts[static_cast<std::size_t>(a)]->labels(),
                                       parts[static_cast<std::size_t>(b)]->labels()));
    }
    ari.push_back(row);
  }
  j["ari"] = {{"methods", {"sp_level", "sp_diff", "kmeans"}}, {"matrix", ari}};
  write_json(fs::path(c.out) / "classification.json", j);
}

void cmd_diagnose(const RunConfig& c) {
  const fs::path fit_dir(c.fit_dir);
  const json fit = read_json(fit_dir / "fit.json");
  const auto params = params_from_json(fit.at("params"));
  const auto& settings = fit.at("settings");
  ModelSpec spec = default_spec(parse_variant(fit.at("model").get<std::string>()), fit.at("k").get<int>());
  spec.announcement_term = settings.value("announcement_term", false);
  const std::string input = !c.input.empty() ? c.input : fit.value("input", "");
  const std::string cal = !c.announcements.empty() ? c.announcements : fit.value("announcements", "");
  const auto loaded = load_series(input, cal, fit.value("proxy_lag", c.proxy_lag));
  const auto& series = loaded.series;
  const auto filter = run_filter(spec, params, series);
  if (!filter.ok()) throw InputError("fitted parameters give a non-positive conditional mean on this series");
  DirectoryLock lock(c.out);

  const auto base = c.residual_base == "smoothed" ? ResidualBase::Smoothed : ResidualBase::OneStep;
  const auto report = residual_report(params, filter, series, c.lags, base);

  std::ostringstream csv;
  csv << provenance(c) << "date,residual\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    csv << series.dates[t].iso() << ',' << to_shortest(report.residuals[t]) << '\n';
  }
  write_file(fs::path(c.out) / "residuals.csv", csv.str());

  ojson j = stamped(c);
  j["fit_dir"] = fit_dir_label(c);
  j["residual_base"] = c.residual_base;
  j["n_obs"] = series.size();
  j["mean"] = report.mean;
  j["sd"] = report.sd;
  ojson lb = ojson::object();
  for (const auto& [lag, r] : report.ljung_box) {
    lb[std::to_string(lag)] = {{"statistic", r.statistic}, {"p_value", r.p_value}};
  }
  j["ljung_box"] = lb;
  ojson crit = ojson::object();
  for (const auto& [level, value] : report.ks.critical) crit[fixed(level, 2)] = value;
  j["ks"] = {{"statistic", report.ks.statistic}, {"critical", crit}};
  j["ergodic"] = report.ergodic;
  j["theta"] = params.theta;
  write_json(fs::path(c.out) / "diagnostics.json", j);
}

void cmd_compare(const RunConfig& c) {
  if (c.compare_runs.size() < 2) throw TaskError("compare needs at least two runs (config: compare.runs)");

  struct Run {
    std::string name;
    std::vector<Date> dates;
    std::map<std::string, std::vector<int>> labels;
    std::optional<ResidualSet> residuals;
  };
  const std::vector<std::string> methods{"sp_level", "sp_diff", "kmeans"};
  const std::map<std::string, std::string> column{
      {"sp_level", "sp_level_merged"}, {"sp_diff", "sp_diff"}, {"kmeans", "kmeans"}};

  std::vector<Run> runs;
  for (const auto& dir : c.compare_runs) {
    Run r;
    r.name = dir;
    const auto path = fs::path(dir) / "classification.csv";
    const auto rows = read_rows(path);
    const auto c_date = column_of(rows[0], "date", path);
    for (std::size_t i = 1; i < rows.size(); ++i) r.dates.push_back(Date::parse(rows[i].at(c_date)));
    for (const auto& m : methods) {
      const auto col = column_of(rows[0], column.at(m), path);
      std::vector<int> labels;
      bool available = true;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].at(col) == "NA") {
          available = false;
          break;
        }
        labels.push_back(merged_label(group_from_name(rows[i].at(col), path)));
      }
      if (available) r.labels[m] = std::move(labels);
    }
    const auto res_path = fs::path(dir) / "residuals.csv";
    if (fs::exists(res_path)) {
      const auto res = read_rows(res_path);
      ResidualSet s;
      const auto cd = column_of(res[0], "date", res_path);
      const auto cv = column_of(res[0], "residual", res_path);
      for (std::size_t i = 1; i < res.size(); ++i) {
        s.dates.push_back(Date::parse(res[i].at(cd)));
        const auto v = parse_number(res[i].at(cv));
        if (!v) throw InputError(res_path.string() + ": bad residual at row " + std::to_string(i));
        s.values.push_back(*v);
      }
      r.residuals = std::move(s);
    }
    runs.push_back(std::move(r));
  }

  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].dates == runs[0].dates) continue;
    std::vector<Date> diff;
    std::set_symmetric_difference(runs[0].dates.begin(), runs[0].dates.end(), runs[i].dates.begin(),
                                  runs[i].dates.end(), std::back_inserter(diff));
    std::string msg = "announcement calendars differ between " + runs[0].name + " and " + runs[i].name + ":";
    for (const auto& d : diff) msg += " " + d.iso();
    throw TaskError(msg);
  }
  if (runs[0].dates.size() < 2) throw TaskError("compare needs at least two shared announcements");
  DirectoryLock lock(c.out);

  ojson j = stamped(c);
  std::vector<std::string> names;
  for (const auto& r : runs) names.push_back(r.name);
  j["runs"] = names;
  j["n_announcements"] = runs[0].dates.size();
  ojson pairs = ojson::array();
  std::ostringstream csv;
  csv << provenance(c) << "run_a,run_b,sp_level,sp_diff,kmeans\n";
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      ojson row{{"run_a", runs[a].name}, {"run_b", runs[b].name}};
      csv << runs[a].name << ',' << runs[b].name;
      for (const auto& m : methods) {
        const auto ia = runs[a].labels.find(m);
        const auto ib = runs[b].labels.find(m);
        if (ia == runs[a].labels.end() || ib == runs[b].labels.end()) {
          row[m] = nullptr;
          csv << ",NA";
        } else {
          const double v = adjusted_rand(ia->second, ib->second);
          row[m] = v;
          csv << ',' << to_shortest(v);
        }
      }
      csv << '\n';
      pairs.push_back(row);
    }
  }
  j["pairs"] = pairs;

  const bool all_residuals = std::all_of(runs.begin(), runs.end(), [](const Run& r) { return r.residuals.has_value(); });
  if (all_residuals) {
    std::map<std::string, ResidualSet> sets;
    for (const auto& r : runs) sets[r.name] = *r.residuals;
    const auto m = cross_correlation_lag1(sets);
    std::vector<std::string> order;
    for (const auto& [name, s] : sets) order.push_back(name);
    ojson rows = ojson::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      ojson row = ojson::array();
      for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
      rows.push_back(row);
    }
    j["cross_correlation_lag1"] = {{"runs", order}, {"definition", "corr(e_a[t], e_b[t-1])"}, {"matrix", rows}};
  } else {
    j["cross_correlation_lag1"] = nullptr;
  }
  write_json(fs::path(c.out) / "compare.json", j);
  write_file(fs::path(c.out) / "compare_ari.csv", csv.str());
}

int run_command(const std::string& command, const RunConfig& config) {
  try {
    if (command == "simulate") cmd_simulate(config);
    else if (command == "fit") cmd_fit(config);
    else if (command == "classify") cmd_classify(config);
    else if (command == "diagnose") cmd_diagnose(config);
    else if (command == "compare") cmd_compare(config);
    else throw InputError("unknown command '" + command + "'");
    return kOk;
  } catch (const EstimationError& e) {
    std::cerr << "estimation failed: " << e.what() << '\n';
    return kEstimationFailure;
  } catch (const TaskError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kTaskError;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const ParameterError& e) {
    std::cerr << "inadmissible parameters: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace msacm::cli
