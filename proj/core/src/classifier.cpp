#include "msacm/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "msacm/errors.hpp"

namespace msacm {

namespace {

bool near_half(const AnnouncementEffect& e) {
  return std::abs(e.p_t - 0.5) <= 1e-9 || std::abs(e.p_prev - 0.5) <= 1e-9;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Group> group_order(Method m, bool split_plank) {
  if (m == Method::SPLevel && split_plank) {
    return {Group::LowPlank, Group::HighPlank, Group::Squat, Group::Jump};
  }
  return {Group::Plank, Group::Squat, Group::Jump};
}

void summarize(Classification& c, bool split_plank) {
  c.groups.clear();
  for (Group g : group_order(c.method, split_plank)) {
    GroupSummary s{.group = g};
    double sum = 0.0;
    for (const auto& e : c.effects) {
      if (e.group == g) {
        ++s.count;
        sum += e.delta_p;
      }
    }
    s.center = s.count > 0 ? sum / s.count : kNaN;
    c.groups.push_back(s);
  }
  c.u = c.effects.empty() ? kNaN : uncertainty_index(c);
}

double ideal(Group g) {
  switch (g) {
    case Group::Squat: return -1.0;
    case Group::Jump: return 1.0;
    default: return 0.0;
  }
}

double binom2(double n) { return 0.5 * n * (n - 1.0); }

}  // namespace

std::string_view to_string(Group g) {
  switch (g) {
    case Group::Plank: return "Plank";
    case Group::LowPlank: return "LowPlank";
    case Group::HighPlank: return "HighPlank";
    case Group::Squat: return "Squat";
    case Group::Jump: return "Jump";
  }
  return "unknown";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::SPLevel: return "sp_level";
    case Method::SPDiff: return "sp_diff";
    case Method::KMeans: return "kmeans";
  }
  return "unknown";
}

Classification Classification::merged() const {
  Classification out = *this;
  for (auto& e : out.effects) {
    if (e.group == Group::LowPlank || e.group == Group::HighPlank) e.group = Group::Plank;
  }
  summarize(out, false);
  return out;
}

std::vector<int> Classification::labels() const {
  std::vector<int> out;
  out.reserve(effects.size());
  for (const auto& e : effects) {
    out.push_back(e.group == Group::Squat ? 1 : e.group == Group::Jump ? 2 : 0);
  }
  return out;
}

int Classification::count(Group g) const {
  int n = 0;
  for (const auto& e : effects) {
    const bool plank = e.group == Group::LowPlank || e.group == Group::HighPlank || e.group == Group::Plank;
    if (e.group == g || (g == Group::Plank && plank)) ++n;
  }
  return n;
}

std::vector<double> phi_series(double phi0, double phi1, std::span<const double> smoothed_high) {
  std::vector<double> out;
  out.reserve(smoothed_high.size());
  for (double p : smoothed_high) out.push_back(phi0 + phi1 * p);
  return out;
}

EffectExtraction announcement_deltas(std::span<const Date> dates, std::span<const double> smoothed_high,
                                     std::span<const std::uint8_t> lambda, double phi0, double phi1) {
  if (dates.size() != smoothed_high.size() || lambda.size() != smoothed_high.size()) {
    throw InputError("dates, probabilities and announcement mask differ in length");
  }
  EffectExtraction out;
  for (std::size_t t = 0; t < lambda.size(); ++t) {
    if (!lambda[t]) continue;
    if (t == 0) {
      out.skipped.push_back(dates[0]);
      continue;
    }
    AnnouncementEffect e;
    e.date = dates[t];
    e.index = t;
    e.p_t = smoothed_high[t];
    e.p_prev = smoothed_high[t - 1];
    e.delta_p = e.p_t - e.p_prev;
    e.phi_t = phi0 + phi1 * e.p_t;
    e.phi_prev = phi0 + phi1 * e.p_prev;
    e.near_half = near_half(e);
    out.effects.push_back(e);
  }
  return out;
}

Classification classify_sp_level(std::vector<AnnouncementEffect> effects) {
  Classification c;
  c.method = Method::SPLevel;
  c.effects = std::move(effects);
  for (auto& e : c.effects) {
    const bool high_now = e.p_t > 0.5;
    const bool high_before = e.p_prev > 0.5;
    e.near_half = e.near_half || near_half(e);
    if (high_now == high_before) e.group = high_now ? Group::HighPlank : Group::LowPlank;
    else e.group = high_now ? Group::Jump : Group::Squat;
  }
  summarize(c, true);
  return c;
}

Classification classify_sp_diff(std::vector<AnnouncementEffect> effects) {
  Classification c;
  c.method = Method::SPDiff;
  c.effects = std::move(effects);
  for (auto& e : c.effects) {
    if (e.delta_p > 0.5) e.group = Group::Jump;
    else if (e.delta_p < -0.5) e.group = Group::Squat;
    else e.group = Group::Plank;
  }
  summarize(c, false);
  return c;
}

Classification classify_kmeans(std::vector<AnnouncementEffect> effects) {
  Classification c;
  c.method = Method::KMeans;
  c.effects = std::move(effects);
  std::vector<double> deltas;
  deltas.reserve(c.effects.size());
  for (const auto& e : c.effects) deltas.push_back(e.delta_p);
  const auto km = kmeans_1d(deltas, 3);
  constexpr std::array<Group, 3> by_center{Group::Squat, Group::Plank, Group::Jump};
  for (std::size_t i = 0; i < c.effects.size(); ++i) {
    c.effects[i].group = by_center[static_cast<std::size_t>(km.labels[i])];
  }
  c.sign_pattern_flag = !(km.centers.front() < 0.0 && km.centers.back() > 0.0);
  summarize(c, false);
  return c;
}

KMeansResult kmeans_1d(std::span<const double> values, int k) {
  const auto n = values.size();
  if (k < 1) throw InputError("k-means needs k >= 1");
  if (std::set<double>(values.begin(), values.end()).size() < static_cast<std::size_t>(k)) {
    throw InputError("k-means: fewer distinct values than clusters (" + std::to_string(k) + ")");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = values[order[i]];

  // Prefix sums of values shifted by their mean keep the segment costs accurate.
  const double shift = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i] - shift;
    s1[i + 1] = s1[i] + v;
    s2[i + 1] = s2[i] + v * v;
  }
  auto seg = [&](std::size_t lo, std::size_t hi) {  // [lo, hi)
    const double len = static_cast<double>(hi - lo);
    const double a = s1[hi] - s1[lo];
    return std::max(0.0, (s2[hi] - s2[lo]) - a * a / len);
  };

  const auto K = static_cast<std::size_t>(k);
  constexpr double inf = std::numeric_limits<double>::infinity();
  // best[c][m]: optimal cost of the first m points in c clusters.
  std::vector<std::vector<double>> best(K + 1, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> cut(K + 1, std::vector<std::size_t>(n + 1, 0));
  best[0][0] = 0.0;
  for (std::size_t c = 1; c <= K; ++c) {
    for (std::size_t m = c; m <= n; ++m) {
      for (std::size_t s = c - 1; s < m; ++s) {
        if (best[c - 1][s] == inf) continue;
        // Clusters must not split a run of equal values.
        if (s > 0 && x[s - 1] == x[s]) continue;
        const double v = best[c - 1][s] + seg(s, m);
        if (v < best[c][m]) {
          best[c][m] = v;
          cut[c][m] = s;
        }
      }
    }
  }

  KMeansResult r;

  r.labels.assign(n, 0);
  r.centers.assign(K, 0.0);
  std::size_t hi = n;
  for (std::size_t c = K; c >= 1; --c) {
    const std::size_t lo = cut[c][hi];
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      r.labels[order[i]] = static_cast<int>(c - 1);
      sum += x[i];
    }
    r.centers[c - 1] = sum / static_cast<double>(hi - lo);
    hi = lo;
  }
  r.objective = kmeans_objective(values, r.labels);
  return r;
}

double kmeans_objective(std::span<const double> values, std::span<const int> labels) {
  if (values.size() != labels.size()) throw InputError("values and labels differ in length");
  std::map<int, std::pair<double, int>> acc;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& [sum, count] = acc[labels[i]];
    sum += values[i];
    ++count;
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& [sum, count] = acc[labels[i]];
    const double d = values[i] - sum / count;
    ss += d * d;
  }
  return ss;
}

double uncertainty_index(const Classification& c) {
  if (c.effects.empty()) throw InputError("uncertainty index of an empty classification");
  double acc = 0.0;
  for (const auto& e : c.effects) acc += std::abs(e.delta_p - ideal(e.group));
  return 2.0 * acc / static_cast<double>(c.effects.size());
}

double adjusted_rand(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw InputError("adjusted Rand: label vectors differ in length");
  if (a.size() < 2) throw InputError("adjusted Rand needs at least two items");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, n] : joint) index += binom2(n);
  for (const auto& [key, n] : rows) sum_a += binom2(n);
  for (const auto& [key, n] : cols) sum_b += binom2(n);
  const double expected = sum_a * sum_b / binom2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  // Both partitions trivial in the same way (all one cluster or all singletons).
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace msacm
