#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msacm/data_model.hpp"

namespace msacm {

enum class Group { Plank, LowPlank, HighPlank, Squat, Jump };
enum class Method { SPLevel, SPDiff, KMeans };

std::string_view to_string(Group g);
std::string_view to_string(Method m);

/// Effect of one announcement on the smoothed high-regime probability.
struct AnnouncementEffect {
  Date date;
  std::size_t index = 0;  ///< position in the sample
  double p_t = 0.0;
  double p_prev = 0.0;
  double delta_p = 0.0;
  double phi_t = 0.0;
  double phi_prev = 0.0;
  Group group = Group::Plank;
  bool near_half = false;  ///< p_t or p_prev within 1e-9 of 0.5
};

struct GroupSummary {
  Group group = Group::Plank;
  int count = 0;
  double center = 0.0;  ///< mean delta_p of members; NaN for an empty group
};

struct Classification {
  Method method = Method::SPDiff;
  std::vector<AnnouncementEffect> effects;
  std::vector<GroupSummary> groups;  ///< fixed order per method, empty groups included
  double u = 0.0;
  /// k-means only: the optimal centers do not straddle zero.
  bool sign_pattern_flag = false;

  /// Same partition with LowPlank and HighPlank merged into Plank; centers
  /// are recomputed over the merged group.
  Classification merged() const;
  /// Integer labels (Plank 0, Squat 1, Jump 2) over the merged groups.
  std::vector<int> labels() const;
  int count(Group g) const;
};

/// phi_t = phi0 + phi1 * p_t.
std::vector<double> phi_series(double phi0, double phi1, std::span<const double> smoothed_high);

struct EffectExtraction {
  std::vector<AnnouncementEffect> effects;
  std::vector<Date> skipped;  ///< announcements on the first day have no predecessor
};

EffectExtraction announcement_deltas(std::span<const Date> dates, std::span<const double> smoothed_high,
                                     std::span<const std::uint8_t> lambda, double phi0, double phi1);

Classification classify_sp_level(std::vector<AnnouncementEffect> effects);
Classification classify_sp_diff(std::vector<AnnouncementEffect> effects);
Classification classify_kmeans(std::vector<AnnouncementEffect> effects);

struct KMeansResult {
  std::vector<int> labels;      ///< cluster index in increasing center order
  std::vector<double> centers;  ///< increasing
  double objective = 0.0;       ///< within-cluster sum of squares
};

/// Globally optimal 1-d k-means by dynamic programming over sorted values.
KMeansResult kmeans_1d(std::span<const double> values, int k = 3);

/// Within-cluster sum of squares of a labelling.
double kmeans_objective(std::span<const double> values, std::span<const int> labels);

/// Twice the mean distance of each delta_p from its group's ideal value
/// (0 Plank, -1 Squat, +1 Jump).
double uncertainty_index(const Classification& c);

/// Hubert-Arabie adjusted Rand index.
double adjusted_rand(std::span<const int> a, std::span<const int> b);

}  // namespace msacm
