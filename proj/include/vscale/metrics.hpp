#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vscale/panel.hpp"
#include "vscale/parallel.hpp"

namespace vscale::metrics {

/// True iff more than half of the verdicts are positive; an even split
/// rejects. Throws EmptyList.
bool aggregate_majority(std::span<const std::uint8_t> verdicts);

/// Mean verdict in [0, 1]. Throws EmptyList.
double mean_score(std::span<const std::uint8_t> verdicts);

struct ConfusionRates {
  double accuracy = 0.0;
  double fpr = 0.0;  // false accepts / negatives, 0 when there are no negatives
  double fnr = 0.0;  // false rejects / positives, 0 when there are no positives
  int positives = 0;
  int negatives = 0;
  bool no_positives = false;
  bool no_negatives = false;
};

ConfusionRates confusion_rates(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels);

/// Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(equal) over all
/// positive/negative pairs, via mid-ranks. Throws SingleClass.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct MetricPoint {
  int m = 0;
  double accuracy = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  double auc = 0.0;  // NaN when the panel's labels are all one class
  int repeats = 0;
  std::uint64_t seed = 0;
};

struct RepeatMetrics {
  double accuracy = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  double auc = 0.0;
};

/// Per-repeat statistics for one budget m. Repeat r draws, for every
/// solution, m verdicts without replacement from its pool using a stream
/// seeded by (seed, m, r).
std::vector<RepeatMetrics> bootstrap_repeats(const VerificationPanel& panel, int m, int repeats, std::uint64_t seed,
                                             unsigned threads = default_threads());

/// Across-repeat means of `bootstrap_repeats` for each m.
std::vector<MetricPoint> bootstrap_curve(const VerificationPanel& panel, std::span<const int> m_values,
                                         int repeats = 2048, std::uint64_t seed = 0,
                                         unsigned threads = default_threads());

struct ScatterPoint {
  std::string problem_id;
  double pass_rate = 0.0;
  int failures = 0;
};

/// Per problem: pass rate over its solutions, and how many of them the
/// majority verdict over the first m pooled verifications gets wrong.
std::vector<ScatterPoint> difficulty_failure_scatter(const VerificationPanel& panel, int m);

/// CSV with header m,accuracy,fpr,fnr,auc,repeats,seed.
std::string metric_points_csv(std::span<const MetricPoint> points);

/// Shortest round-trip decimal form used in every CSV this library emits.
std::string format_real(double value);

}  // namespace vscale::metrics
