#include "vscale/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "vscale/random.hpp"

namespace vscale::metrics {

bool aggregate_majority(std::span<const std::uint8_t> verdicts) {
  if (verdicts.empty()) throw Error(ErrorCode::empty_list, "majority over no verdicts");
  auto positives = static_cast<std::size_t>(std::count_if(verdicts.begin(), verdicts.end(),
                                                          [](std::uint8_t v) { return v != 0; }));
  return positives > verdicts.size() / 2;
}

double mean_score(std::span<const std::uint8_t> verdicts) {
  if (verdicts.empty()) throw Error(ErrorCode::empty_list, "mean over no verdicts");
  auto positives = std::count_if(verdicts.begin(), verdicts.end(), [](std::uint8_t v) { return v != 0; });
  return static_cast<double>(positives) / static_cast<double>(verdicts.size());
}

ConfusionRates confusion_rates(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::length_mismatch, std::to_string(predictions.size()) + " predictions for " +
                                                std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw Error(ErrorCode::empty_list, "confusion rates over no items");
  int tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    bool predicted = predictions[i] != 0;
    bool actual = labels[i] != 0;
    if (actual) {
      predicted ? ++tp : ++fn;
    } else {
      predicted ? ++fp : ++tn;
    }
  }
  ConfusionRates r;
  r.positives = tp + fn;
  r.negatives = tn + fp;
  r.no_positives = r.positives == 0;
  r.no_negatives = r.negatives == 0;
  r.accuracy = static_cast<double>(tp + tn) / static_cast<double>(labels.size());
  r.fpr = r.no_negatives ? 0.0 : static_cast<double>(fp) / r.negatives;
  r.fnr = r.no_positives ? 0.0 : static_cast<double>(fn) / r.positives;
  return r;
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::length_mismatch, std::to_string(scores.size()) + " scores for " +
                                                std::to_string(labels.size()) + " labels");
  }
  std::int64_t positives = std::count_if(labels.begin(), labels.end(), [](std::uint8_t v) { return v != 0; });
  std::int64_t negatives = static_cast<std::int64_t>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) throw Error(ErrorCode::single_class, "AUC needs both classes");
  if (std::any_of(scores.begin(), scores.end(), [](double s) { return std::isnan(s); })) {
    throw Error(ErrorCode::invalid_argument, "AUC scores must not be NaN");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the mid-rank of a tie block [i, j) is (i + 1) + j; staying in
  // integers keeps the statistic exact.
  std::int64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    auto twice_mid_rank = static_cast<std::int64_t>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) twice_rank_sum += twice_mid_rank;
    }
    i = j;
  }
  std::int64_t twice_u = twice_rank_sum - positives * (positives + 1);
  return static_cast<double>(twice_u) / static_cast<double>(2 * positives * negatives);
}

namespace {

struct RunningMean {
  double mean = 0.0;
  std::int64_t count = 0;

  // Welford update: constant inputs leave the mean bit-exact.
  void add(double x) {
    ++count;
    mean += (x - mean) / static_cast<double>(count);
  }
};

}  // namespace

std::vector<RepeatMetrics> bootstrap_repeats(const VerificationPanel& panel, int m, int repeats, std::uint64_t seed,
                                             unsigned threads) {
  panel.validate();
  if (repeats < 1) throw Error(ErrorCode::invalid_argument, "repeats must be >= 1");
  if (m < 1) throw Error(ErrorCode::invalid_argument, "m must be >= 1");
  if (m > panel.m_max) {
    throw Error(ErrorCode::budget_exceeds_pool,
                "m = " + std::to_string(m) + " exceeds the pool of " + std::to_string(panel.m_max));
  }
  const std::size_t total = panel.num_solutions();
  if (total == 0) throw Error(ErrorCode::empty_list, "panel has no solutions");

  std::vector<std::uint8_t> labels;
  labels.reserve(total);
  for (const PanelProblem& p : panel.problems) {
    for (const PanelSolution& s : p.solutions) labels.push_back(s.label ? 1 : 0);
  }
  const bool both_classes = std::find(labels.begin(), labels.end(), 1) != labels.end() &&
                            std::find(labels.begin(), labels.end(), 0) != labels.end();

  std::vector<RepeatMetrics> out(static_cast<std::size_t>(repeats));
  parallel_for(out.size(), threads, [&](std::size_t r) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(m), r}));
    std::vector<int> scratch;
    std::vector<int> picks;
    std::vector<std::uint8_t> subsample(static_cast<std::size_t>(m));
    std::vector<std::uint8_t> predictions;
    std::vector<double> scores;
    predictions.reserve(total);
    scores.reserve(total);
    for (const PanelProblem& p : panel.problems) {
      for (const PanelSolution& s : p.solutions) {
        rng.sample_without_replacement(panel.m_max, m, scratch, picks);
        for (int k = 0; k < m; ++k) subsample[static_cast<std::size_t>(k)] = s.verdicts[static_cast<std::size_t>(picks[static_cast<std::size_t>(k)])];
        predictions.push_back(aggregate_majority(subsample) ? 1 : 0);
        scores.push_back(mean_score(subsample));
      }
    }
    ConfusionRates rates = confusion_rates(predictions, labels);
    RepeatMetrics& slot = out[r];
    slot.accuracy = rates.accuracy;
    slot.fpr = rates.fpr;
    slot.fnr = rates.fnr;
    slot.auc = both_classes ? auc(scores, labels) : std::nan("");
  });
  return out;
}

std::vector<MetricPoint> bootstrap_curve(const VerificationPanel& panel, std::span<const int> m_values, int repeats,
                                         std::uint64_t seed, unsigned threads) {
  std::vector<MetricPoint> points;
  points.reserve(m_values.size());
  for (int m : m_values) {
    auto samples = bootstrap_repeats(panel, m, repeats, seed, threads);
    RunningMean accuracy, fpr, fnr, area;
    for (const RepeatMetrics& s : samples) {
      accuracy.add(s.accuracy);
      fpr.add(s.fpr);
      fnr.add(s.fnr);
      area.add(s.auc);
    }
    points.push_back(MetricPoint{m, accuracy.mean, fpr.mean, fnr.mean, area.mean, repeats, seed});
  }
  return points;
}

std::vector<ScatterPoint> difficulty_failure_scatter(const VerificationPanel& panel, int m) {
  panel.validate();
  if (m > panel.m_max) {
    throw Error(ErrorCode::budget_exceeds_pool,
                "m = " + std::to_string(m) + " exceeds the pool of " + std::to_string(panel.m_max));
  }
  std::vector<ScatterPoint> out;
  out.reserve(panel.problems.size());
  for (const PanelProblem& p : panel.problems) {
    int failures = 0;
    for (const PanelSolution& s : p.solutions) {
      std::span<const std::uint8_t> first(s.verdicts.data(), static_cast<std::size_t>(m));
      if (aggregate_majority(first) != s.label) ++failures;
    }
    out.push_back(ScatterPoint{p.problem_id, p.pass_rate(), failures});
  }
  return out;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

std::string metric_points_csv(std::span<const MetricPoint> points) {
  std::string csv = "m,accuracy,fpr,fnr,auc,repeats,seed\n";
  for (const MetricPoint& p : points) {
    csv += std::to_string(p.m) + ',' + format_real(p.accuracy) + ',' + format_real(p.fpr) + ',' +
           format_real(p.fnr) + ',' + format_real(p.auc) + ',' + std::to_string(p.repeats) + ',' +
           std::to_string(p.seed) + '\n';
  }
  return csv;
}

}  // namespace vscale::metrics
