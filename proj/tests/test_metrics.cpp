#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "vscale/metrics.hpp"
#include "vscale/simulator.hpp"

namespace vscale::metrics {
namespace {

using Bits = std::vector<std::uint8_t>;

double brute_auc(const std::vector<double>& s, const Bits& y) {
  std::int64_t wins2 = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      ++pairs;
      wins2 += s[i] > s[j] ? 2 : (s[i] == s[j] ? 1 : 0);
    }
  }
  return static_cast<double>(wins2) / (2.0 * static_cast<double>(pairs));
}

TEST(AggregateMajority, Examples) {
  EXPECT_TRUE(aggregate_majority(Bits{1, 1, 0}));
  EXPECT_FALSE(aggregate_majority(Bits{1, 0}));
  EXPECT_FALSE(aggregate_majority(Bits{0, 0, 0, 1}));
  EXPECT_THROW(aggregate_majority(Bits{}), Error);
}

TEST(MeanScore, Examples) {
  EXPECT_DOUBLE_EQ(mean_score(Bits{1, 1, 0, 0}), 0.5);
  EXPECT_DOUBLE_EQ(mean_score(Bits{1}), 1.0);
  EXPECT_DOUBLE_EQ(mean_score(Bits{0, 0, 1}), 1.0 / 3.0);
  EXPECT_THROW(mean_score(Bits{}), Error);
}

TEST(ConfusionRates, HandCountedTable) {
  auto r = confusion_rates(Bits{1, 0, 1, 0}, Bits{1, 0, 0, 1});
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(r.fpr, 0.5);
  EXPECT_DOUBLE_EQ(r.fnr, 0.5);
}

TEST(ConfusionRates, DegenerateClasses) {
  auto same = confusion_rates(Bits{1, 0, 1}, Bits{1, 0, 1});
  EXPECT_DOUBLE_EQ(same.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(same.fpr, 0.0);
  EXPECT_DOUBLE_EQ(same.fnr, 0.0);
  auto all_pos = confusion_rates(Bits{0, 0}, Bits{1, 1});
  EXPECT_DOUBLE_EQ(all_pos.fnr, 1.0);
  EXPECT_DOUBLE_EQ(all_pos.fpr, 0.0);
  EXPECT_TRUE(all_pos.no_negatives);
  try {
    confusion_rates(Bits{1}, Bits{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::length_mismatch);
  }
}

TEST(ConfusionRatesProperty, AccuracyIdentity) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 2000; ++t) {
    std::size_t n = 1 + gen() % 50;
    Bits p(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = gen() % 2;
      y[i] = gen() % 2;
    }
    auto r = confusion_rates(p, y);
    double recon = 1.0 - (r.fnr * r.positives + r.fpr * r.negatives) / static_cast<double>(n);
    EXPECT_NEAR(r.accuracy, recon, 1e-12);
  }
}

TEST(Auc, Examples) {
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.9, 0.1}, Bits{1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.3, 0.3, 0.3}, Bits{1, 0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.8, 0.5, 0.5, 0.2}, Bits{1, 1, 0, 0}), 0.875);
  try {
    auc(std::vector<double>{0.1, 0.2}, Bits{1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::single_class);
  }
}

TEST(AucProperty, EqualsBruteForceExactly) {
  std::mt19937_64 gen(9);
  for (int t = 0; t < 300; ++t) {
    std::size_t n = 2 + gen() % 199;
    std::vector<double> s(n);
    Bits y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(gen() % 7) / 4.0;
      y[i] = gen() % 2;
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_EQ(auc(s, y), brute_auc(s, y));
  }
}

TEST(AucProperty, InvariantUnderMonotoneTransform) {
  std::mt19937_64 gen(10);
  for (int t = 0; t < 300; ++t) {
    std::size_t n = 2 + gen() % 60;
    std::vector<double> s(n), s2(n);
    Bits y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(gen() % 9) / 8.0;
      s2[i] = std::exp(3.0 * s[i]) - 7.0;
      y[i] = gen() % 2;
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_EQ(auc(s, y), auc(s2, y));
  }
}

VerificationPanel random_panel(std::uint64_t seed, int problems, int n, int m_max, double noise) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution flip(noise), coin(0.5);
  VerificationPanel panel;
  panel.m_max = m_max;
  for (int p = 0; p < problems; ++p) {
    PanelProblem pp;
    pp.problem_id = "p" + std::to_string(p);
    pp.reference_answer = canonicalize_answer("1");
    for (int i = 0; i < n; ++i) {
      PanelSolution s;
      s.index = i;
      s.label = coin(gen);
      s.answer = canonicalize_answer(s.label ? "1" : "2");
      s.length = 10;
      for (int j = 0; j < m_max; ++j) s.verdicts.push_back(static_cast<std::uint8_t>(s.label != flip(gen)));
      pp.solutions.push_back(std::move(s));
    }
    panel.problems.push_back(std::move(pp));
  }
  return panel;
}

TEST(Bootstrap, DeterministicAndThreadIndependent) {
  auto panel = random_panel(1, 6, 8, 16, 0.3);
  std::vector<int> ms{1, 2, 5, 16};
  auto a = metric_points_csv(bootstrap_curve(panel, ms, 200, 42, 1));
  auto b = metric_points_csv(bootstrap_curve(panel, ms, 200, 42, 4));
  auto c = metric_points_csv(bootstrap_curve(panel, ms, 200, 42, 7));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_NE(a, metric_points_csv(bootstrap_curve(panel, ms, 200, 43, 4)));
}

TEST(Bootstrap, FullPoolHasZeroVariance) {
  auto panel = random_panel(2, 5, 7, 9, 0.35);
  auto reps = bootstrap_repeats(panel, 9, 256, 5);
  for (const auto& r : reps) {
    EXPECT_EQ(r.accuracy, reps[0].accuracy);
    EXPECT_EQ(r.fpr, reps[0].fpr);
    EXPECT_EQ(r.fnr, reps[0].fnr);
    EXPECT_EQ(r.auc, reps[0].auc);
  }
  // And it equals the full-pool statistics.
  Bits pred, labels;
  std::vector<double> scores;
  for (const auto& p : panel.problems) {
    for (const auto& s : p.solutions) {
      pred.push_back(aggregate_majority(s.verdicts));
      scores.push_back(mean_score(s.verdicts));
      labels.push_back(s.label);
    }
  }
  auto full = confusion_rates(pred, labels);
  auto point = bootstrap_curve(panel, std::vector<int>{9}, 256, 5)[0];
  EXPECT_EQ(point.accuracy, full.accuracy);
  EXPECT_EQ(point.fpr, full.fpr);
  EXPECT_EQ(point.fnr, full.fnr);
  EXPECT_EQ(point.auc, auc(scores, labels));
}

TEST(Bootstrap, PerfectVerifier) {
  auto panel = random_panel(3, 4, 6, 8, 0.0);
  for (const auto& p : bootstrap_curve(panel, std::vector<int>{1, 2, 3, 8}, 64, 0)) {
    EXPECT_EQ(p.accuracy, 1.0);
    EXPECT_EQ(p.fpr, 0.0);
    EXPECT_EQ(p.fnr, 0.0);
  }
}

TEST(Bootstrap, Errors) {
  auto panel = random_panel(3, 2, 2, 4, 0.1);
  try {
    bootstrap_curve(panel, std::vector<int>{5}, 4, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::budget_exceeds_pool);
  }
}

TEST(Bootstrap, SubsampleIsWithoutReplacement) {
  // One solution whose pool has exactly one positive: any m-subset holds it
  // at most once, so the mean score over repeats is m / m_max in expectation
  // and every repeat's score is 0 or 1/m.
  VerificationPanel panel;
  panel.m_max = 8;
  PanelProblem pp;
  pp.problem_id = "p";
  for (int i = 0; i < 2; ++i) {
    PanelSolution s;
    s.index = i;
    s.label = i == 0;
    s.answer = canonicalize_answer("1");
    s.length = 1;
    s.verdicts = Bits(8, 0);
    if (i == 0) s.verdicts[3] = 1;
    pp.solutions.push_back(s);
  }
  panel.problems.push_back(pp);
  auto reps = bootstrap_repeats(panel, 4, 4000, 9);
  double hit = 0;
  for (const auto& r : reps) {
    EXPECT_TRUE(r.auc == 0.5 || r.auc == 1.0);
    hit += r.auc == 1.0;
  }
  EXPECT_NEAR(hit / 4000.0, 0.5, 0.03);
}

TEST(Scatter, PassRateAndFailures) {
  VerificationPanel panel;
  panel.m_max = 3;
  PanelProblem easy{"easy", canonicalize_answer("1"), {}};
  PanelProblem hard{"hard", canonicalize_answer("1"), {}};
  for (int i = 0; i < 4; ++i) {
    easy.solutions.push_back(PanelSolution{i, true, canonicalize_answer("1"), 5, Bits{1, 1, 1}});
    hard.solutions.push_back(PanelSolution{i, false, canonicalize_answer("2"), 5, i < 3 ? Bits{1, 1, 0} : Bits{0, 0, 0}});
  }
  panel.problems = {easy, hard};
  auto pts = difficulty_failure_scatter(panel, 3);
  EXPECT_EQ(pts[0].pass_rate, 1.0);
  EXPECT_EQ(pts[0].failures, 0);
  EXPECT_EQ(pts[1].pass_rate, 0.0);
  EXPECT_EQ(pts[1].failures, 3);
}

TEST(Csv, HeaderAndFormat) {
  std::vector<MetricPoint> pts{MetricPoint{2, 0.5, 0.25, 0.125, std::nan(""), 3, 7}};
  EXPECT_EQ(metric_points_csv(pts), "m,accuracy,fpr,fnr,auc,repeats,seed\n2,0.5,0.25,0.125,nan,3,7\n");
  EXPECT_EQ(format_real(0.1), "0.1");
}

TEST(PanelIo, RoundTrip) {
  auto panel = random_panel(4, 3, 5, 6, 0.2);
  std::ostringstream out;
  write_panel(out, panel);
  std::istringstream in(out.str());
  auto back = read_panel(in);
  std::ostringstream again;
  write_panel(again, back);
  EXPECT_EQ(out.str(), again.str());
  EXPECT_EQ(back.min_solutions(), 5);
  EXPECT_EQ(back.num_solutions(), 15u);
}

TEST(PanelIo, RejectsRaggedPool) {
  auto panel = random_panel(4, 1, 2, 6, 0.2);
  panel.problems[0].solutions[1].verdicts.pop_back();
  EXPECT_THROW(panel.validate(), Error);
}

}  // namespace
}  // namespace vscale::metrics
