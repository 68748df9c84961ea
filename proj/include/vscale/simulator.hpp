#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"
#include "vscale/panel.hpp"
#include "vscale/parallel.hpp"
#include "vscale/selection.hpp"

namespace vscale::simulator {

using Rational = boost::multiprecision::cpp_rational;

/// Parses "a/b", a decimal literal, or a JSON number (read through its
/// shortest decimal text) into an exact rational.
Rational parse_rational(const nlohmann::json& value);
std::string to_string(const Rational& value);

struct AnswerCategory {
  CanonicalAnswer answer;
  Rational probability;
  bool is_correct = false;
};

// Solution lengths are uniform integers in [mean - jitter, mean + jitter].
struct LengthModel {
  std::int64_t mean_correct = 100;
  std::int64_t mean_incorrect = 100;
  std::int64_t jitter = 0;
};

/// Generative model of one problem: the solver draws an answer category,
/// the verifier says 1 with probability tpr on correct solutions and
/// 1 - tnr on incorrect ones, independently per verification.
struct SyntheticProblemSpec {
  std::string name = "synthetic";
  std::vector<AnswerCategory> categories;
  std::optional<CanonicalAnswer> reference_answer;
  Rational verifier_tpr = 1;
  Rational verifier_tnr = 1;
  LengthModel length;

  /// Throws InvalidSpec unless probabilities sum to exactly 1, rates lie
  /// in [0, 1], answers are distinct, correct flags agree with the
  /// reference, and incorrect solutions are not shorter than correct ones.
  void validate() const;
  Rational p_correct() const;
  /// Reference answer, defaulting to the first correct category.
  std::optional<CanonicalAnswer> truth() const;
};

SyntheticProblemSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const SyntheticProblemSpec& spec);
std::vector<SyntheticProblemSpec> read_specs(const std::string& path);

/// n solutions with m verdicts each, deterministic in `seed`.
selection::SelectionInstance simulate_instance(const SyntheticProblemSpec& spec, int n, int m, std::uint64_t seed);

/// Synthetic panel of `problems` i.i.d. problems drawn from `spec`, with
/// n solutions and m pooled verdicts per solution.
VerificationPanel simulate_panel(const SyntheticProblemSpec& spec, int problems, int n, int m, std::uint64_t seed);

struct EnumerationResult {
  selection::Algorithm algorithm = selection::Algorithm::majority;
  int n = 0;
  int m = 0;
  Rational exact_success_probability;
  std::uint64_t outcomes = 0;

  double probability() const { return exact_success_probability.convert_to<double>(); }
};

inline constexpr std::uint64_t kDefaultMaxOutcomes = std::uint64_t{1} << 26;

/// Exact success probability of `algorithm` by walking every answer
/// assignment, length draw and verdict matrix. Throws SpaceTooLarge when
/// the outcome count exceeds `max_outcomes`.
EnumerationResult enumerate_success(const SyntheticProblemSpec& spec, selection::Algorithm algorithm, int n, int m,
                                    const selection::SelectionConfig& config,
                                    std::uint64_t max_outcomes = kDefaultMaxOutcomes);

struct MonteCarloResult {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::int64_t trials = 0;
  std::int64_t successes = 0;
};

/// Empirical success frequency over independent simulated instances.
/// Trials run in fixed blocks with derived seeds, so the estimate does not
/// depend on the thread count.
MonteCarloResult monte_carlo_success(const SyntheticProblemSpec& spec, selection::Algorithm algorithm, int n, int m,
                                     std::int64_t trials, std::uint64_t seed,
                                     const selection::SelectionConfig& config = {},
                                     unsigned threads = default_threads());

}  // namespace vscale::simulator
