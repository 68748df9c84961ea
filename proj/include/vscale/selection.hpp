#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vscale/core.hpp"

namespace vscale::selection {

enum class Algorithm {
  majority,
  shortest_majority,
  pessimistic,
  sampling_search,
  best_of_n_oracle,
};

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view text);
inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::majority, Algorithm::shortest_majority,
                                               Algorithm::pessimistic, Algorithm::sampling_search,
                                               Algorithm::best_of_n_oracle};

// Row-major N x M boolean matrix, one row per solution.
class VerdictMatrix {
 public:
  VerdictMatrix() = default;
  VerdictMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  bool at(int row, int col) const { return data_[index(row, col)] != 0; }
  void set(int row, int col, bool value) { data_[index(row, col)] = value ? 1 : 0; }
  int row_ones(int row) const;

 private:
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * cols_ + col; }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> data_;
};

struct AnswerGroup {
  CanonicalAnswer answer;
  int count = 0;
  double mean_reward = 0.0;
  double mean_length = 0.0;
  std::vector<int> member_indices;
};

struct SelectionInstance {
  std::vector<Solution> solutions;
  VerdictMatrix verdicts;

  int n() const noexcept { return static_cast<int>(solutions.size()); }
  int m() const noexcept { return verdicts.cols(); }
};

enum class TieBreak { shortest_mean_length_then_canonical_order };

struct SelectionConfig {
  double alpha = 0.1;
  TieBreak tie_break = TieBreak::shortest_mean_length_then_canonical_order;
};

struct SelectionResult {
  // Empty only when the best-of-N oracle finds no correct solution.
  std::optional<CanonicalAnswer> chosen_answer;
  int chosen_solution_index = -1;
  std::map<CanonicalAnswer, double> scores;
  Algorithm algorithm = Algorithm::majority;
  bool tie_broken = false;
  bool no_correct_solution = false;
};

/// Partition of the solutions by canonical answer, ordered by answer.
std::vector<AnswerGroup> group_by_answer(const SelectionInstance& instance);

/// Lower-confidence-bound selection:
///   score(a_i) = r_i - alpha * ln(N*M) / (N_i*M + 1)
SelectionResult select_pessimistic(const SelectionInstance& instance, const SelectionConfig& config);
SelectionResult select_majority(const SelectionInstance& instance, const SelectionConfig& config);
/// Majority voting weighted by inverse mean length, s_i = c_i / l_i.
SelectionResult select_shortest_majority(const SelectionInstance& instance, const SelectionConfig& config);
/// Per-solution mean verdict, no answer grouping.
SelectionResult select_sampling_search(const SelectionInstance& instance, const SelectionConfig& config);
SelectionResult select_best_of_n_oracle(const SelectionInstance& instance, const CanonicalAnswer& truth);

/// Runs `algorithm`; pessimistic selection with M = 0 is routed to majority
/// voting. `truth` is required only by the oracle.
SelectionResult select(Algorithm algorithm, const SelectionInstance& instance, const SelectionConfig& config,
                       const std::optional<CanonicalAnswer>& truth = std::nullopt);

// Compact evidence used by the bootstrap and simulation hot loops. Answers
// are ids into a dictionary sorted in canonical order, so comparing ids is
// the same as comparing canonical answers.
struct Evidence {
  int m = 0;
  int num_answers = 0;
  std::vector<int> answer;
  std::vector<std::int64_t> length;
  std::vector<int> ones;

  int n() const noexcept { return static_cast<int>(answer.size()); }
  void clear() {
    answer.clear();
    length.clear();
    ones.clear();
  }
  void add(int answer_id, std::int64_t solution_length, int positive_verdicts) {
    answer.push_back(answer_id);
    length.push_back(solution_length);
    ones.push_back(positive_verdicts);
  }
};

struct Choice {
  int solution = -1;  // -1: oracle found no correct solution
  int answer = -1;
  bool tie_broken = false;
};

/// Compact counterpart of `select`. `is_truth[id]` marks answer ids equal to
/// the reference; it is read only by the oracle. `scores`, when given, is
/// resized to `num_answers` and receives each answer's score (NaN for
/// answers that no solution produced).
Choice choose(Algorithm algorithm, const Evidence& evidence, const SelectionConfig& config,
              std::span<const char> is_truth = {}, std::vector<double>* scores = nullptr);

}  // namespace vscale::selection
