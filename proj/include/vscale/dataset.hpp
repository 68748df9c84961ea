#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vscale/core.hpp"

namespace vscale::dataset {

/// Instruction line fixing the response contract for final-answer checks.
inline constexpr std::string_view kFinalAnswerFormatLine =
    "The last line of your response should be of the form Answer: $Answer (without quotes) where $Answer is 1 "
    "if the final answer in the solution is correct and 0 if incorrect.";
inline constexpr std::string_view kProofFormatLine =
    "The last line of your response should be of the form Answer: $Answer (without quotes) where $Answer is 1 "
    "if the solution is correct and 0 if incorrect.";

/// Template text with `${problem}` and `${solution}` placeholders.
struct PromptTemplate {
  ProblemMode mode = ProblemMode::final_answer;
  std::string body;

  static PromptTemplate builtin(ProblemMode mode);
};

/// Substitutes both placeholders in one pass (inserted text is never
/// rescanned). Throws EmptyField if either input is blank.
std::string render_prompt(const PromptTemplate& tmpl, std::string_view problem, std::string_view solution);
std::string render_prompt(const Problem& problem, const Solution& solution, ProblemMode mode);

struct ParsedVerdict {
  bool verdict = false;
  std::string line;  // the matched line, untrimmed
};

/// Scans upward from the last line for the first `Answer:` line and reads a
/// 0/1 token from it. Throws NoVerdict or MalformedVerdict.
ParsedVerdict parse_verdict_line(std::string_view response);
bool parse_verdict(std::string_view response);

/// Rule-based correctness label. Solutions without an extractable answer
/// are incorrect. Throws MissingReference; proof problems are rejected.
bool label_solution(const Problem& problem, const Solution& solution);

/// +1 when the verdict matches the label, -1 otherwise.
constexpr int reward(bool label, bool verdict) { return label == verdict ? 1 : -1; }

struct FilterResult {
  std::set<std::string> kept;
  std::set<std::string> dropped_all_correct;
  std::set<std::string> dropped_all_wrong;
};

/// Drops problems whose sampled solutions are all correct or all wrong.
FilterResult filter_training_problems(const std::map<std::string, std::vector<bool>>& labels_by_problem);

struct LabeledVerificationExample {
  std::string prompt;
  bool label = false;
  std::string problem_id;
  int solution_index = 0;
};

struct TrainingExport {
  std::vector<LabeledVerificationExample> examples;
  FilterResult filter;
};

/// Labels every solution of a final-answer problem, applies the filter and
/// renders one example per solution of each kept problem. Proof problems
/// are skipped.
TrainingExport build_training_examples(const std::vector<Problem>& problems,
                                       const std::vector<Solution>& solutions);

}  // namespace vscale::dataset
