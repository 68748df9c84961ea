#include "vscale/dataset.hpp"

#include <algorithm>
#include <cctype>

namespace vscale::dataset {

namespace {

constexpr std::string_view kProblemSlot = "${problem}";
constexpr std::string_view kSolutionSlot = "${solution}";

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())) != 0) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())) != 0) s.remove_suffix(1);
  return s;
}

}  // namespace

PromptTemplate PromptTemplate::builtin(ProblemMode mode) {
  std::string instruction =
      mode == ProblemMode::proof
          ? "Here is a math problem and a solution of it. Think step by step and verify if each proof step in "
            "solution is correct.\n" + std::string(kProofFormatLine)
          : "Here is a math problem and a solution of it. Think step by step and verify if the final answer in "
            "the solution is correct.\n" + std::string(kFinalAnswerFormatLine);
  return PromptTemplate{mode, instruction + "\n\n**Problem**\n\n${problem}\n\n**Solution**\n\n${solution}"};
}

std::string render_prompt(const PromptTemplate& tmpl, std::string_view problem, std::string_view solution) {
  if (is_blank(problem)) throw Error(ErrorCode::empty_field, "problem text is blank");
  if (is_blank(solution)) throw Error(ErrorCode::empty_field, "solution text is blank");
  std::string out;
  out.reserve(tmpl.body.size() + problem.size() + solution.size());
  std::string_view body = tmpl.body;
  std::size_t pos = 0;
  while (pos < body.size()) {
    if (body.compare(pos, kProblemSlot.size(), kProblemSlot) == 0) {
      out += problem;
      pos += kProblemSlot.size();
    } else if (body.compare(pos, kSolutionSlot.size(), kSolutionSlot) == 0) {
      out += solution;
      pos += kSolutionSlot.size();
    } else {
      out.push_back(body[pos++]);
    }
  }
  return out;
}

std::string render_prompt(const Problem& problem, const Solution& solution, ProblemMode mode) {
  return render_prompt(PromptTemplate::builtin(mode), problem.statement, solution.text);
}

ParsedVerdict parse_verdict_line(std::string_view response) {
  constexpr std::string_view kPrefix = "Answer:";
  std::size_t end = response.size();
  while (true) {
    std::size_t newline = end == 0 ? std::string_view::npos : response.rfind('\n', end - 1);
    std::size_t begin = newline == std::string_view::npos ? 0 : newline + 1;
    std::string_view line = response.substr(begin, end - begin);
    std::string_view content = trim(line);
    if (content.starts_with(kPrefix)) {
      std::string_view token = trim(content.substr(kPrefix.size()));
      if (token == "1") return ParsedVerdict{true, std::string(line)};
      if (token == "0") return ParsedVerdict{false, std::string(line)};
      throw Error(ErrorCode::malformed_verdict, "verdict line '" + std::string(content) + "' is not 0 or 1");
    }
    if (newline == std::string_view::npos) break;
    end = newline;
  }
  throw Error(ErrorCode::no_verdict, "response has no 'Answer:' line");
}

bool parse_verdict(std::string_view response) { return parse_verdict_line(response).verdict; }

bool label_solution(const Problem& problem, const Solution& solution) {
  if (problem.mode != ProblemMode::final_answer) {
    throw Error(ErrorCode::invalid_argument, "problem '" + problem.id + "' is a proof problem and cannot be labeled");
  }
  if (!problem.reference_answer) {
    throw Error(ErrorCode::missing_reference, "problem '" + problem.id + "' has no reference answer");
  }
  if (!solution.canonical_answer) return false;
  return answers_equal(*solution.canonical_answer, canonicalize_answer(*problem.reference_answer));
}

FilterResult filter_training_problems(const std::map<std::string, std::vector<bool>>& labels_by_problem) {
  FilterResult result;
  for (const auto& [problem_id, labels] : labels_by_problem) {
    if (labels.empty()) {
      throw Error(ErrorCode::invalid_argument, "problem '" + problem_id + "' has no labeled solutions");
    }
    bool any_correct = std::find(labels.begin(), labels.end(), true) != labels.end();
    bool any_wrong = std::find(labels.begin(), labels.end(), false) != labels.end();
    if (!any_wrong) {
      result.dropped_all_correct.insert(problem_id);
    } else if (!any_correct) {
      result.dropped_all_wrong.insert(problem_id);
    } else {
      result.kept.insert(problem_id);
    }
  }
  return result;
}

TrainingExport build_training_examples(const std::vector<Problem>& problems, const std::vector<Solution>& solutions) {
  std::map<std::string, const Problem*> by_id;
  for (const Problem& p : problems) {
    if (!by_id.emplace(p.id, &p).second) throw Error(ErrorCode::invalid_argument, "duplicate problem id '" + p.id + "'");
  }

  std::map<std::string, std::vector<bool>> labels;
  std::vector<std::pair<const Solution*, bool>> labeled;
  for (const Solution& s : solutions) {
    auto it = by_id.find(s.problem_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::invalid_argument, "solution refers to unknown problem '" + s.problem_id + "'");
    }
    if (it->second->mode != ProblemMode::final_answer) continue;
    bool label = label_solution(*it->second, s);
    labels[s.problem_id].push_back(label);
    labeled.emplace_back(&s, label);
  }

  TrainingExport out;
  out.filter = filter_training_problems(labels);
  for (const auto& [solution, label] : labeled) {
    if (!out.filter.kept.contains(solution->problem_id)) continue;
    const Problem& problem = *by_id.at(solution->problem_id);
    out.examples.push_back(LabeledVerificationExample{render_prompt(problem, *solution, ProblemMode::final_answer),
                                                      label, solution->problem_id, solution->index});
  }
  return out;
}

}  // namespace vscale::dataset
