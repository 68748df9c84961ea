#include "vscale/records.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace vscale::records {

using nlohmann::json;

namespace {

template <typename T>
json optional_json(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

template <typename Fn>
auto guarded(const char* what, Fn fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("bad ") + what + " record: " + e.what());
  }
}

}  // namespace

json to_json(const Problem& problem) {
  return json{{"id", problem.id},
              {"statement", problem.statement},
              {"reference_answer", optional_json(problem.reference_answer)},
              {"mode", std::string(to_string(problem.mode))}};
}

json to_json(const Solution& solution) {
  return json{{"problem_id", solution.problem_id},
              {"index", solution.index},
              {"text", solution.text},
              {"canonical_answer", solution.canonical_answer ? json(solution.canonical_answer->value()) : json(nullptr)},
              {"length", solution.length},
              {"label", optional_json(solution.label)}};
}

json to_json(const VerificationRecord& record) {
  return json{{"problem_id", record.problem_id},
              {"solution_index", record.solution_index},
              {"trajectory", optional_json(record.trajectory)},
              {"verdict", record.verdict},
              {"raw_last_line", record.raw_last_line},
              {"status", std::string(to_string(record.status))}};
}

json to_json(const dataset::LabeledVerificationExample& example) {
  return json{{"prompt", example.prompt},
              {"label", example.label},
              {"problem_id", example.problem_id},
              {"solution_index", example.solution_index}};
}

Problem problem_from_json(const json& j) {
  return guarded("problem", [&] {
    Problem p;
    p.id = j.at("id").get<std::string>();
    p.statement = j.value("statement", std::string{});
    p.reference_answer = optional_string(j, "reference_answer");
    if (j.contains("mode")) p.mode = parse_problem_mode(j["mode"].get<std::string>());
    return p;
  });
}

Solution solution_from_json(const json& j) {
  return guarded("solution", [&] {
    Solution s;
    s.problem_id = j.at("problem_id").get<std::string>();
    s.index = j.at("index").get<int>();
    s.text = j.value("text", std::string{});
    auto answer = optional_string(j, "canonical_answer");
    if (!answer) answer = optional_string(j, "answer");
    if (answer) {
      try {
        s.canonical_answer = canonicalize_answer(*answer);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_answer) throw;
      }
    }
    s.length = j.contains("length") ? j["length"].get<std::int64_t>() : measure_length(s.text);
    if (j.contains("label") && !j["label"].is_null()) {
      const json& label = j["label"];
      s.label = label.is_boolean() ? label.get<bool>() : label.get<int>() != 0;
    }
    return s;
  });
}

VerificationRecord verification_from_json(const json& j) {
  return guarded("verification", [&] {
    VerificationRecord r;
    r.problem_id = j.at("problem_id").get<std::string>();
    r.solution_index = j.at("solution_index").get<int>();
    r.trajectory = optional_string(j, "trajectory");
    r.verdict = j.at("verdict").get<bool>();
    r.raw_last_line = j.value("raw_last_line", std::string{});
    std::string status = j.value("status", std::string("ok"));
    r.status = status == "ok" ? VerdictStatus::ok
                              : (status == "malformed" ? VerdictStatus::malformed : VerdictStatus::no_verdict);
    return r;
  });
}

std::vector<json> read_jsonl(std::istream& in) {
  std::vector<json> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      values.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return values;
}

std::vector<json> read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
  return read_jsonl(in);
}

void write_jsonl(std::ostream& out, const std::vector<json>& values) {
  for (const json& v : values) out << v.dump() << '\n';
}

std::vector<Problem> read_problems(const std::string& path) {
  std::vector<Problem> problems;
  for (const json& j : read_jsonl_file(path)) problems.push_back(problem_from_json(j));
  return problems;
}

std::vector<Solution> read_solutions(const std::string& path) {
  std::vector<Solution> solutions;
  for (const json& j : read_jsonl_file(path)) solutions.push_back(solution_from_json(j));
  return solutions;
}

}  // namespace vscale::records
