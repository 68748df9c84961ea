#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "vscale/core.hpp"
#include "vscale/dataset.hpp"

// JSONL encodings of the domain records. Field names match the struct
// members; optional members are written as null.
namespace vscale::records {

nlohmann::json to_json(const Problem& problem);
nlohmann::json to_json(const Solution& solution);
nlohmann::json to_json(const VerificationRecord& record);
nlohmann::json to_json(const dataset::LabeledVerificationExample& example);

Problem problem_from_json(const nlohmann::json& j);
/// `canonical_answer` is re-canonicalized on read; a record may also carry a
/// raw `answer` field instead, which is canonicalized the same way.
Solution solution_from_json(const nlohmann::json& j);
VerificationRecord verification_from_json(const nlohmann::json& j);

/// One JSON value per non-empty line. Throws ParseError with the line number.
std::vector<nlohmann::json> read_jsonl(std::istream& in);
std::vector<nlohmann::json> read_jsonl_file(const std::string& path);
void write_jsonl(std::ostream& out, const std::vector<nlohmann::json>& values);

std::vector<Problem> read_problems(const std::string& path);
std::vector<Solution> read_solutions(const std::string& path);

}  // namespace vscale::records
