#include "vscale/panel.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace vscale {

using nlohmann::json;

namespace {

constexpr const char* kPanelFormat = "vscale-panel";
constexpr int kPanelVersion = 1;

std::string describe(const std::vector<PanelDeficit>& deficits) {
  std::string text = std::to_string(deficits.size()) + " deficient cell(s)";
  std::size_t shown = 0;
  for (const PanelDeficit& d : deficits) {
    if (shown++ == 8) {
      text += "; ...";
      break;
    }
    text += "; " + d.problem_id;
    if (d.solution_index >= 0) {
      text += "#" + std::to_string(d.solution_index) + " verdicts " + std::to_string(d.have) + "/" +
              std::to_string(d.need);
    } else {
      text += " solutions " + std::to_string(d.have) + "/" + std::to_string(d.need);
    }
  }
  return text;
}

}  // namespace

IncompletePanelError::IncompletePanelError(std::vector<PanelDeficit> deficits)
    : Error(ErrorCode::incomplete_panel, describe(deficits)), deficits_(std::move(deficits)) {}

double PanelProblem::pass_rate() const {
  if (solutions.empty()) return 0.0;
  auto correct = std::count_if(solutions.begin(), solutions.end(), [](const PanelSolution& s) { return s.label; });
  return static_cast<double>(correct) / static_cast<double>(solutions.size());
}

std::size_t VerificationPanel::num_solutions() const {
  std::size_t total = 0;
  for (const PanelProblem& p : problems) total += p.solutions.size();
  return total;
}

int VerificationPanel::min_solutions() const {
  if (problems.empty()) return 0;
  std::size_t least = problems.front().solutions.size();
  for (const PanelProblem& p : problems) least = std::min(least, p.solutions.size());
  return static_cast<int>(least);
}

void VerificationPanel::validate() const {
  std::vector<PanelDeficit> deficits;
  for (const PanelProblem& p : problems) {
    for (const PanelSolution& s : p.solutions) {
      if (static_cast<int>(s.verdicts.size()) != m_max) {
        deficits.push_back({p.problem_id, s.index, static_cast<int>(s.verdicts.size()), m_max});
      }
    }
  }
  if (!deficits.empty()) throw IncompletePanelError(std::move(deficits));
}

void write_panel(std::ostream& out, const VerificationPanel& panel) {
  out << json{{"format", kPanelFormat}, {"version", kPanelVersion}, {"m_max", panel.m_max}}.dump() << '\n';
  for (const PanelProblem& p : panel.problems) {
    json solutions = json::array();
    for (const PanelSolution& s : p.solutions) {
      std::string verdicts;
      verdicts.reserve(s.verdicts.size());
      for (auto v : s.verdicts) verdicts.push_back(v != 0 ? '1' : '0');
      solutions.push_back({{"index", s.index},
                           {"label", s.label},
                           {"answer", s.answer ? json(s.answer->value()) : json(nullptr)},
                           {"length", s.length},
                           {"verdicts", verdicts}});
    }
    json line{{"problem_id", p.problem_id},
              {"reference_answer", p.reference_answer ? json(p.reference_answer->value()) : json(nullptr)},
              {"solutions", std::move(solutions)}};
    out << line.dump() << '\n';
  }
}

VerificationPanel read_panel(std::istream& in) {
  VerificationPanel panel;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse_error, "panel line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) {
      if (j.value("format", "") != kPanelFormat || j.value("version", 0) != kPanelVersion) {
        throw Error(ErrorCode::parse_error, "missing or unsupported panel header");
      }
      panel.m_max = j.at("m_max").get<int>();
      have_header = true;
      continue;
    }
    try {
      PanelProblem p;
      p.problem_id = j.at("problem_id").get<std::string>();
      if (j.contains("reference_answer") && !j["reference_answer"].is_null()) {
        p.reference_answer = canonicalize_answer(j["reference_answer"].get<std::string>());
      }
      for (const json& sj : j.at("solutions")) {
        PanelSolution s;
        s.index = sj.at("index").get<int>();
        s.label = sj.at("label").get<bool>();
        if (sj.contains("answer") && !sj["answer"].is_null()) {
          s.answer = canonicalize_answer(sj["answer"].get<std::string>());
        }
        s.length = sj.value("length", std::int64_t{0});
        for (char c : sj.at("verdicts").get<std::string>()) {
          if (c != '0' && c != '1') throw Error(ErrorCode::parse_error, "verdict string must be 0/1");
          s.verdicts.push_back(c == '1' ? 1 : 0);
        }
        p.solutions.push_back(std::move(s));
      }
      panel.problems.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse_error, "panel line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw Error(ErrorCode::parse_error, "empty panel file");
  return panel;
}

VerificationPanel read_panel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open panel file '" + path + "'");
  return read_panel(in);
}

}  // namespace vscale
