#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vscale/core.hpp"

namespace vscale {

struct PanelSolution {
  int index = 0;
  bool label = false;
  std::optional<CanonicalAnswer> answer;
  std::int64_t length = 0;
  std::vector<std::uint8_t> verdicts;  // the full pool, size m_max
};

struct PanelProblem {
  std::string problem_id;
  std::optional<CanonicalAnswer> reference_answer;
  std::vector<PanelSolution> solutions;

  /// Correct solutions over all solutions; 0 for an empty problem.
  double pass_rate() const;
};

/// Rectangular verification data: every solution carries exactly m_max
/// verdicts and a label. Bootstrap subsets are drawn from these pools.
struct VerificationPanel {
  int m_max = 0;
  std::vector<PanelProblem> problems;

  std::size_t num_solutions() const;
  /// Smallest per-problem solution count (0 for an empty panel).
  int min_solutions() const;
  /// Throws IncompletePanelError if any pool is not exactly m_max long.
  void validate() const;
};

struct PanelDeficit {
  std::string problem_id;
  int solution_index = -1;  // -1: the solution itself is missing
  int have = 0;
  int need = 0;
};

class IncompletePanelError : public Error {
 public:
  explicit IncompletePanelError(std::vector<PanelDeficit> deficits);
  const std::vector<PanelDeficit>& deficits() const noexcept { return deficits_; }

 private:
  std::vector<PanelDeficit> deficits_;
};

// Panel files are JSONL: a versioned header line, then one line per problem.
//   {"format":"vscale-panel","version":1,"m_max":64}
//   {"problem_id":"p1","reference_answer":"17","solutions":[
//      {"index":0,"label":true,"answer":"17","length":812,"verdicts":"1101..."}]}
void write_panel(std::ostream& out, const VerificationPanel& panel);
VerificationPanel read_panel(std::istream& in);
VerificationPanel read_panel_file(const std::string& path);

}  // namespace vscale
