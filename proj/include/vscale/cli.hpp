#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vscale/core.hpp"
#include "vscale/dataset.hpp"
#include "vscale/metrics.hpp"
#include "vscale/orchestrator.hpp"
#include "vscale/panel.hpp"
#include "vscale/selection.hpp"
#include "vscale/simulator.hpp"

namespace vscale::cli {

enum class CostModel { n_times_m_plus_1, m_times_n_plus_1 };

std::string_view to_string(CostModel model);
CostModel parse_cost_model(std::string_view text);
std::int64_t cost(CostModel model, int n, int m);

struct BudgetGrid {
  std::vector<int> n_values;  // each >= 1
  std::vector<int> m_values;  // each >= 0; 0 means majority voting only
  CostModel cost_model = CostModel::n_times_m_plus_1;

  /// n in 2, 4, ..., 256 and m in 0..64.
  static BudgetGrid defaults();
  /// Throws EmptyGrid or InvalidArgument.
  void validate() const;
  /// Drops values the panel cannot support.
  BudgetGrid clipped_to(const VerificationPanel& panel) const;
};

// ---- verify-scaling

std::string cmd_verify_scaling(const VerificationPanel& panel, const std::vector<int>& m_values, int repeats,
                               std::uint64_t seed, unsigned threads = default_threads());

// ---- solve-scaling

struct SolveScalingRow {
  selection::Algorithm algorithm = selection::Algorithm::majority;
  int n = 0;
  int m = 0;
  double accuracy = 0.0;
  int repeats = 0;
  std::uint64_t seed = 0;
};

/// Mean solve rate over `repeats` random subsets per grid point. Every
/// algorithm sees the same subsets (subset streams depend only on seed, n,
/// m, repeat and problem position). Solutions without an extractable answer
/// use budget but never receive a vote; a problem whose subset has no
/// answered solution counts as unsolved. Sampling search has no rows at
/// m = 0.
std::vector<SolveScalingRow> solve_scaling(const VerificationPanel& panel,
                                           const std::vector<selection::Algorithm>& algorithms,
                                           const BudgetGrid& grid, double alpha, int repeats, std::uint64_t seed,
                                           unsigned threads = default_threads());

/// Header algorithm,n,m,accuracy,repeats,seed.
std::string solve_scaling_csv(const std::vector<SolveScalingRow>& rows);
std::vector<SolveScalingRow> parse_solve_scaling_csv(std::string_view csv);

// ---- frontier

struct FrontierPoint {
  std::int64_t budget = 0;
  int best_n = 0;
  int best_m = 0;
  double accuracy = 0.0;
};

/// Best feasible grid point for each budget. Budgets default to the
/// distinct grid costs. Ties prefer smaller cost, then larger n, then
/// smaller m. Budgets below every cost produce no point. Throws EmptyGrid.
std::vector<FrontierPoint> frontier(const std::vector<SolveScalingRow>& rows, selection::Algorithm algorithm,
                                    CostModel model, const std::vector<std::int64_t>& budgets = {});

/// Header algorithm,cost_model,budget,n,m,accuracy.
std::string frontier_csv(const std::vector<FrontierPoint>& points, selection::Algorithm algorithm, CostModel model);

// ---- audit-dataset

struct AuditPair {
  std::string pair_id;
  std::string problem;
  std::string solution;
};

AuditPair audit_pair_from_json(const nlohmann::json& j, std::size_t line);

struct AuditResult {
  int m = 0;
  std::vector<int> sums;                 // one per pair; invalid verdicts count as 0
  std::vector<std::int64_t> histogram;   // size m + 1
  std::vector<std::size_t> flagged;      // pairs with sum 0
  orchestrator::QualityReport quality;
};

AuditResult audit_dataset(const std::vector<AuditPair>& pairs, int m, ProblemMode mode,
                          orchestrator::Orchestrator& orch, const orchestrator::EndpointConfig& cfg);

/// Header sum,count,m,seed.
std::string audit_histogram_csv(const AuditResult& result, std::uint64_t seed);

// ---- filter-data

struct FilterOutput {
  std::vector<nlohmann::json> kept;
  std::vector<nlohmann::json> dropped_all_correct;
  std::vector<nlohmann::json> dropped_all_wrong;
  dataset::FilterResult filter;
};

/// Partitions labeled solution records by the contrastive filter over their
/// problems. Records keep their input order inside each partition.
FilterOutput filter_records(const std::vector<nlohmann::json>& records);

// ---- enumerate

struct EnumerateRow {
  std::string spec;
  selection::Algorithm algorithm = selection::Algorithm::majority;
  int n = 0;
  int m = 0;
  simulator::Rational exact;
  std::optional<simulator::MonteCarloResult> monte_carlo;
  std::uint64_t seed = 0;
};

std::vector<EnumerateRow> enumerate_specs(const std::vector<simulator::SyntheticProblemSpec>& specs,
                                          const std::vector<selection::Algorithm>& algorithms,
                                          const std::vector<int>& n_values, const std::vector<int>& m_values,
                                          double alpha, std::int64_t trials, std::uint64_t seed,
                                          unsigned threads = default_threads());

/// Header spec,algorithm,n,m,exact,exact_fraction,mc_estimate,mc_standard_error,trials,seed.
std::string enumerate_csv(const std::vector<EnumerateRow>& rows);

/// Accuracy grid computed by enumeration, as solve-scaling rows with
/// repeats = 0.
std::vector<SolveScalingRow> enumeration_grid(const simulator::SyntheticProblemSpec& spec,
                                              selection::Algorithm algorithm, const std::vector<int>& n_values,
                                              const std::vector<int>& m_values, double alpha);

/// Runs the command line; returns the process exit code.
int run(int argc, char** argv);

}  // namespace vscale::cli
