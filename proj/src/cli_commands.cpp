#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "vscale/cli.hpp"
#include "vscale/random.hpp"

namespace vscale::cli {

using nlohmann::json;
using selection::Algorithm;

std::string_view to_string(CostModel model) {
  switch (model) {
    case CostModel::n_times_m_plus_1: return "n_times_m_plus_1";
    case CostModel::m_times_n_plus_1: return "m_times_n_plus_1";
  }
  return "unknown";
}

CostModel parse_cost_model(std::string_view text) {
  if (text == "n_times_m_plus_1") return CostModel::n_times_m_plus_1;
  if (text == "m_times_n_plus_1") return CostModel::m_times_n_plus_1;
  throw Error(ErrorCode::invalid_argument, "unknown cost model '" + std::string(text) + "'");
}

std::int64_t cost(CostModel model, int n, int m) {
  switch (model) {
    case CostModel::n_times_m_plus_1: return static_cast<std::int64_t>(n) * (m + 1);
    case CostModel::m_times_n_plus_1: return static_cast<std::int64_t>(m) * (n + 1);
  }
  return 0;
}

BudgetGrid BudgetGrid::defaults() {
  BudgetGrid g;
  for (int n = 2; n <= 256; n *= 2) g.n_values.push_back(n);
  for (int m = 0; m <= 64; ++m) g.m_values.push_back(m);
  return g;
}

void BudgetGrid::validate() const {
  if (n_values.empty() || m_values.empty()) throw Error(ErrorCode::empty_grid, "budget grid is empty");
  for (int n : n_values) {
    if (n < 1) throw Error(ErrorCode::invalid_argument, "grid n values must be >= 1");
  }
  for (int m : m_values) {
    if (m < 0) throw Error(ErrorCode::invalid_argument, "grid m values must be >= 0");
  }
}

BudgetGrid BudgetGrid::clipped_to(const VerificationPanel& panel) const {
  BudgetGrid out;
  out.cost_model = cost_model;
  const int n_max = panel.min_solutions();
  for (int n : n_values) {
    if (n <= n_max) out.n_values.push_back(n);
  }
  for (int m : m_values) {
    if (m <= panel.m_max) out.m_values.push_back(m);
  }
  return out;
}

std::string cmd_verify_scaling(const VerificationPanel& panel, const std::vector<int>& m_values, int repeats,
                               std::uint64_t seed, unsigned threads) {
  auto points = metrics::bootstrap_curve(panel, m_values, repeats, seed, threads);
  return metrics::metric_points_csv(points);
}

namespace {

struct IndexedProblem {
  std::vector<int> answer;         // per solution, -1 when unextractable
  std::vector<char> is_truth;      // per answer id
  int num_answers = 0;
};

IndexedProblem index_problem(const PanelProblem& p) {
  std::vector<CanonicalAnswer> dict;
  for (const PanelSolution& s : p.solutions) {
    if (s.answer) dict.push_back(*s.answer);
  }
  std::sort(dict.begin(), dict.end());
  dict.erase(std::unique(dict.begin(), dict.end()), dict.end());

  IndexedProblem out;
  out.num_answers = static_cast<int>(dict.size());
  out.is_truth.assign(dict.size(), 0);
  for (std::size_t id = 0; id < dict.size(); ++id) {
    if (p.reference_answer) out.is_truth[id] = answers_equal(dict[id], *p.reference_answer) ? 1 : 0;
  }
  for (const PanelSolution& s : p.solutions) {
    if (!s.answer) {
      out.answer.push_back(-1);
      continue;
    }
    int id = static_cast<int>(std::lower_bound(dict.begin(), dict.end(), *s.answer) - dict.begin());
    out.answer.push_back(id);
    if (!p.reference_answer && s.label) out.is_truth[static_cast<std::size_t>(id)] = 1;
  }
  return out;
}

}  // namespace

std::vector<SolveScalingRow> solve_scaling(const VerificationPanel& panel, const std::vector<Algorithm>& algorithms,
                                           const BudgetGrid& grid, double alpha, int repeats, std::uint64_t seed,
                                           unsigned threads) {
  panel.validate();
  grid.validate();
  if (algorithms.empty()) throw Error(ErrorCode::invalid_argument, "no algorithms requested");
  if (repeats < 1) throw Error(ErrorCode::invalid_argument, "repeats must be >= 1");
  if (panel.problems.empty()) throw Error(ErrorCode::empty_list, "panel has no problems");
  const int n_pool = panel.min_solutions();
  for (int n : grid.n_values) {
    if (n > n_pool) {
      throw Error(ErrorCode::budget_exceeds_pool,
                  "n = " + std::to_string(n) + " exceeds the " + std::to_string(n_pool) + " solutions per problem");
    }
  }
  for (int m : grid.m_values) {
    if (m > panel.m_max) {
      throw Error(ErrorCode::budget_exceeds_pool,
                  "m = " + std::to_string(m) + " exceeds the pool of " + std::to_string(panel.m_max));
    }
  }

  std::vector<IndexedProblem> indexed;
  indexed.reserve(panel.problems.size());
  for (const PanelProblem& p : panel.problems) indexed.push_back(index_problem(p));

  selection::SelectionConfig config;
  config.alpha = alpha;
  const std::size_t num_algs = algorithms.size();
  const double num_problems = static_cast<double>(panel.problems.size());

  std::vector<SolveScalingRow> rows;
  for (int n : grid.n_values) {
    for (int m : grid.m_values) {
      // solved[r * num_algs + a]
      std::vector<double> rate(static_cast<std::size_t>(repeats) * num_algs, 0.0);
      parallel_for(static_cast<std::size_t>(repeats), threads, [&](std::size_t r) {
        std::vector<int> scratch, picks, vscratch, vpicks;
        std::vector<std::int64_t> solved(num_algs, 0);
        selection::Evidence ev;
        for (std::size_t p = 0; p < panel.problems.size(); ++p) {
          const PanelProblem& problem = panel.problems[p];
          const IndexedProblem& ip = indexed[p];
          Rng rng(derive_seed({seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m), r, p}));
          rng.sample_without_replacement(static_cast<int>(problem.solutions.size()), n, scratch, picks);
          std::sort(picks.begin(), picks.end());
          ev.clear();
          ev.m = m;
          ev.num_answers = ip.num_answers;
          for (int pick : picks) {
            const PanelSolution& s = problem.solutions[static_cast<std::size_t>(pick)];
            rng.sample_without_replacement(panel.m_max, m, vscratch, vpicks);
            int ones = 0;
            for (int v : vpicks) ones += s.verdicts[static_cast<std::size_t>(v)];
            int id = ip.answer[static_cast<std::size_t>(pick)];
            if (id >= 0) ev.add(id, s.length, ones);
          }
          if (ev.n() == 0) continue;
          for (std::size_t a = 0; a < num_algs; ++a) {
            if (algorithms[a] == Algorithm::sampling_search && m == 0) continue;
            selection::Choice c = selection::choose(algorithms[a], ev, config, ip.is_truth);
            bool ok = algorithms[a] == Algorithm::best_of_n_oracle
                          ? c.solution >= 0
                          : (c.answer >= 0 && ip.is_truth[static_cast<std::size_t>(c.answer)] != 0);
            if (ok) ++solved[a];
          }
        }
        for (std::size_t a = 0; a < num_algs; ++a) {
          rate[r * num_algs + a] = static_cast<double>(solved[a]) / num_problems;
        }
      });
      for (std::size_t a = 0; a < num_algs; ++a) {
        if (algorithms[a] == Algorithm::sampling_search && m == 0) continue;
        double mean = 0.0;
        for (int r = 0; r < repeats; ++r) {
          mean += (rate[static_cast<std::size_t>(r) * num_algs + a] - mean) / (r + 1);
        }
        rows.push_back(SolveScalingRow{algorithms[a], n, m, mean, repeats, seed});
      }
    }
  }
  return rows;
}

std::string solve_scaling_csv(const std::vector<SolveScalingRow>& rows) {
  std::string out = "algorithm,n,m,accuracy,repeats,seed\n";
  for (const SolveScalingRow& r : rows) {
    out += std::string(selection::to_string(r.algorithm)) + ',' + std::to_string(r.n) + ',' + std::to_string(r.m) +
           ',' + metrics::format_real(r.accuracy) + ',' + std::to_string(r.repeats) + ',' + std::to_string(r.seed) +
           '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::parse_error, "line " + std::to_string(line) + ": bad number '" + text + "'");
  }
  return value;
}

}  // namespace

std::vector<SolveScalingRow> parse_solve_scaling_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> column;
  std::vector<SolveScalingRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (column.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) column[cells[i]] = i;
      for (const char* need : {"algorithm", "n", "m", "accuracy"}) {
        if (!column.contains(need)) {
          throw Error(ErrorCode::parse_error, std::string("grid CSV lacks a '") + need + "' column");
        }
      }
      continue;
    }
    if (cells.size() < column.size()) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": too few columns");
    }
    SolveScalingRow r;
    r.algorithm = selection::parse_algorithm(cells[column["algorithm"]]);
    r.n = parse_number<int>(cells[column["n"]], line_no);
    r.m = parse_number<int>(cells[column["m"]], line_no);
    r.accuracy = parse_number<double>(cells[column["accuracy"]], line_no);
    if (column.contains("repeats")) r.repeats = parse_number<int>(cells[column["repeats"]], line_no);
    if (column.contains("seed")) r.seed = parse_number<std::uint64_t>(cells[column["seed"]], line_no);
    rows.push_back(r);
  }
  return rows;
}

std::vector<FrontierPoint> frontier(const std::vector<SolveScalingRow>& rows, Algorithm algorithm, CostModel model,
                                    const std::vector<std::int64_t>& budgets) {
  struct Cell {
    std::int64_t cost;
    int n;
    int m;
    double accuracy;
  };
  std::vector<Cell> cells;
  std::set<std::pair<int, int>> seen;
  for (const SolveScalingRow& r : rows) {
    if (r.algorithm != algorithm) continue;
    if (!seen.emplace(r.n, r.m).second) {
      throw Error(ErrorCode::invalid_argument, "duplicate grid point n=" + std::to_string(r.n) +
                                                   " m=" + std::to_string(r.m) + " for " +
                                                   std::string(selection::to_string(algorithm)));
    }
    cells.push_back(Cell{cost(model, r.n, r.m), r.n, r.m, r.accuracy});
  }
  if (cells.empty()) {
    throw Error(ErrorCode::empty_grid, "no grid rows for " + std::string(selection::to_string(algorithm)));
  }
  // Strict total order: better accuracy, then smaller cost, larger n, smaller m.
  auto better = [](const Cell& a, const Cell& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.n != b.n) return a.n > b.n;
    return a.m < b.m;
  };

  std::vector<std::int64_t> sweep = budgets;
  if (sweep.empty()) {
    for (const Cell& c : cells) sweep.push_back(c.cost);
  }
  std::sort(sweep.begin(), sweep.end());
  sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());

  std::vector<FrontierPoint> out;
  for (std::int64_t budget : sweep) {
    const Cell* best = nullptr;
    for (const Cell& c : cells) {
      if (c.cost <= budget && (best == nullptr || better(c, *best))) best = &c;
    }
    if (best != nullptr) out.push_back(FrontierPoint{budget, best->n, best->m, best->accuracy});
  }
  return out;
}

std::string frontier_csv(const std::vector<FrontierPoint>& points, Algorithm algorithm, CostModel model) {
  std::string out = "algorithm,cost_model,budget,n,m,accuracy\n";
  for (const FrontierPoint& p : points) {
    out += std::string(selection::to_string(algorithm)) + ',' + std::string(to_string(model)) + ',' +
           std::to_string(p.budget) + ',' + std::to_string(p.best_n) + ',' + std::to_string(p.best_m) + ',' +
           metrics::format_real(p.accuracy) + '\n';
  }
  return out;
}

AuditPair audit_pair_from_json(const json& j, std::size_t line) {
  auto text = [&](std::initializer_list<const char*> names) -> std::string {
    for (const char* name : names) {
      if (j.contains(name) && j[name].is_string()) return j[name].get<std::string>();
    }
    throw Error(ErrorCode::parse_error,
                "pair on line " + std::to_string(line) + " lacks field '" + std::string(*names.begin()) + "'");
  };
  AuditPair p;
  if (j.contains("pair_id")) {
    p.pair_id = j["pair_id"].is_string() ? j["pair_id"].get<std::string>() : j["pair_id"].dump();
  } else {
    p.pair_id = std::to_string(line);
  }
  p.problem = text({"problem", "statement"});
  p.solution = text({"solution", "text"});
  return p;
}

AuditResult audit_dataset(const std::vector<AuditPair>& pairs, int m, ProblemMode mode,
                          orchestrator::Orchestrator& orch, const orchestrator::EndpointConfig& cfg) {
  if (m < 1) throw Error(ErrorCode::invalid_argument, "m must be >= 1");
  AuditResult out;
  out.m = m;
  out.histogram.assign(static_cast<std::size_t>(m) + 1, 0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Problem problem{pairs[i].pair_id, pairs[i].problem, std::nullopt, mode};
    Solution solution;
    solution.problem_id = pairs[i].pair_id;
    solution.text = pairs[i].solution;
    auto records = orch.sample_verifications(problem, solution, m, mode, cfg);
    int sum = 0;
    for (const VerificationRecord& r : records) {
      if (r.status == VerdictStatus::ok && r.verdict) ++sum;
    }
    out.sums.push_back(sum);
    ++out.histogram[static_cast<std::size_t>(sum)];
    if (sum == 0) out.flagged.push_back(i);
  }
  out.quality = orch.quality();
  return out;
}

std::string audit_histogram_csv(const AuditResult& result, std::uint64_t seed) {
  std::string out = "sum,count,m,seed\n";
  for (std::size_t s = 0; s < result.histogram.size(); ++s) {
    out += std::to_string(s) + ',' + std::to_string(result.histogram[s]) + ',' + std::to_string(result.m) + ',' +
           std::to_string(seed) + '\n';
  }
  return out;
}

FilterOutput filter_records(const std::vector<json>& records) {
  std::map<std::string, std::vector<bool>> labels;
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& r = records[i];
    if (!r.contains("problem_id") || !r.contains("label") || r["label"].is_null()) {
      throw Error(ErrorCode::parse_error, "record " + std::to_string(i + 1) + " needs problem_id and label");
    }
    std::string id = r["problem_id"].is_string() ? r["problem_id"].get<std::string>() : r["problem_id"].dump();
    bool label = r["label"].is_boolean() ? r["label"].get<bool>() : r["label"].get<int>() != 0;
    labels[id].push_back(label);
    ids.push_back(std::move(id));
  }
  FilterOutput out;
  out.filter = dataset::filter_training_problems(labels);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (out.filter.kept.contains(ids[i])) {
      out.kept.push_back(records[i]);
    } else if (out.filter.dropped_all_correct.contains(ids[i])) {
      out.dropped_all_correct.push_back(records[i]);
    } else {
      out.dropped_all_wrong.push_back(records[i]);
    }
  }
  return out;
}

std::vector<EnumerateRow> enumerate_specs(const std::vector<simulator::SyntheticProblemSpec>& specs,
                                          const std::vector<Algorithm>& algorithms, const std::vector<int>& n_values,
                                          const std::vector<int>& m_values, double alpha, std::int64_t trials,
                                          std::uint64_t seed, unsigned threads) {
  selection::SelectionConfig config;
  config.alpha = alpha;
  std::vector<EnumerateRow> rows;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    for (Algorithm alg : algorithms) {
      for (int n : n_values) {
        for (int m : m_values) {
          if (alg == Algorithm::sampling_search && m == 0) continue;
          EnumerateRow row;
          row.spec = specs[s].name;
          row.algorithm = alg;
          row.n = n;
          row.m = m;
          row.seed = seed;
          row.exact = simulator::enumerate_success(specs[s], alg, n, m, config).exact_success_probability;
          if (trials > 0) {
            std::uint64_t cell_seed = derive_seed({seed, s, static_cast<std::uint64_t>(alg),
                                                   static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m)});
            row.monte_carlo = simulator::monte_carlo_success(specs[s], alg, n, m, trials, cell_seed, config, threads);
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

std::string enumerate_csv(const std::vector<EnumerateRow>& rows) {
  std::string out = "spec,algorithm,n,m,exact,exact_fraction,mc_estimate,mc_standard_error,trials,seed\n";
  for (const EnumerateRow& r : rows) {
    out += r.spec + ',' + std::string(selection::to_string(r.algorithm)) + ',' + std::to_string(r.n) + ',' +
           std::to_string(r.m) + ',' + metrics::format_real(r.exact.convert_to<double>()) + ',' +
           simulator::to_string(r.exact) + ',';
    if (r.monte_carlo) {
      out += metrics::format_real(r.monte_carlo->estimate) + ',' + metrics::format_real(r.monte_carlo->standard_error) +
             ',' + std::to_string(r.monte_carlo->trials);
    } else {
      out += ",,0";
    }
    out += ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<SolveScalingRow> enumeration_grid(const simulator::SyntheticProblemSpec& spec, Algorithm algorithm,
                                              const std::vector<int>& n_values, const std::vector<int>& m_values,
                                              double alpha) {
  selection::SelectionConfig config;
  config.alpha = alpha;
  std::vector<SolveScalingRow> rows;
  for (int n : n_values) {
    for (int m : m_values) {
      if (algorithm == Algorithm::sampling_search && m == 0) continue;
      auto result = simulator::enumerate_success(spec, algorithm, n, m, config);
      rows.push_back(SolveScalingRow{algorithm, n, m, result.probability(), 0, 0});
    }
  }
  return rows;
}

}  // namespace vscale::cli
