#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "CLI11.hpp"
#include "vscale/cli.hpp"
#include "vscale/records.hpp"

namespace vscale::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using selection::Algorithm;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string cache_dir = ".vscale-cache";
  std::string out;
  unsigned threads = default_threads();
};

struct EndpointOptions {
  std::string endpoint = "http://127.0.0.1:8000/v1";
  std::string model;
  double temperature = 0.6;
  int max_tokens = 32768;
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_s = 600;
  int max_in_flight = 8;
  int max_retries = 4;

  orchestrator::EndpointConfig config() const {
    orchestrator::EndpointConfig c;
    c.base_url = endpoint;
    c.model_name = model;
    c.temperature = temperature;
    c.max_tokens = max_tokens;
    c.api_key_env_var = api_key_env;
    c.request_timeout = std::chrono::seconds(timeout_s);
    c.max_in_flight = max_in_flight;
    c.max_retries = max_retries;
    return c;
  }
};

void add_endpoint_options(CLI::App* cmd, EndpointOptions& o, const std::string& prefix = "") {
  cmd->add_option("--" + prefix + "endpoint", o.endpoint, "Base URL of the chat-completions API")
      ->capture_default_str();
  cmd->add_option("--" + prefix + "model", o.model, "Model name");
  cmd->add_option("--" + prefix + "temperature", o.temperature, "Sampling temperature")->capture_default_str();
  cmd->add_option("--" + prefix + "max-tokens", o.max_tokens, "Completion token limit")->capture_default_str();
  cmd->add_option("--" + prefix + "api-key-env", o.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  cmd->add_option("--" + prefix + "timeout", o.timeout_s, "Request timeout in seconds")->capture_default_str();
  cmd->add_option("--" + prefix + "max-in-flight", o.max_in_flight, "Concurrent request limit")
      ->capture_default_str();
  cmd->add_option("--" + prefix + "max-retries", o.max_retries, "Retries for transient failures")
      ->capture_default_str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  if (fs::path parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  out << content;
}

void write_jsonl_file(const fs::path& path, const std::vector<json>& values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  records::write_jsonl(out, values);
}

fs::path require_out_dir(const GlobalOptions& g, const std::string& command) {
  if (g.out.empty() || g.out == "-") {
    throw Error(ErrorCode::invalid_argument, command + " writes several files; pass --out DIR");
  }
  fs::create_directories(g.out);
  return g.out;
}

std::vector<Algorithm> parse_algorithms(const std::vector<std::string>& names) {
  std::vector<Algorithm> out;
  if (names.empty()) return {std::begin(selection::kAllAlgorithms), std::end(selection::kAllAlgorithms)};
  for (const std::string& name : names) out.push_back(selection::parse_algorithm(name));
  return out;
}

void print_deficits(const IncompletePanelError& e) {
  std::cerr << "panel is incomplete:\n";
  for (const PanelDeficit& d : e.deficits()) {
    if (d.solution_index < 0) {
      std::cerr << "  problem " << d.problem_id << ": " << d.have << " of " << d.need << " solutions\n";
    } else {
      std::cerr << "  problem " << d.problem_id << " solution " << d.solution_index << ": " << d.have << " of "
                << d.need << " verdicts\n";
    }
  }
}

json quality_json(const orchestrator::QualityReport& q) {
  return json{{"requested", q.requested}, {"parsed", q.parsed}, {"no_verdict", q.no_verdict},
              {"malformed", q.malformed}};
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Verification-scaling toolkit: sample, select, measure and simulate"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML or INI file with option values");

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--cache-dir", g.cache_dir, "Completion cache directory")->capture_default_str();
  app.add_option("--out", g.out, "Output file or directory (default: stdout)");
  app.add_option("--threads", g.threads, "Worker threads for analysis")->capture_default_str();

  // sample
  auto* sample = app.add_subcommand("sample", "Sample solutions and verifications into the cache and build a panel");
  std::string problems_path;
  EndpointOptions solver_ep, verifier_ep, summarizer_ep;
  int n = 16, m = 64;
  std::string mode_text;
  bool offline = false, keep_trajectories = false;
  sample->add_option("--problems", problems_path, "Problems JSONL")->required();
  add_endpoint_options(sample, solver_ep);
  add_endpoint_options(sample, verifier_ep, "verifier-");
  add_endpoint_options(sample, summarizer_ep, "summarizer-");
  sample->add_option("--n", n, "Solutions per problem")->capture_default_str();
  sample->add_option("--m", m, "Verifications per solution")->capture_default_str();
  sample->add_option("--mode", mode_text, "Verification prompt: final_answer or proof (default: per problem)");
  sample->add_flag("--offline", offline, "Use cached completions only");
  sample->add_flag("--keep-trajectories", keep_trajectories, "Store full verifier responses");

  // verify-scaling
  auto* verify = app.add_subcommand("verify-scaling", "Verification metrics against the number of verifications");
  std::string panel_path;
  std::vector<int> m_values, n_values;
  int repeats = 2048;
  std::string scatter_path;
  int scatter_m = 0;
  verify->add_option("--panel", panel_path, "Panel JSONL")->required();
  verify->add_option("--m-values", m_values, "Verification counts (default: 1..m_max)")->delimiter(',');
  verify->add_option("--repeats", repeats, "Bootstrap repeats")->capture_default_str();
  verify->add_option("--scatter", scatter_path, "Also write the pass-rate/failure scatter CSV here");
  verify->add_option("--scatter-m", scatter_m, "Verifications per solution for the scatter (default: m_max)");

  // solve-scaling
  auto* solve = app.add_subcommand("solve-scaling", "Solve rate of each selection algorithm over an (n, m) grid");
  std::vector<std::string> algorithm_names;
  double alpha = 0.1;
  solve->add_option("--panel", panel_path, "Panel JSONL")->required();
  solve->add_option("--algorithms", algorithm_names, "Algorithms (default: all)")->delimiter(',');
  solve->add_option("--n-values", n_values, "Solution counts (default: 2,4,..,256 within the panel)")
      ->delimiter(',');
  solve->add_option("--m-values", m_values, "Verification counts (default: 0..64 within the panel)")
      ->delimiter(',');
  solve->add_option("--alpha", alpha, "Penalty weight of pessimistic selection")->capture_default_str();
  solve->add_option("--repeats", repeats, "Bootstrap repeats")->capture_default_str();

  // frontier
  auto* front = app.add_subcommand("frontier", "Compute-optimal (n, m) for each budget");
  std::string grid_path, algorithm_name = "pessimistic", cost_model_text = "n_times_m_plus_1";
  std::vector<std::int64_t> budgets;
  front->add_option("--grid", grid_path, "solve-scaling CSV")->required();
  front->add_option("--algorithm", algorithm_name, "Algorithm column to use")->capture_default_str();
  front->add_option("--cost-model", cost_model_text, "n_times_m_plus_1 or m_times_n_plus_1")
      ->capture_default_str();
  front->add_option("--budgets", budgets, "Budgets to sweep (default: every grid cost)")->delimiter(',');

  // filter-data
  auto* filter = app.add_subcommand("filter-data", "Drop problems whose solutions are all correct or all wrong");
  std::string labeled_path, training_problems;
  filter->add_option("--labeled", labeled_path, "Labeled solutions JSONL")->required();
  filter->add_option("--problems", training_problems, "Problems JSONL; also writes training.jsonl");

  // audit-dataset
  auto* audit = app.add_subcommand("audit-dataset", "Score problem/solution pairs with repeated verification");
  std::string pairs_path;
  int audit_m = 8;
  audit->add_option("--pairs", pairs_path, "Pairs JSONL with problem and solution fields")->required();
  audit->add_option("--m", audit_m, "Verifications per pair")->capture_default_str();
  add_endpoint_options(audit, verifier_ep);
  audit->add_option("--mode", mode_text, "final_answer or proof")->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic panel drawn from a spec");
  std::string spec_path, spec_name;
  int sim_problems = 30;
  simulate->add_option("--spec", spec_path, "Spec JSONL")->required();
  simulate->add_option("--spec-name", spec_name, "Spec to use (default: first)");
  simulate->add_option("--problems", sim_problems, "Number of problems")->capture_default_str();
  simulate->add_option("--n", n, "Solutions per problem")->capture_default_str();
  simulate->add_option("--m", m, "Verifications per solution")->capture_default_str();

  // enumerate
  auto* enumerate = app.add_subcommand("enumerate", "Exact success probabilities of each algorithm on small specs");
  std::int64_t trials = 0;
  enumerate->add_option("--spec", spec_path, "Spec JSONL")->required();
  enumerate->add_option("--algorithms", algorithm_names, "Algorithms (default: all)")->delimiter(',');
  enumerate->add_option("--n-values", n_values, "Solution counts")->delimiter(',')->required();
  enumerate->add_option("--m-values", m_values, "Verification counts")->delimiter(',')->required();
  enumerate->add_option("--alpha", alpha, "Penalty weight of pessimistic selection")->capture_default_str();
  enumerate->add_option("--trials", trials, "Monte Carlo trials per cell for comparison (0: none)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sample) {
      auto problems = records::read_problems(problems_path);
      if (!mode_text.empty()) {
        ProblemMode mode = parse_problem_mode(mode_text);
        for (Problem& p : problems) p.mode = mode;
      }
      if (verifier_ep.model.empty()) verifier_ep.model = solver_ep.model;
      fs::path out_dir = require_out_dir(g, "sample");

      orchestrator::SampleCache cache(g.cache_dir);
      orchestrator::HttpChatTransport transport;
      orchestrator::Orchestrator orch(cache, transport);
      orch.set_offline(offline);
      orch.set_keep_trajectories(keep_trajectories);
      orchestrator::PanelSources sources;
      sources.solver = solver_ep.config();
      sources.verifier = verifier_ep.config();
      if (!summarizer_ep.model.empty()) {
        sources.summarizer = summarizer_ep.config();
        orch.set_summarizer(*sources.summarizer);
      }

      std::vector<json> solution_rows, verification_rows;
      int failures = 0;
      for (const Problem& problem : problems) {
        try {
          auto solutions = orch.sample_solutions(problem, n, sources.solver);
          for (const Solution& s : solutions) {
            solution_rows.push_back(records::to_json(s));
            for (const VerificationRecord& r : orch.sample_verifications(problem, s, m, problem.mode, sources.verifier)) {
              verification_rows.push_back(records::to_json(r));
            }
          }
        } catch (const orchestrator::SamplingIncompleteError& e) {
          ++failures;
          std::cerr << "warning: " << e.what() << '\n';
        }
      }
      write_jsonl_file(out_dir / "solutions.jsonl", solution_rows);
      write_jsonl_file(out_dir / "verifications.jsonl", verification_rows);
      json quality = quality_json(orch.quality());
      quality["requests"] = orch.requests_issued();
      write_output((out_dir / "quality.json").string(), quality.dump(2) + "\n");

      bool panel_ready = std::all_of(problems.begin(), problems.end(), [](const Problem& p) {
        return p.mode == ProblemMode::final_answer && p.reference_answer.has_value();
      });
      if (!panel_ready) {
        std::cerr << "note: panel skipped (needs final-answer problems with reference answers)\n";
      } else {
        try {
          VerificationPanel panel = orchestrator::build_panel(cache, problems, n, m, sources);
          std::ofstream out(out_dir / "panel.jsonl", std::ios::binary | std::ios::trunc);
          write_panel(out, panel);
        } catch (const IncompletePanelError& e) {
          print_deficits(e);
          return 3;
        }
      }
      return failures == 0 ? 0 : 3;
    }

    if (*verify) {
      VerificationPanel panel = read_panel_file(panel_path);
      if (m_values.empty()) {
        m_values.resize(static_cast<std::size_t>(panel.m_max));
        std::iota(m_values.begin(), m_values.end(), 1);
      }
      write_output(g.out, cmd_verify_scaling(panel, m_values, repeats, g.seed, g.threads));
      if (!scatter_path.empty()) {
        auto points = metrics::difficulty_failure_scatter(panel, scatter_m > 0 ? scatter_m : panel.m_max);
        std::string csv = "problem_id,pass_rate,failures\n";
        for (const auto& p : points) {
          csv += p.problem_id + ',' + metrics::format_real(p.pass_rate) + ',' + std::to_string(p.failures) + '\n';
        }
        write_output(scatter_path, csv);
      }
      return 0;
    }

    if (*solve) {
      VerificationPanel panel = read_panel_file(panel_path);
      BudgetGrid grid = BudgetGrid::defaults();
      bool explicit_n = !n_values.empty(), explicit_m = !m_values.empty();
      if (explicit_n) grid.n_values = n_values;
      if (explicit_m) grid.m_values = m_values;
      BudgetGrid clipped = grid.clipped_to(panel);
      if (!explicit_n) grid.n_values = clipped.n_values;
      if (!explicit_m) grid.m_values = clipped.m_values;
      auto rows = solve_scaling(panel, parse_algorithms(algorithm_names), grid, alpha, repeats, g.seed, g.threads);
      write_output(g.out, solve_scaling_csv(rows));
      return 0;
    }

    if (*front) {
      std::ifstream in(grid_path, std::ios::binary);
      if (!in) throw Error(ErrorCode::io_error, "cannot read " + grid_path);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      CostModel model = parse_cost_model(cost_model_text);
      Algorithm algorithm = selection::parse_algorithm(algorithm_name);
      auto points = frontier(parse_solve_scaling_csv(text), algorithm, model, budgets);
      if (points.empty()) std::cerr << "warning: every budget is below the cheapest grid point\n";
      write_output(g.out, frontier_csv(points, algorithm, model));
      return 0;
    }

    if (*filter) {
      fs::path out_dir = require_out_dir(g, "filter-data");
      auto records_in = records::read_jsonl_file(labeled_path);
      FilterOutput result = filter_records(records_in);
      write_jsonl_file(out_dir / "kept.jsonl", result.kept);
      write_jsonl_file(out_dir / "dropped_all_correct.jsonl", result.dropped_all_correct);
      write_jsonl_file(out_dir / "dropped_all_wrong.jsonl", result.dropped_all_wrong);
      std::vector<json> report;
      for (const auto& [set, disposition] :
           {std::pair{&result.filter.kept, "kept"}, std::pair{&result.filter.dropped_all_correct, "dropped_all_correct"},
            std::pair{&result.filter.dropped_all_wrong, "dropped_all_wrong"}}) {
        for (const std::string& id : *set) report.push_back(json{{"problem_id", id}, {"disposition", disposition}});
      }
      std::sort(report.begin(), report.end(),
                [](const json& a, const json& b) { return a["problem_id"] < b["problem_id"]; });
      write_jsonl_file(out_dir / "report.jsonl", report);
      if (!training_problems.empty()) {
        std::vector<Solution> solutions;
        for (const json& j : records_in) solutions.push_back(records::solution_from_json(j));
        auto exported = dataset::build_training_examples(records::read_problems(training_problems), solutions);
        std::vector<json> rows;
        for (const auto& ex : exported.examples) rows.push_back(records::to_json(ex));
        write_jsonl_file(out_dir / "training.jsonl", rows);
      }
      return 0;
    }

    if (*audit) {
      fs::path out_dir = require_out_dir(g, "audit-dataset");
      ProblemMode mode = mode_text.empty() ? ProblemMode::final_answer : parse_problem_mode(mode_text);
      auto raw = records::read_jsonl_file(pairs_path);
      std::vector<AuditPair> pairs;
      for (std::size_t i = 0; i < raw.size(); ++i) pairs.push_back(audit_pair_from_json(raw[i], i + 1));
      orchestrator::SampleCache cache(g.cache_dir);
      orchestrator::HttpChatTransport transport;
      orchestrator::Orchestrator orch(cache, transport);
      AuditResult result = audit_dataset(pairs, audit_m, mode, orch, verifier_ep.config());
      write_output((out_dir / "histogram.csv").string(), audit_histogram_csv(result, g.seed));
      std::vector<json> flagged;
      for (std::size_t i : result.flagged) {
        json row = raw[i];
        row["verification_sum"] = 0;
        flagged.push_back(std::move(row));
      }
      write_jsonl_file(out_dir / "flagged.jsonl", flagged);
      write_output((out_dir / "quality.json").string(), quality_json(result.quality).dump(2) + "\n");
      return 0;
    }

    if (*simulate) {
      auto specs = simulator::read_specs(spec_path);
      if (specs.empty()) throw Error(ErrorCode::invalid_spec, "no specs in " + spec_path);
      const simulator::SyntheticProblemSpec* spec = &specs.front();
      if (!spec_name.empty()) {
        auto it = std::find_if(specs.begin(), specs.end(), [&](const auto& s) { return s.name == spec_name; });
        if (it == specs.end()) throw Error(ErrorCode::invalid_argument, "no spec named '" + spec_name + "'");
        spec = &*it;
      }
      VerificationPanel panel = simulator::simulate_panel(*spec, sim_problems, n, m, g.seed);
      std::ostringstream out;
      write_panel(out, panel);
      write_output(g.out, out.str());
      return 0;
    }

    if (*enumerate) {
      auto specs = simulator::read_specs(spec_path);
      auto rows = enumerate_specs(specs, parse_algorithms(algorithm_names), n_values, m_values, alpha, trials,
                                  g.seed, g.threads);
      write_output(g.out, enumerate_csv(rows));
      return 0;
    }
  } catch (const IncompletePanelError& e) {
    print_deficits(e);
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace vscale::cli
