#include "vscale/orchestrator.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "vscale/dataset.hpp"
#include "vscale/parallel.hpp"

namespace vscale::orchestrator {

using nlohmann::json;

namespace {

std::string join_indices(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string trim_copy(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string last_nonempty_line(std::string_view text) {
  std::size_t end = text.size();
  while (end > 0) {
    std::size_t nl = text.rfind('\n', end - 1);
    std::size_t begin = nl == std::string_view::npos ? 0 : nl + 1;
    std::string line = trim_copy(text.substr(begin, end - begin));
    if (!line.empty()) return line;
    if (nl == std::string_view::npos) break;
    end = nl;
  }
  return {};
}

SampleKey key_for(Role role, const EndpointConfig& cfg, const std::string& prompt, int index) {
  return SampleKey{role, cfg.model_name, prompt_digest(prompt, cfg.temperature), index};
}

std::string render_summarizer_prompt(const std::string& tmpl, const Problem& problem, const Solution& solution) {
  dataset::PromptTemplate t{problem.mode, tmpl};
  return dataset::render_prompt(t, problem.statement, solution.text);
}

std::string verifier_prompt(const Problem& problem, std::string_view view, ProblemMode mode) {
  return dataset::render_prompt(dataset::PromptTemplate::builtin(mode), problem.statement, view);
}

}  // namespace

SamplingIncompleteError::SamplingIncompleteError(std::string problem_id, Role role, std::vector<int> missing,
                                                 const std::string& cause)
    : EndpointError(Kind::transient, std::string(to_string(role)) + " samples [" + join_indices(missing) +
                                         "] of problem '" + problem_id + "' failed: " + cause),
      problem_id_(std::move(problem_id)),
      role_(role),
      missing_(std::move(missing)) {}

std::string render_solver_prompt(const SolverSettings& settings, const Problem& problem) {
  if (trim_copy(problem.statement).empty()) {
    throw Error(ErrorCode::empty_field, "problem '" + problem.id + "' has an empty statement");
  }
  const std::string_view placeholder = "${problem}";
  std::string out;
  std::string_view body = settings.prompt_template;
  std::size_t pos = 0;
  while (true) {
    std::size_t hit = body.find(placeholder, pos);
    out.append(body.substr(pos, hit == std::string_view::npos ? std::string_view::npos : hit - pos));
    if (hit == std::string_view::npos) break;
    out.append(problem.statement);
    pos = hit + placeholder.size();
  }
  return out;
}

Solution make_solution(const Problem& problem, int index, std::string_view completion,
                       const SolverSettings& settings) {
  std::string summary;
  bool has_open = !settings.think_open.empty() && completion.find(settings.think_open) != std::string_view::npos;
  std::size_t close = settings.think_close.empty() ? std::string_view::npos : completion.find(settings.think_close);
  if (!has_open && close != std::string_view::npos) {
    // Some servers put the opening tag in the prompt, so only the close tag
    // reaches the completion.
    summary = std::string(completion.substr(close + settings.think_close.size()));
  } else {
    summary = strip_think(completion, settings.think_open, settings.think_close);
  }
  summary = trim_copy(summary);

  Solution s;
  s.problem_id = problem.id;
  s.index = index;
  s.length = measure_length(summary);
  if (auto raw = extract_final_answer(summary)) {
    try {
      s.canonical_answer = canonicalize_answer(*raw);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::empty_answer) throw;
    }
  }
  s.text = std::move(summary);
  if (problem.mode == ProblemMode::final_answer && problem.reference_answer) {
    s.label = dataset::label_solution(problem, s);
  }
  return s;
}

VerificationRecord make_verification(const Solution& solution, std::string_view completion, bool keep_trajectory) {
  VerificationRecord r;
  r.problem_id = solution.problem_id;
  r.solution_index = solution.index;
  if (keep_trajectory) r.trajectory = std::string(completion);
  try {
    auto parsed = dataset::parse_verdict_line(completion);
    r.verdict = parsed.verdict;
    r.raw_last_line = trim_copy(parsed.line);
    r.status = VerdictStatus::ok;
  } catch (const Error& e) {
    r.raw_last_line = last_nonempty_line(completion);
    if (e.code() == ErrorCode::no_verdict) {
      r.status = VerdictStatus::no_verdict;
    } else if (e.code() == ErrorCode::malformed_verdict) {
      r.status = VerdictStatus::malformed;
    } else {
      throw;
    }
  }
  return r;
}

Orchestrator::Orchestrator(SampleCache& cache, ChatTransport& transport)
    : cache_(cache), transport_(transport), sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

void Orchestrator::set_summarizer(EndpointConfig cfg, std::string prompt_template) {
  cfg.validate();
  summarizer_ = std::move(cfg);
  summarizer_template_ = std::move(prompt_template);
}

QualityReport Orchestrator::quality() const {
  return QualityReport{q_requested_.load(), q_parsed_.load(), q_no_verdict_.load(), q_malformed_.load()};
}

std::string Orchestrator::call_with_retries(const EndpointConfig& cfg, const std::string& prompt, int sample_index) {
  std::optional<std::uint64_t> seed;
  if (cfg.seed) seed = *cfg.seed + static_cast<std::uint64_t>(sample_index);
  std::chrono::milliseconds delay = cfg.backoff_base;
  for (int attempt = 0;; ++attempt) {
    try {
      requests_.fetch_add(1);
      return transport_.complete(cfg, prompt, seed);
    } catch (const EndpointError& e) {
      if (e.kind() == EndpointError::Kind::permanent || attempt >= cfg.max_retries) throw;
    }
    sleeper_(std::min(delay, cfg.backoff_cap));
    delay = std::min(delay * 2, cfg.backoff_cap);
  }
}

std::vector<std::optional<std::string>> Orchestrator::fetch(Role role, const EndpointConfig& cfg,
                                                            const std::string& prompt, int count,
                                                            const std::string& problem_id) {
  std::vector<std::optional<std::string>> out(static_cast<std::size_t>(count));
  std::vector<int> misses;
  for (int i = 0; i < count; ++i) {
    out[i] = cache_.get(key_for(role, cfg, prompt, i));
    if (!out[i]) misses.push_back(i);
  }
  if (misses.empty() || offline_) return out;
  cfg.validate();

  std::mutex failure_mutex;
  std::vector<int> failed;
  std::string first_cause;
  parallel_for(misses.size(), static_cast<unsigned>(cfg.max_in_flight), [&](std::size_t k) {
    int index = misses[k];
    try {
      std::string content = call_with_retries(cfg, prompt, index);
      cache_.put(key_for(role, cfg, prompt, index), content);
      out[index] = std::move(content);
    } catch (const EndpointError& e) {
      std::lock_guard lock(failure_mutex);
      failed.push_back(index);
      if (first_cause.empty()) first_cause = e.what();
    }
  });
  if (!failed.empty()) {
    std::sort(failed.begin(), failed.end());
    std::ofstream gaps(cache_.dir() / "gaps.jsonl", std::ios::app);
    gaps << json{{"problem_id", problem_id}, {"role", to_string(role)}, {"model", cfg.model_name},
                 {"missing", failed}, {"error", first_cause}}
                .dump()
         << '\n';
    throw SamplingIncompleteError(problem_id, role, failed, first_cause);
  }
  return out;
}

std::vector<Solution> Orchestrator::sample_solutions(const Problem& problem, int n, const EndpointConfig& cfg) {
  if (n < 0) throw Error(ErrorCode::invalid_argument, "n must be >= 0");
  std::string prompt = render_solver_prompt(solver_settings_, problem);
  auto completions = fetch(Role::solver, cfg, prompt, n, problem.id);
  std::vector<Solution> out;
  for (int i = 0; i < n; ++i) {
    if (completions[i]) out.push_back(make_solution(problem, i, *completions[i], solver_settings_));
  }
  return out;
}

std::string Orchestrator::verifier_view(const Problem& problem, const Solution& solution) {
  if (!summarizer_) return solution.text;
  std::string prompt = render_summarizer_prompt(summarizer_template_, problem, solution);
  auto got = fetch(Role::summarizer, *summarizer_, prompt, 1, problem.id);
  if (!got[0]) {
    throw SamplingIncompleteError(problem.id, Role::summarizer, {solution.index}, "summary not cached");
  }
  return trim_copy(*got[0]);
}

std::vector<VerificationRecord> Orchestrator::sample_verifications(const Problem& problem, const Solution& solution,
                                                                   int m, ProblemMode mode,
                                                                   const EndpointConfig& cfg) {
  if (m < 0) throw Error(ErrorCode::invalid_argument, "m must be >= 0");
  std::string prompt = verifier_prompt(problem, verifier_view(problem, solution), mode);
  auto completions = fetch(Role::verifier, cfg, prompt, m, problem.id);
  std::vector<VerificationRecord> out;
  for (int j = 0; j < m; ++j) {
    if (!completions[j]) continue;
    VerificationRecord r = make_verification(solution, *completions[j], keep_trajectories_);
    q_requested_.fetch_add(1);
    switch (r.status) {
      case VerdictStatus::ok: q_parsed_.fetch_add(1); break;
      case VerdictStatus::no_verdict: q_no_verdict_.fetch_add(1); break;
      case VerdictStatus::malformed: q_malformed_.fetch_add(1); break;
    }
    out.push_back(std::move(r));
  }
  return out;
}

VerificationPanel build_panel(const SampleCache& cache, const std::vector<Problem>& problems, int n, int m,
                              const PanelSources& sources) {
  if (n < 1 || m < 0) throw Error(ErrorCode::invalid_argument, "build_panel needs n >= 1 and m >= 0");
  // Extra sample indices looked at when some verifications had no verdict.
  const int scan_limit = 2 * m + 16;

  VerificationPanel panel;
  panel.m_max = m;
  std::vector<PanelDeficit> deficits;
  for (const Problem& problem : problems) {
    if (problem.mode != ProblemMode::final_answer) {
      throw Error(ErrorCode::invalid_argument, "problem '" + problem.id + "' is a proof problem; panels need labels");
    }
    if (!problem.reference_answer) {
      throw Error(ErrorCode::missing_reference, "problem '" + problem.id + "' has no reference answer");
    }
    PanelProblem pp;
    pp.problem_id = problem.id;
    pp.reference_answer = canonicalize_answer(*problem.reference_answer);

    std::string solver_prompt = render_solver_prompt(sources.solver_settings, problem);
    int have_solutions = 0;
    for (int i = 0; i < n; ++i) {
      auto completion = cache.get(key_for(Role::solver, sources.solver, solver_prompt, i));
      if (!completion) continue;
      ++have_solutions;
      Solution s = make_solution(problem, i, *completion, sources.solver_settings);

      std::string view = s.text;
      if (sources.summarizer) {
        std::string sp = render_summarizer_prompt(sources.summarizer_template, problem, s);
        auto summary = cache.get(key_for(Role::summarizer, *sources.summarizer, sp, 0));
        if (!summary) {
          deficits.push_back({problem.id, i, 0, m});
          continue;
        }
        view = trim_copy(*summary);
      }
      std::string vp = verifier_prompt(problem, view, problem.mode);

      PanelSolution ps;
      ps.index = i;
      ps.label = s.label.value_or(false);
      ps.answer = s.canonical_answer;
      ps.length = s.length;
      for (int j = 0; j < scan_limit && static_cast<int>(ps.verdicts.size()) < m; ++j) {
        auto completion_v = cache.get(key_for(Role::verifier, sources.verifier, vp, j));
        if (!completion_v) continue;
        VerificationRecord r = make_verification(s, *completion_v, false);
        if (r.status == VerdictStatus::ok) ps.verdicts.push_back(r.verdict ? 1 : 0);
      }
      if (static_cast<int>(ps.verdicts.size()) < m) {
        deficits.push_back({problem.id, i, static_cast<int>(ps.verdicts.size()), m});
        continue;
      }
      pp.solutions.push_back(std::move(ps));
    }
    if (have_solutions < n) deficits.push_back({problem.id, -1, have_solutions, n});
    panel.problems.push_back(std::move(pp));
  }
  if (!deficits.empty()) throw IncompletePanelError(std::move(deficits));
  panel.validate();
  return panel;
}

}  // namespace vscale::orchestrator
