#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vscale/chat.hpp"
#include "vscale/core.hpp"
#include "vscale/panel.hpp"
#include "vscale/sample_cache.hpp"

namespace vscale::orchestrator {

inline constexpr std::string_view kDefaultSolverTemplate =
    "${problem}\n\nPlease reason step by step, and put your final answer within \\boxed{}.";

inline constexpr std::string_view kDefaultSummarizerTemplate =
    "Rewrite the following solution to a math problem as a concise summary that keeps every step needed to "
    "reach its final answer. End with the same final answer.\n\n**Problem**\n\n${problem}\n\n**Solution**\n\n"
    "${solution}";

struct SolverSettings {
  std::string prompt_template{kDefaultSolverTemplate};
  std::string think_open = "<think>";
  std::string think_close = "</think>";
};

/// Everything that determines the cache keys of a panel.
struct PanelSources {
  EndpointConfig solver;
  EndpointConfig verifier;
  SolverSettings solver_settings;
  // When set, verifiers see the summarizer's rewrite instead of the
  // solution summary.
  std::optional<EndpointConfig> summarizer;
  std::string summarizer_template{kDefaultSummarizerTemplate};
};

/// Raised when some samples could not be obtained after all retries.
/// Samples that succeeded are already cached.
class SamplingIncompleteError : public EndpointError {
 public:
  SamplingIncompleteError(std::string problem_id, Role role, std::vector<int> missing, const std::string& cause);
  const std::string& problem_id() const noexcept { return problem_id_; }
  Role role() const noexcept { return role_; }
  const std::vector<int>& missing() const noexcept { return missing_; }

 private:
  std::string problem_id_;
  Role role_;
  std::vector<int> missing_;
};

struct QualityReport {
  std::int64_t requested = 0;
  std::int64_t parsed = 0;
  std::int64_t no_verdict = 0;
  std::int64_t malformed = 0;
};

std::string render_solver_prompt(const SolverSettings& settings, const Problem& problem);

/// Turns a raw solver completion into a Solution: removes the think section,
/// extracts and canonicalizes the final answer, measures the summary, and
/// labels it when the problem has a reference answer.
Solution make_solution(const Problem& problem, int index, std::string_view completion,
                       const SolverSettings& settings);

/// Parses one verifier completion; never throws on a bad verdict, the
/// status field says what happened instead.
VerificationRecord make_verification(const Solution& solution, std::string_view completion,
                                     bool keep_trajectory);

class Orchestrator {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  Orchestrator(SampleCache& cache, ChatTransport& transport);

  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }
  void set_keep_trajectories(bool keep) { keep_trajectories_ = keep; }
  void set_solver_settings(SolverSettings settings) { solver_settings_ = std::move(settings); }
  void set_summarizer(EndpointConfig cfg, std::string prompt_template = std::string(kDefaultSummarizerTemplate));
  void set_offline(bool offline) { offline_ = offline; }

  /// Samples indices 0..n-1. Cached samples are reused; misses are fetched
  /// with at most cfg.max_in_flight concurrent requests.
  std::vector<Solution> sample_solutions(const Problem& problem, int n, const EndpointConfig& cfg);

  /// Samples m verifications of one solution. Records with no parsable
  /// verdict are returned with a non-ok status.
  std::vector<VerificationRecord> sample_verifications(const Problem& problem, const Solution& solution, int m,
                                                       ProblemMode mode, const EndpointConfig& cfg);

  /// Text the verifier sees for `solution`.
  std::string verifier_view(const Problem& problem, const Solution& solution);

  std::int64_t requests_issued() const noexcept { return requests_.load(); }
  QualityReport quality() const;

 private:
  std::vector<std::optional<std::string>> fetch(Role role, const EndpointConfig& cfg, const std::string& prompt,
                                                int count, const std::string& problem_id);
  std::string call_with_retries(const EndpointConfig& cfg, const std::string& prompt, int sample_index);

  SampleCache& cache_;
  ChatTransport& transport_;
  Sleeper sleeper_;
  bool keep_trajectories_ = false;
  bool offline_ = false;
  SolverSettings solver_settings_;
  std::optional<EndpointConfig> summarizer_;
  std::string summarizer_template_;
  std::atomic<std::int64_t> requests_{0};
  std::atomic<std::int64_t> q_requested_{0}, q_parsed_{0}, q_no_verdict_{0}, q_malformed_{0};
};

/// Assembles a panel purely from cached completions. For each solution the
/// first m verifications with a valid verdict are used, scanning sample
/// indices upward. Throws IncompletePanelError listing every gap and
/// MissingReference for problems without a reference answer.
VerificationPanel build_panel(const SampleCache& cache, const std::vector<Problem>& problems, int n, int m,
                              const PanelSources& sources);

}  // namespace vscale::orchestrator
