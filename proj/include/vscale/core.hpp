#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "vscale/error.hpp"

namespace vscale {

enum class ProblemMode { final_answer, proof };

std::string_view to_string(ProblemMode mode);
ProblemMode parse_problem_mode(std::string_view text);

/// Normalized final answer. Only `canonicalize_answer` and
/// `CanonicalAnswer::trusted` produce values, so every instance is already
/// in normal form.
class CanonicalAnswer {
 public:
  /// Wraps a string that the caller guarantees is already canonical
  /// (e.g. read back from a file this library wrote).
  static CanonicalAnswer trusted(std::string value) { return CanonicalAnswer(std::move(value)); }

  const std::string& value() const noexcept { return value_; }

  friend bool operator==(const CanonicalAnswer&, const CanonicalAnswer&) = default;
  friend auto operator<=>(const CanonicalAnswer&, const CanonicalAnswer&) = default;

 private:
  explicit CanonicalAnswer(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

struct Problem {
  std::string id;
  std::string statement;
  std::optional<std::string> reference_answer;
  ProblemMode mode = ProblemMode::final_answer;
};

struct Solution {
  std::string problem_id;
  int index = 0;
  // Summary part only; the think section is removed before storage.
  std::string text;
  std::optional<CanonicalAnswer> canonical_answer;
  std::int64_t length = 0;
  std::optional<bool> label;
};

enum class VerdictStatus { ok, no_verdict, malformed };

std::string_view to_string(VerdictStatus status);

struct VerificationRecord {
  std::string problem_id;
  int solution_index = 0;
  std::optional<std::string> trajectory;
  bool verdict = false;
  std::string raw_last_line;
  // Records whose response carried no parsable verdict are kept for the
  // quality report but never enter a panel.
  VerdictStatus status = VerdictStatus::ok;
};

/// Normalizes a raw final answer: strips `$`, `\boxed{}`, `\text{}`,
/// `\left`/`\right`, thousands separators and whitespace, rewrites
/// `\frac{a}{b}` as `a/b`, reduces integer ratios, drops a leading `+` and
/// redundant zeros, and lower-cases answers made only of words.
/// Throws Error(empty_answer) when nothing is left.
CanonicalAnswer canonicalize_answer(std::string_view raw);

/// Equal canonical strings, or both parse as exact rationals of equal value.
bool answers_equal(const CanonicalAnswer& a, const CanonicalAnswer& b);

/// Exact rational value of a canonical answer, when it is an integer,
/// fraction or finite decimal literal that fits in 64 bits.
struct AnswerRational {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;  // > 0, gcd(|numerator|, denominator) == 1
};
std::optional<AnswerRational> parse_answer_rational(std::string_view text);

/// Removes the first `open_tag ... close_tag` span. With an unmatched open
/// tag the text after the tag is returned.
std::string strip_think(std::string_view text, std::string_view open_tag = "<think>",
                        std::string_view close_tag = "</think>");

/// Pulls the final answer out of a solution: the last `\boxed{...}`, else
/// the last "answer is X" / "Answer: X" line. Returns nullopt when neither
/// is present.
std::optional<std::string> extract_final_answer(std::string_view text);

/// Length of the summary text in Unicode code points (UTF-8 input).
std::int64_t measure_length(std::string_view text);

}  // namespace vscale
