#include "vscale/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <numeric>
#include <regex>

namespace vscale {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::empty_answer: return "EmptyAnswer";
    case ErrorCode::missing_answer: return "MissingAnswer";
    case ErrorCode::empty_instance: return "EmptyInstance";
    case ErrorCode::zero_verifications: return "ZeroVerifications";
    case ErrorCode::zero_length: return "ZeroLength";
    case ErrorCode::empty_list: return "EmptyList";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::single_class: return "SingleClass";
    case ErrorCode::budget_exceeds_pool: return "BudgetExceedsPool";
    case ErrorCode::empty_field: return "EmptyField";
    case ErrorCode::no_verdict: return "NoVerdict";
    case ErrorCode::malformed_verdict: return "MalformedVerdict";
    case ErrorCode::missing_reference: return "MissingReference";
    case ErrorCode::endpoint_error: return "EndpointError";
    case ErrorCode::incomplete_panel: return "IncompletePanel";
    case ErrorCode::invalid_spec: return "InvalidSpec";
    case ErrorCode::space_too_large: return "SpaceTooLarge";
    case ErrorCode::empty_grid: return "EmptyGrid";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::parse_error: return "ParseError";
  }
  return "Unknown";
}

std::string_view to_string(ProblemMode mode) {
  return mode == ProblemMode::proof ? "proof" : "final_answer";
}

ProblemMode parse_problem_mode(std::string_view text) {
  if (text == "final_answer") return ProblemMode::final_answer;
  if (text == "proof") return ProblemMode::proof;
  throw Error(ErrorCode::parse_error, "unknown problem mode '" + std::string(text) + "'");
}

std::string_view to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::ok: return "ok";
    case VerdictStatus::no_verdict: return "no_verdict";
    case VerdictStatus::malformed: return "malformed";
  }
  return "unknown";
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

// Index of the brace closing the one at `open`, or npos.
std::size_t matching_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '{') {
      ++depth;
    } else if (s[i] == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::string_view::npos;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_digit);
}

std::optional<std::int64_t> parse_int64(std::string_view s) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string strip_leading_zeros(std::string_view digits) {
  std::size_t i = 0;
  while (i + 1 < digits.size() && digits[i] == '0') ++i;
  return std::string(digits.substr(i));
}

// Whole-string wrappers that carry no meaning for the answer value.
constexpr std::array<std::string_view, 8> kWrappers = {
    "\\boxed{", "\\fbox{", "\\text{", "\\textbf{", "\\mathrm{", "\\mbox{", "\\displaystyle{", "{"};

std::string unwrap(std::string s) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::string_view view = trim(s);
    if (view.size() >= 2 && view.front() == '$' && view.back() == '$') {
      s = std::string(view.substr(1, view.size() - 2));
      changed = true;
      continue;
    }
    if (view.size() >= 4 && (view.starts_with("\\[") && view.ends_with("\\]"))) {
      s = std::string(view.substr(2, view.size() - 4));
      changed = true;
      continue;
    }
    if (view.size() >= 4 && (view.starts_with("\\(") && view.ends_with("\\)"))) {
      s = std::string(view.substr(2, view.size() - 4));
      changed = true;
      continue;
    }
    for (std::string_view prefix : kWrappers) {
      if (!view.starts_with(prefix)) continue;
      std::size_t open = prefix.size() - 1;
      if (matching_brace(view, open) == view.size() - 1) {
        s = std::string(view.substr(prefix.size(), view.size() - prefix.size() - 1));
        changed = true;
        break;
      }
    }
    if (!changed) s = std::string(view);
  }
  return s;
}

bool is_atom(std::string_view part) {
  if (part.starts_with('-')) part.remove_prefix(1);
  return !part.empty() && std::all_of(part.begin(), part.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '.';
  });
}

// \frac{a}{b} -> a/b (parenthesized when a part is not a plain atom) and
// the \frac12 shorthand.
std::string rewrite_fractions(std::string s) {
  replace_all(s, "\\dfrac", "\\frac");
  replace_all(s, "\\tfrac", "\\frac");
  std::size_t pos = 0;
  while ((pos = s.find("\\frac", pos)) != std::string::npos) {
    std::size_t cursor = pos + 5;
    auto take_arg = [&](std::string& out) -> bool {
      if (cursor >= s.size()) return false;
      if (s[cursor] == '{') {
        std::size_t close = matching_brace(s, cursor);
        if (close == std::string::npos) return false;
        out = s.substr(cursor + 1, close - cursor - 1);
        cursor = close + 1;
        return true;
      }
      if (std::isalnum(static_cast<unsigned char>(s[cursor])) != 0) {
        out = s.substr(cursor, 1);
        cursor += 1;
        return true;
      }
      return false;
    };
    std::string num;
    std::string den;
    if (!take_arg(num) || !take_arg(den)) {
      pos += 5;
      continue;
    }
    std::string num_trim(trim(num));
    std::string den_trim(trim(den));
    std::string replacement = (is_atom(num_trim) ? num_trim : "(" + num_trim + ")") + "/" +
                              (is_atom(den_trim) ? den_trim : "(" + den_trim + ")");
    s.replace(pos, cursor - pos, replacement);
    pos += replacement.size();
  }
  return s;
}

bool is_pure_words(std::string_view s) {
  bool any_alpha = false;
  for (char c : s) {
    if (is_alpha(c)) {
      any_alpha = true;
    } else if (!is_space(c)) {
      return false;
    }
  }
  return any_alpha;
}

std::string fold_words(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

// Integer or decimal literal with optional sign, in normal form; nullopt if
// `s` is not such a literal.
std::optional<std::string> normalize_number(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  std::size_t dot = s.find('.');
  std::string_view int_part = s.substr(0, dot);
  std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (dot != std::string_view::npos && frac_part.find('.') != std::string_view::npos) return std::nullopt;
  if (int_part.empty() && frac_part.empty()) return std::nullopt;
  if (!int_part.empty() && !all_digits(int_part)) return std::nullopt;
  if (!frac_part.empty() && !all_digits(frac_part)) return std::nullopt;

  std::string whole = int_part.empty() ? std::string("0") : strip_leading_zeros(int_part);
  std::string frac(frac_part);
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string out = whole;
  if (!frac.empty()) out += "." + frac;
  if (negative && out != "0") out = "-" + out;
  return out;
}

// a/b with integer a, b: sign moved to the numerator and reduced by gcd.
std::optional<std::string> normalize_ratio(std::string_view s) {
  std::size_t slash = s.find('/');
  if (slash == std::string_view::npos || s.find('/', slash + 1) != std::string_view::npos) {
    return std::nullopt;
  }
  auto num_text = normalize_number(s.substr(0, slash));
  auto den_text = normalize_number(s.substr(slash + 1));
  if (!num_text || !den_text) return std::nullopt;
  if (num_text->find('.') != std::string::npos || den_text->find('.') != std::string::npos) {
    return *num_text + "/" + *den_text;
  }
  auto num = parse_int64(*num_text);
  auto den = parse_int64(*den_text);
  if (!num || !den || *den == 0 || *num == INT64_MIN || *den == INT64_MIN) {
    return *num_text + "/" + *den_text;
  }
  std::int64_t a = *num;
  std::int64_t b = *den;
  if (b < 0) {
    a = -a;
    b = -b;
  }
  std::int64_t g = std::gcd(a < 0 ? -a : a, b);
  if (g > 1) {
    a /= g;
    b /= g;
  }
  if (b == 1) return std::to_string(a);
  return std::to_string(a) + "/" + std::to_string(b);
}

std::string remove_thousands_separators(std::string s) {
  static const std::regex kGrouped(R"(^[+-]?\d{1,3}(,\d{3})+(\.\d+)?$)");
  replace_all(s, "{,}", ",");
  if (std::regex_match(s, kGrouped)) s.erase(std::remove(s.begin(), s.end(), ','), s.end());
  return s;
}

std::string normalize_pass(std::string s) {
  s = unwrap(std::move(s));
  replace_all(s, "\\left", "");
  replace_all(s, "\\right", "");
  for (std::string_view spacing : {"\\,", "\\!", "\\;", "\\:", "\\ "}) replace_all(s, spacing, " ");
  s = rewrite_fractions(std::move(s));
  s = std::string(trim(s));

  if (is_pure_words(s)) return fold_words(s);

  s.erase(std::remove_if(s.begin(), s.end(), is_space), s.end());
  s = remove_thousands_separators(std::move(s));
  if (s.size() > 1 && s.front() == '+') s.erase(0, 1);
  if (auto number = normalize_number(s)) return *number;
  if (auto ratio = normalize_ratio(s)) return *ratio;
  return s;
}

}  // namespace

CanonicalAnswer canonicalize_answer(std::string_view raw) {
  if (trim(raw).empty()) throw Error(ErrorCode::empty_answer, "answer is blank");
  std::string current(raw);
  // Each pass never lengthens the string, so a fixpoint comes quickly.
  for (int pass = 0; pass < 64; ++pass) {
    std::string next = normalize_pass(current);
    if (next == current) break;
    current = std::move(next);
  }
  if (current.empty()) {
    throw Error(ErrorCode::empty_answer, "answer '" + std::string(raw) + "' is blank after stripping");
  }
  return CanonicalAnswer::trusted(std::move(current));
}

std::optional<AnswerRational> parse_answer_rational(std::string_view text) {
  auto parse_decimal = [](std::string_view s) -> std::optional<AnswerRational> {
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
      negative = s.front() == '-';
      s.remove_prefix(1);
    }
    std::size_t dot = s.find('.');
    std::string digits(s.substr(0, dot));
    std::int64_t den = 1;
    if (dot != std::string_view::npos) {
      std::string_view frac = s.substr(dot + 1);
      if (!frac.empty() && !all_digits(frac)) return std::nullopt;
      if (frac.size() > 18) return std::nullopt;
      digits += frac;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    }
    if (!all_digits(digits)) return std::nullopt;
    auto num = parse_int64(digits);
    if (!num) return std::nullopt;
    return AnswerRational{negative ? -*num : *num, den};
  };

  std::size_t slash = text.find('/');
  AnswerRational value;
  if (slash == std::string_view::npos) {
    auto d = parse_decimal(text);
    if (!d) return std::nullopt;
    value = *d;
  } else {
    auto n = parse_decimal(text.substr(0, slash));
    auto d = parse_decimal(text.substr(slash + 1));
    if (!n || !d || d->numerator == 0) return std::nullopt;
    // (a/b) / (c/d) = (a*d) / (b*c), exact in 128 bits.
    __int128 num = static_cast<__int128>(n->numerator) * d->denominator;
    __int128 den = static_cast<__int128>(n->denominator) * d->numerator;
    if (den < 0) {
      num = -num;
      den = -den;
    }
    __int128 a = num < 0 ? -num : num;
    __int128 b = den;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      num /= a;
      den /= a;
    }
    if (num > INT64_MAX || num < -INT64_MAX || den > INT64_MAX) return std::nullopt;
    return AnswerRational{static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
  }
  std::int64_t g = std::gcd(value.numerator < 0 ? -value.numerator : value.numerator, value.denominator);
  if (g > 1) {
    value.numerator /= g;
    value.denominator /= g;
  }
  return value;
}

bool answers_equal(const CanonicalAnswer& a, const CanonicalAnswer& b) {
  if (a.value() == b.value()) return true;
  auto ra = parse_answer_rational(a.value());
  if (!ra) return false;
  auto rb = parse_answer_rational(b.value());
  if (!rb) return false;
  return ra->numerator == rb->numerator && ra->denominator == rb->denominator;
}

std::string strip_think(std::string_view text, std::string_view open_tag, std::string_view close_tag) {
  std::size_t open = text.find(open_tag);
  if (open_tag.empty() || open == std::string_view::npos) return std::string(text);
  std::size_t body = open + open_tag.size();
  std::size_t close = close_tag.empty() ? std::string_view::npos : text.find(close_tag, body);
  if (close == std::string_view::npos) return std::string(text.substr(body));
  std::string out(text.substr(0, open));
  out += text.substr(close + close_tag.size());
  return out;
}

std::optional<std::string> extract_final_answer(std::string_view text) {
  for (std::string_view marker : {std::string_view("\\boxed{"), std::string_view("\\fbox{")}) {
    std::size_t pos = text.rfind(marker);
    if (pos == std::string_view::npos) continue;
    std::size_t open = pos + marker.size() - 1;
    std::size_t close = matching_brace(text, open);
    if (close == std::string_view::npos) continue;
    std::string_view inner = trim(text.substr(open + 1, close - open - 1));
    if (!inner.empty()) return std::string(inner);
  }

  static const std::regex kAnswerLine(R"((?:answer\s+is|answer\s*:)\s*(.+?)\s*\.?\s*$)",
                                      std::regex::icase);
  std::size_t end = text.size();
  while (end > 0) {
    std::size_t start = text.rfind('\n', end - 1);
    std::size_t line_begin = start == std::string_view::npos ? 0 : start + 1;
    std::string line(text.substr(line_begin, end - line_begin));
    std::smatch match;
    if (std::regex_search(line, match, kAnswerLine)) {
      std::string value(trim(match[1].str()));
      if (!value.empty()) return value;
    }
    if (start == std::string_view::npos) break;
    end = start;
  }
  return std::nullopt;
}

std::int64_t measure_length(std::string_view text) {
  return std::count_if(text.begin(), text.end(),
                       [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; });
}

}  // namespace vscale
