#include "vscale/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "vscale/random.hpp"
#include "vscale/records.hpp"

namespace vscale::simulator {

using nlohmann::json;
using selection::Algorithm;
using selection::Evidence;

Rational parse_rational(const json& value) {
  std::string text;
  if (value.is_string()) {
    text = value.get<std::string>();
  } else if (value.is_number()) {
    text = value.dump();
  } else {
    throw Error(ErrorCode::invalid_spec, "expected a probability, got " + value.dump());
  }
  auto bad = [&] { return Error(ErrorCode::invalid_spec, "cannot read '" + text + "' as an exact rational"); };

  auto parse_decimal = [&](std::string_view s) -> Rational {
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
      negative = s.front() == '-';
      s.remove_prefix(1);
    }
    std::size_t exp_pos = s.find_first_of("eE");
    long exponent = 0;
    if (exp_pos != std::string_view::npos) {
      exponent = std::stol(std::string(s.substr(exp_pos + 1)));
      s = s.substr(0, exp_pos);
    }
    std::size_t dot = s.find('.');
    std::string digits(s.substr(0, dot));
    if (dot != std::string_view::npos) {
      digits += s.substr(dot + 1);
      exponent -= static_cast<long>(s.size() - dot - 1);
    }
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw bad();
    }
    // cpp_int reads a leading 0 as an octal prefix.
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
    boost::multiprecision::cpp_int mantissa(digits);
    boost::multiprecision::cpp_int scale = boost::multiprecision::pow(boost::multiprecision::cpp_int(10),
                                                                      static_cast<unsigned>(std::labs(exponent)));
    Rational r = exponent >= 0 ? Rational(mantissa * scale) : Rational(mantissa, scale);
    return negative ? Rational(-r) : r;
  };

  try {
    std::size_t slash = text.find('/');
    if (slash == std::string::npos) return parse_decimal(text);
    Rational num = parse_decimal(std::string_view(text).substr(0, slash));
    Rational den = parse_decimal(std::string_view(text).substr(slash + 1));
    if (den == 0) throw bad();
    return num / den;
  } catch (const std::invalid_argument&) {
    throw bad();
  } catch (const std::out_of_range&) {
    throw bad();
  }
}

std::string to_string(const Rational& value) {
  auto num = boost::multiprecision::numerator(value);
  auto den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

void SyntheticProblemSpec::validate() const {
  auto fail = [&](const std::string& why) { throw Error(ErrorCode::invalid_spec, "spec '" + name + "': " + why); };
  if (categories.empty()) fail("no answer categories");
  Rational total = 0;
  std::set<CanonicalAnswer> seen;
  for (const AnswerCategory& c : categories) {
    if (c.probability < 0 || c.probability > 1) fail("probability of '" + c.answer.value() + "' outside [0, 1]");
    total += c.probability;
    if (!seen.insert(c.answer).second) fail("duplicate answer '" + c.answer.value() + "'");
  }
  if (total != 1) fail("probabilities sum to " + simulator::to_string(total) + ", not 1");
  if (auto ref = truth()) {
    for (const AnswerCategory& c : categories) {
      if (c.is_correct != answers_equal(c.answer, *ref)) {
        fail("correct flag of '" + c.answer.value() + "' disagrees with the reference '" + ref->value() + "'");
      }
    }
  }
  if (verifier_tpr < 0 || verifier_tpr > 1) fail("tpr outside [0, 1]");
  if (verifier_tnr < 0 || verifier_tnr > 1) fail("tnr outside [0, 1]");
  if (length.jitter < 0) fail("negative length jitter");
  if (length.mean_correct - length.jitter < 1) fail("correct solutions could have length < 1");
  if (length.mean_incorrect < length.mean_correct) fail("incorrect solutions must not be shorter than correct ones");
}

Rational SyntheticProblemSpec::p_correct() const {
  Rational total = 0;
  for (const AnswerCategory& c : categories) {
    if (c.is_correct) total += c.probability;
  }
  return total;
}

std::optional<CanonicalAnswer> SyntheticProblemSpec::truth() const {
  if (reference_answer) return reference_answer;
  for (const AnswerCategory& c : categories) {
    if (c.is_correct) return c.answer;
  }
  return std::nullopt;
}

SyntheticProblemSpec spec_from_json(const json& j) {
  try {
    SyntheticProblemSpec spec;
    spec.name = j.value("name", std::string("synthetic"));
    for (const json& c : j.at("categories")) {
      spec.categories.push_back(AnswerCategory{canonicalize_answer(c.at("answer").get<std::string>()),
                                               parse_rational(c.at("probability")), c.value("correct", false)});
    }
    if (j.contains("reference_answer") && !j["reference_answer"].is_null()) {
      spec.reference_answer = canonicalize_answer(j["reference_answer"].get<std::string>());
    }
    spec.verifier_tpr = parse_rational(j.at("tpr"));
    spec.verifier_tnr = parse_rational(j.at("tnr"));
    if (j.contains("length")) {
      const json& l = j["length"];
      spec.length.mean_correct = l.value("correct", spec.length.mean_correct);
      spec.length.mean_incorrect = l.value("incorrect", spec.length.mean_incorrect);
      spec.length.jitter = l.value("jitter", spec.length.jitter);
    }
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_spec, std::string("malformed spec: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_spec) throw;
    throw Error(ErrorCode::invalid_spec, e.what());
  }
}

json spec_to_json(const SyntheticProblemSpec& spec) {
  json categories = json::array();
  for (const AnswerCategory& c : spec.categories) {
    categories.push_back({{"answer", c.answer.value()}, {"probability", to_string(c.probability)}, {"correct", c.is_correct}});
  }
  json j{{"name", spec.name},
         {"categories", std::move(categories)},
         {"tpr", to_string(spec.verifier_tpr)},
         {"tnr", to_string(spec.verifier_tnr)},
         {"length",
          {{"correct", spec.length.mean_correct}, {"incorrect", spec.length.mean_incorrect}, {"jitter", spec.length.jitter}}}};
  if (spec.reference_answer) j["reference_answer"] = spec.reference_answer->value();
  return j;
}

std::vector<SyntheticProblemSpec> read_specs(const std::string& path) {
  std::vector<SyntheticProblemSpec> specs;
  for (const json& j : records::read_jsonl_file(path)) specs.push_back(spec_from_json(j));
  return specs;
}

namespace {

// Sampling tables derived once per spec. Categories get dictionary ids in
// canonical order, matching the ids `selection::choose` expects.
struct Model {
  std::vector<int> dictionary_id;        // per category
  std::vector<CanonicalAnswer> dictionary;
  std::vector<char> is_truth;            // per dictionary id
  std::vector<double> cumulative;        // per category
  int fallback_category = 0;
  double tpr = 1.0;
  double tnr = 1.0;

  explicit Model(const SyntheticProblemSpec& spec) {
    spec.validate();
    const auto k = spec.categories.size();
    std::vector<std::size_t> order(k);
    for (std::size_t c = 0; c < k; ++c) order[c] = c;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return spec.categories[a].answer < spec.categories[b].answer; });
    dictionary_id.resize(k);
    is_truth.resize(k);
    for (std::size_t id = 0; id < k; ++id) {
      dictionary_id[order[id]] = static_cast<int>(id);
      dictionary.push_back(spec.categories[order[id]].answer);
      is_truth[id] = spec.categories[order[id]].is_correct ? 1 : 0;
    }
    double running = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      running += spec.categories[c].probability.convert_to<double>();
      cumulative.push_back(running);
      if (spec.categories[c].probability > 0) fallback_category = static_cast<int>(c);
    }
    tpr = spec.verifier_tpr.convert_to<double>();
    tnr = spec.verifier_tnr.convert_to<double>();
  }
};

struct Draw {
  int category = 0;
  std::int64_t length = 0;
};

// One solution: category, then length, then m verdicts, always in this
// order so the instance and compact paths consume identical streams.
Draw draw_solution(const SyntheticProblemSpec& spec, const Model& model, Rng& rng, int m, std::uint8_t* verdicts,
                   int& ones) {
  Draw d;
  double u = rng.uniform();
  d.category = model.fallback_category;
  for (std::size_t c = 0; c < model.cumulative.size(); ++c) {
    if (u < model.cumulative[c] && spec.categories[c].probability > 0) {
      d.category = static_cast<int>(c);
      break;
    }
  }
  const bool correct = spec.categories[static_cast<std::size_t>(d.category)].is_correct;
  d.length = correct ? spec.length.mean_correct : spec.length.mean_incorrect;
  if (spec.length.jitter > 0) {
    d.length += static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * spec.length.jitter + 1))) -
                spec.length.jitter;
  }
  const double p_one = correct ? model.tpr : 1.0 - model.tnr;
  ones = 0;
  for (int j = 0; j < m; ++j) {
    bool v = rng.bernoulli(p_one);
    ones += v ? 1 : 0;
    if (verdicts != nullptr) verdicts[j] = v ? 1 : 0;
  }
  return d;
}

void require_shape(int n, int m) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
  if (m < 0) throw Error(ErrorCode::invalid_argument, "m must be >= 0");
}

bool succeeded(Algorithm algorithm, const selection::Choice& choice, const Model& model) {
  if (choice.solution < 0) return false;
  if (algorithm == Algorithm::best_of_n_oracle) return true;
  return model.is_truth[static_cast<std::size_t>(choice.answer)] != 0;
}

}  // namespace

selection::SelectionInstance simulate_instance(const SyntheticProblemSpec& spec, int n, int m, std::uint64_t seed) {
  require_shape(n, m);
  Model model(spec);
  Rng rng(seed);
  selection::SelectionInstance instance;
  instance.verdicts = selection::VerdictMatrix(n, m);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) {
    int ones = 0;
    Draw d = draw_solution(spec, model, rng, m, row.data(), ones);
    const AnswerCategory& category = spec.categories[static_cast<std::size_t>(d.category)];
    Solution s;
    s.problem_id = spec.name;
    s.index = i;
    s.canonical_answer = category.answer;
    s.length = d.length;
    s.label = category.is_correct;
    instance.solutions.push_back(std::move(s));
    for (int j = 0; j < m; ++j) instance.verdicts.set(i, j, row[static_cast<std::size_t>(j)] != 0);
  }
  return instance;
}

VerificationPanel simulate_panel(const SyntheticProblemSpec& spec, int problems, int n, int m, std::uint64_t seed) {
  require_shape(n, m);
  if (problems < 1) throw Error(ErrorCode::invalid_argument, "problems must be >= 1");
  Model model(spec);
  VerificationPanel panel;
  panel.m_max = m;
  for (int k = 0; k < problems; ++k) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(k)}));
    PanelProblem p;
    p.problem_id = spec.name + "-" + std::to_string(k);
    p.reference_answer = spec.truth();
    for (int i = 0; i < n; ++i) {
      PanelSolution s;
      s.index = i;
      s.verdicts.resize(static_cast<std::size_t>(m));
      int ones = 0;
      Draw d = draw_solution(spec, model, rng, m, s.verdicts.data(), ones);
      const AnswerCategory& category = spec.categories[static_cast<std::size_t>(d.category)];
      s.label = category.is_correct;
      s.answer = category.answer;
      s.length = d.length;
      p.solutions.push_back(std::move(s));
    }
    panel.problems.push_back(std::move(p));
  }
  return panel;
}

EnumerationResult enumerate_success(const SyntheticProblemSpec& spec, Algorithm algorithm, int n, int m,
                                    const selection::SelectionConfig& config, std::uint64_t max_outcomes) {
  require_shape(n, m);
  Model model(spec);
  const auto k = static_cast<int>(spec.categories.size());
  const auto length_choices = static_cast<int>(2 * spec.length.jitter + 1);
  if (algorithm == Algorithm::sampling_search && m == 0) {
    throw Error(ErrorCode::zero_verifications, "sampling-based search needs M >= 1");
  }

  // |categories|^n * 2^(n*m) * (2*jitter + 1)^n, with overflow guarded.
  long double space = std::pow(static_cast<long double>(k), n) * std::pow(2.0L, n * m) *
                      std::pow(static_cast<long double>(length_choices), n);
  if (n * m >= 63 || space > static_cast<long double>(max_outcomes)) {
    throw Error(ErrorCode::space_too_large, "outcome space of ~" + std::to_string(static_cast<double>(space)) +
                                                " exceeds the limit of " + std::to_string(max_outcomes));
  }

  const int bits_total = n * m;
  const std::uint64_t matrices = std::uint64_t{1} << bits_total;
  const std::uint64_t row_mask = m == 0 ? 0 : (std::uint64_t{1} << m) - 1;

  // weight[c][kc][kw]: probability of one verdict matrix with kc positives
  // among the c*m verdicts on correct solutions and kw among the rest.
  auto powers = [&](const Rational& base) {
    std::vector<Rational> p(static_cast<std::size_t>(bits_total + 1), Rational(1));
    for (int e = 1; e <= bits_total; ++e) p[static_cast<std::size_t>(e)] = p[static_cast<std::size_t>(e - 1)] * base;
    return p;
  };
  const auto tpr_pow = powers(spec.verifier_tpr);
  const auto fnr_pow = powers(1 - spec.verifier_tpr);
  const auto fpr_pow = powers(1 - spec.verifier_tnr);
  const auto tnr_pow = powers(spec.verifier_tnr);

  Evidence evidence;
  evidence.m = m;
  evidence.num_answers = k;
  evidence.answer.assign(static_cast<std::size_t>(n), 0);
  evidence.length.assign(static_cast<std::size_t>(n), 0);
  evidence.ones.assign(static_cast<std::size_t>(n), 0);

  Rational total = 0;
  std::uint64_t outcomes = 0;
  std::vector<int> category(static_cast<std::size_t>(n), 0);
  std::vector<int> length_offset(static_cast<std::size_t>(n), 0);
  std::vector<char> correct(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> counts;

  auto advance = [](std::vector<int>& digits, int base) {
    for (auto& d : digits) {
      if (++d < base) return true;
      d = 0;
    }
    return false;
  };

  do {
    Rational assignment_weight = 1;
    int num_correct = 0;
    for (int i = 0; i < n; ++i) {
      const AnswerCategory& c = spec.categories[static_cast<std::size_t>(category[static_cast<std::size_t>(i)])];
      assignment_weight *= c.probability;
      correct[static_cast<std::size_t>(i)] = c.is_correct ? 1 : 0;
      num_correct += c.is_correct ? 1 : 0;
      evidence.answer[static_cast<std::size_t>(i)] = model.dictionary_id[static_cast<std::size_t>(category[static_cast<std::size_t>(i)])];
    }
    const int correct_bits = num_correct * m;
    const int wrong_bits = (n - num_correct) * m;

    Rational length_sum = 0;
    std::fill(length_offset.begin(), length_offset.end(), 0);
    do {
      for (int i = 0; i < n; ++i) {
        std::int64_t base = correct[static_cast<std::size_t>(i)] ? spec.length.mean_correct : spec.length.mean_incorrect;
        evidence.length[static_cast<std::size_t>(i)] = base + length_offset[static_cast<std::size_t>(i)] - spec.length.jitter;
      }
      counts.assign(static_cast<std::size_t>((correct_bits + 1) * (wrong_bits + 1)), 0);
      for (std::uint64_t bits = 0; bits < matrices; ++bits) {
        int kc = 0;
        int kw = 0;
        for (int i = 0; i < n; ++i) {
          int ones = std::popcount((bits >> (i * m)) & row_mask);
          evidence.ones[static_cast<std::size_t>(i)] = ones;
          (correct[static_cast<std::size_t>(i)] ? kc : kw) += ones;
        }
        selection::Choice choice = selection::choose(algorithm, evidence, config, model.is_truth);
        if (succeeded(algorithm, choice, model)) ++counts[static_cast<std::size_t>(kc * (wrong_bits + 1) + kw)];
        ++outcomes;
      }
      for (int kc = 0; kc <= correct_bits; ++kc) {
        for (int kw = 0; kw <= wrong_bits; ++kw) {
          std::int64_t count = counts[static_cast<std::size_t>(kc * (wrong_bits + 1) + kw)];
          if (count == 0) continue;
          length_sum += Rational(count) * tpr_pow[static_cast<std::size_t>(kc)] *
                        fnr_pow[static_cast<std::size_t>(correct_bits - kc)] * fpr_pow[static_cast<std::size_t>(kw)] *
                        tnr_pow[static_cast<std::size_t>(wrong_bits - kw)];
        }
      }
    } while (advance(length_offset, length_choices));
    total += assignment_weight * length_sum;
  } while (advance(category, k));

  Rational length_paths = boost::multiprecision::pow(boost::multiprecision::cpp_int(length_choices),
                                                     static_cast<unsigned>(n));
  return EnumerationResult{algorithm, n, m, total / length_paths, outcomes};
}

MonteCarloResult monte_carlo_success(const SyntheticProblemSpec& spec, Algorithm algorithm, int n, int m,
                                     std::int64_t trials, std::uint64_t seed, const selection::SelectionConfig& config,
                                     unsigned threads) {
  require_shape(n, m);
  if (trials < 1) throw Error(ErrorCode::invalid_argument, "trials must be >= 1");
  if (algorithm == Algorithm::sampling_search && m == 0) {
    throw Error(ErrorCode::zero_verifications, "sampling-based search needs M >= 1");
  }
  Model model(spec);
  constexpr std::int64_t kBlock = 4096;
  const auto blocks = static_cast<std::size_t>((trials + kBlock - 1) / kBlock);
  std::vector<std::int64_t> successes(blocks, 0);
  parallel_for(blocks, threads, [&](std::size_t b) {
    Rng rng(derive_seed({seed, b}));
    Evidence evidence;
    evidence.m = m;
    evidence.num_answers = static_cast<int>(spec.categories.size());
    const std::int64_t begin = static_cast<std::int64_t>(b) * kBlock;
    const std::int64_t end = std::min(trials, begin + kBlock);
    for (std::int64_t t = begin; t < end; ++t) {
      evidence.clear();
      for (int i = 0; i < n; ++i) {
        int ones = 0;
        Draw d = draw_solution(spec, model, rng, m, nullptr, ones);
        evidence.add(model.dictionary_id[static_cast<std::size_t>(d.category)], d.length, ones);
      }
      if (succeeded(algorithm, selection::choose(algorithm, evidence, config, model.is_truth), model)) ++successes[b];
    }
  });

  MonteCarloResult result;
  result.trials = trials;
  for (std::int64_t s : successes) result.successes += s;
  result.estimate = static_cast<double>(result.successes) / static_cast<double>(trials);
  result.standard_error = std::sqrt(result.estimate * (1.0 - result.estimate) / static_cast<double>(trials));
  return result;
}

}  // namespace vscale::simulator
