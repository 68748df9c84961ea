#include "vscale/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vscale::selection {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::majority: return "majority";
    case Algorithm::shortest_majority: return "shortest_majority";
    case Algorithm::pessimistic: return "pessimistic";
    case Algorithm::sampling_search: return "sampling_search";
    case Algorithm::best_of_n_oracle: return "best_of_n_oracle";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view text) {
  for (Algorithm a : kAllAlgorithms) {
    if (to_string(a) == text) return a;
  }
  throw Error(ErrorCode::parse_error, "unknown selection algorithm '" + std::string(text) + "'");
}

int VerdictMatrix::row_ones(int row) const {
  auto begin = data_.begin() + static_cast<std::ptrdiff_t>(index(row, 0));
  return static_cast<int>(std::count(begin, begin + cols_, std::uint8_t{1}));
}

namespace {

struct GroupStat {
  int count = 0;
  std::int64_t ones = 0;
  std::int64_t length_sum = 0;
  int best_member = -1;
};

std::vector<GroupStat> accumulate_groups(const Evidence& ev) {
  std::vector<GroupStat> groups(static_cast<std::size_t>(ev.num_answers));
  for (int i = 0; i < ev.n(); ++i) {
    GroupStat& g = groups[static_cast<std::size_t>(ev.answer[i])];
    ++g.count;
    g.ones += ev.ones[i];
    g.length_sum += ev.length[i];
    if (g.best_member < 0 || ev.length[i] < ev.length[g.best_member]) g.best_member = i;
  }
  return groups;
}

int sign(__int128 lhs, __int128 rhs) { return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0); }

// True when group `a` is preferred over `b` at equal score: shorter mean
// length, then smaller answer id (canonical order).
bool tie_prefers(const std::vector<GroupStat>& groups, int a, int b) {
  const GroupStat& ga = groups[static_cast<std::size_t>(a)];
  const GroupStat& gb = groups[static_cast<std::size_t>(b)];
  int by_length = sign(static_cast<__int128>(ga.length_sum) * gb.count,
                       static_cast<__int128>(gb.length_sum) * ga.count);
  if (by_length != 0) return by_length < 0;
  return a < b;
}

template <typename Compare>
Choice argmax_groups(const std::vector<GroupStat>& groups, Compare compare_score) {
  int best = -1;
  bool tied = false;
  for (int id = 0; id < static_cast<int>(groups.size()); ++id) {
    if (groups[static_cast<std::size_t>(id)].count == 0) continue;
    if (best < 0) {
      best = id;
      continue;
    }
    int cmp = compare_score(id, best);
    if (cmp > 0) {
      best = id;
      tied = false;
    } else if (cmp == 0) {
      tied = true;
      if (tie_prefers(groups, id, best)) best = id;
    }
  }
  return Choice{groups[static_cast<std::size_t>(best)].best_member, best, tied};
}

void fill_scores(std::vector<double>* scores, const std::vector<GroupStat>& groups, auto score_of) {
  if (scores == nullptr) return;
  scores->assign(groups.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t id = 0; id < groups.size(); ++id) {
    if (groups[id].count > 0) (*scores)[id] = score_of(groups[id]);
  }
}

Choice choose_majority(const Evidence& ev, std::vector<double>* scores) {
  auto groups = accumulate_groups(ev);
  fill_scores(scores, groups, [](const GroupStat& g) { return static_cast<double>(g.count); });
  return argmax_groups(groups, [&](int a, int b) {
    return sign(groups[static_cast<std::size_t>(a)].count, groups[static_cast<std::size_t>(b)].count);
  });
}

Choice choose_shortest_majority(const Evidence& ev, std::vector<double>* scores) {
  auto groups = accumulate_groups(ev);
  for (const GroupStat& g : groups) {
    if (g.count > 0 && g.length_sum <= 0) {
      throw Error(ErrorCode::zero_length, "answer group with zero mean length");
    }
  }
  fill_scores(scores, groups, [](const GroupStat& g) {
    return static_cast<double>(g.count) / (static_cast<double>(g.length_sum) / g.count);
  });
  // c_a / (L_a / c_a) vs c_b / (L_b / c_b), compared exactly.
  return argmax_groups(groups, [&](int a, int b) {
    const GroupStat& ga = groups[static_cast<std::size_t>(a)];
    const GroupStat& gb = groups[static_cast<std::size_t>(b)];
    __int128 lhs = static_cast<__int128>(ga.count) * ga.count * gb.length_sum;
    __int128 rhs = static_cast<__int128>(gb.count) * gb.count * ga.length_sum;
    return sign(lhs, rhs);
  });
}

Choice choose_pessimistic(const Evidence& ev, const SelectionConfig& config, std::vector<double>* scores) {
  auto groups = accumulate_groups(ev);
  const double m = ev.m;
  const double log_visits = std::log(static_cast<double>(ev.n()) * m);
  std::vector<double> value(groups.size(), 0.0);
  for (std::size_t id = 0; id < groups.size(); ++id) {
    const GroupStat& g = groups[id];
    if (g.count == 0) continue;
    double visits = g.count * m;
    value[id] = static_cast<double>(g.ones) / visits - config.alpha * log_visits / (visits + 1.0);
  }
  if (scores != nullptr) {
    scores->assign(groups.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t id = 0; id < groups.size(); ++id) {
      if (groups[id].count > 0) (*scores)[id] = value[id];
    }
  }
  return argmax_groups(groups, [&](int a, int b) {
    double va = value[static_cast<std::size_t>(a)];
    double vb = value[static_cast<std::size_t>(b)];
    return va < vb ? -1 : (va > vb ? 1 : 0);
  });
}

Choice choose_sampling_search(const Evidence& ev, std::vector<double>* scores) {
  int best = 0;
  bool tied = false;
  for (int i = 1; i < ev.n(); ++i) {
    if (ev.ones[i] > ev.ones[best]) {
      best = i;
      tied = false;
    } else if (ev.ones[i] == ev.ones[best]) {
      tied = true;
      if (ev.length[i] < ev.length[best]) best = i;
    }
  }
  if (scores != nullptr) {
    scores->assign(static_cast<std::size_t>(ev.num_answers), std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < ev.n(); ++i) {
      double s = static_cast<double>(ev.ones[i]) / ev.m;
      double& slot = (*scores)[static_cast<std::size_t>(ev.answer[i])];
      if (std::isnan(slot) || s > slot) slot = s;
    }
  }
  return Choice{best, ev.answer[best], tied};
}

Choice choose_oracle(const Evidence& ev, std::span<const char> is_truth, std::vector<double>* scores) {
  if (scores != nullptr) {
    scores->assign(static_cast<std::size_t>(ev.num_answers), std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < ev.n(); ++i) {
      auto id = static_cast<std::size_t>(ev.answer[i]);
      (*scores)[id] = (id < is_truth.size() && is_truth[id] != 0) ? 1.0 : 0.0;
    }
  }
  for (int i = 0; i < ev.n(); ++i) {
    auto id = static_cast<std::size_t>(ev.answer[i]);
    if (id < is_truth.size() && is_truth[id] != 0) return Choice{i, ev.answer[i], false};
  }
  return Choice{};
}

}  // namespace

Choice choose(Algorithm algorithm, const Evidence& evidence, const SelectionConfig& config,
              std::span<const char> is_truth, std::vector<double>* scores) {
  if (evidence.n() == 0) throw Error(ErrorCode::empty_instance, "no solutions to select from");
  switch (algorithm) {
    case Algorithm::majority:
      return choose_majority(evidence, scores);
    case Algorithm::shortest_majority:
      return choose_shortest_majority(evidence, scores);
    case Algorithm::pessimistic:
      if (evidence.m == 0) return choose_majority(evidence, scores);
      return choose_pessimistic(evidence, config, scores);
    case Algorithm::sampling_search:
      if (evidence.m == 0) throw Error(ErrorCode::zero_verifications, "sampling-based search needs M >= 1");
      return choose_sampling_search(evidence, scores);
    case Algorithm::best_of_n_oracle:
      return choose_oracle(evidence, is_truth, scores);
  }
  throw Error(ErrorCode::invalid_argument, "unknown algorithm");
}

namespace {

struct IndexedInstance {
  Evidence evidence;
  std::vector<CanonicalAnswer> dictionary;
  // Evidence position -> position in the instance, sorted by solution index.
  std::vector<std::size_t> order;
};

IndexedInstance index_instance(const SelectionInstance& instance) {
  if (instance.n() == 0) throw Error(ErrorCode::empty_instance, "no solutions to select from");
  if (instance.verdicts.rows() != instance.n()) {
    throw Error(ErrorCode::invalid_argument, "verdict matrix has " + std::to_string(instance.verdicts.rows()) +
                                                 " rows for " + std::to_string(instance.n()) + " solutions");
  }
  IndexedInstance out;
  for (const Solution& s : instance.solutions) {
    if (!s.canonical_answer) {
      throw Error(ErrorCode::missing_answer, "solution " + std::to_string(s.index) + " of problem '" +
                                                 s.problem_id + "' has no canonical answer");
    }
    out.dictionary.push_back(*s.canonical_answer);
  }
  std::sort(out.dictionary.begin(), out.dictionary.end());
  out.dictionary.erase(std::unique(out.dictionary.begin(), out.dictionary.end()), out.dictionary.end());

  out.order.resize(instance.solutions.size());
  for (std::size_t i = 0; i < out.order.size(); ++i) out.order[i] = i;
  std::stable_sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
    return instance.solutions[a].index < instance.solutions[b].index;
  });

  out.evidence.m = instance.m();
  out.evidence.num_answers = static_cast<int>(out.dictionary.size());
  for (std::size_t pos : out.order) {
    const Solution& s = instance.solutions[pos];
    auto it = std::lower_bound(out.dictionary.begin(), out.dictionary.end(), *s.canonical_answer);
    out.evidence.add(static_cast<int>(it - out.dictionary.begin()), s.length,
                     instance.verdicts.row_ones(static_cast<int>(pos)));
  }
  return out;
}

SelectionResult to_result(Algorithm algorithm, const IndexedInstance& indexed, const SelectionInstance& instance,
                          const Choice& choice, const std::vector<double>& scores) {
  SelectionResult result;
  result.algorithm = algorithm;
  result.tie_broken = choice.tie_broken;
  for (std::size_t id = 0; id < scores.size(); ++id) {
    if (!std::isnan(scores[id])) result.scores.emplace(indexed.dictionary[id], scores[id]);
  }
  if (choice.solution < 0) {
    result.no_correct_solution = true;
    return result;
  }
  result.chosen_answer = indexed.dictionary[static_cast<std::size_t>(choice.answer)];
  std::size_t pos = indexed.order[static_cast<std::size_t>(choice.solution)];
  result.chosen_solution_index = instance.solutions[pos].index;
  return result;
}

SelectionResult run(Algorithm algorithm, const SelectionInstance& instance, const SelectionConfig& config,
                    std::span<const char> is_truth = {}) {
  IndexedInstance indexed = index_instance(instance);
  std::vector<double> scores;
  Choice choice = choose(algorithm, indexed.evidence, config, is_truth, &scores);
  return to_result(algorithm, indexed, instance, choice, scores);
}

}  // namespace

std::vector<AnswerGroup> group_by_answer(const SelectionInstance& instance) {
  IndexedInstance indexed = index_instance(instance);
  const Evidence& ev = indexed.evidence;
  std::vector<AnswerGroup> groups;
  groups.reserve(indexed.dictionary.size());
  for (const CanonicalAnswer& answer : indexed.dictionary) groups.push_back(AnswerGroup{answer, 0, 0.0, 0.0, {}});

  std::vector<std::int64_t> ones(groups.size(), 0);
  std::vector<std::int64_t> length_sum(groups.size(), 0);
  for (int i = 0; i < ev.n(); ++i) {
    auto id = static_cast<std::size_t>(ev.answer[i]);
    groups[id].member_indices.push_back(instance.solutions[indexed.order[static_cast<std::size_t>(i)]].index);
    ++groups[id].count;
    ones[id] += ev.ones[i];
    length_sum[id] += ev.length[i];
  }
  for (std::size_t id = 0; id < groups.size(); ++id) {
    AnswerGroup& g = groups[id];
    g.mean_length = static_cast<double>(length_sum[id]) / g.count;
    g.mean_reward = ev.m == 0 ? 0.0 : static_cast<double>(ones[id]) / (static_cast<double>(g.count) * ev.m);
  }
  return groups;
}

SelectionResult select_pessimistic(const SelectionInstance& instance, const SelectionConfig& config) {
  if (instance.n() == 0) throw Error(ErrorCode::empty_instance, "no solutions to select from");
  if (instance.m() == 0) {
    throw Error(ErrorCode::zero_verifications, "pessimistic verification needs M >= 1; use majority voting for M = 0");
  }
  if (!std::isfinite(config.alpha) || config.alpha < 0) {
    throw Error(ErrorCode::invalid_argument, "alpha must be finite and non-negative");
  }
  return run(Algorithm::pessimistic, instance, config);
}

SelectionResult select_majority(const SelectionInstance& instance, const SelectionConfig& config) {
  return run(Algorithm::majority, instance, config);
}

SelectionResult select_shortest_majority(const SelectionInstance& instance, const SelectionConfig& config) {
  return run(Algorithm::shortest_majority, instance, config);
}

SelectionResult select_sampling_search(const SelectionInstance& instance, const SelectionConfig& config) {
  return run(Algorithm::sampling_search, instance, config);
}

SelectionResult select_best_of_n_oracle(const SelectionInstance& instance, const CanonicalAnswer& truth) {
  IndexedInstance indexed = index_instance(instance);
  std::vector<char> is_truth(indexed.dictionary.size(), 0);
  for (std::size_t id = 0; id < indexed.dictionary.size(); ++id) {
    is_truth[id] = answers_equal(indexed.dictionary[id], truth) ? 1 : 0;
  }
  std::vector<double> scores;
  Choice choice = choose(Algorithm::best_of_n_oracle, indexed.evidence, SelectionConfig{}, is_truth, &scores);
  return to_result(Algorithm::best_of_n_oracle, indexed, instance, choice, scores);
}

SelectionResult select(Algorithm algorithm, const SelectionInstance& instance, const SelectionConfig& config,
                       const std::optional<CanonicalAnswer>& truth) {
  switch (algorithm) {
    case Algorithm::majority: return select_majority(instance, config);
    case Algorithm::shortest_majority: return select_shortest_majority(instance, config);
    case Algorithm::pessimistic:
      if (instance.m() == 0) return select_majority(instance, config);
      return select_pessimistic(instance, config);
    case Algorithm::sampling_search: return select_sampling_search(instance, config);
    case Algorithm::best_of_n_oracle:
      if (!truth) throw Error(ErrorCode::missing_reference, "best-of-N oracle needs the reference answer");
      return select_best_of_n_oracle(instance, *truth);
  }
  throw Error(ErrorCode::invalid_argument, "unknown algorithm");
}

}  // namespace vscale::selection
