#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "golden_cases.hpp"
#include "vscale/dataset.hpp"
#include "vscale/records.hpp"

namespace vscale::dataset {
namespace {

TEST(RenderPrompt, MatchesGoldenFiles) {
  EXPECT_EQ(render_prompt(golden::final_answer_problem(), golden::final_answer_solution(), ProblemMode::final_answer),
            golden::read_golden("final_answer_prompt.txt"));
  EXPECT_EQ(render_prompt(golden::proof_problem(), golden::proof_solution(), ProblemMode::proof),
            golden::read_golden("proof_prompt.txt"));
}

TEST(RenderPrompt, SectionsAndFormatLine) {
  std::string out = render_prompt(PromptTemplate::builtin(ProblemMode::final_answer), "P", "S");
  EXPECT_NE(out.find("**Problem**\n\nP"), std::string::npos);
  EXPECT_NE(out.find("**Solution**\n\nS"), std::string::npos);
  EXPECT_NE(out.find(kFinalAnswerFormatLine), std::string::npos);
  EXPECT_NE(render_prompt(PromptTemplate::builtin(ProblemMode::proof), "P", "S").find("each proof step"),
            std::string::npos);
}

TEST(RenderPrompt, InsertedTextIsNotRescanned) {
  std::string out = render_prompt(PromptTemplate::builtin(ProblemMode::final_answer), "${solution}", "S");
  EXPECT_NE(out.find("**Problem**\n\n${solution}"), std::string::npos);
}

TEST(RenderPrompt, BlankFields) {
  PromptTemplate plain{ProblemMode::final_answer, "no placeholders"};
  EXPECT_EQ(render_prompt(plain, "p", "s"), "no placeholders");
  for (auto [p, s] : {std::pair{"", "s"}, std::pair{"p", "  \n"}}) {
    try {
      render_prompt(plain, p, s);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::empty_field);
    }
  }
}

TEST(ParseVerdict, Examples) {
  EXPECT_TRUE(parse_verdict("reasoning...\nAnswer: 1"));
  EXPECT_FALSE(parse_verdict("reasoning...\nAnswer: 0"));
  EXPECT_TRUE(parse_verdict(golden::kAcceptingTranscript));
  EXPECT_FALSE(parse_verdict(golden::kRejectingTranscript));
  EXPECT_TRUE(parse_verdict("  Answer:   1  \r\n\n"));
  try {
    parse_verdict("no judgment line");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_verdict);
  }
  try {
    parse_verdict("Answer: maybe");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::malformed_verdict);
  }
}

TEST(ParseVerdict, RoundTripThroughPrompt) {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 1000; ++t) {
    bool v = gen() % 2;
    std::string prompt = render_prompt(PromptTemplate::builtin(ProblemMode::final_answer), "p" + std::to_string(t), "s");
    std::string response = "<think>\n" + prompt.substr(0, gen() % prompt.size()) + "\n</think>\nSummary " +
                            std::to_string(t) + "\nAnswer: " + (v ? "1" : "0") + std::string(gen() % 3, '\n');
    EXPECT_EQ(parse_verdict(response), v);
  }
}

TEST(LabelSolution, Examples) {
  Problem p{"p", "s", "0.5", ProblemMode::final_answer};
  Solution s;
  s.canonical_answer = canonicalize_answer("1/2");
  EXPECT_TRUE(label_solution(p, s));
  s.canonical_answer.reset();
  EXPECT_FALSE(label_solution(p, s));
  p.reference_answer = "7";
  s.canonical_answer = canonicalize_answer("7");
  EXPECT_TRUE(label_solution(p, s));
  p.reference_answer.reset();
  try {
    label_solution(p, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::missing_reference);
  }
}

TEST(Reward, AllPairs) {
  for (bool label : {false, true}) {
    for (bool verdict : {false, true}) EXPECT_EQ(reward(label, verdict), 2 * (label == verdict ? 1 : 0) - 1);
  }
  static_assert(reward(true, true) == 1 && reward(false, true) == -1 && reward(false, false) == 1);
}

TEST(Filter, Examples) {
  auto r = filter_training_problems({{"P1", {true, false}}, {"P2", {true, true}}, {"P3", {false, false}}});
  EXPECT_EQ(r.kept, (std::set<std::string>{"P1"}));
  EXPECT_EQ(r.dropped_all_correct, (std::set<std::string>{"P2"}));
  EXPECT_EQ(r.dropped_all_wrong, (std::set<std::string>{"P3"}));
  auto single = filter_training_problems({{"A", {true}}, {"B", {false}}});
  EXPECT_TRUE(single.kept.empty());
  auto none = filter_training_problems({});
  EXPECT_TRUE(none.kept.empty() && none.dropped_all_correct.empty() && none.dropped_all_wrong.empty());
}

TEST(FilterProperty, PartitionAndContrast) {
  std::mt19937_64 gen(12);
  std::map<std::string, std::vector<bool>> labels;
  for (int p = 0; p < 5000; ++p) {
    std::vector<bool> l(1 + gen() % 6);
    double bias = static_cast<double>(gen() % 5) / 4.0;
    for (std::size_t i = 0; i < l.size(); ++i) l[i] = std::uniform_real_distribution<>(0, 1)(gen) < bias;
    labels["p" + std::to_string(p)] = l;
  }
  auto r = filter_training_problems(labels);
  EXPECT_EQ(r.kept.size() + r.dropped_all_correct.size() + r.dropped_all_wrong.size(), labels.size());
  for (const auto& [id, l] : labels) {
    int in = r.kept.contains(id) + r.dropped_all_correct.contains(id) + r.dropped_all_wrong.contains(id);
    EXPECT_EQ(in, 1);
  }
  for (const auto& id : r.kept) {
    const auto& l = labels.at(id);
    EXPECT_NE(std::find(l.begin(), l.end(), true), l.end());
    EXPECT_NE(std::find(l.begin(), l.end(), false), l.end());
  }
}

TEST(TrainingExport, LabelsAndFiltering) {
  std::vector<Problem> problems{{"a", "Q1", "3", ProblemMode::final_answer},
                                {"b", "Q2", "4", ProblemMode::final_answer},
                                {"c", "Q3", std::nullopt, ProblemMode::proof}};
  auto sol = [](const char* pid, int idx, const char* answer) {
    Solution s;
    s.problem_id = pid;
    s.index = idx;
    s.text = std::string("so \\boxed{") + answer + "}";
    s.canonical_answer = canonicalize_answer(answer);
    return s;
  };
  std::vector<Solution> solutions{sol("a", 0, "3"), sol("a", 1, "5"), sol("b", 0, "4"), sol("b", 1, "4"),
                                  sol("c", 0, "x")};
  auto out = build_training_examples(problems, solutions);
  EXPECT_EQ(out.filter.kept, (std::set<std::string>{"a"}));
  EXPECT_EQ(out.filter.dropped_all_correct, (std::set<std::string>{"b"}));
  ASSERT_EQ(out.examples.size(), 2u);
  EXPECT_TRUE(out.examples[0].label);
  EXPECT_FALSE(out.examples[1].label);
  EXPECT_EQ(out.examples[1].prompt, render_prompt(problems[0], solutions[1], ProblemMode::final_answer));
}

TEST(Records, JsonRoundTrip) {
  Solution s;
  s.problem_id = "p";
  s.index = 3;
  s.text = "the answer is 12";
  s.canonical_answer = canonicalize_answer("12");
  s.length = measure_length(s.text);
  s.label = true;
  Solution back = records::solution_from_json(records::to_json(s));
  EXPECT_EQ(back.problem_id, s.problem_id);
  EXPECT_EQ(back.index, s.index);
  EXPECT_EQ(back.text, s.text);
  EXPECT_EQ(back.canonical_answer, s.canonical_answer);
  EXPECT_EQ(back.length, s.length);
  EXPECT_EQ(back.label, s.label);

  Problem p{"id", "stmt", "1/2", ProblemMode::proof};
  Problem pb = records::problem_from_json(records::to_json(p));
  EXPECT_EQ(pb.id, p.id);
  EXPECT_EQ(pb.reference_answer, p.reference_answer);
  EXPECT_EQ(pb.mode, p.mode);

  VerificationRecord v{"p", 1, std::string("z"), true, "Answer: 1", VerdictStatus::ok};
  VerificationRecord vb = records::verification_from_json(records::to_json(v));
  EXPECT_EQ(vb.trajectory, v.trajectory);
  EXPECT_EQ(vb.verdict, v.verdict);
  EXPECT_EQ(vb.raw_last_line, v.raw_last_line);
  EXPECT_EQ(vb.status, v.status);
}

TEST(Records, JsonlLineNumbersInErrors) {
  std::istringstream in("{\"a\":1}\n\nnot json\n");
  try {
    records::read_jsonl(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
}

}  // namespace
}  // namespace vscale::dataset
