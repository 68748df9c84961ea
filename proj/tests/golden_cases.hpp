#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "vscale/core.hpp"

// Inputs behind the files in tests/golden.
namespace vscale::golden {

inline Problem final_answer_problem() {
  return Problem{"mod5", "Find the remainder when $7^{2024}$ is divided by $5$.", "1", ProblemMode::final_answer};
}

inline Solution final_answer_solution() {
  Solution s;
  s.problem_id = "mod5";
  s.text =
      "Powers of $7$ modulo $5$ cycle through $2, 4, 3, 1$ with period $4$.\n"
      "Since $2024$ is a multiple of $4$, the remainder is $\\boxed{1}$.";
  return s;
}

inline Problem proof_problem() {
  return Problem{"odd-sum", "Prove that the sum of two odd integers is even.", std::nullopt, ProblemMode::proof};
}

inline Solution proof_solution() {
  Solution s;
  s.problem_id = "odd-sum";
  s.text = "Write the integers as $2a+1$ and $2b+1$. Their sum is $2(a+b+1)$, which is even.";
  return s;
}

inline std::string read_golden(const std::string& name) {
  std::ifstream in(std::string(VSCALE_GOLDEN_DIR) + "/" + name, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Verifier endings shaped like real transcripts: a closed think block, a
// short conclusion, the verdict line, then trailing blank lines or markup.
inline constexpr const char* kAcceptingTranscript =
    "<think>\nChecking the residues: 7 = 2 mod 5, 2^4 = 16 = 1 mod 5.\nAnswer: 0 would be wrong here.\n</think>\n\n"
    "Each residue step checks out and the cycle length is right, so the boxed value holds.\n\nAnswer: 1\n\n\n";
inline constexpr const char* kRejectingTranscript =
    "<think>\n...\n</think>\n\n"
    "Step 2 assumes the claim it is meant to prove, so the argument is circular even though the statement is true.\n\n"
    "Answer: 0\n\n  \\\\\n";

}  // namespace vscale::golden
