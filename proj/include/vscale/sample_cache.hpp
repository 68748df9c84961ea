#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace vscale::orchestrator {

enum class Role { solver, verifier, summarizer };

std::string_view to_string(Role role);

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::string_view bytes);
std::string to_hex(const Digest& digest);

/// SHA-256 over the exact prompt bytes followed by the temperature.
Digest prompt_digest(std::string_view prompt, double temperature);

/// Identity of one cached completion.
struct SampleKey {
  Role role = Role::solver;
  std::string model_name;
  Digest prompt_digest{};
  int sample_index = 0;

  /// Content address: SHA-256 of all four fields, hex encoded.
  std::string address() const;
};

// Content-addressed, append-only store of completions.
//
//   <dir>/objects/<first two hex chars>/<address>.json   one completion
//   <dir>/manifests/<run>.jsonl                           versioned header
//                                                         line, then one
//                                                         line per object
//                                                         written in the run
//
// Objects are written to a temporary file and renamed into place, so a
// crash never leaves a partial object and existing objects are never
// rewritten. Safe for one writing process with any number of readers.
class SampleCache {
 public:
  static constexpr int kFormatVersion = 1;

  explicit SampleCache(std::filesystem::path dir, std::string run_name = {});

  std::optional<std::string> get(const SampleKey& key) const;
  /// Stores `content` unless the key is already present. Returns true when
  /// a new object was written.
  bool put(const SampleKey& key, std::string_view content);
  bool contains(const SampleKey& key) const;

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path object_path(const SampleKey& key) const;

 private:
  std::filesystem::path dir_;
  std::string run_name_;
  std::mutex write_mutex_;
  std::ofstream manifest_;
};

}  // namespace vscale::orchestrator
