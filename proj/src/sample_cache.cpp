#include "vscale/sample_cache.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <sstream>
#include <unistd.h>

#include "json.hpp"
#include "vscale/error.hpp"

namespace vscale::orchestrator {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::solver: return "solver";
    case Role::verifier: return "verifier";
    case Role::summarizer: return "summarizer";
  }
  return "unknown";
}

Digest sha256(std::string_view bytes) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size()) {
    throw Error(ErrorCode::io_error, "SHA-256 failed");
  }
  return out;
}

std::string to_hex(const Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (std::uint8_t b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

Digest prompt_digest(std::string_view prompt, double temperature) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, temperature);
  std::string bytes(prompt);
  bytes.push_back('\0');
  bytes.append(buf, res.ptr);
  return sha256(bytes);
}

std::string SampleKey::address() const {
  std::string bytes;
  bytes.append(to_string(role));
  bytes.push_back('\0');
  bytes.append(model_name);
  bytes.push_back('\0');
  bytes.append(to_hex(prompt_digest));
  bytes.push_back('\0');
  bytes.append(std::to_string(sample_index));
  return to_hex(sha256(bytes));
}

SampleCache::SampleCache(fs::path dir, std::string run_name) : dir_(std::move(dir)), run_name_(std::move(run_name)) {
  if (run_name_.empty()) {
    auto now = std::chrono::system_clock::now().time_since_epoch();
    run_name_ = "run-" + std::to_string(std::chrono::duration_cast<std::chrono::milliseconds>(now).count()) + "-" +
                std::to_string(::getpid());
  }
}

fs::path SampleCache::object_path(const SampleKey& key) const {
  std::string address = key.address();
  return dir_ / "objects" / address.substr(0, 2) / (address + ".json");
}

bool SampleCache::contains(const SampleKey& key) const { return fs::exists(object_path(key)); }

std::optional<std::string> SampleCache::get(const SampleKey& key) const {
  std::ifstream in(object_path(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    json j = json::parse(buf.str());
    return j.at("content").get<std::string>();
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

bool SampleCache::put(const SampleKey& key, std::string_view content) {
  fs::path target = object_path(key);
  std::lock_guard lock(write_mutex_);
  if (fs::exists(target)) return false;
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + target.parent_path().string() + ": " + ec.message());

  json object{{"version", kFormatVersion},
              {"role", to_string(key.role)},
              {"model", key.model_name},
              {"prompt_digest", to_hex(key.prompt_digest)},
              {"sample_index", key.sample_index},
              {"content", content}};
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
    out << object.dump();
    out.flush();
    if (!out) throw Error(ErrorCode::io_error, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::io_error, "cannot rename into " + target.string() + ": " + ec.message());
  }

  if (!manifest_.is_open()) {
    fs::create_directories(dir_ / "manifests");
    manifest_.open(dir_ / "manifests" / (run_name_ + ".jsonl"), std::ios::app);
    if (!manifest_) throw Error(ErrorCode::io_error, "cannot open cache manifest");
    manifest_ << json{{"format", "vscale-cache-manifest"}, {"version", kFormatVersion}, {"run", run_name_}}.dump()
              << '\n';
  }
  manifest_ << json{{"address", key.address()},
                    {"role", to_string(key.role)},
                    {"model", key.model_name},
                    {"prompt_digest", to_hex(key.prompt_digest)},
                    {"sample_index", key.sample_index}}
                   .dump()
            << '\n';
  manifest_.flush();
  return true;
}

}  // namespace vscale::orchestrator
