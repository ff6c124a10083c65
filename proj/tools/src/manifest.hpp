#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ride::cli {

/// Key-value record of one command: the parsed flags (with defaults filled
/// in), derived settings, sub-seeds, files touched and the model hash.
/// Replaying the `arg.*` entries through the same parser reruns the command.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  const std::string& command() const { return command_; }

  void arg(const std::string& name, const std::string& value) { add("arg." + name, value); }
  void resolved(const std::string& name, const std::string& value) { add("resolved." + name, value); }
  void seed(const std::string& stream, std::uint64_t value) { add("seed." + stream, std::to_string(value)); }
  void input(const std::string& role, const std::filesystem::path& path) { add("input." + role, path.string()); }
  void output(const std::string& role, const std::filesystem::path& path);
  void model_hash(const std::filesystem::path& model_file);

  /// (flag, value) pairs in the order they were recorded.
  std::vector<std::pair<std::string, std::string>> args() const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  /// Next to the first recorded output: "<output>.manifest".
  std::filesystem::path default_path() const;
  /// Stamps the elapsed time and writes atomically.
  void write(const std::filesystem::path& path) const;

  static RunManifest read(const std::filesystem::path& path);

 private:
  void add(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }

  std::string command_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::filesystem::path> outputs_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace ride::cli
