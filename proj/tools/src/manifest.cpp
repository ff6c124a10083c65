#include "manifest.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "ride/errors.hpp"
#include "ride/model_io.hpp"

namespace ride::cli {

RunManifest::RunManifest(std::string command) : command_(std::move(command)) {}

void RunManifest::output(const std::string& role, const std::filesystem::path& path) {
  outputs_.push_back(path);
  add("output." + role, path.string());
}

void RunManifest::model_hash(const std::filesystem::path& model_file) {
  char hex[16];
  std::snprintf(hex, sizeof hex, "%08x", crc32_of(read_file_bytes(model_file)));
  add("model_crc32", hex);
}

std::vector<std::pair<std::string, std::string>> RunManifest::args() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, value] : entries_) {
    if (key.rfind("arg.", 0) == 0) out.emplace_back(key.substr(4), value);
  }
  return out;
}

std::filesystem::path RunManifest::default_path() const {
  if (outputs_.empty()) throw std::logic_error("manifest has no recorded output");
  std::filesystem::path p = outputs_.front();
  p += ".manifest";
  return p;
}

void RunManifest::write(const std::filesystem::path& path) const {
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  std::ostringstream os;
  os << "# ride run manifest\n";
  os << "command = " << command_ << "\n";
  for (const auto& [key, value] : entries_) os << key << " = " << value << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", seconds);
  os << "duration_s = " << buf << "\n";
  const std::string text = os.str();
  write_file_atomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::string line;
  std::string command;
  std::vector<std::pair<std::string, std::string>> entries;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 3);
    if (key == "command") {
      command = value;
    } else {
      entries.emplace_back(std::move(key), std::move(value));
    }
  }
  if (command.empty()) throw FormatError(path.string() + ": manifest has no command");
  RunManifest m(command);
  m.entries_ = std::move(entries);
  return m;
}

}  // namespace ride::cli
