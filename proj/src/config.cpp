#include "rankwise/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rankwise/error.hpp"

namespace rankwise {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::filesystem::path resolve(std::string_view value, const std::filesystem::path& base) {
  std::filesystem::path p{std::string(value)};
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

}  // namespace

ListenAddress parse_listen(std::string_view text) {
  ListenAddress out;
  const auto colon = text.rfind(':');
  std::string_view port = text;
  if (colon != std::string_view::npos) {
    if (colon > 0) out.host = std::string(text.substr(0, colon));
    port = text.substr(colon + 1);
  }
  unsigned value = 0;
  const auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (port.empty() || ec != std::errc{} || end != port.data() + port.size() || value > 65535) {
    throw ValidationError("listen address '" + std::string(text) + "' must be host:port with port 0-65535", "listen");
  }
  out.port = static_cast<std::uint16_t>(value);
  return out;
}

ServiceConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ServiceConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ValidationError(where + ": expected key = value", where);
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (value.empty()) throw ValidationError(where + ": empty value for '" + std::string(key) + "'", where);
    if (key == "rules") {
      config.rules = resolve(value, base_dir);
    } else if (key == "store") {
      config.store = resolve(value, base_dir);
    } else if (key == "listen") {
      config.listen = parse_listen(value);
    } else {
      throw ValidationError(where + ": unknown key '" + std::string(key) + "'", where);
    }
  }
  return config;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

void apply_environment(ServiceConfig& config) {
  if (const char* v = std::getenv("RANKWISE_STORE"); v && *v) config.store = v;
  if (const char* v = std::getenv("RANKWISE_RULES"); v && *v) config.rules = v;
  if (const char* v = std::getenv("RANKWISE_LISTEN"); v && *v) config.listen = parse_listen(v);
}

}  // namespace rankwise
