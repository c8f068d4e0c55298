#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace rankwise {

struct ListenAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8080;
};

/// Accepts "host:port", ":port" or "port". Port 0 picks a free port.
ListenAddress parse_listen(std::string_view text);

struct ServiceConfig {
  std::filesystem::path rules;  // empty: built-in default rule base
  std::filesystem::path store = "rankwise-store";
  ListenAddress listen;
};

/// key = value lines with keys rules, store and listen; '#' starts a comment.
/// Relative paths are resolved against the file's directory. Throws
/// ValidationError naming the line on unknown keys or malformed lines.
ServiceConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ServiceConfig load_config(const std::filesystem::path& path);

/// RANKWISE_STORE, RANKWISE_LISTEN and RANKWISE_RULES take precedence over
/// the file.
void apply_environment(ServiceConfig& config);

}  // namespace rankwise
