#pragma once

// Parameter resolution for the subcommands. Every parameter has a JSON key
// (snake_case) and a flag (--kebab-case). The resolved value is, in order of
// precedence: the flag, the config file, the default. The fully resolved
// object is embedded in every output.

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace ocp::cli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Kind { integer, unsigned_integer, real, text, boolean, int_list, real_list, unsigned_list };

class ParamSet {
 public:
  explicit ParamSet(CLI::App* app) : app_(app) {}

  /// Registers --kebab-key. A null default makes the parameter required unless
  /// `optional` is set.
  void add(const std::string& key, Kind kind, json fallback, const std::string& help, bool optional = false);

  /// Resolves flags over `file` (a config object) over defaults.
  void resolve(const json& file);

  const json& resolved() const noexcept { return resolved_; }
  bool has(const std::string& key) const { return resolved_.contains(key) && !resolved_.at(key).is_null(); }
  template <class T>
  T get(const std::string& key) const {
    return resolved_.at(key).get<T>();
  }
  template <class T>
  std::optional<T> maybe(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return resolved_.at(key).get<T>();
  }
  /// Fills in a value the command derived (e.g. an automatic depth).
  void set(const std::string& key, json value) { resolved_[key] = std::move(value); }

 private:
  struct Param {
    std::string key;
    Kind kind;
    json fallback;
    bool optional;
    std::string raw;
    CLI::Option* option = nullptr;
  };
  CLI::App* app_;
  std::vector<std::unique_ptr<Param>> params_;
  json resolved_ = json::object();
};

/// Reads a config file: a JSON object, a previous JSON result (its "config"
/// member is used), or a CSV result (the JSON on its leading '#' line).
/// Throws ConfigError.
json load_config_file(const std::string& path);

/// Selects the block for `command`: top-level keys overlaid by the member
/// named after the command, when present.
json config_block(const json& file, const std::string& command, const std::vector<std::string>& commands);

/// Shortest round-trip decimal with 17 significant digits.
std::string format_real(double x);

/// Header object shared by JSON and CSV outputs.
json provenance(const std::string& command, const json& config);

/// Writes to `path` ("-" means the stream).
void emit(const std::string& path, const std::string& text, std::ostream& stream);

}  // namespace ocp::cli
