#include "params.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace ocp::cli {

namespace {

std::string flag_name(const std::string& key) {
  std::string out = key;
  std::replace(out.begin(), out.end(), '_', '-');
  return "--" + out;
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& s, const std::string& flag) {
  try {
    std::size_t used = 0;
    T value{};
    if constexpr (std::is_same_v<T, double>)
      value = std::stod(s, &used);
    else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
      value = std::stoull(s, &used, 0);
    } else
      value = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw UsageError(fmt::format("invalid value '{}' for {}", s, flag));
  }
}

json parse_flag(const std::string& raw, Kind kind, const std::string& flag) {
  switch (kind) {
    case Kind::integer:
      return parse_number<long long>(raw, flag);
    case Kind::unsigned_integer:
      return parse_number<std::uint64_t>(raw, flag);
    case Kind::real:
      return parse_number<double>(raw, flag);
    case Kind::text:
      return raw;
    case Kind::boolean:
      if (raw == "true" || raw == "1") return true;
      if (raw == "false" || raw == "0") return false;
      throw UsageError(fmt::format("invalid value '{}' for {}", raw, flag));
    case Kind::int_list: {
      json arr = json::array();
      for (const auto& s : split_list(raw)) arr.push_back(parse_number<long long>(s, flag));
      return arr;
    }
    case Kind::real_list: {
      json arr = json::array();
      for (const auto& s : split_list(raw)) arr.push_back(parse_number<double>(s, flag));
      return arr;
    }
    case Kind::unsigned_list: {
      json arr = json::array();
      for (const auto& s : split_list(raw)) arr.push_back(parse_number<std::uint64_t>(s, flag));
      return arr;
    }
  }
  return nullptr;
}

bool matches(const json& v, Kind kind) {
  auto each = [&](auto pred) { return v.is_array() && std::all_of(v.begin(), v.end(), pred); };
  switch (kind) {
    case Kind::integer:
      return v.is_number_integer();
    case Kind::unsigned_integer:
      return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    case Kind::real:
      return v.is_number();
    case Kind::text:
      return v.is_string();
    case Kind::boolean:
      return v.is_boolean();
    case Kind::int_list:
      return each([](const json& x) { return x.is_number_integer(); });
    case Kind::real_list:
      return each([](const json& x) { return x.is_number(); });
    case Kind::unsigned_list:
      return each([](const json& x) { return x.is_number_unsigned(); });
  }
  return false;
}

}  // namespace

void ParamSet::add(const std::string& key, Kind kind, json fallback, const std::string& help, bool optional) {
  auto p = std::make_unique<Param>();
  p->key = key;
  p->kind = kind;
  p->fallback = std::move(fallback);
  p->optional = optional;
  p->option = app_->add_option(flag_name(key), p->raw, help);
  params_.push_back(std::move(p));
}

void ParamSet::resolve(const json& file) {
  for (auto it = file.begin(); it != file.end(); ++it) {
    const bool known = std::any_of(params_.begin(), params_.end(), [&](const auto& p) { return p->key == it.key(); });
    if (!known) throw ConfigError(fmt::format("unknown config key '{}'", it.key()));
  }
  for (const auto& p : params_) {
    const std::string flag = flag_name(p->key);
    json value = p->fallback;
    if (file.contains(p->key)) {
      value = file.at(p->key);
      if (!value.is_null() && !matches(value, p->kind))
        throw ConfigError(fmt::format("config key '{}' has the wrong type", p->key));
    }
    if (p->option->count() > 0) value = parse_flag(p->raw, p->kind, flag);
    if (value.is_null() && !p->optional) throw UsageError(fmt::format("missing required flag {}", flag));
    resolved_[p->key] = std::move(value);
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (!text.empty() && text[0] == '#') text = text.substr(1, text.find('\n') - 1);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed config '{}': {}", path, e.what()));
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (j.contains("config") && j.at("config").is_object()) return j.at("config");
  return j;
}

json config_block(const json& file, const std::string& command, const std::vector<std::string>& commands) {
  json out = json::object();
  for (auto it = file.begin(); it != file.end(); ++it) {
    if (std::find(commands.begin(), commands.end(), it.key()) == commands.end()) out[it.key()] = it.value();
  }
  if (file.contains(command)) {
    if (!file.at(command).is_object()) throw ConfigError(fmt::format("config block '{}' must be an object", command));
    for (auto it = file.at(command).begin(); it != file.at(command).end(); ++it) out[it.key()] = it.value();
  }
  return out;
}

std::string format_real(double x) { return fmt::format("{:.17g}", x); }

json provenance(const std::string& command, const json& config) {
  return json{{"schema_version", kSchemaVersion}, {"command", command}, {"config", config}};
}

void emit(const std::string& path, const std::string& text, std::ostream& stream) {
  if (path.empty() || path == "-") {
    stream << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot write output file '{}'", path));
  f << text;
}

}  // namespace ocp::cli
