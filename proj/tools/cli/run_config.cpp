#include "cli/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>

#include "eventflow/error.hpp"

namespace eventflow::cli {

using nlohmann::json;

namespace {

enum class Kind { path, text, uint, sint, real, list, optional_uint, optional_sint };

const std::map<std::string, Kind>& key_kinds() {
  static const std::map<std::string, Kind> kinds{
      {"input_dir", Kind::path},     {"events", Kind::path},
      {"out", Kind::path},           {"template", Kind::path},
      {"flows", Kind::path},         {"seed", Kind::uint},
      {"window", Kind::sint},        {"flow_window", Kind::optional_sint},
      {"jump_min", Kind::sint},      {"jump_max", Kind::sint},
      {"jump_step", Kind::sint},     {"smoothing", Kind::optional_uint},
      {"exclude_source", Kind::list}, {"k_min", Kind::uint},
      {"k_max", Kind::uint},         {"linkage", Kind::list},
      {"space", Kind::text},         {"workers", Kind::uint},
      {"stride", Kind::sint},        {"band", Kind::optional_uint},
      {"n_dates", Kind::uint},       {"depth", Kind::real},
      {"top_n", Kind::uint},         {"dates", Kind::list},
      {"consensus", Kind::text},     {"gamma", Kind::real},
  };
  return kinds;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("invalid value '" + value + "' for " + key);
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ConfigError("invalid value '" + value + "' for " + key);
  }
  return out;
}

template <typename T>
T get_int(const json& doc, const std::string& key, T fallback) {
  if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_number_integer()) throw ConfigError(key + " must be an integer");
  if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
    throw ConfigError(key + " must be non-negative");
  }
  return v.get<T>();
}

template <typename T>
std::optional<T> get_optional_int(const json& doc, const std::string& key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return get_int<T>(doc, key, T{});
}

std::string get_text(const json& doc, const std::string& key, const std::string& fallback) {
  if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
  if (!doc.at(key).is_string()) throw ConfigError(key + " must be a string");
  return doc.at(key).get<std::string>();
}

std::vector<std::string> get_list(const json& doc, const std::string& key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return {};
  const auto& v = doc.at(key);
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw ConfigError(key + " must be a list of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ConfigError(key + " must be a list of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

void require_path(const fs::path& p, const std::string& what, bool directory) {
  if (p.empty()) throw ConfigError(what + " is required");
  std::error_code ec;
  const bool ok = directory ? fs::is_directory(p, ec) : fs::is_regular_file(p, ec);
  if (!ok) throw ConfigError(what + " does not exist: " + p.string());
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [key, kind] : key_kinds()) k.push_back(key);
    k.push_back("k_range");
    return k;
  }();
  return keys;
}

void apply_override(json& doc, const std::string& key, const std::string& value) {
  if (key == "k_range") {
    const auto sep = value.find_first_of(":-,");
    if (sep == std::string::npos) throw ConfigError("k_range must look like 2:8");
    doc["k_min"] = parse_number<std::uint64_t>("k_range", value.substr(0, sep));
    doc["k_max"] = parse_number<std::uint64_t>("k_range", value.substr(sep + 1));
    return;
  }
  const auto it = key_kinds().find(key);
  if (it == key_kinds().end()) throw ConfigError("unknown config key '" + key + "'");
  switch (it->second) {
    case Kind::path:
    case Kind::text:
      doc[key] = value;
      break;
    case Kind::uint:
      doc[key] = parse_number<std::uint64_t>(key, value);
      break;
    case Kind::sint:
      doc[key] = parse_number<std::int64_t>(key, value);
      break;
    case Kind::optional_uint:
      if (trim(value).empty() || trim(value) == "none") {
        doc[key] = nullptr;
      } else {
        doc[key] = parse_number<std::uint64_t>(key, value);
      }
      break;
    case Kind::optional_sint:
      if (trim(value).empty() || trim(value) == "none") {
        doc[key] = nullptr;
      } else {
        doc[key] = parse_number<std::int64_t>(key, value);
      }
      break;
    case Kind::real:
      doc[key] = parse_real(key, value);
      break;
    case Kind::list: {
      json arr = json::array();
      std::size_t start = 0;
      while (start <= value.size()) {
        const auto comma = value.find(',', start);
        const std::string item = trim(value.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!item.empty()) arr.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      doc[key] = arr;
      break;
    }
  }
}

json load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (doc.is_object() && doc.contains("config") && doc.at("config").is_object()) doc = doc.at("config");
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key_kinds().count(key) == 0) throw ConfigError("unknown config key '" + key + "'");
  }
  return doc;
}

json resolve(const std::optional<fs::path>& config_file, const std::map<std::string, std::string>& flags) {
  json doc = config_file ? load_config_file(*config_file) : json::object();
  for (const auto& key : config_keys()) {
    std::string name = kEnvPrefix;
    for (char c : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (const char* v = std::getenv(name.c_str())) apply_override(doc, key, v);
  }
  for (const auto& [key, value] : flags) apply_override(doc, key, value);
  return doc;
}

RunConfig from_json(const json& doc) {
  RunConfig c;
  c.input_dir = get_text(doc, "input_dir", "");
  c.events = get_text(doc, "events", "");
  c.out = get_text(doc, "out", "out");
  c.templ = get_text(doc, "template", "");
  c.flows = get_text(doc, "flows", "");
  c.seed = get_int<std::uint64_t>(doc, "seed", c.seed);
  c.jump.half_width = get_int<std::int64_t>(doc, "window", c.jump.half_width);
  c.jump.jump_min = get_int<std::int64_t>(doc, "jump_min", c.jump.jump_min);
  c.jump.jump_max = get_int<std::int64_t>(doc, "jump_max", c.jump.jump_max);
  c.jump.jump_step = get_int<std::int64_t>(doc, "jump_step", c.jump.jump_step);
  c.jump.smoothing = get_optional_int<std::size_t>(doc, "smoothing");
  c.flow_window = get_optional_int<std::int64_t>(doc, "flow_window");
  c.exclude_sources = get_list(doc, "exclude_source");
  c.k_min = get_int<std::size_t>(doc, "k_min", c.k_min);
  c.k_max = get_int<std::size_t>(doc, "k_max", c.k_max);
  c.workers = get_int<std::size_t>(doc, "workers", c.workers);
  c.stride = get_int<std::int64_t>(doc, "stride", c.stride);
  if (doc.contains("band")) c.band = get_optional_int<std::size_t>(doc, "band");
  c.n_dates = get_int<std::size_t>(doc, "n_dates", c.n_dates);
  c.top_n = get_int<std::size_t>(doc, "top_n", c.top_n);
  for (const std::string key : {"depth", "gamma"}) {
    if (doc.contains(key) && !doc.at(key).is_null() && !doc.at(key).is_number()) {
      throw ConfigError(key + " must be a number");
    }
  }
  c.depth = doc.value("depth", c.depth);
  c.gamma = doc.value("gamma", c.gamma);
  try {
    if (doc.contains("linkage")) {
      c.linkages.clear();
      for (const auto& l : get_list(doc, "linkage")) c.linkages.push_back(clustering::linkage_from_string(l));
    }
    c.space = clustering::cluster_space_from_string(get_text(doc, "space", "dtw"));
    c.consensus = studies::consensus_mode_from_string(get_text(doc, "consensus", "dba"));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  for (const auto& d : get_list(doc, "dates")) {
    const auto parsed = Date::parse(d);
    if (!parsed) throw ConfigError("invalid date '" + d + "' in dates");
    c.dates.push_back(*parsed);
  }
  return c;
}

json to_json(const RunConfig& c, const std::string& command) {
  json doc;
  doc["input_dir"] = c.input_dir.generic_string();
  doc["events"] = c.events.generic_string();
  doc["out"] = c.out.generic_string();
  doc["template"] = c.templ.generic_string();
  doc["flows"] = c.flows.generic_string();
  doc["seed"] = c.seed;
  doc["window"] = c.jump.half_width;
  doc["jump_min"] = c.jump.jump_min;
  doc["jump_max"] = c.jump.jump_max;
  doc["jump_step"] = c.jump.jump_step;
  doc["smoothing"] = c.jump.smoothing ? json(*c.jump.smoothing) : json(nullptr);
  doc["flow_window"] = c.flow_half_width(command);
  doc["exclude_source"] = c.exclude_sources;
  doc["k_min"] = c.k_min;
  doc["k_max"] = c.k_max;
  json links = json::array();
  for (auto l : c.linkages) links.push_back(std::string(clustering::to_string(l)));
  doc["linkage"] = links;
  doc["space"] = std::string(clustering::to_string(c.space));
  doc["workers"] = c.workers;
  doc["stride"] = c.stride;
  doc["band"] = c.band ? json(*c.band) : json(nullptr);
  doc["n_dates"] = c.n_dates;
  doc["depth"] = c.depth;
  doc["top_n"] = c.top_n;
  json dates = json::array();
  for (const auto& d : c.dates) dates.push_back(d.iso());
  doc["dates"] = dates;
  doc["consensus"] = std::string(studies::to_string(c.consensus));
  doc["gamma"] = c.gamma;
  return doc;
}

std::int64_t RunConfig::flow_half_width(const std::string& command) const {
  if (flow_window) return *flow_window;
  return command == "baseline" ? 30 : 28;
}

jumpflow::FlowParams RunConfig::flow_params(const std::string& command) const {
  jumpflow::FlowParams p;
  p.flow_half_width = flow_half_width(command);
  p.jump = jump;
  p.workers = workers;
  return p;
}

studies::ConsensusOptions RunConfig::consensus_options() const {
  studies::ConsensusOptions o;
  o.mode = consensus;
  o.soft.gamma = gamma;
  return o;
}

void RunConfig::validate(const std::string& command) const {
  try {
    jump.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (flow_half_width(command) < 1) throw ConfigError("flow_window must be at least 1");
  if (k_min < 2 || k_max < k_min) throw ConfigError("k range must satisfy 2 <= k_min <= k_max");
  if (linkages.empty()) throw ConfigError("at least one linkage is required");
  if (stride < 1) throw ConfigError("stride must be at least 1");
  if (!(depth >= 0.0)) throw ConfigError("depth must be non-negative");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (out.empty()) throw ConfigError("out is required");

  if (command == "entropy") {
    require_path(input_dir, "input_dir", true);
    if (events.empty() && dates.empty()) throw ConfigError("entropy needs events or dates");
    if (!events.empty()) require_path(events, "events", false);
  } else if (command == "flows") {
    require_path(input_dir, "input_dir", true);
    require_path(events, "events", false);
  } else if (command == "cluster") {
    if (!flows.empty()) {
      require_path(flows, "flows", false);
    } else {
      require_path(input_dir, "input_dir", true);
      require_path(events, "events", false);
    }
  } else if (command == "baseline") {
    require_path(input_dir, "input_dir", true);
    if (n_dates < 1) throw ConfigError("n_dates must be at least 1");
    if (!events.empty()) require_path(events, "events", false);
  } else if (command == "query") {
    require_path(input_dir, "input_dir", true);
    require_path(templ, "template", false);
  } else if (command == "plot") {
    require_path(input_dir.empty() ? out : input_dir, "results directory", true);
  }
}

}  // namespace eventflow::cli
