#include "geo3d/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "geo3d/error.hpp"
#include "geo3d/version.hpp"

namespace geo3d {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double_value(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != value.size() || value.empty())
    fail(ErrorKind::config,
         "config key \"" + key + "\": expected a number, got \"" + value + "\"");
  return v;
}

std::uint64_t parse_u64_value(const std::string& key,
                              const std::string& value) {
  if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos)
    fail(ErrorKind::config, "config key \"" + key +
                                "\": expected a non-negative integer, got \"" +
                                value + "\"");
  try {
    return std::stoull(value);
  } catch (const std::exception&) {
    fail(ErrorKind::config,
         "config key \"" + key + "\": integer out of range: \"" + value + "\"");
  }
}

}  // namespace

void RunConfig::validate() const {
  if (task != "detect" && task != "ground")
    fail(ErrorKind::config,
         "task must be \"detect\" or \"ground\", got \"" + task + "\"");
  if (estimator != "gt_oracle" && estimator != "category_prior")
    fail(ErrorKind::config,
         "estimator must be \"gt_oracle\" or \"category_prior\", got \"" +
             estimator + "\"");
  if (!(threshold > 0.0 && threshold < 1.0))
    fail(ErrorKind::config, "threshold must lie in (0, 1), got " +
                                std::to_string(threshold));
  sampling.validate();
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::config, "config line " + std::to_string(lineno) +
                                  ": expected key=value, got \"" + line + "\"");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      fail(ErrorKind::config,
           "config line " + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

RunConfig resolve_config(const std::map<std::string, std::string>& file_values) {
  RunConfig cfg;
  cfg.raw = file_values;
  for (const auto& [key, value] : file_values) {
    if (key == "root")
      cfg.root = value;
    else if (key == "task")
      cfg.task = value;
    else if (key == "estimator")
      cfg.estimator = value;
    else if (key == "out")
      cfg.out_path = value;
    else if (key == "category_set")
      cfg.category_set_path = value;
    else if (key == "threshold")
      cfg.threshold = parse_double_value(key, value);
    else if (key == "seed")
      cfg.sampling.seed = parse_u64_value(key, value);
    else if (key == "n_points")
      cfg.sampling.n_points = static_cast<int>(parse_u64_value(key, value));
    else if (key == "min_depth")
      cfg.sampling.min_depth = parse_double_value(key, value);
    else
      fail(ErrorKind::config, "unknown config key \"" + key + "\"");
  }
  if (const char* env = std::getenv("GEO_ANCHOR_SEED")) {
    cfg.sampling.seed = parse_u64_value("GEO_ANCHOR_SEED", env);
    cfg.raw["seed"] = env;
  }
  return cfg;
}

std::uint64_t config_digest(const std::map<std::string, std::string>& values) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [key, value] : values) {  // std::map iterates sorted
    mix(key);
    mix("=");
    mix(value);
    mix("\n");
  }
  return h;
}

std::string config_digest_hex(const std::map<std::string, std::string>& values) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_digest(values)));
  return buf;
}

ojson provenance_json(const RunConfig& cfg) {
  ojson j;
  j["version"] = kVersion;
  j["seed"] = cfg.sampling.seed;
  j["config_digest"] = config_digest_hex(cfg.raw);
  return j;
}

std::set<std::string> load_category_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open category set file " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (!line.empty()) out.insert(line);
  }
  return out;
}

}  // namespace geo3d
