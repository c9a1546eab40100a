#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "geo3d/codec.hpp"
#include "geo3d/tools.hpp"

namespace geo3d {

// Key=value run configuration. Precedence, lowest to highest: built-in
// defaults, config file, GEO_ANCHOR_SEED, explicit CLI flags.
struct RunConfig {
  std::string root;          // scene bundle directory
  std::string task = "detect";
  std::string estimator = "gt_oracle";  // | "category_prior"
  SamplingConfig sampling;
  std::string category_set_path;
  std::string out_path;
  double threshold = 0.25;

  std::map<std::string, std::string> raw;  // every key=value as loaded

  void validate() const;
};

// Parses `key=value` lines; '#' starts a comment, blank lines are skipped.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> load_config_file(const std::string& path);

// Applies recognized keys (root, task, estimator, out, category_set,
// threshold, seed, n_points, min_depth) onto defaults, then the
// GEO_ANCHOR_SEED environment variable if set.
RunConfig resolve_config(const std::map<std::string, std::string>& file_values);

// FNV-1a 64-bit digest of the canonical "key=value\n" listing, keys sorted.
std::uint64_t config_digest(const std::map<std::string, std::string>& values);
std::string config_digest_hex(const std::map<std::string, std::string>& values);

// {"version", "seed", "config_digest"} header stamped into every output.
ojson provenance_json(const RunConfig& cfg);

// One category per line; '#' comments and blank lines skipped.
std::set<std::string> load_category_set(const std::string& path);

}  // namespace geo3d
