#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ecg/common.hpp"

namespace ecg::cli {

/// Flat "key = value" file with section-prefixed keys (train.batch_size).
/// '#' starts a comment. Later duplicates win.
class ConfigMap {
 public:
  ConfigMap() = default;
  static ConfigMap parse_file(const std::string& path);
  static ConfigMap parse_text(const std::string& text);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }
  void set(const std::string& key, const std::string& value) {
    entries_[key] = value;
  }

 private:
  std::map<std::string, std::string> entries_;
};

/// Precedence: explicit flag > config file > default.
std::string resolve_value(bool flag_set, const std::string& flag_value,
                          const ConfigMap& file, const std::string& key,
                          const std::string& default_value);

/// The manifest doubles as a config file: "command = <subcommand>" plus every
/// resolved key. Feeding it back via --config reproduces the run.
void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>&
                        resolved_entries);

/// Comma list like "0.3,0.4,0.5" or values joined by commas.
std::vector<double> parse_double_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

}  // namespace ecg::cli
