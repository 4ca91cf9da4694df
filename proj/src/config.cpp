#include "ecg/config.hpp"

#include <fstream>
#include <sstream>

namespace ecg::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigMap ConfigMap::parse_text(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) +
                            " is not 'key = value': '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ValidationError("config line " + std::to_string(lineno) +
                            " has an empty key");
    map.entries_[key] = value;
  }
  return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

const std::string& ConfigMap::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    throw ValidationError("config key '" + key + "' not present");
  return it->second;
}

std::string resolve_value(bool flag_set, const std::string& flag_value,
                          const ConfigMap& file, const std::string& key,
                          const std::string& default_value) {
  if (flag_set) return flag_value;
  if (file.has(key)) return file.get(key);
  return default_value;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>&
                        resolved_entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest '" + path + "'");
  out << "command = " << command << "\n";
  for (const auto& [k, v] : resolved_entries) out << k << " = " << v << "\n";
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError("cannot parse number '" + tok + "'");
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_double_list(text)) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace ecg::cli
