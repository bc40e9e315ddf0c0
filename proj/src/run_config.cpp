#include "eeg2shape/run_config.hpp"

#include <algorithm>
#include <fstream>

namespace e2s {

std::vector<std::pair<std::string, std::string>> read_run_config(
    const std::string& path, const std::vector<std::string>& allowed_keys) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file '" + path + "'");

  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (std::find(allowed_keys.begin(), allowed_keys.end(), key) == allowed_keys.end()) {
      throw config_error("config line " + std::to_string(line_no) + ": unknown key '" + key +
                         "'");
    }
    entries.emplace_back(key, value);
  }
  return entries;
}

}  // namespace e2s
