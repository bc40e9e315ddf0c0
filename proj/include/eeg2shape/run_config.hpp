#pragma once

#include <string>
#include <utility>
#include <vector>

#include "eeg2shape/errors.hpp"

namespace e2s {

// key=value run configuration mirroring the CLI flags. Blank lines and '#'
// comments are allowed; keys outside `allowed_keys` are rejected with their
// line number.
std::vector<std::pair<std::string, std::string>> read_run_config(
    const std::string& path, const std::vector<std::string>& allowed_keys);

}  // namespace e2s
