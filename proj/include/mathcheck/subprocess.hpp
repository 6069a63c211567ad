#pragma once

#include <string>
#include <vector>

namespace mathcheck {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
  bool timed_out = false;
};

// Runs argv[0] (looked up on PATH) with `input` on stdin. The child is killed
// after `timeout_ms` of wall-clock time. Throws Error when it cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input, int timeout_ms);

}  // namespace mathcheck
