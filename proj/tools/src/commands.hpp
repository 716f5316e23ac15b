#pragma once

#include <filesystem>
#include <string>

#include "config.hpp"

namespace msacm::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kEstimationFailure = 3, kTaskError = 4 };

/// Holds `<dir>/.msacm.lock` for the lifetime of a command.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

void cmd_simulate(const RunConfig& config);
void cmd_fit(const RunConfig& config);
void cmd_classify(const RunConfig& config);
void cmd_diagnose(const RunConfig& config);
void cmd_compare(const RunConfig& config);

/// Dispatches `command`, mapping exceptions onto exit codes; errors go to stderr.
int run_command(const std::string& command, const RunConfig& config);

}  // namespace msacm::cli
