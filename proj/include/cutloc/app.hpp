#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cutloc/config.hpp"

namespace cutloc {

const std::vector<std::string>& command_names();
bool is_command(std::string_view name);

struct RunOutcome {
  int exit_code = 0;  // 0 iff every check passed; 1 failed check; 2 error; 3 directory locked
  bool ok = false;
  std::filesystem::path out_dir;
  std::string error;
};

// Runs one command end to end and writes its artifacts plus report.json into
// config.out. Module errors are caught and recorded in the report.
RunOutcome run(std::string_view command, const RunConfig& config);

// Held while a run owns an output directory; a second holder fails.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

  static constexpr const char* kMarker = ".cutloc.lock";

 private:
  std::filesystem::path marker_;
};

class LockedError : public Error {
 public:
  using Error::Error;
};

}  // namespace cutloc
