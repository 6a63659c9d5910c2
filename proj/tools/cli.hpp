/*
 * Copyright 2026 The ILE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef ILE_TOOLS_CLI_HPP
#define ILE_TOOLS_CLI_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ile::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,
  kUsageError = 2,  // bad flags, malformed or invalid config
  kRuntimeError = 3,
};

/// Thread count: the --jobs flag, then ILE_JOBS, then the OpenMP default
/// (nullopt). Throws ConfigError on a malformed value.
std::optional<int> resolve_jobs(std::optional<int> flag, const char* env);

/// Files produced by one command. Nothing touches the disk until commit,
/// which writes every file to a temp sibling first and then renames them
/// into place.
class Outputs {
 public:
  void add(const std::string& name, std::string content);
  const std::map<std::string, std::string>& files() const { return files_; }
  void commit(const std::string& dir) const;

 private:
  std::map<std::string, std::string> files_;
};

/// Entry point shared by the binary and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ile::cli

#endif  // ILE_TOOLS_CLI_HPP
