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


#ifndef ILE_TOOLS_CONFIG_HPP
#define ILE_TOOLS_CONFIG_HPP

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ile::cli {

/// Config problem located at a line of the source file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// YAML document converted to JSON, with the 1-based source line of every
/// node keyed by JSON pointer.
struct ConfigDoc {
  std::string path;
  nlohmann::json root = nlohmann::json::object();
  std::map<std::string, int> lines;

  /// Line of `pointer`, or of its nearest ancestor present in the file.
  int line(const std::string& pointer) const;
  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const;
};

ConfigDoc parse_config(const std::string& text, const std::string& path);
ConfigDoc load_config(const std::string& path);

/// Typed, line-aware view of one mapping in the document.
class Section {
 public:
  Section(const ConfigDoc& doc, std::string pointer);

  const ConfigDoc& doc() const { return *doc_; }
  const std::string& pointer() const { return pointer_; }
  bool present() const { return node_ != nullptr; }
  bool has(const std::string& key) const;
  const nlohmann::json& json() const;
  const nlohmann::json& at(const std::string& key) const;
  Section child(const std::string& key) const;

  /// Rejects keys outside `allowed`, pointing at the offending line.
  void allow(std::initializer_list<const char*> allowed) const;

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  int integer(const std::string& key, std::optional<int> fallback = std::nullopt, int min = 0) const;
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const;
  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<int> int_list(const std::string& key, std::optional<std::vector<int>> fallback = std::nullopt) const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  /// Runs f; library errors it throws come back as ConfigError at `key`.
  template <class F>
  auto guard(const std::string& key, F&& f) const -> decltype(f()) {
    try {
      return f();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(key, e.what());
    }
  }

 private:
  std::string key_pointer(const std::string& key) const;

  const ConfigDoc* doc_;
  std::string pointer_;
  const nlohmann::json* node_;
};

}  // namespace ile::cli

#endif  // ILE_TOOLS_CONFIG_HPP
