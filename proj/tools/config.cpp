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


#include "config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>

#include <yaml-cpp/yaml.h>

#include "ile/io.hpp"

namespace ile::cli {
namespace {

std::string escape_key(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

std::string parent_pointer(const std::string& p) {
  const auto pos = p.rfind('/');
  return pos == std::string::npos ? std::string() : p.substr(0, pos);
}

template <class T>
bool parse_whole(const std::string& s, T& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

nlohmann::json plain_scalar(const std::string& s) {
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  if (std::int64_t i; parse_whole(s, i)) return i;
  if (std::uint64_t u; parse_whole(s, u)) return u;
  if (s == ".inf" || s == ".Inf" || s == "+.inf" || s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-.inf" || s == "-.Inf" || s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == ".nan" || s == ".NaN") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(s.c_str(), &end);
  if (end == s.c_str() + s.size() && errno == 0) return d;
  return s;
}

nlohmann::json convert(const YAML::Node& node, const std::string& pointer, ConfigDoc& doc) {
  doc.lines[pointer] = node.Mark().line + 1;
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      // Quoted scalars carry the "!" tag and stay strings.
      if (node.Tag() == "!") return node.Scalar();
      return plain_scalar(node.Scalar());
    case YAML::NodeType::Sequence: {
      nlohmann::json arr = nlohmann::json::array();
      std::size_t i = 0;
      for (const auto& item : node) {
        arr.push_back(convert(item, pointer + "/" + std::to_string(i), doc));
        ++i;
      }
      return arr;
    }
    case YAML::NodeType::Map: {
      nlohmann::json obj = nlohmann::json::object();
      for (const auto& kv : node) {
        if (!kv.first.IsScalar()) {
          doc.lines[pointer + "/?"] = kv.first.Mark().line + 1;
          doc.fail(pointer + "/?", "mapping keys must be scalars");
        }
        const auto key = kv.first.Scalar();
        const auto child = pointer + "/" + escape_key(key);
        if (obj.contains(key)) {
          doc.lines[child] = kv.first.Mark().line + 1;
          doc.fail(child, "duplicate key '" + key + "'");
        }
        obj[key] = convert(kv.second, child, doc);
        doc.lines[child] = kv.first.Mark().line + 1;
      }
      return obj;
    }
  }
  return nullptr;
}

std::string display(const std::string& pointer) {
  if (pointer.empty()) return "(top level)";
  std::string out;
  for (char c : pointer.substr(1)) out += c == '/' ? '.' : c;
  return out;
}

}  // namespace

int ConfigDoc::line(const std::string& pointer) const {
  for (std::string p = pointer;; p = parent_pointer(p)) {
    if (auto it = lines.find(p); it != lines.end()) return it->second;
    if (p.empty()) return 1;
  }
}

void ConfigDoc::fail(const std::string& pointer, const std::string& message) const {
  throw ConfigError(path + ":" + std::to_string(line(pointer)) + ": " + display(pointer) + ": " + message);
}

ConfigDoc parse_config(const std::string& text, const std::string& path) {
  ConfigDoc doc;
  doc.path = path;
  YAML::Node node;
  try {
    node = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(path + ":" + std::to_string(e.mark.line + 1) + ": YAML syntax error: " + e.msg);
  }
  if (!node.IsMap()) {
    doc.lines[""] = node.IsDefined() && !node.IsNull() ? node.Mark().line + 1 : 1;
    doc.fail("", "config must be a mapping of sections");
  }
  doc.root = convert(node, "", doc);
  return doc;
}

ConfigDoc load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path);
}

Section::Section(const ConfigDoc& doc, std::string pointer) : doc_(&doc), pointer_(std::move(pointer)) {
  const auto ptr = nlohmann::json::json_pointer(pointer_);
  node_ = doc.root.contains(ptr) ? &doc.root.at(ptr) : nullptr;
  if (node_ && !node_->is_object()) doc.fail(pointer_, "expected a mapping");
}

std::string Section::key_pointer(const std::string& key) const {
  return key.empty() ? pointer_ : pointer_ + "/" + escape_key(key);
}

bool Section::has(const std::string& key) const {
  return node_ && node_->contains(key) && !node_->at(key).is_null();
}

const nlohmann::json& Section::json() const {
  static const nlohmann::json empty = nlohmann::json::object();
  return node_ ? *node_ : empty;
}

const nlohmann::json& Section::at(const std::string& key) const {
  if (!has(key)) fail(key, "required key is missing");
  return node_->at(key);
}

Section Section::child(const std::string& key) const { return Section(*doc_, key_pointer(key)); }

void Section::allow(std::initializer_list<const char*> allowed) const {
  if (!node_) return;
  for (const auto& [key, value] : node_->items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) {
      std::string list;
      for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
      fail(key, "unknown key (expected one of: " + list + ")");
    }
  }
}

void Section::fail(const std::string& key, const std::string& message) const {
  doc_->fail(key_pointer(key), message);
}

double Section::number(const std::string& key, std::optional<double> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    fail(key, "required key is missing");
  }
  const auto& v = node_->at(key);
  if (!v.is_number()) fail(key, "expected a number, got " + v.dump());
  const double d = v.get<double>();
  if (std::isnan(d)) fail(key, "must not be NaN");
  return d;
}

int Section::integer(const std::string& key, std::optional<int> fallback, int min) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    fail(key, "required key is missing");
  }
  const auto& v = node_->at(key);
  if (!v.is_number_integer()) fail(key, "expected an integer, got " + v.dump());
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
    fail(key, "integer out of range");
  const auto i = v.get<long long>();
  if (i < min) fail(key, "must be >= " + std::to_string(min) + ", got " + std::to_string(i));
  if (i > std::numeric_limits<int>::max()) fail(key, "integer out of range");
  return static_cast<int>(i);
}

std::uint64_t Section::seed(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const auto& v = node_->at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    fail(key, "seed must be a non-negative integer, got " + v.dump());
  return v.get<std::uint64_t>();
}

std::string Section::text(const std::string& key, std::optional<std::string> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    fail(key, "required key is missing");
  }
  const auto& v = node_->at(key);
  if (!v.is_string()) fail(key, "expected a string, got " + v.dump());
  return v.get<std::string>();
}

bool Section::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = node_->at(key);
  if (!v.is_boolean()) fail(key, "expected true or false, got " + v.dump());
  return v.get<bool>();
}

std::vector<int> Section::int_list(const std::string& key, std::optional<std::vector<int>> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    fail(key, "required key is missing");
  }
  const auto& v = node_->at(key);
  if (!v.is_array()) fail(key, "expected a list of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer() || v[i].get<long long>() < 1 ||
        v[i].get<long long>() > std::numeric_limits<int>::max())
      doc_->fail(key_pointer(key) + "/" + std::to_string(i), "expected a positive integer, got " + v[i].dump());
    out.push_back(v[i].get<int>());
  }
  return out;
}

}  // namespace ile::cli
