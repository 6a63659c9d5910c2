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

#ifndef ILE_JSON_UTIL_HPP
#define ILE_JSON_UTIL_HPP

#include <json.hpp>

#include "ile/common.hpp"

namespace ile {

// Dense arrays as {"rows", "cols", "data"} with column-major data. nlohmann
// prints doubles with max_digits10 digits, so values round-trip exactly.

inline nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw InputError("matrix record: data length does not match rows*cols");
  return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

inline nlohmann::json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vector vector_from_json(const nlohmann::json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size()));
}

inline nlohmann::json labels_to_json(const LabelList& labels) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& l : labels) arr.push_back(vector_to_json(l));
  return arr;
}

inline LabelList labels_from_json(const nlohmann::json& j) {
  LabelList out;
  for (const auto& e : j) {
    if (e.is_number())
      out.push_back(scalar_label(e.get<double>()));
    else
      out.push_back(vector_from_json(e));
  }
  return out;
}

}  // namespace ile

#endif  // ILE_JSON_UTIL_HPP
