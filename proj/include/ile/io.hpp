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


#ifndef ILE_IO_HPP
#define ILE_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ile/common.hpp"

namespace ile {

/// Shortest-safe text for a double: %.17g, so parsing gives the same bits.
std::string format_double(double v);

/// Label components joined by ';' (a scalar label prints as one number).
std::string format_label(const Label& y);
Label parse_label(const std::string& s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name; throws InputError when absent.
  std::size_t column(const std::string& name) const;
};

/// Plain comma-separated output; fields must not contain commas or quotes.
void write_csv(std::ostream& os, const CsvTable& table);
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

std::string read_text_file(const std::string& path);

/// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::string& path, const std::string& content);

/// Version tag carried by every JSON summary the tools emit.
inline constexpr int kSchemaVersion = 1;

}  // namespace ile

#endif  // ILE_IO_HPP
