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


#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "ile/io.hpp"
#include "ile/rng.hpp"

namespace ile {
namespace {

TEST(Io, DoubleRoundTripIsExact) {
  Rng r(11);
  for (int i = 0; i < 1000; ++i) {
    const double v = (r.uniform() - 0.5) * std::pow(10.0, static_cast<int>(r.uniform_index(40)) - 20);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Io, LabelRoundTrip) {
  Label y(3);
  y << 0.1, -2.5, 1.0 / 3.0;
  EXPECT_TRUE(same_label(parse_label(format_label(y)), y));
  EXPECT_EQ(format_label(scalar_label(2.0)), "2");
}

TEST(Io, ParseLabelRejectsGarbage) {
  EXPECT_THROW(parse_label("1;x"), InputError);
  EXPECT_THROW(parse_label(""), InputError);
}

TEST(Io, CsvRoundTrip) {
  CsvTable t{{"a", "b"}, {{"1", "2"}, {"3", "4"}}};
  std::stringstream ss;
  write_csv(ss, t);
  EXPECT_EQ(ss.str(), "a,b\n1,2\n3,4\n");
  const CsvTable back = read_csv(ss);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("b"), 1u);
  EXPECT_THROW(back.column("c"), InputError);
}

TEST(Io, CsvRaggedRowIsAnError) {
  std::stringstream ss("a,b\n1\n");
  EXPECT_THROW(read_csv(ss), InputError);
}

TEST(Io, CsvRejectsSeparatorInField) {
  std::stringstream ss;
  EXPECT_THROW(write_csv(ss, CsvTable{{"a"}, {{"1,2"}}}), InputError);
}

TEST(Io, AtomicWriteReplacesTarget) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ile_io_test";
  fs::remove_all(dir);
  const std::string path = (dir / "sub" / "out.txt").string();
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_text_file(path), "second");
  EXPECT_FALSE(fs::exists(path + ".tmp"));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace ile
