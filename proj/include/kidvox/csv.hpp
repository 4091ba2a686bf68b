// Copyright 2026 The kidvox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KIDVOX_CSV_HPP_
#define KIDVOX_CSV_HPP_

#include <string>
#include <vector>

namespace kidvox::csv {

// Splits one CSV record. Fields may be double-quoted; inside quotes, "" is
// a literal quote and commas are data. No multi-line fields.
std::vector<std::string> split_line(const std::string& line);

// Quotes a field only when it contains a comma, quote, or CR/LF.
std::string quote(const std::string& field);

// Joins fields into one record, quoting as needed.
std::string join(const std::vector<std::string>& fields);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads a whole file. First record is the header. Blank lines are skipped.
// Rows whose field count differs from the header raise DataError with the
// 1-based line number.
Table read_file(const std::string& path);

// Shortest decimal form that round-trips the exact double. Emitting the
// same bytes for the same bits is what makes output files byte-stable.
std::string format_double(double v);

// Strict numeric field parsers; raise DataError naming `what` on failure.
double parse_double(const std::string& s, const std::string& what);
long parse_long(const std::string& s, const std::string& what);

}  // namespace kidvox::csv

#endif  // KIDVOX_CSV_HPP_
