// Copyright 2026 The Microest Authors.
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

#ifndef MICROEST_CSV_H_
#define MICROEST_CSV_H_

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace microest {

// Minimal RFC 4180 reader: comma separated, double-quote quoting with ""
// escapes, quoted fields may span lines, CRLF or LF line ends. A leading
// UTF-8 byte order mark is skipped.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in);

  // Returns false at end of input.
  bool next(std::vector<std::string>& fields);

  // 1-based line number where the most recently returned row started.
  size_t line() const { return row_line_; }

 private:
  std::istream& in_;
  size_t line_ = 1;
  size_t row_line_ = 0;
  bool first_ = true;
};

std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

// Parses a finite double from the whole of `text` (surrounding blanks
// allowed). Returns nullopt for anything else, including inf and nan.
std::optional<double> parse_number(std::string_view text);

}  // namespace microest

#endif  // MICROEST_CSV_H_
