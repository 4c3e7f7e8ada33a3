// Copyright 2026 The lcnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lcnn {

/// Minimal RFC 4180 writer: CRLF line ends, fields quoted when they contain
/// a comma, quote, CR or LF; embedded quotes doubled.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void row(std::initializer_list<std::string_view> fields);
  void row(std::span<const std::string> fields);

 private:
  void field(std::string_view f, bool first);
  std::ostream& out_;
};

std::string csv_escape(std::string_view field);

/// Shortest decimal that round-trips to the same double.
std::string format_number(double v);

}  // namespace lcnn
