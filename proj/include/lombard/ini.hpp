// Copyright (c) 2026 lombardctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOMBARD_INI_HPP_
#define LOMBARD_INI_HPP_

#include <optional>
#include <string>
#include <vector>

namespace lombard {

// Structured `key = value` text with `[section]` headers, used for run
// configs and preset/binding files. Sections and keys keep file order;
// duplicate keys within a section are rejected at parse time.
struct IniSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
};

struct IniFile {
  std::vector<IniSection> sections;

  const IniSection* find_section(const std::string& name) const;
};

IniFile parse_ini(const std::string& text, const std::string& origin = "<string>");
IniFile load_ini(const std::string& path);

// Comma-separated helpers for list-valued entries.
std::vector<std::string> split_list(const std::string& csv);
std::vector<double> split_double_list(const std::string& csv, const std::string& context);

}  // namespace lombard

#endif  // LOMBARD_INI_HPP_
