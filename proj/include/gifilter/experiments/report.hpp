// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <deque>
#include <string>
#include <utility>
#include <vector>

namespace gifilter::experiments {

inline constexpr const char* kVersion = "gifilter 0.1.0";

/// Shortest text that round-trips a double.
inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string num(long x) { return std::to_string(x); }
inline std::string num(int x) { return std::to_string(x); }

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;  // measured values against the pinned thresholds
};

/// Plot-ready CSV: one header, rows of preformatted cells.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  template <class... T>
  void add(const T&... cells) {
    rows.push_back({cell(cells)...});
  }

  std::string csv() const {
    std::string out;
    append_row(out, columns);
    for (const auto& r : rows) append_row(out, r);
    return out;
  }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class N>
  static std::string cell(N x) {
    return num(x);
  }

  static void append_row(std::string& out, const std::vector<std::string>& r) {
    for (size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += r[i];
    }
    out += '\n';
  }
};

struct Report {
  std::vector<Check> checks;
  std::deque<Table> tables;  // stable references from table()

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  void check(std::string name, bool pass, std::string detail) {
    checks.push_back({std::move(name), pass, std::move(detail)});
  }

  Table& table(std::string name, std::vector<std::string> columns) {
    tables.push_back({std::move(name), std::move(columns), {}});
    return tables.back();
  }

  void merge(Report o) {
    for (auto& c : o.checks) checks.push_back(std::move(c));
    for (auto& t : o.tables) tables.push_back(std::move(t));
  }

  /// All tables concatenated, each preceded by "# name": the byte stream the
  /// determinism check compares.
  std::string csv_bundle() const {
    std::string out;
    for (const auto& t : tables) out += "# " + t.name + "\n" + t.csv();
    return out;
  }
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace gifilter::experiments
