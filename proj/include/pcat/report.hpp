// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pcat/propcat.hpp"

namespace pcat {

// Command report, rendered as text or as line-delimited JSON records.
// Record schema "pcat-report/1", one object per line, in this order:
//   {"record":"header","schema":"pcat-report/1","command":C,"inputs":[..]}
//   {"record":"output","key":K,"value":V}                      zero or more
//   {"record":"stat","condition":C,"space":N,"checked":N,"exhaustive":B,"seconds":X}
//   {"record":"verdict","name":N,"ok":B,"detail":D}
//   {"record":"witness","verdict":N,"condition":C,"witness":W,"lhs":L,"rhs":R}
//   {"record":"summary","ok":B,"seconds":X}
struct Report {
  struct Output {
    std::string key, value;
    bool operator==(const Output&) const = default;
  };
  struct Stat {
    std::string condition;
    std::int64_t space = 0, checked = 0;
    bool exhaustive = true;
    double seconds = 0;
    bool operator==(const Stat&) const = default;
  };
  struct Verdict {
    std::string name;
    bool ok = true;
    std::string detail;
    bool operator==(const Verdict&) const = default;
  };
  struct Witness {
    std::string verdict, condition, witness, lhs, rhs;
    bool operator==(const Witness&) const = default;
  };

  std::string command;
  std::vector<std::string> inputs;
  std::vector<Output> outputs;
  std::vector<Stat> stats;
  std::vector<Verdict> verdicts;
  std::vector<Witness> witnesses;
  double seconds = 0;

  bool ok() const;
  void output(std::string key, std::string value) { outputs.push_back({std::move(key), std::move(value)}); }
  void verdict(std::string name, bool ok, std::string detail = {});
  // one verdict for the whole check, with its statistics and witnesses
  void add(const std::string& name, const FaReport& r);

  std::string text() const;
  std::string records() const;
  static Report from_records(const std::string& text);
  bool operator==(const Report&) const = default;
};

// "C5.unit" -> "Condition 5 (C5.unit)"; other names unchanged
std::string cite_condition(const std::string& condition);

}  // namespace pcat
