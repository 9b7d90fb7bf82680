// SPDX-License-Identifier: Apache-2.0
#include "pcat/report.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pcat {

namespace {
constexpr const char* kSchema = "pcat-report/1";
using json = nlohmann::ordered_json;
}  // namespace

std::string cite_condition(const std::string& c) {
  if (c.size() >= 2 && c[0] == 'C' && std::isdigit(static_cast<unsigned char>(c[1])))
    return "Condition " + c.substr(1, c.find('.') == std::string::npos ? std::string::npos : c.find('.') - 1) + " (" +
           c + ")";
  return c;
}

bool Report::ok() const {
  for (const auto& v : verdicts)
    if (!v.ok) return false;
  return true;
}

void Report::verdict(std::string name, bool ok, std::string detail) {
  verdicts.push_back({std::move(name), ok, std::move(detail)});
}

void Report::add(const std::string& name, const FaReport& r) {
  for (const auto& s : r.stats) stats.push_back({s.condition, s.space, s.checked, s.exhaustive, s.seconds});
  std::string detail = r.exhaustive() ? "exhaustive" : "sampled";
  if (r.used_probe) detail += ", probe fibers";
  if (!r.ok) {
    detail = "violates";
    std::string last;
    for (const auto& v : r.violations)
      if (v.condition != last) {
        detail += " " + cite_condition(v.condition);
        last = v.condition;
      }
  }
  verdict(name, r.ok, detail);
  for (const auto& v : r.violations) witnesses.push_back({name, v.condition, v.witness, v.lhs, v.rhs});
}

std::string Report::text() const {
  std::ostringstream os;
  for (const auto& o : outputs) {
    if (o.value.find('\n') != std::string::npos) os << o.key << ":\n" << o.value << (o.value.back() == '\n' ? "" : "\n");
    else os << o.key << ": " << o.value << "\n";
  }
  for (const auto& s : stats)
    os << "  " << s.condition << ": " << s.checked << "/" << s.space << (s.exhaustive ? " exhaustive" : " sampled")
       << "\n";
  for (const auto& v : verdicts) {
    os << (v.ok ? "OK " : "FAIL ") << v.name;
    if (!v.detail.empty()) os << " (" << v.detail << ")";
    os << "\n";
    for (const auto& w : witnesses) {
      if (w.verdict != v.name) continue;
      os << "  " << cite_condition(w.condition) << ": " << w.witness;
      if (!w.lhs.empty() || !w.rhs.empty()) os << "\n    lhs = " << w.lhs << "\n    rhs = " << w.rhs;
      os << "\n";
    }
  }
  return os.str();
}

std::string Report::records() const {
  std::ostringstream os;
  os << json{{"record", "header"}, {"schema", kSchema}, {"command", command}, {"inputs", inputs}}.dump() << "\n";
  for (const auto& o : outputs) os << json{{"record", "output"}, {"key", o.key}, {"value", o.value}}.dump() << "\n";
  for (const auto& s : stats)
    os << json{{"record", "stat"},       {"condition", s.condition},   {"space", s.space},
               {"checked", s.checked},   {"exhaustive", s.exhaustive}, {"seconds", s.seconds}}
              .dump()
       << "\n";
  for (const auto& v : verdicts)
    os << json{{"record", "verdict"}, {"name", v.name}, {"ok", v.ok}, {"detail", v.detail}}.dump() << "\n";
  for (const auto& w : witnesses)
    os << json{{"record", "witness"}, {"verdict", w.verdict}, {"condition", w.condition},
               {"witness", w.witness}, {"lhs", w.lhs},         {"rhs", w.rhs}}
              .dump()
       << "\n";
  os << json{{"record", "summary"}, {"ok", ok()}, {"seconds", seconds}}.dump() << "\n";
  return os.str();
}

Report Report::from_records(const std::string& text) {
  Report r;
  std::istringstream is(text);
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    std::string kind = j.at("record");
    if (kind == "header") {
      if (j.at("schema") != kSchema) throw std::runtime_error("unsupported report schema " + j.at("schema").dump());
      r.command = j.at("command");
      r.inputs = j.at("inputs").get<std::vector<std::string>>();
      header = true;
    } else if (kind == "output") {
      r.outputs.push_back({j.at("key"), j.at("value")});
    } else if (kind == "stat") {
      r.stats.push_back({j.at("condition"), j.at("space"), j.at("checked"), j.at("exhaustive"), j.at("seconds")});
    } else if (kind == "verdict") {
      r.verdicts.push_back({j.at("name"), j.at("ok"), j.at("detail")});
    } else if (kind == "witness") {
      r.witnesses.push_back({j.at("verdict"), j.at("condition"), j.at("witness"), j.at("lhs"), j.at("rhs")});
    } else if (kind == "summary") {
      r.seconds = j.at("seconds");
    } else {
      throw std::runtime_error("unknown record kind " + kind);
    }
  }
  if (!header) throw std::runtime_error("report without a header record");
  return r;
}

}  // namespace pcat
