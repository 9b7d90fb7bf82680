// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pcat {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int col, std::string file = {})
      : std::runtime_error(format(msg, line, col, file)), msg_(msg), file_(std::move(file)), line_(line), col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& file() const { return file_; }
  const std::string& message() const { return msg_; }

 private:
  static std::string format(const std::string& msg, int line, int col, const std::string& file) {
    return (file.empty() ? "" : file + ":") + std::to_string(line) + ":" + std::to_string(col) + ": " + msg;
  }
  std::string msg_;
  std::string file_;
  int line_;
  int col_;
};

struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  int line = 0;
  int col = 0;

  static SExpr make_atom(std::string a) {
    SExpr e;
    e.atom = std::move(a);
    return e;
  }
  static SExpr make_list(std::vector<SExpr> xs) {
    SExpr e;
    e.is_list = true;
    e.items = std::move(xs);
    return e;
  }

  bool is_atom() const { return !is_list; }
  bool is_atom(std::string_view a) const { return !is_list && atom == a; }
  // (head ...) test
  bool has_head(std::string_view h) const {
    return is_list && !items.empty() && items[0].is_atom(h);
  }
  const std::string& head() const;
  size_t size() const { return items.size(); }
  const SExpr& operator[](size_t i) const { return items.at(i); }

  [[noreturn]] void fail(const std::string& msg) const;
};

std::vector<SExpr> parse_sexprs(std::string_view text);
SExpr parse_sexpr(std::string_view text);  // exactly one expression
std::string to_string(const SExpr& e);
// multi-line rendering with two-space indentation for lists longer than width
std::string to_pretty(const SExpr& e, size_t width = 78);

std::string read_file(const std::string& path);

}  // namespace pcat
