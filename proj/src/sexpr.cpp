// SPDX-License-Identifier: Apache-2.0
#include "pcat/sexpr.hpp"

#include <fstream>
#include <sstream>

namespace pcat {

const std::string& SExpr::head() const {
  if (!is_list || items.empty() || items[0].is_list) fail("expected (head ...)");
  return items[0].atom;
}

void SExpr::fail(const std::string& msg) const {
  throw ParseError(msg + " near " + to_string(*this).substr(0, 60), line, col);
}

namespace {

bool is_delim(char c) {
  return c == '(' || c == ')' || c == ';' || c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

struct Reader {
  std::string_view s;
  size_t i = 0;
  int line = 1;
  int col = 1;

  void advance() {
    if (s[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  }

  void skip() {
    while (i < s.size()) {
      char c = s[i];
      if (c == ';') {
        while (i < s.size() && s[i] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else {
        break;
      }
    }
  }

  SExpr read() {
    skip();
    if (i >= s.size()) throw ParseError("unexpected end of input, expected expression", line, col);
    SExpr e;
    e.line = line;
    e.col = col;
    if (s[i] == ')') throw ParseError("unexpected ')'", line, col);
    if (s[i] == '(') {
      advance();
      e.is_list = true;
      for (;;) {
        skip();
        if (i >= s.size()) throw ParseError("unterminated list opened here", e.line, e.col);
        if (s[i] == ')') {
          advance();
          break;
        }
        e.items.push_back(read());
      }
      return e;
    }
    size_t start = i;
    while (i < s.size() && !is_delim(s[i])) advance();
    e.atom = std::string(s.substr(start, i - start));
    return e;
  }
};

void render(const SExpr& e, std::string& out) {
  if (!e.is_list) {
    out += e.atom;
    return;
  }
  out += '(';
  for (size_t k = 0; k < e.items.size(); ++k) {
    if (k) out += ' ';
    render(e.items[k], out);
  }
  out += ')';
}

void pretty(const SExpr& e, size_t width, int indent, std::string& out) {
  std::string flat = to_string(e);
  if (!e.is_list || flat.size() + indent <= width || e.items.size() < 2) {
    out += flat;
    return;
  }
  out += '(';
  render(e.items[0], out);
  for (size_t k = 1; k < e.items.size(); ++k) {
    out += '\n';
    out.append(indent + 2, ' ');
    pretty(e.items[k], width, indent + 2, out);
  }
  out += ')';
}

}  // namespace

std::vector<SExpr> parse_sexprs(std::string_view text) {
  Reader r{text};
  std::vector<SExpr> out;
  for (;;) {
    r.skip();
    if (r.i >= text.size()) break;
    out.push_back(r.read());
  }
  return out;
}

SExpr parse_sexpr(std::string_view text) {
  Reader r{text};
  SExpr e = r.read();
  r.skip();
  if (r.i < text.size()) throw ParseError("trailing input after expression", r.line, r.col);
  return e;
}

std::string to_string(const SExpr& e) {
  std::string out;
  render(e, out);
  return out;
}

std::string to_pretty(const SExpr& e, size_t width) {
  std::string out;
  pretty(e, width, 0, out);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pcat
