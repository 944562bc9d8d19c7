#pragma once

// Line-oriented textual form of processes (`.ipa` files).
//
//   program    := (line NEWLINE)*
//   line       := comment | statement | empty
//   comment    := '#' any-text
//   statement  := IDENT '(' [arg (',' arg)*] ')'
//   arg        := element | symbol | image | number
//   element    := '@' IDENT '.' IDENT
//   symbol     := '"' escaped-chars '"'
//   image      := 'img(' '"' path '"' [',' INT ',' INT ',' INT ',' INT] ')'
//   number     := ['-'|'+'] digits ['.' digits]      (kept as a symbol)
//
// Escapes inside quotes: \" \\ \n \r \t. Whitespace between tokens is ignored.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ipa/process_ir.hpp"

namespace ipa {

struct SourceText {
  std::string text;
  std::optional<std::string> origin;
};

enum class Severity { error, warning };

struct ParseDiagnostic {
  std::size_t line_number = 0;  // 1-based
  std::size_t column = 0;       // 1-based
  std::string message;
  Severity severity = Severity::error;
};

inline std::string format_diagnostic(const ParseDiagnostic& d, std::string_view origin = {}) {
  std::ostringstream os;
  if (!origin.empty()) os << origin << ':';
  os << d.line_number << ':' << d.column << ": " << (d.severity == Severity::error ? "error" : "warning") << ": "
     << d.message;
  return os.str();
}

struct ParseResult {
  std::optional<Process> process;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return process.has_value(); }
};

inline constexpr std::size_t kMaxDiagnostics = 100;

namespace detail {

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_number) : s_(line), line_(line_number) {}

  // Returns nullopt for blank/comment lines and on error (see error()).
  std::optional<Statement> run() {
    skip_ws();
    if (at_end() || peek() == '#') return std::nullopt;
    return statement();
  }

  const std::optional<ParseDiagnostic>& error() const { return error_; }

 private:
  struct Failure {};

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
  std::optional<ParseDiagnostic> error_;

  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  void skip_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  [[noreturn]] void fail(std::size_t at, std::string msg) {
    error_ = ParseDiagnostic{line_, at + 1, std::move(msg), Severity::error};
    throw Failure{};
  }

  static bool ident_head(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
  static bool ident_tail(char c) { return ident_head(c) || (c >= '0' && c <= '9') || c == '-'; }
  static bool digit(char c) { return c >= '0' && c <= '9'; }

  std::string ident() {
    std::size_t start = pos_;
    if (at_end() || !ident_head(peek())) return {};
    while (!at_end() && ident_tail(peek())) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  std::optional<Statement> statement() {
    try {
      std::size_t start = pos_;
      Statement st;
      st.action = ident();
      if (st.action.empty()) {
        if (peek() == '(') fail(start, "empty action name");
        fail(start, std::string("unknown token '") + peek() + "'");
      }
      skip_ws();
      if (at_end()) fail(pos_, "expected '(' after action name");
      if (peek() != '(') fail(pos_, std::string("unknown token '") + peek() + "', expected '('");
      const std::size_t open = pos_++;
      skip_ws();
      if (!at_end() && peek() == ')') {
        ++pos_;
      } else {
        for (;;) {
          skip_ws();
          if (at_end()) fail(open, "unbalanced parenthesis: missing ')'");
          st.args.push_back(argument(open));
          skip_ws();
          if (at_end()) fail(open, "unbalanced parenthesis: missing ')'");
          if (peek() == ',') {
            ++pos_;
            continue;
          }
          if (peek() == ')') {
            ++pos_;
            break;
          }
          fail(pos_, std::string("unknown token '") + peek() + "', expected ',' or ')'");
        }
      }
      skip_ws();
      if (!at_end()) {
        if (peek() == ')') fail(pos_, "unbalanced parenthesis: unexpected ')'");
        fail(pos_, "unexpected trailing input after statement");
      }
      return st;
    } catch (const Failure&) {
      return std::nullopt;
    }
  }

  ArgumentValue argument(std::size_t open) {
    const char c = peek();
    if (c == '@') return element();
    if (c == '"') return ArgumentValue::symbol(quoted());
    if (digit(c) || ((c == '-' || c == '+') && pos_ + 1 < s_.size() && digit(s_[pos_ + 1])))
      return ArgumentValue::symbol(number());
    if (s_.substr(pos_, 4) == "img(") return image();
    if (c == ',') fail(pos_, "missing argument before ','");
    if (c == ')') fail(pos_, "missing argument before ')'");
    (void)open;
    fail(pos_, std::string("unknown token '") + c + "'");
  }

  ArgumentValue element() {
    const std::size_t start = pos_++;
    std::string iface = ident();
    if (iface.empty()) fail(start, "malformed element reference: expected interface id after '@'");
    if (at_end() || peek() != '.') fail(start, "malformed element reference: expected '.' after interface id");
    ++pos_;
    std::string elem = ident();
    if (elem.empty()) fail(start, "malformed element reference: expected element id after '.'");
    return ArgumentValue::element(std::move(iface), std::move(elem));
  }

  std::string quoted() {
    const std::size_t start = pos_++;
    std::string out;
    while (!at_end()) {
      char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (at_end()) break;
      char e = s_[pos_++];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case 't': out += '\t'; break;
        default: fail(pos_ - 2, std::string("unknown escape sequence '\\") + e + "'");
      }
    }
    fail(start, "unbalanced quote: unterminated string");
  }

  std::string number() {
    const std::size_t start = pos_;
    if (peek() == '-' || peek() == '+') ++pos_;
    while (!at_end() && digit(peek())) ++pos_;
    if (!at_end() && peek() == '.') {
      ++pos_;
      if (at_end() || !digit(peek())) fail(start, "malformed number literal");
      while (!at_end() && digit(peek())) ++pos_;
    }
    if (!at_end() && (ident_tail(peek()) || peek() == '.')) fail(start, "malformed number literal");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::int64_t integer() {
    skip_ws();
    const std::size_t start = pos_;
    while (!at_end() && digit(peek())) ++pos_;
    if (start == pos_) fail(start, "expected non-negative integer coordinate");
    if (pos_ - start > 15) fail(start, "coordinate out of range");
    return std::stoll(std::string(s_.substr(start, pos_ - start)));
  }

  ArgumentValue image() {
    const std::size_t start = pos_;
    pos_ += 4;
    skip_ws();
    if (at_end() || peek() != '"') fail(pos_, "malformed image reference: expected quoted path");
    std::string path = quoted();
    skip_ws();
    std::optional<BoundingBox> bbox;
    if (!at_end() && peek() == ',') {
      std::int64_t v[4];
      for (int i = 0; i < 4; ++i) {
        skip_ws();
        if (at_end() || peek() != ',') fail(pos_, "malformed image region: expected four coordinates");
        ++pos_;
        v[i] = integer();
      }
      BoundingBox b{v[0], v[1], v[2], v[3]};
      if (!b.valid()) fail(start, "malformed image region: requires x0 <= x1 and y0 <= y1");
      bbox = b;
      skip_ws();
    }
    if (at_end() || peek() != ')') fail(start, "unbalanced parenthesis: image reference missing ')'");
    ++pos_;
    return ArgumentValue::image(std::move(path), bbox);
  }
};

}  // namespace detail

inline ParseResult parse(const SourceText& src) {
  ParseResult result;
  Process p;
  std::string_view rest = src.text;
  std::size_t line_number = 0;
  while (!rest.empty()) {
    ++line_number;
    std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    detail::LineParser lp(line, line_number);
    auto st = lp.run();
    if (lp.error()) {
      if (result.diagnostics.size() < kMaxDiagnostics) result.diagnostics.push_back(*lp.error());
    } else if (st) {
      p.statements.push_back(std::move(*st));
    }
  }
  if (result.diagnostics.empty()) result.process = std::move(p);
  return result;
}

inline ParseResult parse(std::string_view text) { return parse(SourceText{std::string(text), std::nullopt}); }

/// One canonical statement per line, LF-terminated.
inline std::string serialize_statement(const Statement& st) {
  std::string out = st.action;
  out += '(';
  for (std::size_t i = 0; i < st.args.size(); ++i) {
    if (i) out += ", ";
    const auto& a = st.args[i];
    switch (a.kind()) {
      case ArgKind::element:
        out += '@' + a.as_element().interface_id + '.' + a.as_element().element_id;
        break;
      case ArgKind::symbol: detail::append_quoted(out, a.as_symbol().text); break;
      case ArgKind::image: {
        const auto& im = a.as_image();
        out += "img(";
        detail::append_quoted(out, im.path);
        if (im.bounding_box) {
          const auto& b = *im.bounding_box;
          out += ", " + std::to_string(b.x0) + ", " + std::to_string(b.y0) + ", " + std::to_string(b.x1) + ", " +
                 std::to_string(b.y1);
        }
        out += ')';
        break;
      }
    }
  }
  out += ')';
  return out;
}

inline SourceText serialize(const Process& p) {
  auto problems = well_formedness_problems(p);
  if (!problems.empty()) throw std::invalid_argument("cannot serialize process: " + problems.front());
  SourceText out;
  for (const auto& st : p.statements) {
    out.text += serialize_statement(st);
    out.text += '\n';
  }
  return out;
}

inline std::optional<SourceText> read_source(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return SourceText{ss.str(), path};
}

}  // namespace ipa
