#pragma once

// In-memory representation of interfaces, arguments, statements, processes
// and program corpora, plus the statement encoding used by overlap metrics.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace ipa {

struct BoundingBox {
  std::int64_t x0 = 0;
  std::int64_t y0 = 0;
  std::int64_t x1 = 0;
  std::int64_t y1 = 0;

  static BoundingBox make(std::int64_t x0, std::int64_t y0, std::int64_t x1, std::int64_t y1) {
    BoundingBox b{x0, y0, x1, y1};
    if (!b.valid()) throw std::invalid_argument("bounding box must satisfy 0 <= x0 <= x1 and 0 <= y0 <= y1");
    return b;
  }

  bool valid() const { return x0 >= 0 && y0 >= 0 && x0 <= x1 && y0 <= y1; }
  std::int64_t width() const { return x1 - x0; }
  std::int64_t height() const { return y1 - y0; }
  std::int64_t area() const { return width() * height(); }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Row-major grayscale matrix with intensities in [0, 255].
class GrayImage {
 public:
  GrayImage() = default;

  GrayImage(std::size_t rows, std::size_t cols, std::vector<double> pixels)
      : rows_(rows), cols_(cols), pixels_(std::move(pixels)) {
    if (rows_ == 0 || cols_ == 0) throw std::invalid_argument("image must have at least one row and one column");
    if (pixels_.size() != rows_ * cols_) throw std::invalid_argument("pixel count does not match image dimensions");
    for (double v : pixels_)
      if (!(v >= 0.0 && v <= 255.0)) throw std::invalid_argument("pixel intensity outside [0, 255]");
  }

  static GrayImage filled(std::size_t rows, std::size_t cols, double value) {
    return GrayImage(rows, cols, std::vector<double>(rows * cols, value));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }
  double at(std::size_t r, std::size_t c) const { return pixels_.at(r * cols_ + c); }
  const std::vector<double>& pixels() const { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> pixels_;
};

// Identity of an element is its (interface_id, element_id) pair. The bounding
// box and descriptor are realisation data and do not take part in equality.
struct InterfaceElementRef {
  std::string interface_id;
  std::string element_id;
  std::optional<BoundingBox> bounding_box;
  std::optional<std::string> descriptor;

  bool positionally_realised() const { return bounding_box.has_value(); }

  friend bool operator==(const InterfaceElementRef& a, const InterfaceElementRef& b) {
    return a.interface_id == b.interface_id && a.element_id == b.element_id;
  }
};

// Images are identified by path; pixels and region are comparison data.
struct ImageRef {
  std::string path;
  std::optional<GrayImage> pixels;
  std::optional<BoundingBox> bounding_box;

  friend bool operator==(const ImageRef& a, const ImageRef& b) { return a.path == b.path; }
};

struct SymbolValue {
  std::string text;
  friend bool operator==(const SymbolValue&, const SymbolValue&) = default;
};

enum class ArgKind { element, symbol, image };

inline std::string_view to_string(ArgKind k) {
  switch (k) {
    case ArgKind::element: return "element";
    case ArgKind::symbol: return "symbol";
    case ArgKind::image: return "image";
  }
  return "?";
}

class ArgumentValue {
 public:
  ArgumentValue(InterfaceElementRef e) : value_(std::move(e)) {}
  ArgumentValue(SymbolValue s) : value_(std::move(s)) {}
  ArgumentValue(ImageRef i) : value_(std::move(i)) {}

  static ArgumentValue element(std::string interface_id, std::string element_id) {
    return InterfaceElementRef{std::move(interface_id), std::move(element_id), std::nullopt, std::nullopt};
  }
  static ArgumentValue symbol(std::string text) { return SymbolValue{std::move(text)}; }
  static ArgumentValue image(std::string path, std::optional<BoundingBox> bbox = std::nullopt) {
    return ImageRef{std::move(path), std::nullopt, bbox};
  }

  ArgKind kind() const { return static_cast<ArgKind>(value_.index()); }

  const InterfaceElementRef& as_element() const { return std::get<InterfaceElementRef>(value_); }
  const SymbolValue& as_symbol() const { return std::get<SymbolValue>(value_); }
  const ImageRef& as_image() const { return std::get<ImageRef>(value_); }
  ImageRef& as_image() { return std::get<ImageRef>(value_); }

  const std::variant<InterfaceElementRef, SymbolValue, ImageRef>& variant() const { return value_; }

  friend bool operator==(const ArgumentValue&, const ArgumentValue&) = default;

 private:
  // Alternative order matches ArgKind.
  std::variant<InterfaceElementRef, SymbolValue, ImageRef> value_;
};

struct Statement {
  std::string action;
  std::vector<ArgumentValue> args;

  friend bool operator==(const Statement&, const Statement&) = default;
};

struct Process {
  std::vector<Statement> statements;
  std::optional<std::string> id;

  std::size_t size() const { return statements.size(); }
  bool empty() const { return statements.empty(); }

  // Two processes are equal when their statement sequences are; the id is a label.
  friend bool operator==(const Process& a, const Process& b) { return a.statements == b.statements; }
};

/// Identifier syntax shared by action names and element references.
inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9') || c == '-'; };
  if (!head(s.front())) return false;
  return std::all_of(s.begin() + 1, s.end(), tail);
}

/// Lists the reasons a process cannot be rendered in the realisation language.
inline std::vector<std::string> well_formedness_problems(const Process& p) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < p.statements.size(); ++i) {
    const auto& st = p.statements[i];
    const std::string where = "statement " + std::to_string(i + 1) + ": ";
    if (!is_identifier(st.action)) out.push_back(where + "invalid action name '" + st.action + "'");
    for (const auto& a : st.args) {
      if (a.kind() == ArgKind::element) {
        const auto& e = a.as_element();
        if (!is_identifier(e.interface_id) || !is_identifier(e.element_id))
          out.push_back(where + "invalid element reference '" + e.interface_id + "." + e.element_id + "'");
        if (e.bounding_box && !e.bounding_box->valid()) out.push_back(where + "invalid element bounding box");
      } else if (a.kind() == ArgKind::image) {
        const auto& im = a.as_image();
        if (im.bounding_box && !im.bounding_box->valid()) out.push_back(where + "invalid image bounding box");
      }
    }
  }
  return out;
}

class ProgramCorpus {
 public:
  ProgramCorpus() = default;

  explicit ProgramCorpus(std::vector<Process> programs) {
    for (auto& p : programs) add(std::move(p));
  }

  void add(Process p) {
    if (!p.id || p.id->empty()) throw std::invalid_argument("corpus programs need an id");
    if (!ids_.insert(*p.id).second) throw std::invalid_argument("duplicate program id '" + *p.id + "'");
    programs_.push_back(std::move(p));
  }

  const std::vector<Process>& programs() const { return programs_; }
  std::size_t size() const { return programs_.size(); }
  bool empty() const { return programs_.empty(); }

  const Process* find(const std::string& id) const {
    for (const auto& p : programs_)
      if (*p.id == id) return &p;
    return nullptr;
  }

 private:
  std::vector<Process> programs_;
  std::set<std::string> ids_;
};

namespace detail {

inline void append_quoted(std::string& out, std::string_view s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
}

}  // namespace detail

/// Deterministic rendering of a statement's identity, e.g. `type(@I1.box,"hi")`.
inline std::string canonical_key(const Statement& st) {
  std::string out = st.action;
  out += '(';
  for (std::size_t i = 0; i < st.args.size(); ++i) {
    if (i) out += ',';
    const auto& a = st.args[i];
    switch (a.kind()) {
      case ArgKind::element:
        out += '@';
        out += a.as_element().interface_id;
        out += '.';
        out += a.as_element().element_id;
        break;
      case ArgKind::symbol: detail::append_quoted(out, a.as_symbol().text); break;
      case ArgKind::image:
        out += "img:";
        detail::append_quoted(out, a.as_image().path);
        break;
    }
  }
  out += ')';
  return out;
}

using Symbol = std::uint32_t;
using SymbolSequence = std::vector<Symbol>;

/// Bijection between canonical statement keys and dense symbols, assigned in
/// order of first appearance.
class SymbolEncoding {
 public:
  Symbol intern(const Statement& st) { return intern(canonical_key(st)); }

  Symbol intern(const std::string& key) {
    auto [it, inserted] = table_.try_emplace(key, static_cast<Symbol>(keys_.size()));
    if (inserted) keys_.push_back(key);
    return it->second;
  }

  std::optional<Symbol> lookup(const std::string& key) const {
    auto it = table_.find(key);
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& key(Symbol s) const { return keys_.at(s); }
  std::size_t size() const { return keys_.size(); }

  SymbolSequence encode(const Process& p) {
    SymbolSequence seq;
    seq.reserve(p.size());
    for (const auto& st : p.statements) seq.push_back(intern(st));
    return seq;
  }

 private:
  std::unordered_map<std::string, Symbol> table_;
  std::vector<std::string> keys_;
};

struct EncodedCorpora {
  SymbolEncoding encoding;
  std::vector<SymbolSequence> candidate;
  std::vector<SymbolSequence> gold;
};

/// One shared table over both corpora; sequences follow corpus order.
inline EncodedCorpora encode_corpora(const ProgramCorpus& candidate, const ProgramCorpus& gold) {
  EncodedCorpora out;
  for (const auto& p : candidate.programs()) out.candidate.push_back(out.encoding.encode(p));
  for (const auto& p : gold.programs()) out.gold.push_back(out.encoding.encode(p));
  return out;
}

}  // namespace ipa
