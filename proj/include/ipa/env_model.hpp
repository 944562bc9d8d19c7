#pragma once

// Interpreted environments: interfaces and their elements, action signatures,
// the value domain and an optional descriptive vocabulary. Processes are
// checked against an environment and replayed against a mock state that is
// the running digest of applied statements.

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstddef>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ipa/process_ir.hpp"

namespace ipa {

enum class KindConstraint { element, symbol, image, any };

inline std::optional<KindConstraint> parse_kind_constraint(std::string_view s) {
  if (s == "element") return KindConstraint::element;
  if (s == "symbol") return KindConstraint::symbol;
  if (s == "image") return KindConstraint::image;
  if (s == "any") return KindConstraint::any;
  return std::nullopt;
}

inline std::string_view to_string(KindConstraint k) {
  switch (k) {
    case KindConstraint::element: return "element";
    case KindConstraint::symbol: return "symbol";
    case KindConstraint::image: return "image";
    case KindConstraint::any: return "any";
  }
  return "?";
}

inline bool admits(KindConstraint c, ArgKind k) {
  switch (c) {
    case KindConstraint::any: return true;
    case KindConstraint::element: return k == ArgKind::element;
    case KindConstraint::symbol: return k == ArgKind::symbol;
    case KindConstraint::image: return k == ArgKind::image;
  }
  return false;
}

struct ActionSignature {
  std::string name;
  std::vector<KindConstraint> arg_kinds;
  std::optional<std::string> description;

  std::size_t arity() const { return arg_kinds.size(); }
};

struct ElementInfo {
  std::optional<BoundingBox> bounding_box;
  std::optional<std::string> descriptor;
};

enum class ValueDomainPreset { any, lowercase_space };

/// Membership test for value symbols.
class ValueDomain {
 public:
  ValueDomain() = default;
  explicit ValueDomain(ValueDomainPreset preset) : preset_(preset) {}

  ValueDomainPreset preset() const { return preset_; }

  bool contains(std::string_view v) const {
    if (preset_ == ValueDomainPreset::any) return true;
    return std::all_of(v.begin(), v.end(), [](char c) { return (c >= 'a' && c <= 'z') || c == ' '; });
  }

 private:
  ValueDomainPreset preset_ = ValueDomainPreset::any;
};

inline bool is_vocabulary_term(std::string_view s) { return ValueDomain(ValueDomainPreset::lowercase_space).contains(s); }

/// Immutable once built; use Environment::Builder or load_environment().
class Environment {
 public:
  class Builder;

  bool has_interface(const std::string& id) const { return interfaces_.count(id) != 0; }

  const ElementInfo* element(const std::string& iface, const std::string& elem) const {
    auto it = interfaces_.find(iface);
    if (it == interfaces_.end()) return nullptr;
    auto jt = it->second.find(elem);
    return jt == it->second.end() ? nullptr : &jt->second;
  }

  const ActionSignature* signature(const std::string& name) const {
    auto it = signatures_.find(name);
    return it == signatures_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, std::map<std::string, ElementInfo>>& interfaces() const { return interfaces_; }
  const std::map<std::string, ActionSignature>& signatures() const { return signatures_; }
  const ValueDomain& value_domain() const { return value_domain_; }
  bool has_vocabulary() const { return has_vocabulary_; }
  const std::set<std::string>& vocabulary() const { return vocabulary_; }
  const std::map<std::string, std::string>& value_descriptors() const { return value_descriptors_; }

 private:
  std::map<std::string, std::map<std::string, ElementInfo>> interfaces_;
  std::map<std::string, ActionSignature> signatures_;
  ValueDomain value_domain_;
  bool has_vocabulary_ = false;
  std::set<std::string> vocabulary_;
  std::map<std::string, std::string> value_descriptors_;
};

class Environment::Builder {
 public:
  Builder& interface(const std::string& id) {
    if (!is_identifier(id)) throw std::invalid_argument("invalid interface id '" + id + "'");
    if (!env_.interfaces_.try_emplace(id).second) throw std::invalid_argument("duplicate interface '" + id + "'");
    return *this;
  }

  Builder& element(const std::string& iface, const std::string& elem, std::optional<BoundingBox> bbox = std::nullopt,
                   std::optional<std::string> descriptor = std::nullopt) {
    auto it = env_.interfaces_.find(iface);
    if (it == env_.interfaces_.end()) throw std::invalid_argument("element declared on unknown interface '" + iface + "'");
    if (!is_identifier(elem)) throw std::invalid_argument("invalid element id '" + elem + "'");
    if (bbox && !bbox->valid()) throw std::invalid_argument("invalid bounding box for " + iface + "." + elem);
    if (descriptor) use_descriptor(*descriptor);
    if (!it->second.try_emplace(elem, ElementInfo{bbox, std::move(descriptor)}).second)
      throw std::invalid_argument("duplicate element '" + iface + "." + elem + "'");
    return *this;
  }

  Builder& action(std::string name, std::vector<KindConstraint> kinds, std::optional<std::string> description = {}) {
    if (!is_identifier(name)) throw std::invalid_argument("invalid action name '" + name + "'");
    ActionSignature sig{name, std::move(kinds), std::move(description)};
    if (!env_.signatures_.try_emplace(name, std::move(sig)).second)
      throw std::invalid_argument("duplicate action '" + name + "'");
    return *this;
  }

  Builder& value_domain(ValueDomain d) {
    env_.value_domain_ = d;
    return *this;
  }

  /// Declares the vocabulary T explicitly; descriptors must then be members.
  Builder& vocabulary(std::set<std::string> terms) {
    for (const auto& t : terms)
      if (!is_vocabulary_term(t)) throw std::invalid_argument("vocabulary term '" + t + "' is not lowercase/space");
    declared_ = std::move(terms);
    return *this;
  }

  Builder& value_descriptor(std::string value, std::string descriptor) {
    use_descriptor(descriptor);
    env_.value_descriptors_[std::move(value)] = std::move(descriptor);
    return *this;
  }

  Environment build() const {
    Environment e = env_;
    if (declared_) {
      for (const auto& d : used_)
        if (!declared_->count(d)) throw std::invalid_argument("descriptor '" + d + "' not in declared vocabulary");
      e.vocabulary_ = *declared_;
      e.has_vocabulary_ = true;
    } else if (!used_.empty()) {
      e.vocabulary_ = used_;
      e.has_vocabulary_ = true;
    }
    return e;
  }

 private:
  void use_descriptor(const std::string& d) {
    if (!is_vocabulary_term(d)) throw std::invalid_argument("descriptor '" + d + "' is not lowercase/space");
    used_.insert(d);
  }

  Environment env_;
  std::optional<std::set<std::string>> declared_;
  std::set<std::string> used_;
};

struct Violation {
  std::size_t statement_index = 0;  // 0-based
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

using ValidationReport = std::vector<Violation>;

inline ValidationReport validate_process(const Process& p, const Environment& e) {
  ValidationReport out;
  for (std::size_t i = 0; i < p.statements.size(); ++i) {
    const auto& st = p.statements[i];
    auto add = [&](std::string msg) { out.push_back({i, std::move(msg)}); };
    const ActionSignature* sig = e.signature(st.action);
    if (!sig) add("unknown action " + st.action);
    else if (sig->arity() != st.args.size())
      add("arity mismatch " + std::to_string(st.args.size()) + " != " + std::to_string(sig->arity()) + " for " +
          st.action);

    for (std::size_t k = 0; k < st.args.size(); ++k) {
      const auto& a = st.args[k];
      const std::string where = "argument " + std::to_string(k + 1) + ": ";
      if (sig && k < sig->arity() && !admits(sig->arg_kinds[k], a.kind()))
        add(where + "kind mismatch, expected " + std::string(to_string(sig->arg_kinds[k])) + " got " +
            std::string(to_string(a.kind())));
      if (a.kind() == ArgKind::element) {
        const auto& el = a.as_element();
        if (!e.has_interface(el.interface_id)) add(where + "unknown interface " + el.interface_id);
        else if (!e.element(el.interface_id, el.element_id))
          add(where + "unknown element " + el.interface_id + "." + el.element_id);
      } else if (a.kind() == ArgKind::symbol) {
        if (!e.value_domain().contains(a.as_symbol().text))
          add(where + "value \"" + a.as_symbol().text + "\" outside the value domain");
      }
    }
  }
  return out;
}

/// Descriptor of an element or value, absent when no vocabulary covers it.
inline std::optional<std::string> type_of(const Environment& e, const InterfaceElementRef& subject) {
  const ElementInfo* info = e.element(subject.interface_id, subject.element_id);
  if (!info) return std::nullopt;
  return info->descriptor;
}

inline std::optional<std::string> type_of(const Environment& e, const SymbolValue& subject) {
  auto it = e.value_descriptors().find(subject.text);
  if (it == e.value_descriptors().end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Replay

namespace detail {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("SHA-256 initialisation failed");
  }

  void update(std::string_view data) {
    if (EVP_DigestUpdate(ctx_.get(), data.data(), data.size()) != 1) throw std::runtime_error("SHA-256 update failed");
  }

  // Digest of everything fed so far; the running state is left untouched.
  std::string hex() const {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> copy(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!copy || EVP_MD_CTX_copy_ex(copy.get(), ctx_.get()) != 1) throw std::runtime_error("SHA-256 copy failed");
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(copy.get(), md.data(), &len) != 1) throw std::runtime_error("SHA-256 finalisation failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[md[i] >> 4];
      out += kHex[md[i] & 0xF];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace detail

/// Digest of the state reached after applying `statements` from the initial
/// state: SHA-256 over the canonical keys, each terminated by '\n'.
inline std::string state_digest(const std::vector<Statement>& statements) {
  detail::Sha256 h;
  for (const auto& st : statements) {
    h.update(canonical_key(st));
    h.update("\n");
  }
  return h.hex();
}

struct ReplayStep {
  Statement statement;
  std::string state_digest;

  friend bool operator==(const ReplayStep&, const ReplayStep&) = default;
};

struct ReplayTrace {
  std::vector<ReplayStep> steps;

  std::string final_digest() const { return steps.empty() ? state_digest({}) : steps.back().state_digest; }

  friend bool operator==(const ReplayTrace&, const ReplayTrace&) = default;
};

struct ReplayResult {
  std::optional<ReplayTrace> trace;
  ValidationReport violations;

  bool ok() const { return trace.has_value(); }
};

inline ReplayResult replay(const Process& p, const Environment& e) {
  ReplayResult r;
  r.violations = validate_process(p, e);
  if (!r.violations.empty()) return r;
  ReplayTrace trace;
  detail::Sha256 h;
  for (const auto& st : p.statements) {
    h.update(canonical_key(st));
    h.update("\n");
    trace.steps.push_back({st, h.hex()});
  }
  r.trace = std::move(trace);
  return r;
}

// ---------------------------------------------------------------------------
// JSON environment definition
//
// {
//   "interfaces": { "I1": { "submit": { "bbox": [x0,y0,x1,y1], "descriptor": "button" } } },
//   "actions": { "click": ["element"], "type": ["element", "symbol"] },
//   "value_domain": "any" | "lowercase_space",
//   "vocabulary": ["button", ...],                      (optional)
//   "value_descriptors": { "hello": "greeting" }        (optional)
// }

class EnvironmentFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Environment environment_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw EnvironmentFormatError("environment must be a JSON object");
    Environment::Builder b;
    if (!j.contains("interfaces") || !j.at("interfaces").is_object())
      throw EnvironmentFormatError("missing object field 'interfaces'");
    for (const auto& [iface, elems] : j.at("interfaces").items()) {
      b.interface(iface);
      if (!elems.is_object()) throw EnvironmentFormatError("interface '" + iface + "' must map element ids to objects");
      for (const auto& [elem, info] : elems.items()) {
        std::optional<BoundingBox> bbox;
        std::optional<std::string> descriptor;
        if (!info.is_object()) throw EnvironmentFormatError("element '" + iface + "." + elem + "' must be an object");
        if (info.contains("bbox")) {
          const auto& bb = info.at("bbox");
          if (!bb.is_array() || bb.size() != 4) throw EnvironmentFormatError("bbox must be [x0,y0,x1,y1]");
          bbox = BoundingBox::make(bb[0].get<std::int64_t>(), bb[1].get<std::int64_t>(), bb[2].get<std::int64_t>(),
                                   bb[3].get<std::int64_t>());
        }
        if (info.contains("descriptor")) descriptor = info.at("descriptor").get<std::string>();
        b.element(iface, elem, bbox, descriptor);
      }
    }
    if (!j.contains("actions") || !j.at("actions").is_object())
      throw EnvironmentFormatError("missing object field 'actions'");
    for (const auto& [name, kinds] : j.at("actions").items()) {
      if (!kinds.is_array()) throw EnvironmentFormatError("action '" + name + "' must list argument kinds");
      std::vector<KindConstraint> ks;
      for (const auto& k : kinds) {
        auto kc = parse_kind_constraint(k.get<std::string>());
        if (!kc) throw EnvironmentFormatError("action '" + name + "': unknown kind '" + k.get<std::string>() + "'");
        ks.push_back(*kc);
      }
      b.action(name, std::move(ks));
    }
    if (j.contains("value_domain")) {
      const auto vd = j.at("value_domain").get<std::string>();
      if (vd == "any") b.value_domain(ValueDomain(ValueDomainPreset::any));
      else if (vd == "lowercase_space") b.value_domain(ValueDomain(ValueDomainPreset::lowercase_space));
      else throw EnvironmentFormatError("unknown value_domain '" + vd + "'");
    }
    if (j.contains("vocabulary")) b.vocabulary(j.at("vocabulary").get<std::set<std::string>>());
    if (j.contains("value_descriptors"))
      for (const auto& [v, d] : j.at("value_descriptors").items()) b.value_descriptor(v, d.get<std::string>());
    return b.build();
  } catch (const nlohmann::json::exception& ex) {
    throw EnvironmentFormatError(ex.what());
  } catch (const std::invalid_argument& ex) {
    throw EnvironmentFormatError(ex.what());
  }
}

inline nlohmann::ordered_json environment_to_json(const Environment& e) {
  nlohmann::ordered_json j;
  j["interfaces"] = nlohmann::ordered_json::object();
  for (const auto& [iface, elems] : e.interfaces()) {
    auto& ji = j["interfaces"][iface];
    ji = nlohmann::ordered_json::object();
    for (const auto& [elem, info] : elems) {
      nlohmann::ordered_json je = nlohmann::ordered_json::object();
      if (info.bounding_box) {
        const auto& b = *info.bounding_box;
        je["bbox"] = {b.x0, b.y0, b.x1, b.y1};
      }
      if (info.descriptor) je["descriptor"] = *info.descriptor;
      ji[elem] = je;
    }
  }
  j["actions"] = nlohmann::ordered_json::object();
  for (const auto& [name, sig] : e.signatures()) {
    auto arr = nlohmann::ordered_json::array();
    for (auto k : sig.arg_kinds) arr.push_back(std::string(to_string(k)));
    j["actions"][name] = arr;
  }
  j["value_domain"] = e.value_domain().preset() == ValueDomainPreset::any ? "any" : "lowercase_space";
  if (e.has_vocabulary()) j["vocabulary"] = e.vocabulary();
  if (!e.value_descriptors().empty()) {
    j["value_descriptors"] = nlohmann::ordered_json::object();
    for (const auto& [v, d] : e.value_descriptors()) j["value_descriptors"][v] = d;
  }
  return j;
}

inline Environment load_environment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EnvironmentFormatError("cannot open environment file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw EnvironmentFormatError(path + ": " + ex.what());
  }
  return environment_from_json(j);
}

}  // namespace ipa
