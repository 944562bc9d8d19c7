#pragma once

// Corpus BLEU for demo2text and process2text outputs: clipped n-gram
// precision pooled over the corpus, brevity penalty against the closest
// reference length, weighted geometric combination.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ipa {

using Tokens = std::vector<std::string>;

/// Lowercase, split on whitespace, strip trailing sentence punctuation.
inline Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && std::string_view(".,!?;").find(cur.back()) != std::string_view::npos) cur.pop_back();
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) flush();
    else cur += static_cast<char>(std::tolower(c));
  }
  flush();
  return out;
}

struct TextCandidate {
  std::string id;
  Tokens tokens;
};

struct ReferenceSet {
  std::string id;
  std::vector<Tokens> references;
};

enum class ZeroPrecisionPolicy { score_zero, epsilon_smoothing };

struct BleuConfig {
  std::size_t max_n = 4;
  std::vector<double> weights;  // empty: uniform 1/max_n
  ZeroPrecisionPolicy zero_precision_policy = ZeroPrecisionPolicy::score_zero;
  double epsilon = 1e-9;

  std::vector<double> effective_weights() const {
    if (weights.empty()) return std::vector<double>(max_n, 1.0 / static_cast<double>(max_n));
    return weights;
  }

  void validate() const {
    if (max_n < 1) throw std::invalid_argument("max_n must be >= 1");
    const auto w = effective_weights();
    if (w.size() != max_n) throw std::invalid_argument("weights length must equal max_n");
    for (double x : w)
      if (!(x > 0.0)) throw std::invalid_argument("weights must be positive");
    if (std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) > 1e-12)
      throw std::invalid_argument("weights must sum to 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  }
};

/// Sufficient statistics; summing them over candidates gives corpus BLEU.
struct BleuStats {
  std::vector<std::size_t> matches;  // clipped n-gram matches, index n-1
  std::vector<std::size_t> totals;   // candidate n-grams, index n-1
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  explicit BleuStats(std::size_t max_n = 4) : matches(max_n, 0), totals(max_n, 0) {}

  BleuStats& operator+=(const BleuStats& o) {
    if (o.matches.size() != matches.size()) throw std::invalid_argument("mismatched n-gram orders");
    for (std::size_t i = 0; i < matches.size(); ++i) {
      matches[i] += o.matches[i];
      totals[i] += o.totals[i];
    }
    candidate_length += o.candidate_length;
    reference_length += o.reference_length;
    return *this;
  }
};

namespace detail {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

inline NgramCounts count_ngrams(const Tokens& t, std::size_t n) {
  NgramCounts out;
  if (t.size() < n) return out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += t[i + k];
    }
    ++out[key];
  }
  return out;
}

}  // namespace detail

/// Closest reference length to `candidate_length`; ties go to the shorter one.
inline std::size_t closest_reference_length(std::size_t candidate_length, const std::vector<Tokens>& refs) {
  if (refs.empty()) throw std::invalid_argument("at least one reference is required");
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto d = [&](std::size_t len) {
      return len > candidate_length ? len - candidate_length : candidate_length - len;
    };
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
  }
  return best;
}

inline BleuStats sentence_stats(const Tokens& candidate, const std::vector<Tokens>& refs, std::size_t max_n) {
  BleuStats s(max_n);
  s.candidate_length = candidate.size();
  s.reference_length = closest_reference_length(candidate.size(), refs);
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto cand = detail::count_ngrams(candidate, n);
    detail::NgramCounts max_ref;
    for (const auto& r : refs)
      for (const auto& [g, c] : detail::count_ngrams(r, n)) max_ref[g] = std::max(max_ref[g], c);
    for (const auto& [g, c] : cand) {
      s.totals[n - 1] += c;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) s.matches[n - 1] += std::min(c, it->second);
    }
  }
  return s;
}

namespace detail {

inline std::vector<std::pair<const TextCandidate*, const ReferenceSet*>> pair_text(
    const std::vector<TextCandidate>& candidates, const std::vector<ReferenceSet>& refs) {
  std::map<std::string, const ReferenceSet*> by_id;
  for (const auto& r : refs) {
    if (r.references.empty()) throw std::invalid_argument("reference set '" + r.id + "' is empty");
    if (!by_id.emplace(r.id, &r).second) throw std::invalid_argument("duplicate reference id '" + r.id + "'");
  }
  std::set<std::string> seen;
  std::vector<std::string> unmatched;
  std::vector<std::pair<const TextCandidate*, const ReferenceSet*>> out;
  for (const auto& c : candidates) {
    if (!seen.insert(c.id).second) throw std::invalid_argument("duplicate candidate id '" + c.id + "'");
    auto it = by_id.find(c.id);
    if (it == by_id.end()) unmatched.push_back(c.id);
    else out.emplace_back(&c, it->second);
  }
  for (const auto& [id, r] : by_id)
    if (!seen.count(id)) unmatched.push_back(id);
  if (!unmatched.empty()) {
    std::string msg = "candidate/reference id mismatch; unmatched ids:";
    for (const auto& id : unmatched) msg += " " + id;
    throw std::invalid_argument(msg);
  }
  return out;
}

}  // namespace detail

inline BleuStats corpus_stats(const std::vector<TextCandidate>& candidates, const std::vector<ReferenceSet>& refs,
                              std::size_t max_n) {
  BleuStats total(max_n);
  for (const auto& [c, r] : detail::pair_text(candidates, refs)) total += sentence_stats(c->tokens, r->references, max_n);
  return total;
}

/// Clipped matches over candidate n-grams at order n; 0 when there are none.
inline double modified_precision(const std::vector<TextCandidate>& candidates, const std::vector<ReferenceSet>& refs,
                                 std::size_t n) {
  if (n < 1) throw std::invalid_argument("n-gram order must be >= 1");
  const auto s = corpus_stats(candidates, refs, n);
  if (s.totals[n - 1] == 0) return 0.0;
  return static_cast<double>(s.matches[n - 1]) / static_cast<double>(s.totals[n - 1]);
}

/// 1 if c > r, else exp(1 - r/c); 0 for an empty candidate against a
/// non-empty reference.
inline double brevity_penalty(double c, double r) {
  if (c > r) return 1.0;
  if (c <= 0.0) return r > 0.0 ? 0.0 : 1.0;
  return std::exp(1.0 - r / c);
}

struct BleuResult {
  double score = 0.0;
  double brevity_penalty = 0.0;
  std::vector<double> precisions;
  BleuStats stats;
};

/// Orders with no candidate n-grams at all are left out of the geometric mean
/// and the remaining weights are renormalised.
inline BleuResult bleu_from_stats(const BleuStats& s, const BleuConfig& cfg) {
  cfg.validate();
  if (s.matches.size() != cfg.max_n) throw std::invalid_argument("statistics order does not match max_n");
  BleuResult r;
  r.stats = s;
  r.brevity_penalty =
      brevity_penalty(static_cast<double>(s.candidate_length), static_cast<double>(s.reference_length));
  const auto w = cfg.effective_weights();
  double log_sum = 0.0, weight_sum = 0.0;
  bool zero = false;
  for (std::size_t i = 0; i < cfg.max_n; ++i) {
    const double p = s.totals[i] == 0 ? 0.0 : static_cast<double>(s.matches[i]) / static_cast<double>(s.totals[i]);
    r.precisions.push_back(p);
    if (s.totals[i] == 0) continue;
    weight_sum += w[i];
    if (p > 0.0) log_sum += w[i] * std::log(p);
    else if (cfg.zero_precision_policy == ZeroPrecisionPolicy::epsilon_smoothing) log_sum += w[i] * std::log(cfg.epsilon);
    else zero = true;
  }
  if (zero || weight_sum == 0.0) {
    r.score = 0.0;
    return r;
  }
  r.score = r.brevity_penalty * std::exp(log_sum / weight_sum);
  return r;
}

inline BleuResult bleu(const std::vector<TextCandidate>& candidates, const std::vector<ReferenceSet>& refs,
                       const BleuConfig& cfg = {}) {
  cfg.validate();
  return bleu_from_stats(corpus_stats(candidates, refs, cfg.max_n), cfg);
}

inline BleuResult sentence_bleu(const Tokens& candidate, const std::vector<Tokens>& refs, const BleuConfig& cfg = {}) {
  return bleu_from_stats(sentence_stats(candidate, refs, cfg.max_n), cfg);
}

// ---------------------------------------------------------------------------
// JSON Lines input: {"id": ..., "candidate": "..."} / {"id": ..., "references": [...]}

class TextFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class F>
void for_each_jsonl(const std::string& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw TextFormatError("cannot open '" + path + "'");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      f(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& ex) {
      throw TextFormatError(path + ":" + std::to_string(n) + ": " + ex.what());
    }
  }
}

inline std::string id_string(const nlohmann::json& j) {
  const auto& id = j.at("id");
  return id.is_string() ? id.get<std::string>() : id.dump();
}

}  // namespace detail

inline std::vector<TextCandidate> load_candidates_jsonl(const std::string& path) {
  std::vector<TextCandidate> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& j) {
    out.push_back({detail::id_string(j), tokenize(j.at("candidate").get<std::string>())});
  });
  return out;
}

inline std::vector<ReferenceSet> load_references_jsonl(const std::string& path) {
  std::vector<ReferenceSet> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& j) {
    ReferenceSet r{detail::id_string(j), {}};
    for (const auto& s : j.at("references")) r.references.push_back(tokenize(s.get<std::string>()));
    if (r.references.empty()) throw TextFormatError("reference set '" + r.id + "' is empty");
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace ipa
