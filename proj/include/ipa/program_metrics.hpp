#pragma once

// Program-comparison metrics for demo2process and text2process outputs:
// strict error and its corpus mean, predicate/argument sensitive error,
// image-argument comparison (IoU, MSE, SSIM) and maximum program overlap
// via longest common subsequence.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ipa/process_ir.hpp"

namespace ipa {

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ImageComparator { iou, mse, ssim };

inline std::string_view to_string(ImageComparator c) {
  switch (c) {
    case ImageComparator::iou: return "iou";
    case ImageComparator::mse: return "mse";
    case ImageComparator::ssim: return "ssim";
  }
  return "?";
}

inline std::optional<ImageComparator> parse_image_comparator(std::string_view s) {
  if (s == "iou") return ImageComparator::iou;
  if (s == "mse") return ImageComparator::mse;
  if (s == "ssim") return ImageComparator::ssim;
  return std::nullopt;
}

struct SensitiveErrorConfig {
  double iou_threshold = 0.5;
  ImageComparator image_comparator = ImageComparator::iou;
  double mse_threshold = 100.0;
  double ssim_threshold = 0.95;
  double ssim_k1 = 0.01;
  double ssim_k2 = 0.03;
  double ssim_dynamic_range = 255.0;

  void validate() const {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw std::invalid_argument("iou_threshold must be in (0, 1]");
    if (!(mse_threshold >= 0.0)) throw std::invalid_argument("mse_threshold must be >= 0");
    if (!(ssim_threshold > -1.0 && ssim_threshold <= 1.0))
      throw std::invalid_argument("ssim_threshold must be in (-1, 1]");
    if (!(ssim_k1 > 0.0) || !(ssim_k2 > 0.0)) throw std::invalid_argument("ssim constants must be positive");
    if (!(ssim_dynamic_range > 0.0)) throw std::invalid_argument("ssim_dynamic_range must be positive");
  }
};

// ---------------------------------------------------------------------------
// Unit errors

inline int pred_error(std::string_view f, std::string_view f_gold) { return f == f_gold ? 0 : 1; }

inline int symb_arg_error(std::string_view v, std::string_view gold) { return v == gold ? 0 : 1; }

inline int element_arg_error(const InterfaceElementRef& e, const InterfaceElementRef& gold) { return e == gold ? 0 : 1; }

/// Intersection over union; 0 when both boxes are degenerate.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const auto ix = std::max<std::int64_t>(0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const auto iy = std::max<std::int64_t>(0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const auto inter = ix * iy;
  const auto uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace detail {

inline void require_same_shape(const GrayImage& a, const GrayImage& b) {
  if (a.empty() || b.empty()) throw MetricError("image comparison needs non-empty images");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw MetricError("image dimension mismatch: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                      " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

}  // namespace detail

inline double mse(const GrayImage& a, const GrayImage& b) {
  detail::require_same_shape(a, b);
  double sum = 0.0;
  const auto& pa = a.pixels();
  const auto& pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pa.size());
}

/// Whole-image SSIM with population statistics.
inline double ssim(const GrayImage& a, const GrayImage& b, const SensitiveErrorConfig& cfg = {}) {
  detail::require_same_shape(a, b);
  const auto& x = a.pixels();
  const auto& y = b.pixels();
  const double n = static_cast<double>(x.size());

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;

  double vx = 0.0, vy = 0.0, cxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    vx += dx * dx;
    vy += dy * dy;
    cxy += dx * dy;
  }
  vx /= n;
  vy /= n;
  cxy /= n;

  const double c1 = (cfg.ssim_k1 * cfg.ssim_dynamic_range) * (cfg.ssim_k1 * cfg.ssim_dynamic_range);
  const double c2 = (cfg.ssim_k2 * cfg.ssim_dynamic_range) * (cfg.ssim_k2 * cfg.ssim_dynamic_range);
  return ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
}

inline int image_arg_error(const ImageRef& arg, const ImageRef& gold, const SensitiveErrorConfig& cfg) {
  switch (cfg.image_comparator) {
    case ImageComparator::iou:
      if (!arg.bounding_box || !gold.bounding_box)
        throw MetricError("iou comparison needs bounding boxes for images '" + arg.path + "' and '" + gold.path + "'");
      return iou(*arg.bounding_box, *gold.bounding_box) > cfg.iou_threshold ? 0 : 1;
    case ImageComparator::mse:
      if (!arg.pixels || !gold.pixels)
        throw MetricError("mse comparison needs pixels for images '" + arg.path + "' and '" + gold.path + "'");
      return mse(*arg.pixels, *gold.pixels) <= cfg.mse_threshold ? 0 : 1;
    case ImageComparator::ssim:
      if (!arg.pixels || !gold.pixels)
        throw MetricError("ssim comparison needs pixels for images '" + arg.path + "' and '" + gold.path + "'");
      return ssim(*arg.pixels, *gold.pixels, cfg) >= cfg.ssim_threshold ? 0 : 1;
  }
  return 1;
}

/// Kind-mismatched arguments always count as an error.
inline int arg_error(const ArgumentValue& arg, const ArgumentValue& gold, const SensitiveErrorConfig& cfg) {
  if (arg.kind() != gold.kind()) return 1;
  switch (arg.kind()) {
    case ArgKind::element: return element_arg_error(arg.as_element(), gold.as_element());
    case ArgKind::symbol: return symb_arg_error(arg.as_symbol().text, gold.as_symbol().text);
    case ArgKind::image: return image_arg_error(arg.as_image(), gold.as_image(), cfg);
  }
  return 1;
}

// ---------------------------------------------------------------------------
// Strict error

inline int strict_error(const Process& p, const Process& gold) { return p.statements == gold.statements ? 0 : 1; }

/// Pairs candidate programs with gold programs by id, in gold order.
inline std::vector<std::pair<const Process*, const Process*>> pair_by_id(const ProgramCorpus& candidates,
                                                                         const ProgramCorpus& golds) {
  std::vector<std::string> unmatched;
  for (const auto& p : candidates.programs())
    if (!golds.find(*p.id)) unmatched.push_back(*p.id);
  std::vector<std::pair<const Process*, const Process*>> pairs;
  for (const auto& g : golds.programs()) {
    const Process* c = candidates.find(*g.id);
    if (!c) unmatched.push_back(*g.id);
    else pairs.emplace_back(c, &g);
  }
  if (!unmatched.empty()) {
    std::set<std::string> ids(unmatched.begin(), unmatched.end());
    std::string msg = "corpus id mismatch; unmatched ids:";
    for (const auto& id : ids) msg += " " + id;
    throw MetricError(msg);
  }
  return pairs;
}

inline double mae_strict(const ProgramCorpus& candidates, const ProgramCorpus& golds) {
  const auto pairs = pair_by_id(candidates, golds);
  if (pairs.empty()) throw MetricError("mae_strict of an empty corpus is undefined");
  double sum = 0.0;
  for (const auto& [c, g] : pairs) sum += strict_error(*c, *g);
  return sum / static_cast<double>(pairs.size());
}

// ---------------------------------------------------------------------------
// Predicate / argument sensitive error

struct StatementBreakdown {
  std::size_t index = 0;
  std::optional<std::string> action;       // candidate side
  std::optional<std::string> gold_action;  // gold side
  int pred_error = 0;
  std::vector<int> arg_errors;  // one entry per position up to the longer argument list
  std::size_t error_units = 0;
  std::size_t units = 0;  // contribution to the normalizer
};

struct SensitiveResult {
  double value = 0.0;
  std::size_t error_units = 0;
  std::size_t total_units = 0;
  std::vector<StatementBreakdown> breakdown;
};

/// Positional alignment of statements and arguments. Every predicate and
/// argument of the gold program is one unit; candidate predicates and
/// arguments with no gold counterpart add a unit each and are errors.
inline SensitiveResult sensitive_error(const Process& p, const Process& gold, const SensitiveErrorConfig& cfg = {}) {
  SensitiveResult r;
  const std::size_t n = std::max(p.size(), gold.size());
  for (std::size_t i = 0; i < n; ++i) {
    StatementBreakdown b;
    b.index = i;
    const Statement* c = i < p.size() ? &p.statements[i] : nullptr;
    const Statement* g = i < gold.size() ? &gold.statements[i] : nullptr;
    if (c) b.action = c->action;
    if (g) b.gold_action = g->action;

    if (c && g) {
      b.pred_error = pred_error(c->action, g->action);
      const std::size_t m = std::max(c->args.size(), g->args.size());
      for (std::size_t k = 0; k < m; ++k) {
        if (k < c->args.size() && k < g->args.size()) b.arg_errors.push_back(arg_error(c->args[k], g->args[k], cfg));
        else b.arg_errors.push_back(1);
      }
      b.units = 1 + m;
    } else {
      const Statement* only = c ? c : g;
      b.pred_error = 1;
      b.arg_errors.assign(only->args.size(), 1);
      b.units = 1 + only->args.size();
    }
    b.error_units = static_cast<std::size_t>(b.pred_error);
    for (int e : b.arg_errors) b.error_units += static_cast<std::size_t>(e);
    r.error_units += b.error_units;
    r.total_units += b.units;
    r.breakdown.push_back(std::move(b));
  }
  r.value = r.total_units == 0 ? 0.0 : static_cast<double>(r.error_units) / static_cast<double>(r.total_units);
  return r;
}

// ---------------------------------------------------------------------------
// Longest common subsequence

namespace detail {

template <class T>
std::vector<std::size_t> lcs_table(std::span<const T> x, std::span<const T> y) {
  const std::size_t cols = y.size() + 1;
  std::vector<std::size_t> t((x.size() + 1) * cols, 0);
  for (std::size_t i = 1; i <= x.size(); ++i)
    for (std::size_t j = 1; j <= y.size(); ++j)
      t[i * cols + j] = x[i - 1] == y[j - 1] ? t[(i - 1) * cols + j - 1] + 1
                                             : std::max(t[i * cols + j - 1], t[(i - 1) * cols + j]);
  return t;
}

}  // namespace detail

template <class T>
std::size_t lcs_length(std::span<const T> x, std::span<const T> y) {
  if (x.empty() || y.empty()) return 0;
  // Two rolling rows.
  std::vector<std::size_t> prev(y.size() + 1, 0), cur(y.size() + 1, 0);
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= y.size(); ++j)
      cur[j] = x[i - 1] == y[j - 1] ? prev[j - 1] + 1 : std::max(cur[j - 1], prev[j]);
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

/// One longest common subsequence. When the two shorter subproblems tie,
/// the one dropping the last element of y is preferred.
template <class T>
std::vector<T> lcs(std::span<const T> x, std::span<const T> y) {
  if (x.empty() || y.empty()) return {};
  const auto t = detail::lcs_table(x, y);
  const std::size_t cols = y.size() + 1;
  std::vector<T> out;
  std::size_t i = x.size(), j = y.size();
  while (i > 0 && j > 0) {
    if (x[i - 1] == y[j - 1]) {
      out.push_back(x[i - 1]);
      --i;
      --j;
    } else if (t[i * cols + j - 1] >= t[(i - 1) * cols + j]) {
      --j;
    } else {
      --i;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

template <class T>
std::vector<T> lcs(const std::vector<T>& x, const std::vector<T>& y) {
  return lcs(std::span<const T>(x), std::span<const T>(y));
}

template <class T>
std::size_t lcs_length(const std::vector<T>& x, const std::vector<T>& y) {
  return lcs_length(std::span<const T>(x), std::span<const T>(y));
}

// ---------------------------------------------------------------------------
// Maximum program overlap

enum class MpoMode { literal, gold_normalized };

inline std::string_view to_string(MpoMode m) { return m == MpoMode::literal ? "literal" : "gold"; }

inline std::optional<MpoMode> parse_mpo_mode(std::string_view s) {
  if (s == "literal") return MpoMode::literal;
  if (s == "gold" || s == "gold_normalized") return MpoMode::gold_normalized;
  return std::nullopt;
}

/// |lcs| divided by the candidate length (literal) or the gold length.
/// Two empty sequences overlap fully; an empty divisor otherwise gives 0.
inline double mpo(const SymbolSequence& candidate, const SymbolSequence& gold, MpoMode mode = MpoMode::literal) {
  if (candidate.empty() && gold.empty()) return 1.0;
  const std::size_t denom = mode == MpoMode::literal ? candidate.size() : gold.size();
  if (denom == 0) return 0.0;
  return static_cast<double>(lcs_length(candidate, gold)) / static_cast<double>(denom);
}

inline double mpo(const Process& candidate, const Process& gold, MpoMode mode = MpoMode::literal) {
  SymbolEncoding enc;
  const auto c = enc.encode(candidate);
  const auto g = enc.encode(gold);
  return mpo(c, g, mode);
}

/// Mean of per-program overlap over id-paired corpora.
inline double mpo(const ProgramCorpus& candidates, const ProgramCorpus& golds, MpoMode mode = MpoMode::literal) {
  const auto pairs = pair_by_id(candidates, golds);
  if (pairs.empty()) throw MetricError("mpo of an empty corpus is undefined");
  const auto enc = encode_corpora(candidates, golds);
  // encode_corpora keeps corpus order; map ids back to positions.
  auto index_of = [](const ProgramCorpus& c, const Process* p) {
    return static_cast<std::size_t>(p - c.programs().data());
  };
  double sum = 0.0;
  for (const auto& [c, g] : pairs)
    sum += mpo(enc.candidate[index_of(candidates, c)], enc.gold[index_of(golds, g)], mode);
  return sum / static_cast<double>(pairs.size());
}

// ---------------------------------------------------------------------------

struct ProgramPairResult {
  int strict = 1;
  double sensitive = 1.0;
  double mpo = 0.0;
  std::vector<StatementBreakdown> unit_breakdown;
};

inline ProgramPairResult compare_programs(const Process& p, const Process& gold, const SensitiveErrorConfig& cfg = {},
                                          MpoMode mode = MpoMode::literal) {
  ProgramPairResult r;
  r.strict = strict_error(p, gold);
  auto s = sensitive_error(p, gold, cfg);
  r.sensitive = s.value;
  r.unit_breakdown = std::move(s.breakdown);
  r.mpo = mpo(p, gold, mode);
  return r;
}

}  // namespace ipa
