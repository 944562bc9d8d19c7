#include <gtest/gtest.h>

#include <numeric>

#include "ipa/program_metrics.hpp"
#include "ipa/realisation_lang.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace ipa;

namespace {

Process P(const char* text, std::optional<std::string> id = {}) {
  auto r = parse(text);
  if (!r.ok()) throw std::runtime_error(format_diagnostic(r.diagnostics.at(0)));
  r.process->id = std::move(id);
  return *r.process;
}

GrayImage constant(std::size_t rows, std::size_t cols, double v) { return GrayImage::filled(rows, cols, v); }

SymbolSequence seq(std::string_view s) {
  SymbolSequence out;
  for (char c : s) out.push_back(static_cast<Symbol>(c));
  return out;
}

const char* kGold3 = "open(\"mail\")\nclick(@M.compose)\ntype(@M.to, \"bob\")";

}  // namespace

TEST(StrictError, Examples) {
  EXPECT_EQ(strict_error(P(kGold3), P(kGold3)), 0);
  EXPECT_EQ(strict_error(P("open(\"mail\")\nclick(@M.compose)\ntype(@M.to, \"eve\")"), P(kGold3)), 1);
  EXPECT_EQ(strict_error(Process{}, P(kGold3)), 1);
}

TEST(StrictError, ImagesComparedByPath) {
  EXPECT_EQ(strict_error(P("click(img(\"a\", 0, 0, 1, 1))"), P("click(img(\"a\", 5, 5, 9, 9))")), 0);
  EXPECT_EQ(strict_error(P("click(img(\"a\"))"), P("click(img(\"b\"))")), 1);
}

TEST(MaeStrict, Examples) {
  ProgramCorpus gold, same, none, half;
  const char* variants[] = {"a()", "b()", "c()", "d()"};
  for (int i = 0; i < 4; ++i) {
    const std::string id = "t" + std::to_string(i);
    gold.add(P(variants[i], id));
    same.add(P(variants[i], id));
    none.add(P("zzz()", id));
    half.add(P(i < 2 ? variants[i] : "zzz()", id));
  }
  EXPECT_DOUBLE_EQ(mae_strict(same, gold), 0.0);
  EXPECT_DOUBLE_EQ(mae_strict(none, gold), 1.0);
  EXPECT_DOUBLE_EQ(mae_strict(half, gold), 0.5);
}

TEST(MaeStrict, PairsByIdNotPosition) {
  ProgramCorpus gold({P("a()", "x"), P("b()", "y")});
  ProgramCorpus cand({P("b()", "y"), P("a()", "x")});
  EXPECT_DOUBLE_EQ(mae_strict(cand, gold), 0.0);
}

TEST(MaeStrict, IdMismatchNamesUnmatchedIds) {
  ProgramCorpus gold({P("a()", "x"), P("b()", "y")});
  ProgramCorpus cand({P("a()", "x"), P("b()", "q")});
  try {
    mae_strict(cand, gold);
    FAIL();
  } catch (const MetricError& e) {
    EXPECT_NE(std::string(e.what()).find("q"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("y"), std::string::npos);
  }
}

TEST(MaeStrict, MatchesDirectSummation) {
  testkit::Gen g(3);
  const std::vector<Statement> pool = {g.statement(false), g.statement(false), g.statement(false)};
  for (int round = 0; round < 100; ++round) {
    ProgramCorpus c, d;
    const auto k = g.between(1, 8);
    int sum = 0;
    for (std::size_t i = 0; i < k; ++i) {
      auto p = g.pooled_process(pool, 3), q = g.pooled_process(pool, 3);
      p.id = q.id = "t" + std::to_string(i);
      sum += strict_error(p, q);
      c.add(p);
      d.add(q);
    }
    EXPECT_DOUBLE_EQ(mae_strict(c, d), static_cast<double>(sum) / static_cast<double>(k));
  }
}

TEST(PredError, CaseSensitiveExactMatch) {
  EXPECT_EQ(pred_error("click", "click"), 0);
  EXPECT_EQ(pred_error("click", "type"), 1);
  EXPECT_EQ(pred_error("Click", "click"), 1);
}

TEST(SymbArgError, ExactMatch) {
  EXPECT_EQ(symb_arg_error("alice", "alice"), 0);
  EXPECT_EQ(symb_arg_error("alice", "bob"), 1);
  EXPECT_EQ(symb_arg_error("", ""), 0);
}

TEST(Iou, Examples) {
  const BoundingBox a{0, 0, 2, 2}, b{1, 1, 3, 3};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, BoundingBox{5, 5, 6, 6}), 0.0);
  EXPECT_NEAR(iou(a, b), 1.0 / 7.0, 1e-12);
  EXPECT_DOUBLE_EQ(iou(BoundingBox{1, 1, 1, 1}, BoundingBox{1, 1, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(iou(BoundingBox{0, 0, 2, 2}, BoundingBox{2, 0, 4, 2}), 0.0);
}

TEST(Iou, ZeroAreaRegionDoesNotMatchItself) {
  // Known gap in reflexivity: a zero-area region has IoU 0 with itself, so
  // under the iou comparator it counts as an argument error.
  auto p = parse("click(img(\"a.png\", 3, 3, 3, 8))");
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(strict_error(*p.process, *p.process), 0);
  EXPECT_GT(sensitive_error(*p.process, *p.process).value, 0.0);
  EXPECT_DOUBLE_EQ(mpo(*p.process, *p.process), 1.0);
}

TEST(Iou, MatchesPixelCountAndIsSymmetric) {
  testkit::Gen g(17);
  for (int i = 0; i < 2000; ++i) {
    auto rnd = [&] {
      const auto x0 = static_cast<std::int64_t>(g.below(20)), y0 = static_cast<std::int64_t>(g.below(20));
      return BoundingBox{x0, y0, x0 + static_cast<std::int64_t>(g.below(12)),
                         y0 + static_cast<std::int64_t>(g.below(12))};
    };
    const auto a = rnd(), b = rnd();
    const double v = iou(a, b);
    EXPECT_NEAR(v, testkit::pixel_count_iou(a, b), 1e-12);
    EXPECT_DOUBLE_EQ(v, iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Mse, Examples) {
  EXPECT_DOUBLE_EQ(mse(constant(2, 2, 7), constant(2, 2, 7)), 0.0);
  EXPECT_DOUBLE_EQ(mse(constant(2, 2, 0), constant(2, 2, 1)), 1.0);
  EXPECT_DOUBLE_EQ(mse(GrayImage(2, 2, {0, 2, 0, 0}), constant(2, 2, 0)), 1.0);
  EXPECT_THROW(mse(constant(2, 2, 0), constant(2, 3, 0)), MetricError);
}

TEST(Ssim, Examples) {
  const SensitiveErrorConfig cfg;
  EXPECT_DOUBLE_EQ(ssim(constant(3, 3, 100), constant(3, 3, 100), cfg), 1.0);
  // c1 / (255^2 + c1) with c1 = (0.01 * 255)^2 = 6.5025
  EXPECT_NEAR(ssim(constant(4, 4, 0), constant(4, 4, 255), cfg), 6.5025 / (65025.0 + 6.5025), 1e-12);
  EXPECT_NEAR(ssim(constant(4, 4, 0), constant(4, 4, 255), cfg), 9.999000099990003e-05, 1e-12);
  EXPECT_THROW(ssim(constant(1, 2, 0), constant(2, 1, 0), cfg), MetricError);
}

TEST(Ssim, IdentitySymmetryAndRange) {
  testkit::Gen g(23);
  const SensitiveErrorConfig cfg;
  for (int i = 0; i < 500; ++i) {
    const auto r = g.between(1, 6), c = g.between(1, 6);
    const auto a = g.image(r, c), b = g.image(r, c);
    EXPECT_NEAR(ssim(a, a, cfg), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(ssim(a, b, cfg), ssim(b, a, cfg));
    EXPECT_DOUBLE_EQ(mse(a, b), mse(b, a));
    EXPECT_GT(ssim(a, b, cfg), -1.0);
    EXPECT_LE(ssim(a, b, cfg), 1.0 + 1e-12);
  }
}

TEST(ImageArgError, Comparators) {
  SensitiveErrorConfig cfg;
  const ImageRef a{"a", constant(2, 2, 10), BoundingBox{0, 0, 2, 2}};
  const ImageRef b{"b", constant(2, 2, 10), BoundingBox{1, 1, 3, 3}};
  EXPECT_EQ(image_arg_error(a, a, cfg), 0);
  EXPECT_EQ(image_arg_error(a, b, cfg), 1);
  cfg.image_comparator = ImageComparator::ssim;
  EXPECT_EQ(image_arg_error(a, b, cfg), 0);
  cfg.image_comparator = ImageComparator::mse;
  EXPECT_EQ(image_arg_error(a, ImageRef{"c", constant(2, 2, 20), {}}, cfg), 0);  // 100 <= 100
  EXPECT_EQ(image_arg_error(a, ImageRef{"c", constant(2, 2, 21), {}}, cfg), 1);
}

TEST(ImageArgError, IouThresholdIsStrict) {
  SensitiveErrorConfig cfg;
  // IoU exactly 0.5 does not pass "> 0.5".
  EXPECT_DOUBLE_EQ(iou(BoundingBox{0, 0, 2, 1}, BoundingBox{0, 0, 1, 1}), 0.5);
  EXPECT_EQ(image_arg_error(ImageRef{"a", {}, BoundingBox{0, 0, 2, 1}}, ImageRef{"a", {}, BoundingBox{0, 0, 1, 1}}, cfg),
            1);
}

TEST(ImageArgError, MissingDataIsAnError) {
  SensitiveErrorConfig cfg;
  const ImageRef bare{"a", {}, {}};
  EXPECT_THROW(image_arg_error(bare, bare, cfg), MetricError);
  cfg.image_comparator = ImageComparator::mse;
  EXPECT_THROW(image_arg_error(bare, bare, cfg), MetricError);
}

TEST(SensitiveErrorConfig, Validation) {
  SensitiveErrorConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.iou_threshold = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.mse_threshold = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.ssim_threshold = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(SensitiveError, Examples) {
  const auto gold = P("type(@I.box, \"alice\")");
  EXPECT_DOUBLE_EQ(sensitive_error(gold, gold).value, 0.0);
  EXPECT_DOUBLE_EQ(sensitive_error(P("type(@I.box, \"bob\")"), gold).value, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(sensitive_error(P("fill(@I.box, \"alice\")"), gold).value, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(sensitive_error(Process{}, Process{}).value, 0.0);
}

TEST(SensitiveError, UnmatchedStatementsAndSurplusArgs) {
  const auto gold = P("open(\"x\")\nclick(@I.a)");
  // Missing second statement: 2 units of 4 wrong.
  auto r = sensitive_error(P("open(\"x\")"), gold);
  EXPECT_EQ(r.error_units, 2u);
  EXPECT_EQ(r.total_units, 4u);
  // Extra statement on the candidate side adds to the normalizer.
  r = sensitive_error(P("open(\"x\")\nclick(@I.a)\nwait(\"1\", \"2\")"), gold);
  EXPECT_EQ(r.error_units, 3u);
  EXPECT_EQ(r.total_units, 7u);
  // Surplus argument and kind mismatch.
  r = sensitive_error(P("open(@I.x, \"y\")\nclick(@I.a)"), gold);
  EXPECT_EQ(r.error_units, 2u);
  EXPECT_EQ(r.total_units, 5u);
  ASSERT_EQ(r.breakdown.size(), 2u);
  EXPECT_EQ(r.breakdown[0].arg_errors, (std::vector<int>{1, 1}));
}

TEST(Lcs, Examples) {
  EXPECT_TRUE(lcs(seq("ABC"), seq("")).empty());
  EXPECT_TRUE(lcs(seq(""), seq("ABC")).empty());
  EXPECT_EQ(lcs(seq("ABCBDAB"), seq("ABCBDAB")), seq("ABCBDAB"));
  EXPECT_EQ(lcs(seq("ABCBDAB"), seq("BDCABA")).size(), 4u);
  EXPECT_EQ(testkit::brute_force_lcs_length(seq("ABCBDAB"), seq("BDCABA")), 4u);
}

TEST(Lcs, TieBreakIsDeterministic) {
  // Both "A" and "B" are longest; the table walk prefers dropping from y,
  // which leaves lcs("AB", "B").
  EXPECT_EQ(lcs(seq("AB"), seq("BA")), seq("B"));
  EXPECT_EQ(lcs(seq("BA"), seq("AB")), seq("A"));
  EXPECT_EQ(lcs(seq("AB"), seq("BA")), lcs(seq("AB"), seq("BA")));
}

TEST(Lcs, MatchesBruteForceOracle) {
  testkit::Gen g(31);
  for (int i = 0; i < 3000; ++i) {
    SymbolSequence x(g.below(9)), y(g.below(9));
    const auto alpha = g.between(1, 4);
    for (auto& s : x) s = static_cast<Symbol>(g.below(alpha));
    for (auto& s : y) s = static_cast<Symbol>(g.below(alpha));
    const auto l = lcs(x, y);
    EXPECT_EQ(l.size(), testkit::brute_force_lcs_length(x, y));
    EXPECT_EQ(l.size(), lcs_length(x, y));
    EXPECT_TRUE(testkit::is_subsequence(l, x));
    EXPECT_TRUE(testkit::is_subsequence(l, y));
  }
}

TEST(Mpo, Examples) {
  const auto gold = P("a()\nb()\nc()\nd()");
  EXPECT_DOUBLE_EQ(mpo(gold, gold, MpoMode::literal), 1.0);
  EXPECT_DOUBLE_EQ(mpo(gold, gold, MpoMode::gold_normalized), 1.0);
  EXPECT_DOUBLE_EQ(mpo(P("x()\ny()"), gold), 0.0);
  const auto prefix = P("a()\nb()");
  EXPECT_DOUBLE_EQ(mpo(prefix, gold, MpoMode::literal), 1.0);
  EXPECT_DOUBLE_EQ(mpo(prefix, gold, MpoMode::gold_normalized), 0.5);
}

TEST(Mpo, EmptyConventions) {
  const auto gold = P("a()");
  EXPECT_DOUBLE_EQ(mpo(Process{}, gold, MpoMode::literal), 0.0);
  EXPECT_DOUBLE_EQ(mpo(Process{}, gold, MpoMode::gold_normalized), 0.0);
  EXPECT_DOUBLE_EQ(mpo(gold, Process{}, MpoMode::gold_normalized), 0.0);
  EXPECT_DOUBLE_EQ(mpo(Process{}, Process{}, MpoMode::literal), 1.0);
}

TEST(Mpo, CorpusIsMeanOfPerProgramValues) {
  ProgramCorpus gold({P("a()\nb()\nc()\nd()", "x"), P("a()", "y")});
  ProgramCorpus cand({P("z()", "y"), P("a()\nb()", "x")});
  EXPECT_DOUBLE_EQ(mpo(cand, gold, MpoMode::literal), 0.5);
  EXPECT_DOUBLE_EQ(mpo(cand, gold, MpoMode::gold_normalized), 0.25);
}

TEST(Mpo, ModeNames) {
  EXPECT_EQ(parse_mpo_mode("gold"), MpoMode::gold_normalized);
  EXPECT_EQ(parse_mpo_mode("literal"), MpoMode::literal);
  EXPECT_FALSE(parse_mpo_mode("both").has_value());
}

TEST(Properties, ReflexivityAndRanges) {
  testkit::Gen g(41);
  SensitiveErrorConfig cfgs[3];
  cfgs[1].image_comparator = ImageComparator::mse;
  cfgs[2].image_comparator = ImageComparator::ssim;
  int scored = 0;
  for (int i = 0; i < 500; ++i) {
    const auto p = g.process(12, true), q = g.process(12, true);
    for (const auto& cfg : cfgs) {
      EXPECT_EQ(strict_error(p, p), 0);
      EXPECT_DOUBLE_EQ(sensitive_error(p, p, cfg).value, 0.0);
      EXPECT_DOUBLE_EQ(mpo(p, p), 1.0);
      // mse/ssim refuse images of different shapes; that is an error, not a score.
      try {
        const double s = sensitive_error(p, q, cfg).value;
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0);
        ++scored;
      } catch (const MetricError&) {
        EXPECT_NE(cfg.image_comparator, ImageComparator::iou);
      }
    }
    for (auto mode : {MpoMode::literal, MpoMode::gold_normalized}) {
      const double m = mpo(p, q, mode);
      EXPECT_GE(m, 0.0);
      EXPECT_LE(m, 1.0);
    }
  }
  EXPECT_GT(scored, 1000);
}

TEST(Properties, StrictZeroImpliesSensitiveZeroAndFullOverlap) {
  testkit::Gen g(43);
  std::vector<Statement> pool;
  for (int i = 0; i < 3; ++i) pool.push_back(g.statement(true));
  int equal_pairs = 0;
  for (int i = 0; i < 3000; ++i) {
    const auto p = g.pooled_process(pool, 3), q = g.pooled_process(pool, 3);
    const auto r = compare_programs(p, q);
    if (r.strict == 0) {
      ++equal_pairs;
      EXPECT_DOUBLE_EQ(r.sensitive, 0.0);
      EXPECT_DOUBLE_EQ(r.mpo, 1.0);
    }
  }
  EXPECT_GT(equal_pairs, 10);
}
