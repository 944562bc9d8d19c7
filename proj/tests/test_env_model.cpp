#include <gtest/gtest.h>

#include <set>

#include "ipa/env_model.hpp"
#include "ipa/realisation_lang.hpp"
#include "support/generators.hpp"

using namespace ipa;
using K = KindConstraint;

namespace {

Environment form_env() {
  return Environment::Builder()
      .interface("I1")
      .element("I1", "submit", BoundingBox{10, 10, 60, 30}, "button")
      .element("I1", "box", std::nullopt, "text field")
      .action("click", {K::element})
      .action("type", {K::element, K::symbol})
      .action("anything", {K::any, K::any})
      .build();
}

Process parsed(const char* text) {
  auto r = parse(text);
  if (!r.ok()) throw std::runtime_error(format_diagnostic(r.diagnostics.at(0)));
  return *r.process;
}

}  // namespace

TEST(Validate, AcceptsWellTypedProcess) { EXPECT_TRUE(validate_process(parsed("click(@I1.submit)"), form_env()).empty()); }

TEST(Validate, UnknownInterface) {
  auto v = validate_process(parsed("click(@I9.ghost)"), form_env());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].message.find("unknown interface I9"), std::string::npos);
}

TEST(Validate, UnknownElementOnKnownInterface) {
  auto v = validate_process(parsed("click(@I1.ghost)"), form_env());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].message.find("unknown element I1.ghost"), std::string::npos);
}

TEST(Validate, ArityMismatch) {
  auto v = validate_process(parsed("type(@I1.box)"), form_env());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].message.find("arity mismatch 1 != 2"), std::string::npos);
}

TEST(Validate, UnknownActionIsAViolation) {
  auto v = validate_process(parsed("scroll(@I1.box)"), form_env());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].message.find("unknown action scroll"), std::string::npos);
}

TEST(Validate, KindMismatchAndAny) {
  auto v = validate_process(parsed("type(\"x\", @I1.box)"), form_env());
  EXPECT_EQ(v.size(), 2u);
  EXPECT_TRUE(validate_process(parsed("anything(img(\"a\"), \"b\")\nanything(@I1.box, 3)"), form_env()).empty());
}

TEST(Validate, ValueDomainPreset) {
  auto env = Environment::Builder()
                 .interface("I")
                 .element("I", "f")
                 .action("type", {K::element, K::symbol})
                 .value_domain(ValueDomain(ValueDomainPreset::lowercase_space))
                 .build();
  EXPECT_TRUE(validate_process(parsed("type(@I.f, \"hello world\")"), env).empty());
  auto v = validate_process(parsed("type(@I.f, \"Hello\")\ntype(@I.f, \"\")"), env);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].statement_index, 0u);
  EXPECT_NE(v[0].message.find("outside the value domain"), std::string::npos);
}

TEST(Validate, ElementsFromSeveralInterfacesInOneCall) {
  auto env = Environment::Builder()
                 .interface("A")
                 .element("A", "x")
                 .interface("B")
                 .element("B", "y")
                 .action("drag", {K::element, K::element})
                 .build();
  EXPECT_TRUE(validate_process(parsed("drag(@A.x, @B.y)"), env).empty());
}

TEST(Validate, EmptyProcessIsValid) { EXPECT_TRUE(validate_process(Process{}, form_env()).empty()); }

TEST(Validate, MonotoneInEnvironment) {
  // Adding declarations never flags a statement that was clean before. The
  // message can change: declaring an action turns "unknown action" into
  // whatever arity or kind complaint applies.
  testkit::Gen g(99);
  for (int round = 0; round < 300; ++round) {
    std::vector<std::string> ifaces = {"A", "B"}, elems = {"x", "y", "z"}, actions = {"f", "g", "h"};
    Environment::Builder small, big;
    for (const auto& i : ifaces) {
      small.interface(i);
      big.interface(i);
      for (const auto& e : elems) {
        const bool in_small = g.coin();
        if (in_small) small.element(i, e);
        if (in_small || g.coin()) big.element(i, e);
      }
    }
    for (const auto& a : actions) {
      const std::vector<K> kinds(g.below(3), K(g.below(4)));
      if (g.coin()) {
        small.action(a, kinds);
        big.action(a, kinds);
      } else if (g.coin()) {
        big.action(a, kinds);
      }
    }
    const auto e_small = small.build(), e_big = big.build();
    Process p;
    for (std::size_t k = g.below(6); k > 0; --k) {
      Statement st{actions[g.below(3)], {}};
      for (std::size_t n = g.below(3); n > 0; --n)
        st.args.push_back(g.coin() ? ArgumentValue::element(ifaces[g.below(2)], elems[g.below(3)])
                                   : ArgumentValue::symbol("v"));
      p.statements.push_back(st);
    }
    std::set<std::size_t> flagged_small;
    for (const auto& v : validate_process(p, e_small)) flagged_small.insert(v.statement_index);
    for (const auto& v : validate_process(p, e_big))
      EXPECT_TRUE(flagged_small.count(v.statement_index)) << v.message;
  }
}

TEST(Validate, AcceptedProcessesUseDeclaredActionsOnly) {
  const auto env = form_env();
  for (const char* text : {"click(@I1.submit)", "type(@I1.box, \"x\")\nclick(@I1.box)", "open(\"x\")"}) {
    const auto p = parsed(text);
    if (!validate_process(p, env).empty()) continue;
    for (const auto& st : p.statements) EXPECT_NE(env.signature(st.action), nullptr);
  }
}

TEST(TypeOf, DeclaredDescriptor) {
  EXPECT_EQ(type_of(form_env(), InterfaceElementRef{"I1", "submit", {}, {}}), "button");
}

TEST(TypeOf, AbsentWhenNotCovered) {
  EXPECT_FALSE(type_of(form_env(), InterfaceElementRef{"I1", "nope", {}, {}}).has_value());
  EXPECT_FALSE(type_of(form_env(), SymbolValue{"hello"}).has_value());
}

TEST(TypeOf, NoVocabularyMeansAbsentEverywhere) {
  auto env = Environment::Builder().interface("I").element("I", "a").action("click", {K::element}).build();
  EXPECT_FALSE(env.has_vocabulary());
  EXPECT_FALSE(type_of(env, InterfaceElementRef{"I", "a", {}, {}}).has_value());
}

TEST(TypeOf, ValueDescriptors) {
  auto env = Environment::Builder().value_descriptor("42", "number").build();
  EXPECT_EQ(type_of(env, SymbolValue{"42"}), "number");
}

TEST(Builder, RejectsDuplicatesAndBadDescriptors) {
  EXPECT_THROW(Environment::Builder().interface("I").interface("I"), std::invalid_argument);
  EXPECT_THROW(Environment::Builder().interface("I").element("I", "a").element("I", "a"), std::invalid_argument);
  EXPECT_THROW(Environment::Builder().element("J", "a"), std::invalid_argument);
  EXPECT_THROW(Environment::Builder().interface("I").element("I", "a", std::nullopt, "Button"), std::invalid_argument);
  EXPECT_THROW(
      Environment::Builder().vocabulary({"button"}).interface("I").element("I", "a", std::nullopt, "link").build(),
      std::invalid_argument);
  EXPECT_THROW(Environment::Builder().action("f", {}).action("f", {K::any}), std::invalid_argument);
}

TEST(Replay, EmptyProcessGivesEmptyTrace) {
  auto r = replay(Process{}, form_env());
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r.trace->steps.empty());
}

TEST(Replay, RejectsInvalidProcessWithReport) {
  auto r = replay(parsed("click(@I9.ghost)"), form_env());
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.violations.size(), 1u);
}

TEST(Replay, DeterministicAndPrefixDigests) {
  const auto p = parsed("click(@I1.submit)\ntype(@I1.box, \"x\")\nclick(@I1.submit)");
  const auto env = form_env();
  auto a = replay(p, env), b = replay(p, env);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(*a.trace, *b.trace);
  ASSERT_EQ(a.trace->steps.size(), 3u);
  // State after step k hashes the first k canonical keys.
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<Statement> prefix(p.statements.begin(), p.statements.begin() + static_cast<long>(k + 1));
    EXPECT_EQ(a.trace->steps[k].state_digest, state_digest(prefix));
  }
  // Steps 1 and 3 apply the same statement but the states differ.
  EXPECT_NE(a.trace->steps[0].state_digest, a.trace->steps[2].state_digest);
}

TEST(Replay, EqualSequencesShareFinalDigest) {
  auto p = parsed("click(@I1.submit)");
  auto q = p;
  q.id = "other";
  q.statements[0].args[0] = ArgumentValue(InterfaceElementRef{"I1", "submit", BoundingBox{0, 0, 1, 1}, "button"});
  EXPECT_EQ(replay(p, form_env()).trace->final_digest(), replay(q, form_env()).trace->final_digest());
}

TEST(Replay, DigestIsSha256OfKeyLog) {
  // sha256("click(@I1.submit)\n")
  EXPECT_EQ(state_digest({parsed("click(@I1.submit)").statements[0]}),
            state_digest({Statement{"click", {ArgumentValue::element("I1", "submit")}}}));
  EXPECT_EQ(state_digest({}), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(EnvironmentJson, RoundTrip) {
  const auto env = form_env();
  const auto j = environment_to_json(env);
  const auto back = environment_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(environment_to_json(back).dump(), j.dump());
  EXPECT_EQ(type_of(back, InterfaceElementRef{"I1", "submit", {}, {}}), "button");
}

TEST(EnvironmentJson, ParsesDocumentedFields) {
  auto j = nlohmann::json::parse(R"({
    "interfaces": {"I1": {"submit": {"bbox": [0, 0, 4, 2], "descriptor": "button"}, "box": {}}},
    "actions": {"click": ["element"], "type": ["element", "symbol"]},
    "value_domain": "lowercase_space"
  })");
  const auto env = environment_from_json(j);
  EXPECT_EQ(env.element("I1", "submit")->bounding_box, (BoundingBox{0, 0, 4, 2}));
  EXPECT_EQ(env.signature("type")->arity(), 2u);
  EXPECT_EQ(env.value_domain().preset(), ValueDomainPreset::lowercase_space);
}

TEST(EnvironmentJson, RejectsMalformedDocuments) {
  for (const char* text : {R"([])", R"({"actions": {}})", R"({"interfaces": {}, "actions": {"f": ["pixel"]}})",
                           R"({"interfaces": {"I": {"a": {"bbox": [3, 0, 1, 1]}}}, "actions": {}})",
                           R"({"interfaces": {}, "actions": {}, "value_domain": "ascii"})"})
    EXPECT_THROW(environment_from_json(nlohmann::json::parse(text)), EnvironmentFormatError) << text;
}
