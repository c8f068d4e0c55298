#include <doctest.h>

#include "generators.hpp"
#include "rankwise/error.hpp"
#include "rankwise/explanation.hpp"
#include "rankwise/promotion.hpp"
#include "rankwise/rules/default_rules.hpp"
#include "rankwise/rules/parser.hpp"
#include "rankwise/rules/printer.hpp"
#include "temp_dir.hpp"

using namespace rankwise;
using namespace rankwise::testing;

namespace {

Fixed2 f(const char* text) { return *Fixed2::parse(text); }

Evaluation run(const char* cadet, const char* mark, Rank rank = Rank::CadetOfficer,
               const rules::RuleSet& set = rules::default_rules()) {
  return evaluate(uniform_sheet(cadet, "2026-1", f(mark)), WeightTable::standard(), set, rank);
}

std::string golden(const char* name) { return slurp(std::string(RANKWISE_SOURCE_DIR) + "/tests/golden/" + name); }

}  // namespace

TEST_CASE("composite 85 trace has the stage and eligibility firings") {
  const Evaluation e = run("C001", "85");
  REQUIRE(e.trace.firings.size() == 2);
  CHECK(e.trace.firings[0].rule == "stage_high");
  CHECK(e.trace.firings[1].rule == "eligible_high");
  CHECK(e.trace.conclusions.stage == Stage::HIGH);
  CHECK(e.trace.trace_id.size() == 18);
  CHECK(e.trace.trace_id.rfind("t-", 0) == 0);
}

TEST_CASE("composite 30 trace concludes FAIL with no ranks") {
  const Evaluation e = run("C003", "30");
  CHECK(e.trace.conclusions.stage == Stage::FAIL);
  CHECK(e.trace.conclusions.eligible.empty());
  CHECK(e.trace.firings.back().rule == "eligible_fail");
}

TEST_CASE("general text") {
  const Evaluation high = run("C001", "85");
  const std::string text = render_general(high.trace);
  CHECK(text == golden("general_85.txt"));
  for (const char* needle : {"85.00", "HIGH", "Corporal", "Sergeant", "JUO", "SUO"}) {
    CHECK(text.find(needle) != std::string::npos);
  }
  CHECK(render_general(high.trace) == text);

  const std::string zero = render_general(run("C0", "0").trace);
  CHECK(zero.find("FAIL") != std::string::npos);
  CHECK(zero.find("not eligible") != std::string::npos);

  const std::string top = render_general(run("C9", "90", Rank::SUO).trace);
  CHECK(top.find("not eligible for promotion above the current rank of SUO") != std::string::npos);
}

TEST_CASE("detailed text matches the frozen golden files") {
  CHECK(render_detailed(run("C001", "85").trace) == golden("detailed_85.txt"));
  CHECK(render_detailed(run("C003", "30").trace) == golden("detailed_30.txt"));
}

TEST_CASE("detailed text of an empty rule base") {
  const rules::RuleSet none;
  const MarkSheet s = uniform_sheet("C1", "2026-1", f("50"));
  const CompositeScore c = compute_composite(s, WeightTable::standard());
  const ExplanationTrace t = build_trace(s, WeightTable::standard(), c, Rank::CadetOfficer, none, {},
                                         Conclusions{Stage::LOW, {}});
  const std::string text = render_detailed(t);
  CHECK(text.rfind("Detailed explanation for cadet C1, cycle 2026-1\n", 0) == 0);
  CHECK(text.find("  no rules fired\n") != std::string::npos);
}

TEST_CASE("detailed text contains the general conclusions and only known rules") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const MarkSheet s = random_sheet(rng, "C" + std::to_string(i), "2026-1");
    const Rank rank = kAllRanks[uniform(rng, 0, 5)];
    const Evaluation e = evaluate(s, WeightTable::standard(), rules::default_rules(), rank);
    const std::string general = render_general(e.trace);
    const std::string detailed = render_detailed(e.trace);
    REQUIRE(detailed.find(general) != std::string::npos);
    const rules::RuleSet recorded = rules::parse_rules(e.trace.ruleset);
    for (const auto& firing : e.trace.firings) {
      REQUIRE(recorded.find(firing.rule));
      REQUIRE(detailed.find(firing.rule + ":") != std::string::npos);
    }
    REQUIRE(render_detailed(e.trace) == detailed);
  }
}

TEST_CASE("traces replay to identical conclusions") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Evaluation e = evaluate(random_sheet(rng, "C1", "2026-1"), WeightTable::standard(), rules::default_rules(),
                                  kAllRanks[uniform(rng, 0, 5)]);
    const ReplayResult r = replay(e.trace);
    CAPTURE(r.mismatch);
    REQUIRE(r.matches);
  }
}

TEST_CASE("replay notices tampering") {
  ExplanationTrace t = run("C1", "85").trace;
  t.conclusions.eligible.erase(Rank::SUO);
  CHECK_FALSE(replay(t).matches);

  ExplanationTrace other = run("C1", "85").trace;
  other.ruleset = "RULE broken IF";
  CHECK_FALSE(replay(other).matches);
}

TEST_CASE("trace JSON round trip") {
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const Evaluation e = evaluate(random_sheet(rng, "C1", "2026-1"), WeightTable::standard(), rules::default_rules(),
                                  kAllRanks[uniform(rng, 0, 5)]);
    const json doc = trace_to_json(e.trace);
    const ExplanationTrace back = trace_from_json(json::parse(doc.dump()));
    REQUIRE(trace_to_json(back) == doc);
    REQUIRE(back.firings == e.trace.firings);
  }
  const json doc = trace_to_json(run("C1", "85").trace);
  std::vector<std::string> keys;
  for (const auto& [k, _] : doc.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"trace_id", "cadet_id", "cycle", "marks", "composite", "firings", "stage",
                                         "eligible", "current_rank", "weights", "ruleset"});
  CHECK_THROWS_AS(trace_from_json(json{{"trace_id", 3}}), ValidationError);
}

TEST_CASE("build_trace rejects firings inconsistent with the input") {
  const MarkSheet s = uniform_sheet("C1", "2026-1", f("85"));
  const WeightTable w = WeightTable::standard();
  const CompositeScore c = compute_composite(s, w);
  auto result = inference::forward_chain(rules::default_rules(), input_memory(s, c, Rank::CadetOfficer));
  const Conclusions ok = conclude(result.memory, Rank::CadetOfficer);
  CHECK_NOTHROW(build_trace(s, w, c, Rank::CadetOfficer, rules::default_rules(), result.firings, ok));

  auto wrong_snapshot = result.firings;
  wrong_snapshot[0].snapshot["composite"] = rules::Value{f("70")};
  CHECK_THROWS_AS(build_trace(s, w, c, Rank::CadetOfficer, rules::default_rules(), wrong_snapshot, ok),
                  ValidationError);

  auto unknown_rule = result.firings;
  unknown_rule[0].rule = "nope";
  CHECK_THROWS_AS(build_trace(s, w, c, Rank::CadetOfficer, rules::default_rules(), unknown_rule, ok),
                  ValidationError);

  auto gap = result.firings;
  gap[1].sequence = 3;
  CHECK_THROWS_AS(build_trace(s, w, c, Rank::CadetOfficer, rules::default_rules(), gap, ok), ValidationError);

  CHECK_THROWS_AS(build_trace(s, w, CompositeScore{f("84")}, Rank::CadetOfficer, rules::default_rules(),
                              result.firings, ok),
                  ValidationError);
}

TEST_CASE("trace ids depend on content only") {
  CHECK(run("C1", "85").trace.trace_id == run("C1", "85").trace.trace_id);
  CHECK(run("C1", "85").trace.trace_id != run("C2", "85").trace.trace_id);
  CHECK(run("C1", "85").trace.trace_id != run("C1", "85.01").trace.trace_id);
  CHECK(run("C1", "85").trace.trace_id != run("C1", "85", Rank::Corporal).trace.trace_id);
}
