#include <doctest.h>

#include <algorithm>
#include <set>

#include "generators.hpp"
#include "oracles.hpp"
#include "rankwise/inference.hpp"
#include "rankwise/rules/default_rules.hpp"
#include "rankwise/rules/parser.hpp"

using namespace rankwise;
using namespace rankwise::inference;
using namespace rankwise::testing;
using rules::Symbol;
using rules::Value;

namespace {

Value num(std::int64_t whole) { return Fixed2::from_integer(whole); }

WorkingMemory memory_with(std::initializer_list<std::pair<const char*, Value>> facts) {
  WorkingMemory m;
  for (const auto& [a, v] : facts) m.assert_fact(a, v);
  return m;
}

}  // namespace

TEST_CASE("empty program leaves memory unchanged") {
  const WorkingMemory m = memory_with({{"composite", num(85)}});
  const auto r = forward_chain(rules::RuleSet{}, m);
  CHECK(r.memory == m);
  CHECK(r.firings.empty());
}

TEST_CASE("single modus ponens") {
  const auto set = rules::parse_rules("RULE r IF a == 1 THEN b = 2");
  const auto r = forward_chain(set, memory_with({{"a", num(1)}}));
  CHECK(r.memory.value("b") == std::optional<Value>{num(2)});
  REQUIRE(r.firings.size() == 1);
  CHECK(r.firings[0].sequence == 1);
  CHECK(r.firings[0].rule == "r");
  CHECK(r.firings[0].snapshot.at("a") == std::optional<Value>{num(1)});
  CHECK(r.memory.find("b")->derived_by == std::optional<std::string>{"r"});
  CHECK(r.memory.find("a")->derived_by == std::nullopt);
}

TEST_CASE("default fixture on composite 85") {
  const auto r = forward_chain(rules::default_rules(), memory_with({{"composite", num(85)}}));
  CHECK(r.memory.value("stage") == std::optional<Value>{Symbol{"HIGH"}});
  CHECK(r.memory.eligible_ranks() == std::set{Rank::Corporal, Rank::Sergeant, Rank::JUO, Rank::SUO});
  REQUIRE(r.firings.size() == 2);
  CHECK(r.firings[0].rule == "stage_high");
  CHECK(r.firings[1].rule == "eligible_high");
}

TEST_CASE("conflicting assignments name both rules") {
  const auto set = rules::parse_rules("RULE one IF a == 1 THEN b = 1\nRULE two IF a >= 1 THEN b = 2");
  try {
    forward_chain(set, memory_with({{"a", num(1)}}));
    FAIL("expected conflict");
  } catch (const RuleConflictError& e) {
    CHECK(e.attribute() == "b");
    CHECK(e.first() == "one");
    CHECK(e.second() == "two");
  }
  CHECK_THROWS_AS(backward_chain(set, memory_with({{"a", num(1)}}), Goal::equals("b", num(1))), RuleConflictError);

  const auto over_asserted = rules::parse_rules("RULE r IF a == 1 THEN b = 3");
  try {
    forward_chain(over_asserted, memory_with({{"a", num(1)}, {"b", num(4)}}));
    FAIL("expected conflict");
  } catch (const RuleConflictError& e) {
    CHECK(e.first() == "asserted");
  }
  // The same value again is not a conflict, and adds nothing.
  const auto same = forward_chain(over_asserted, memory_with({{"a", num(1)}, {"b", num(3)}}));
  CHECK(same.firings.empty());
}

TEST_CASE("absent attributes make comparisons false and NOT true") {
  const auto set = rules::parse_rules("RULE p IF missing == 1 THEN x = 1\nRULE q IF NOT missing == 1 THEN y = 1");
  const auto r = forward_chain(set, WorkingMemory{});
  CHECK_FALSE(r.memory.value("x"));
  CHECK(r.memory.value("y") == std::optional<Value>{num(1)});
  CHECK_FALSE(compare(std::nullopt, rules::RelOp::Ne, num(1)));
  CHECK(compare(Value{Symbol{"a"}}, rules::RelOp::Ne, num(1)));
  CHECK_FALSE(compare(Value{Symbol{"a"}}, rules::RelOp::Eq, num(1)));
}

TEST_CASE("rules wait for every writer of what they read") {
  // q is declared first but reads b, which p writes.
  const auto set = rules::parse_rules("RULE q IF NOT b == 2 THEN c = 1\nRULE p IF a == 1 THEN b = 2");
  const auto r = forward_chain(set, memory_with({{"a", num(1)}}));
  CHECK_FALSE(r.memory.value("c"));
  REQUIRE(r.firings.size() == 1);
  CHECK(r.firings[0].rule == "p");
}

TEST_CASE("ELIGIBLE unions without conflict") {
  const auto set = rules::parse_rules("RULE a IF x == 1 THEN ELIGIBLE(SUO, JUO)\nRULE b IF x == 1 THEN ELIGIBLE(JUO, Sergeant)");
  const auto r = forward_chain(set, memory_with({{"x", num(1)}}));
  CHECK(r.memory.eligible_ranks() == std::set{Rank::Sergeant, Rank::JUO, Rank::SUO});
  CHECK(r.memory.eligible().at(Rank::JUO) == std::optional<std::string>{"a"});
  CHECK(r.firings.size() == 2);
}

TEST_CASE("working memory is single assignment") {
  WorkingMemory m;
  m.assert_fact("a", num(1));
  CHECK_THROWS_AS(m.assert_fact("a", num(2)), ValidationError);
  CHECK_THROWS_AS(m.assert_fact("Bad", num(2)), ValidationError);
}

TEST_CASE("backward proofs") {
  const auto set = rules::parse_rules("RULE r IF a == 1 THEN b = 2");
  const auto proven = backward_chain(set, memory_with({{"a", num(1)}}), Goal::equals("b", num(2)));
  CHECK(proven.proven);
  REQUIRE(proven.proof);
  CHECK(proven.proof->depth() == 1);
  CHECK(proven.proof->rule == std::optional<std::string>{"r"});
  REQUIRE(proven.proof->premises.size() == 1);
  CHECK(proven.proof->premises[0].asserted);

  const auto unproven = backward_chain(rules::RuleSet{}, memory_with({{"a", num(1)}}), Goal::equals("b", num(2)));
  CHECK_FALSE(unproven.proven);
  REQUIRE(unproven.failed.size() == 1);
  CHECK(unproven.failed[0].goal == "b == 2");

  const auto blocked = backward_chain(set, memory_with({{"a", num(3)}}), Goal::equals("b", num(2)));
  CHECK_FALSE(blocked.proven);
  REQUIRE_FALSE(blocked.failed.empty());
  CHECK(blocked.failed[0].reason.find("'r' does not fire") != std::string::npos);
}

TEST_CASE("SUO eligibility is proven through the stage subgoal") {
  const WorkingMemory m = memory_with({{"composite", num(85)}});
  const auto proof = backward_chain(rules::default_rules(), m, Goal::eligible_contains(Rank::SUO));
  REQUIRE(proof.proven);
  CHECK(proof.proof->rule == std::optional<std::string>{"eligible_high"});
  REQUIRE(proof.proof->premises.size() == 1);
  CHECK(proof.proof->premises[0].attribute == "stage");
  CHECK(proof.proof->premises[0].rule == std::optional<std::string>{"stage_high"});
  CHECK(proof.proof->depth() == 2);
  // Oracle: forward membership.
  CHECK(forward_chain(rules::default_rules(), m).memory.eligible_ranks().count(Rank::SUO) == 1);
  CHECK_FALSE(backward_chain(rules::default_rules(), m, Goal::eligible_contains(Rank::LanceCorporal)).proven);
}

TEST_CASE("forward and backward chaining agree on random rule bases") {
  Rng rng(31337);
  for (int i = 0; i < 300; ++i) {
    const auto g = random_acyclic_rules(rng);
    const auto m = random_memory(rng, g);
    const Verdict v = chaining_equivalence(g, m);
    CAPTURE(i);
    CAPTURE(v.detail);
    REQUIRE(v.ok);
  }
}

TEST_CASE("forward chaining is deterministic, refractory, conservative and bounded") {
  Rng rng(8080);
  for (int i = 0; i < 300; ++i) {
    const auto g = random_acyclic_rules(rng);
    const auto m = random_memory(rng, g);
    ForwardResult a, b;
    try {
      a = forward_chain(g.rules, m);
      b = forward_chain(g.rules, m);
    } catch (const RuleConflictError&) {
      continue;
    }
    REQUIRE(a.memory == b.memory);
    REQUIRE(a.firings == b.firings);
    REQUIRE(a.firings.size() <= g.rules.size() * std::max<std::size_t>(1, g.rules.attributes().size()));

    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t k = 0; k < a.firings.size(); ++k) {
      const FiredRule& f = a.firings[k];
      REQUIRE(f.sequence == k + 1);
      std::string snap;
      for (const auto& [attr, v] : f.snapshot) snap += attr + "=" + (v ? rules::to_string(*v) : "-") + ";";
      REQUIRE(seen.emplace(f.rule, snap).second);
      const rules::Rule* rule = g.rules.find(f.rule);
      REQUIRE(rule);
      REQUIRE(f.actions == rule->actions);
      REQUIRE(holds(rule->condition, [&](const std::string& attr) { return f.snapshot.at(attr); }));
    }
    for (const auto& [attr, fact] : a.memory.facts()) {
      if (fact.derived_by) REQUIRE(g.rules.find(*fact.derived_by));
    }
  }
}

TEST_CASE("final memory does not depend on declaration order") {
  Rng rng(55);
  for (int i = 0; i < 200; ++i) {
    const auto g = random_acyclic_rules(rng);
    const auto m = random_memory(rng, g);
    std::vector<rules::Rule> shuffled = g.rules.rules();
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const rules::RuleSet reordered(shuffled);
    std::optional<WorkingMemory> a, b;
    try {
      a = forward_chain(g.rules, m).memory;
    } catch (const RuleConflictError&) {
    }
    try {
      b = forward_chain(reordered, m).memory;
    } catch (const RuleConflictError&) {
    }
    REQUIRE(a.has_value() == b.has_value());
    if (a) {
      REQUIRE(a->facts().size() == b->facts().size());
      for (const auto& [attr, fact] : a->facts()) REQUIRE(b->value(attr) == std::optional<Value>{fact.value});
      REQUIRE(a->eligible_ranks() == b->eligible_ranks());
    }
  }
}
