// One PASS/FAIL line per acceptance criterion. Exit status is non-zero if any
// criterion fails.

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "generators.hpp"
#include "oracles.hpp"
#include "rankwise/api.hpp"
#include "rankwise/archive.hpp"
#include "rankwise/error.hpp"
#include "rankwise/promotion.hpp"
#include "rankwise/rules/default_rules.hpp"
#include "rankwise/rules/parser.hpp"
#include "rankwise/rules/printer.hpp"
#include "rankwise/service.hpp"
#include "temp_dir.hpp"

using namespace rankwise;
using namespace rankwise::testing;
namespace fs = std::filesystem;
using Ranks = std::set<Rank>;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

#define EXPECT(cond, msg)                   \
  do {                                      \
    if (!(cond)) return Outcome{false, msg}; \
  } while (0)

Fixed2 f(const char* text) { return *Fixed2::parse(text); }

StoreOptions fast() {
  StoreOptions o;
  o.sync = false;
  return o;
}

// Traces produced by the other criteria, replayed at the end.
std::vector<ExplanationTrace> g_traces;

// ---------------------------------------------------------------------------

Outcome weight_table() {
  // Standard testing table, transcribed independently of the library.
  const std::vector<std::pair<ComponentId, int>> expected = {
      {ComponentId::Leadership, 14},       {ComponentId::TheoryPaper1, 12},  {ComponentId::TheoryPaper2, 12},
      {ComponentId::MilitaryPractical, 12}, {ComponentId::MilitaryIMP, 12},  {ComponentId::Marching, 6},
      {ComponentId::Weapons, 6},           {ComponentId::ShootingSkill, 4},  {ComponentId::WarField, 10},
      {ComponentId::Sports, 3},            {ComponentId::Attendance, 6},     {ComponentId::CoachObservation, 3},
  };
  const WeightTable table = WeightTable::standard();
  int sum = 0;
  for (const auto& [id, w] : expected) {
    EXPECT(table.weight(id) == w, std::string(component_key(id)) + " weight differs");
    sum += w;
  }
  EXPECT(sum == 100 && table.sum() == 100, "sum is not 100");
  EXPECT(validate_weights(table).empty(), "fixture rejected");
  int rejected = 0;
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    for (int delta : {-1, 1}) {
      WeightTable t = table;
      t.entries[i].weight += delta;
      if (!validate_weights(t).empty()) ++rejected;
    }
  }
  EXPECT(rejected == 24, std::to_string(rejected) + "/24 perturbations rejected");
  return {true, "sum 100, 24/24 perturbations rejected"};
}

Outcome classification() {
  for (std::int64_t h = 0; h <= 10000; ++h) {
    EXPECT(classify_stage({Fixed2::from_hundredths(h)}) == stage_oracle(h),
           "mismatch at " + Fixed2::from_hundredths(h).to_string());
  }
  EXPECT(classify_stage({f("85")}) == Stage::HIGH, "85");
  EXPECT(classify_stage({f("60")}) == Stage::AVERAGE, "60");
  EXPECT(classify_stage({f("50")}) == Stage::LOW, "50");
  EXPECT(classify_stage({f("49.99")}) == Stage::FAIL, "49.99");
  return {true, "10001/10001 match, spot values 85 60 50 49.99 ok"};
}

Outcome engine_equivalence() {
  const auto& R = rules::default_rules();
  const auto W = WeightTable::standard();
  std::size_t agree = 0;
  for (std::int64_t h = 0; h <= 10000; ++h) {
    const Fixed2 score = Fixed2::from_hundredths(h);
    inference::WorkingMemory m;
    m.assert_fact("composite", score);
    const auto r = inference::forward_chain(R, m);
    const rules::Value expected = rules::Symbol{std::string(to_string(classify_stage({score})))};
    EXPECT(r.memory.value("stage") == std::optional<rules::Value>{expected}, "disagree at " + score.to_string());
    // The same score through the full pipeline: a uniform sheet's composite is its mark.
    const Evaluation e = evaluate(uniform_sheet("C-" + std::to_string(h), "2026-1", score), W, R, Rank::CadetOfficer);
    EXPECT(e.composite.value == score && e.stage == classify_stage({score}), "pipeline disagrees at " + score.to_string());
    g_traces.push_back(e.trace);
    ++agree;
  }
  return {true, std::to_string(agree) + "/10001 agree"};
}

Outcome end_to_end() {
  const auto& R = rules::default_rules();
  const auto W = WeightTable::standard();
  const struct {
    const char* mark;
    Stage stage;
    Ranks eligible;
  } cases[] = {
      {"85", Stage::HIGH, {Rank::Corporal, Rank::Sergeant, Rank::JUO, Rank::SUO}},
      {"70", Stage::AVERAGE, {Rank::Corporal, Rank::Sergeant}},
      {"30", Stage::FAIL, {}},
  };
  for (const auto& c : cases) {
    const Evaluation e = evaluate(uniform_sheet("C001", "2026-1", f(c.mark)), W, R, Rank::CadetOfficer);
    EXPECT(e.composite.value == f(c.mark), std::string("composite ") + c.mark);
    EXPECT(e.stage == c.stage, std::string("stage for ") + c.mark);
    EXPECT(e.eligible == c.eligible, std::string("eligible set for ") + c.mark);
    g_traces.push_back(e.trace);
  }
  return {true, "85 -> {Corporal,Sergeant,JUO,SUO}, 70 -> {Corporal,Sergeant}, 30 -> {}"};
}

Outcome chaining() {
  Rng rng(20261016);
  std::size_t cases = 0;
  for (int i = 0; i < 500; ++i) {
    const auto g = random_acyclic_rules(rng);
    for (int k = 0; k < 10; ++k) {
      const Verdict v = chaining_equivalence(g, random_memory(rng, g));
      EXPECT(v.ok, "ruleset " + std::to_string(i) + ": " + v.detail);
      ++cases;
    }
  }
  return {true, "500 rulesets, " + std::to_string(cases) + "/" + std::to_string(cases) + " memories agree"};
}

Outcome explanation_replay() {
  const auto& R = rules::default_rules();
  const auto W = WeightTable::standard();
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    g_traces.push_back(evaluate(random_sheet(rng, "R" + std::to_string(i), "2026-1"), W, R, kAllRanks[uniform(rng, 0, 5)]).trace);
  }
  for (const auto& t : g_traces) {
    const ReplayResult r = replay(t);
    EXPECT(r.matches, t.trace_id + ": " + r.mismatch);
    // A second, independent run renders byte-identical text.
    const Evaluation again = evaluate(t.sheet, t.weights, rules::parse_rules(t.ruleset), t.current_rank);
    EXPECT(render_general(again.trace) == render_general(t), t.trace_id + ": general text differs");
    EXPECT(render_detailed(again.trace) == render_detailed(t), t.trace_id + ": detailed text differs");
  }
  // Stability across processes: texts frozen in earlier runs.
  const fs::path golden = fs::path(RANKWISE_SOURCE_DIR) / "tests/golden";
  const Evaluation e85 = evaluate(uniform_sheet("C001", "2026-1", f("85")), W, R, Rank::CadetOfficer);
  const Evaluation e30 = evaluate(uniform_sheet("C003", "2026-1", f("30")), W, R, Rank::CadetOfficer);
  EXPECT(render_general(e85.trace) == slurp(golden / "general_85.txt"), "general_85 golden differs");
  EXPECT(render_detailed(e85.trace) == slurp(golden / "detailed_85.txt"), "detailed_85 golden differs");
  EXPECT(render_detailed(e30.trace) == slurp(golden / "detailed_30.txt"), "detailed_30 golden differs");
  return {true, std::to_string(g_traces.size()) + " traces replayed, texts byte-stable"};
}

Outcome parser() {
  Rng rng(424242);
  GenOptions o;
  o.max_depth = 5;
  o.fancy_literals = true;
  for (int i = 0; i < 1000; ++i) {
    const auto g = random_acyclic_rules(rng, o);
    const std::string text = rules::pretty_print(g.rules);
    rules::RuleSet again;
    try {
      again = rules::parse_rules(text);
    } catch (const Error& e) {
      return {false, "round trip " + std::to_string(i) + " failed to parse: " + e.what()};
    }
    EXPECT(again == g.rules, "round trip " + std::to_string(i) + " differs");
  }

  const std::string seed = std::string(rules::default_rules_text());
  const char* words[] = {"RULE", "IF", "THEN", "AND", "OR", "NOT", "(", ")", "==", ">=", "<", "=", "ELIGIBLE",
                         "composite", "stage", "HIGH", "Corporal", "80", "-1.5", "#", "\n"};
  std::size_t failures = 0, bytes = 0;
  double slowest = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string input;
    const std::size_t len = uniform(rng, 0, i % 10 == 0 ? 65536 : 2048);
    switch (i % 3) {
      case 0:
        for (std::size_t k = 0; k < len; ++k) input.push_back(static_cast<char>(uniform(rng, 0, 255)));
        break;
      case 1:
        while (input.size() + 16 < len) {
          input += words[uniform(rng, 0, std::size(words) - 1)];
          input += ' ';
        }
        break;
      default:
        input = seed;
        for (int k = 0; k < 4; ++k) input[uniform(rng, 0, input.size() - 1)] = static_cast<char>(uniform(rng, 0, 255));
        break;
    }
    bytes += input.size();
    const auto start = std::chrono::steady_clock::now();
    try {
      rules::parse_rules(input);
    } catch (const rules::ParseError& e) {
      ++failures;
      EXPECT(e.pos().offset <= input.size(), "fuzz " + std::to_string(i) + ": position past end");
      EXPECT(line_column(input, e.pos().offset) == std::make_pair(e.pos().line, e.pos().column),
             "fuzz " + std::to_string(i) + ": line/column do not match offset");
    } catch (const std::exception& e) {
      return {false, "fuzz " + std::to_string(i) + ": unpositioned failure: " + e.what()};
    }
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    EXPECT(input.size() <= 65536, "oversized input");
  }
  EXPECT(slowest < 1.0, "slowest input took " + std::to_string(slowest) + " s");
  std::ostringstream d;
  d << "1000/1000 round trips, 10000 fuzz inputs (" << bytes / 1024 << " KiB), " << failures
    << " rejected all positioned, slowest " << static_cast<int>(slowest * 1000) << " ms";
  return {true, d.str()};
}

Outcome store() {
  TempDir dir;
  const fs::path path = dir / "store";
  Rng rng(1000);
  const std::string cycles[] = {"2025-2", "2026-1"};
  std::size_t applied = 0;
  std::string archive;
  json state;
  std::string log;
  {
    Store s(path, fast());
    for (int op = 0; applied < 1000; ++op) {
      const std::string id = "C" + std::to_string(uniform(rng, 0, 39));
      const std::string& cycle = cycles[uniform(rng, 0, 1)];
      try {
        switch (uniform(rng, 0, 4)) {
          case 0:
            s.put_cadet({id, "Cadet " + id, kAllRanks[uniform(rng, 0, 5)], cycle});
            break;
          case 1:
            s.update_rank(id, kAllRanks[uniform(rng, 0, 5)]);
            break;
          case 2:
            s.submit_marks(random_sheet(rng, id, cycle), chance(rng, 0.5));
            break;
          case 3: {
            const auto sheet = s.latest_sheet(id);
            if (!sheet) continue;
            s.record_trace(evaluate(sheet->sheet, WeightTable::standard(), rules::default_rules(),
                                    s.get_cadet(id).current_rank)
                               .trace);
            break;
          }
          default:
            s.add_note({id, cycle, "coach", "note " + std::to_string(op), ""});
            break;
        }
        ++applied;
      } catch (const NotFoundError&) {
      } catch (const DuplicateError&) {
      }
    }
    state = s.state().to_json();
    EXPECT(replay_events(s.audit_events()).to_json() == state, "replay differs from live state");
    archive = s.export_archive().bytes;
    log = slurp(path / "audit.log");
  }
  EXPECT(StoreState::from_json(json::parse(slurp(path / "snapshot.json"))).to_json() == state,
         "snapshot file differs from live state");
  fs::remove(path / "snapshot.json");
  {
    Store s(path, fast());
    EXPECT(s.state().to_json() == state, "replay of audit.log alone differs from snapshot");
  }

  Store::import_archive(archive, dir / "restored");
  {
    Store s(dir / "restored", fast());
    EXPECT(s.state().to_json() == state, "imported state differs");
    EXPECT(slurp(dir / "restored" / "audit.log") == log, "imported audit log differs");
  }

  std::size_t rejected = 0, trials = 0;
  for (std::size_t at = 0; at < archive.size(); at += 1 + archive.size() / 500, ++trials) {
    std::string corrupt = archive;
    corrupt[at] = static_cast<char>(corrupt[at] ^ 0x20);
    const fs::path target = dir / "corrupt";
    try {
      Store::import_archive(corrupt, target);
      return {false, "flipped byte " + std::to_string(at) + " accepted"};
    } catch (const IoError&) {
      ++rejected;
    }
    EXPECT(!fs::exists(target), "partial state left after rejecting byte " + std::to_string(at));
  }
  for (const auto& e : fs::directory_iterator(dir.path())) {
    EXPECT(e.path().filename().string().find(".import-") == std::string::npos, "staging directory left behind");
  }
  std::ostringstream d;
  d << applied << " ops applied, replay == snapshot, import lossless, " << rejected << "/" << trials
    << " corrupted archives rejected with no partial state";
  return {true, d.str()};
}

std::string run_cli_process(const std::string& args) {
  const std::string command = std::string(RANKWISE_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return {};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  ::pclose(pipe);
  return out;
}

Outcome parity() {
  TempDir dir;
  const fs::path fixture = dir / "fixture";
  std::string trace_id;
  {
    Store s(fixture, fast());
    PromotionBoard board(s, rules::default_rules());
    board.import_csv(slurp(fs::path(RANKWISE_SOURCE_DIR) / "tests/fixtures/marks.csv"), false);
    s.update_rank("C-002", Rank::Corporal);
    s.add_note({"C-004", "2026-1", "coach", "volunteers first", "2026-03-01T10:00:00.000Z"});
    trace_id = board.evaluate("C-001", std::nullopt).trace.trace_id;
  }
  fs::copy(fixture, dir / "cli", fs::copy_options::recursive);
  fs::copy(fixture, dir / "http", fs::copy_options::recursive);
  fs::remove(dir / "cli" / "lock");
  fs::remove(dir / "http" / "lock");

  Store http_store(dir / "http", fast());
  PromotionBoard board(http_store, rules::default_rules());
  Api api(board);
  Service service(api);
  service.start({"127.0.0.1", 0});
  httplib::Client client("127.0.0.1", service.port());

  const std::string store_arg = "--store '" + (dir / "cli").string() + "' --json ";
  const struct {
    std::string name;
    std::string cli;
    std::function<httplib::Result()> http;
  } commands[] = {
      {"cadet list", "cadet list", [&] { return client.Get("/cadets"); }},
      {"cadet show", "cadet show C-005", [&] { return client.Get("/cadets/C-005"); }},
      {"rank", "rank --cycle 2026-1", [&] { return client.Get("/rankings?cycle=2026-1"); }},
      {"explain", "explain " + trace_id + " --detailed",
       [&] { return client.Get("/traces/" + trace_id + "?view=detailed"); }},
      {"whatif", "whatif C-003 --cycle 2026-1 --set marching=100",
       [&] {
         return client.Post("/whatif", R"({"cadet_id":"C-003","cycle":"2026-1","set":{"marching":"100"}})",
                            "application/json");
       }},
  };
  std::size_t identical = 0;
  for (const auto& c : commands) {
    const std::string cli = run_cli_process(store_arg + c.cli);
    const auto res = c.http();
    EXPECT(res, c.name + ": HTTP request failed");
    EXPECT(res->status == 200, c.name + ": HTTP status " + std::to_string(res->status));
    EXPECT(!cli.empty(), c.name + ": CLI printed nothing");
    EXPECT(cli == res->body, c.name + ": CLI and HTTP bodies differ");
    ++identical;
  }
  service.stop();
  return {true, std::to_string(identical) + "/5 commands byte-identical"};
}

}  // namespace

int main() {
  const struct {
    const char* name;
    double limit_seconds;  // 0: no time bound
    Outcome (*run)();
  } criteria[] = {
      {"weight-table", 1, weight_table},
      {"classification-oracle", 5, classification},
      {"engine-function-equivalence", 30, engine_equivalence},
      {"promotion-end-to-end", 0, end_to_end},
      {"chaining-equivalence", 60, chaining},
      {"explanation-replay", 0, explanation_replay},
      {"parser-roundtrip-fuzz", 0, parser},
      {"store-replay-archive", 0, store},
      {"cli-service-parity", 0, parity},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.ok && c.limit_seconds > 0 && seconds >= c.limit_seconds) {
      o = {false, "took " + std::to_string(seconds) + " s, limit " + std::to_string(c.limit_seconds) + " s"};
    }
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.3f s", seconds);
    std::cout << (o.ok ? "PASS " : "FAIL ") << c.name << " [" << timing;
    if (c.limit_seconds > 0) std::cout << " < " << c.limit_seconds << " s";
    std::cout << "] " << o.detail << std::endl;
    failed += !o.ok;
  }
  return failed == 0 ? 0 : 1;
}
