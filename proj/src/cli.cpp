#include "rankwise/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rankwise/api.hpp"
#include "rankwise/board.hpp"
#include "rankwise/config.hpp"
#include "rankwise/error.hpp"
#include "rankwise/rules/default_rules.hpp"
#include "rankwise/rules/parser.hpp"
#include "rankwise/rules/validate.hpp"
#include "rankwise/service.hpp"
#include "rankwise/store.hpp"

namespace rankwise {

namespace {

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Validation:
    case ErrorCategory::NotFound:
    case ErrorCategory::Conflict: return 1;
    case ErrorCategory::Locked:
    case ErrorCategory::Io: return 2;
  }
  return 2;
}

int exit_code(int http_status) {
  if (http_status < 400) return 0;
  return http_status == 423 || http_status >= 500 ? 2 : 1;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

rules::RuleSet load_rules(const std::string& path) {
  if (path.empty()) return rules::default_rules();
  const std::string text = read_text(path);
  try {
    return rules::parse_rules(text);
  } catch (const rules::ParseError& e) {
    throw ValidationError(path + ":" + e.what(), "rules");
  }
}

std::string join(const json& array, const char* sep) {
  std::string out;
  for (const auto& v : array) {
    if (!out.empty()) out += sep;
    out += v.get<std::string>();
  }
  return out;
}

std::string pad(const std::string& s, std::size_t width) { return s.size() >= width ? s : s + std::string(width - s.size(), ' '); }
std::string lpad(const std::string& s, std::size_t width) { return s.size() >= width ? s : std::string(width - s.size(), ' ') + s; }

struct Options {
  std::string store;
  std::string rules;
  bool json = false;
};

class Session {
 public:
  Session(const Options& o) : store_(o.store), board_(store_, load_rules(o.rules)), api_(board_) {}
  Api& api() { return api_; }
  PromotionBoard& board() { return board_; }
  Store& store() { return store_; }

 private:
  Store store_;
  PromotionBoard board_;
  Api api_;
};

// Prints either the raw JSON body or a human rendering of it.
int emit(const ApiResponse& r, const Options& o, std::ostream& out, std::ostream& err,
         const std::function<void(const json&)>& human) {
  if (o.json) {
    out << r.body;
    return exit_code(r.status);
  }
  const json body = json::parse(r.body);
  if (r.status >= 400) {
    const json& e = body.at("error");
    err << "error";
    if (!e.at("field").is_null()) err << " (" << e.at("field").get<std::string>() << ")";
    err << ": " << e.at("message").get<std::string>() << "\n";
    return exit_code(r.status);
  }
  human(body);
  return 0;
}

void print_rankings(const json& body, std::ostream& out) {
  out << "Rankings for cycle " << body.at("cycle").get<std::string>() << "\n";
  out << "Pos  " << pad("Cadet", 14) << pad("Rank", 15) << lpad("Composite", 9) << lpad("Coach", 8) << "  "
      << pad("Stage", 9) << pad("Eligible", 32) << "Flags\n";
  for (const auto& e : body.at("entries")) {
    std::string flags;
    if (e.at("tie_break_used").get<bool>()) flags = "tie";
    if (e.at("manual_review").get<bool>()) flags += ",manual-review";
    std::string eligible = join(e.at("eligible"), ",");
    if (eligible.empty()) eligible = "-";
    std::string line = lpad(std::to_string(e.at("position").get<int>()), 3) + "  " +
                       pad(e.at("cadet_id").get<std::string>(), 14) + pad(e.at("current_rank").get<std::string>(), 15) +
                       lpad(e.at("composite").get<std::string>(), 9) +
                       lpad(e.at("coach_observation").get<std::string>(), 8) + "  " +
                       pad(e.at("stage").get<std::string>(), 9) + pad(eligible, 32) + flags;
    line.erase(line.find_last_not_of(' ') + 1);
    out << line << "\n";
    for (const auto& n : e.at("notes")) {
      out << "     note by " << n.at("author").get<std::string>() << ": " << n.at("text").get<std::string>() << "\n";
    }
  }
  if (body.at("entries").empty()) out << "  no mark sheets in this cycle\n";
}

void print_cadets(const json& body, std::ostream& out) {
  out << pad("Cadet", 14) << pad("Name", 24) << pad("Rank", 15) << "Enrolled\n";
  for (const auto& c : body.at("cadets")) {
    std::string line = pad(c.at("cadet_id").get<std::string>(), 14) + pad(c.at("name").get<std::string>(), 24) +
                       pad(c.at("rank").get<std::string>(), 15) + c.at("enrollment_cycle").get<std::string>();
    line.erase(line.find_last_not_of(' ') + 1);
    out << line << "\n";
  }
}

int report(const std::exception& e, const Options& o, std::ostream& out, std::ostream& err) {
  const auto* error = dynamic_cast<const Error*>(&e);
  if (o.json) {
    out << error_response(e).body;
  } else {
    err << "error";
    if (error && !error->field().empty()) err << " (" << error->field() << ")";
    err << ": " << e.what() << "\n";
  }
  return error ? exit_code(error->category()) : 2;
}

int serve(const std::string& config_path, const Options& o, std::ostream& out, std::ostream& err) {
  ServiceConfig config = config_path.empty() ? ServiceConfig{} : load_config(config_path);
  apply_environment(config);
  if (!o.store.empty()) config.store = o.store;
  if (!o.rules.empty()) config.rules = o.rules;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Options resolved = o;
  resolved.store = config.store.string();
  resolved.rules = config.rules.string();
  Session session(resolved);
  Service service(session.api());
  service.start(config.listen);
  out << "listening on http://" << config.listen.host << ":" << service.port() << std::endl;

  int received = 0;
  sigwait(&signals, &received);
  service.stop();
  err << "stopped\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cadet assessment, promotion eligibility and explanations", "rankwise"};
  app.require_subcommand(1);

  Options o;
  app.add_option("--store", o.store, "Store directory (default: $RANKWISE_STORE or ./rankwise-store)");
  app.add_option("--rules", o.rules, "Rule file (default: $RANKWISE_RULES or the built-in rule base)");
  app.add_flag("--json", o.json, "Print the HTTP service's JSON response instead of text");

  auto* rules_cmd = app.add_subcommand("rules", "Rule file tools");
  rules_cmd->require_subcommand(1);
  std::string check_file;
  auto* check = rules_cmd->add_subcommand("check", "Parse and statically validate a rule file");
  check->add_option("file", check_file)->required();

  std::string csv_file;
  bool resubmit = false;
  auto* import = app.add_subcommand("import", "Import a marks CSV");
  import->add_option("csv", csv_file)->required();
  import->add_flag("--resubmit", resubmit, "Replace sheets already submitted for the cycle");

  std::string cadet_id, cycle;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a cadet and record the trace");
  evaluate->add_option("cadet_id", cadet_id)->required();
  evaluate->add_option("--cycle", cycle);

  auto* rank = app.add_subcommand("rank", "Rank cadets for a cycle (default: latest)");
  rank->add_option("--cycle", cycle);

  std::string trace_id;
  bool detailed = false;
  auto* explain = app.add_subcommand("explain", "Show the explanation of a recorded evaluation");
  explain->add_option("trace_id", trace_id)->required();
  explain->add_flag("--detailed", detailed);

  std::vector<std::string> sets;
  auto* whatif = app.add_subcommand("whatif", "Evaluate modified marks without saving anything");
  whatif->add_option("cadet_id", cadet_id)->required();
  whatif->add_option("--cycle", cycle);
  whatif->add_option("--set", sets, "component=mark")->required();

  std::string dest;
  auto* export_cmd = app.add_subcommand("export", "Write a backup archive into a directory");
  export_cmd->add_option("dest", dest)->required();

  std::string archive;
  auto* restore = app.add_subcommand("restore", "Restore a backup archive into an empty store directory");
  restore->add_option("archive", archive)->required();

  std::string config_path;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--config", config_path);

  auto* cadet = app.add_subcommand("cadet", "Manage cadet records");
  cadet->require_subcommand(1);
  std::string name, rank_name, enrollment;
  auto* cadet_add = cadet->add_subcommand("add", "Create a cadet");
  cadet_add->add_option("cadet_id", cadet_id)->required();
  cadet_add->add_option("--name", name);
  cadet_add->add_option("--rank", rank_name);
  cadet_add->add_option("--enrollment-cycle", enrollment);
  auto* cadet_list = cadet->add_subcommand("list", "List cadets");
  auto* cadet_show = cadet->add_subcommand("show", "Show a cadet with marks and notes");
  cadet_show->add_option("cadet_id", cadet_id)->required();
  auto* cadet_rank = cadet->add_subcommand("set-rank", "Record a rank change");
  cadet_rank->add_option("cadet_id", cadet_id)->required();
  cadet_rank->add_option("rank", rank_name)->required();

  auto* note = app.add_subcommand("note", "Coach notes");
  note->require_subcommand(1);
  std::string author, text, timestamp;
  auto* note_add = note->add_subcommand("add", "Attach a coach note to a cadet for a cycle");
  note_add->add_option("cadet_id", cadet_id)->required();
  note_add->add_option("--cycle", cycle)->required();
  note_add->add_option("--author", author)->required();
  note_add->add_option("--text", text)->required();
  note_add->add_option("--timestamp", timestamp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  if (*serve_cmd) {
    try {
      return serve(config_path, o, out, err);
    } catch (const std::exception& e) {
      return report(e, o, out, err);
    }
  }
  if (const char* v = std::getenv("RANKWISE_STORE"); v && o.store.empty()) o.store = v;
  if (const char* v = std::getenv("RANKWISE_RULES"); v && o.rules.empty()) o.rules = v;
  if (o.store.empty()) o.store = "rankwise-store";

  try {
    if (*check) {
      const std::string source = read_text(check_file);
      rules::RuleSet set;
      try {
        set = rules::parse_rules(source);
      } catch (const rules::ParseError& e) {
        if (o.json) {
          out << json_response(400, json{{"error", {{"code", "validation"},
                                                    {"field", "rules"},
                                                    {"message", e.what()},
                                                    {"line", e.pos().line},
                                                    {"column", e.pos().column}}}})
                     .body;
        } else {
          err << check_file << ":" << e.what() << "\n";
        }
        return 1;
      }
      const auto diagnostics = rules::validate_ruleset(set, rules::standard_vocabulary());
      if (o.json) {
        json list = json::array();
        for (const auto& d : diagnostics) {
          list.push_back({{"kind", std::string(to_string(d.kind))}, {"rule", d.rule}, {"message", d.message}});
        }
        out << json_response(200, json{{"rules", set.size()}, {"ok", diagnostics.empty()}, {"diagnostics", list}})
                   .body;
      } else if (diagnostics.empty()) {
        out << set.size() << " rules, OK\n";
      } else {
        out << set.size() << " rules, " << diagnostics.size() << " problem" << (diagnostics.size() == 1 ? "" : "s")
            << "\n";
        for (const auto& d : diagnostics) out << "  " << d.rule << ": " << to_string(d.kind) << ": " << d.message << "\n";
      }
      return diagnostics.empty() ? 0 : 1;
    }

    if (*restore) {
      Store::import_backup(archive, o.store);
      const json body{{"store", o.store}, {"restored_from", archive}};
      if (o.json) {
        out << json_response(200, body).body;
      } else {
        out << "restored " << archive << " into " << o.store << "\n";
      }
      return 0;
    }

    Session session(o);
    Api& api = session.api();
    const auto optional_cycle = [&]() -> std::optional<std::string> {
      if (cycle.empty()) return std::nullopt;
      return cycle;
    };

    if (*import) {
      const auto summary = session.board().import_csv(read_text(csv_file), resubmit);
      if (o.json) {
        out << json_response(201, json{{"imported", summary.assessment_ids.size()},
                                       {"assessment_ids", summary.assessment_ids},
                                       {"created_cadets", summary.created_cadets}})
                   .body;
      } else {
        out << "imported " << summary.assessment_ids.size() << " mark sheet"
            << (summary.assessment_ids.size() == 1 ? "" : "s") << ", " << summary.created_cadets.size()
            << " new cadet" << (summary.created_cadets.size() == 1 ? "" : "s") << "\n";
      }
      return 0;
    }

    if (*evaluate) {
      json body = json::object();
      if (auto c = optional_cycle()) body["cycle"] = *c;
      const ApiResponse r = api.evaluate(cadet_id, body.dump());
      return emit(r, o, out, err, [&](const json& b) {
        const ExplanationTrace trace = session.store().get_trace(b.at("trace_id").get<std::string>());
        out << render_general(trace) << "trace: " << trace.trace_id << "\n";
      });
    }

    if (*rank) return emit(api.rankings(optional_cycle()), o, out, err, [&](const json& b) { print_rankings(b, out); });

    if (*explain) {
      const ApiResponse r = api.get_trace(trace_id, detailed ? "detailed" : "general");
      return emit(r, o, out, err, [&](const json& b) { out << b.at("text").get<std::string>(); });
    }

    if (*whatif) {
      json changes = json::object();
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ValidationError("--set expects component=mark, got '" + s + "'", "set");
        changes[s.substr(0, eq)] = s.substr(eq + 1);
      }
      json body{{"cadet_id", cadet_id}};
      if (auto c = optional_cycle()) body["cycle"] = *c;
      body["set"] = changes;
      return emit(api.what_if(body.dump()), o, out, err,
                  [&](const json& b) { out << b.at("explanation").get<std::string>(); });
    }

    if (*export_cmd) {
      const auto path = session.store().export_backup(dest);
      if (o.json) {
        out << json_response(201, json{{"archive", path.string()}}).body;
      } else {
        out << "wrote " << path.string() << "\n";
      }
      return 0;
    }

    if (*cadet_add) {
      json body{{"cadet_id", cadet_id}, {"name", name}};
      if (!rank_name.empty()) body["rank"] = rank_name;
      if (!enrollment.empty()) body["enrollment_cycle"] = enrollment;
      return emit(api.create_cadet(body.dump()), o, out, err, [&](const json& b) {
        out << "created " << b.at("cadet_id").get<std::string>() << " (" << b.at("rank").get<std::string>() << ")\n";
      });
    }
    if (*cadet_list) return emit(api.list_cadets(), o, out, err, [&](const json& b) { print_cadets(b, out); });
    if (*cadet_show) {
      return emit(api.get_cadet(cadet_id), o, out, err, [&](const json& b) {
        out << b.at("cadet_id").get<std::string>() << "  " << b.at("name").get<std::string>() << "  "
            << b.at("rank").get<std::string>() << "\n";
        for (const auto& a : b.at("assessments")) {
          out << "  " << a.at("assessment_id").get<std::string>() << "  cycle " << a.at("cycle").get<std::string>()
              << "  composite " << a.at("composite").get<std::string>() << "\n";
        }
        for (const auto& n : b.at("notes")) {
          out << "  note (" << n.at("cycle").get<std::string>() << ") by " << n.at("author").get<std::string>() << ": "
              << n.at("text").get<std::string>() << "\n";
        }
      });
    }
    if (*cadet_rank) {
      return emit(api.update_rank(cadet_id, json{{"rank", rank_name}}.dump()), o, out, err, [&](const json& b) {
        out << b.at("cadet_id").get<std::string>() << " is now " << b.at("rank").get<std::string>() << "\n";
      });
    }
    if (*note_add) {
      json body{{"cycle", cycle}, {"author", author}, {"text", text}};
      if (!timestamp.empty()) body["timestamp"] = timestamp;
      return emit(api.add_note(cadet_id, body.dump()), o, out, err, [&](const json& b) {
        out << "note added for " << b.at("cadet_id").get<std::string>() << " (" << b.at("cycle").get<std::string>()
            << ")\n";
      });
    }
  } catch (const std::exception& e) {
    return report(e, o, out, err);
  }
  return 0;
}

}  // namespace rankwise
