#include "rankwise/api.hpp"

#include "rankwise/error.hpp"

namespace rankwise {

namespace {

json parse_body(std::string_view body, bool allow_empty = false) {
  if (allow_empty && body.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw ValidationError("request body is not valid JSON", "body");
  if (!j.is_object()) throw ValidationError("request body must be a JSON object", "body");
  return j;
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ValidationError(std::string(key) + " must be a string", key);
  return it->get<std::string>();
}

std::string required_string(const json& j, const char* key) {
  auto value = optional_string(j, key);
  if (!value) throw ValidationError(std::string(key) + " is required", key);
  return *value;
}

bool optional_bool(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return false;
  if (!it->is_boolean()) throw ValidationError(std::string(key) + " must be true or false", key);
  return it->get<bool>();
}

Rank required_rank(const json& j, const char* key) {
  const std::string text = required_string(j, key);
  const auto rank = parse_rank(text);
  if (!rank) throw ValidationError("unknown rank '" + text + "'", key);
  return *rank;
}

std::map<ComponentId, Fixed2> marks_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string(key) + " is required", key);
  if (!it->is_object()) throw ValidationError(std::string(key) + " must be an object", key);
  return marks_from_json(*it);
}

template <typename F>
ApiResponse guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return error_response(e);
  }
}

json what_if_to_json(const Evaluation& e) {
  json out;
  out["cadet_id"] = e.trace.cadet_id();
  out["cycle"] = e.trace.cycle();
  out["current_rank"] = std::string(to_string(e.trace.current_rank));
  out["composite"] = e.composite.value.to_string();
  out["stage"] = std::string(to_string(e.stage));
  out["eligible"] = ranks_to_json(e.eligible);
  out["explanation"] = render_general(e.trace);
  out["trace"] = trace_to_json(e.trace);
  return out;
}

}  // namespace

int http_status(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Validation: return 400;
    case ErrorCategory::NotFound: return 404;
    case ErrorCategory::Conflict: return 409;
    case ErrorCategory::Locked: return 423;
    case ErrorCategory::Io: return 500;
  }
  return 500;
}

std::string_view error_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Validation: return "validation";
    case ErrorCategory::NotFound: return "not_found";
    case ErrorCategory::Conflict: return "conflict";
    case ErrorCategory::Locked: return "locked";
    case ErrorCategory::Io: return "io";
  }
  return "io";
}

ApiResponse json_response(int status, const json& body) {
  ApiResponse r;
  r.status = status;
  r.body = body.dump(2) + "\n";
  return r;
}

ApiResponse error_response(const std::exception& e) {
  ErrorCategory category = ErrorCategory::Io;
  std::string field;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    category = err->category();
    field = err->field();
  }
  json detail;
  detail["code"] = std::string(error_code(category));
  detail["field"] = field.empty() ? json(nullptr) : json(field);
  detail["message"] = e.what();
  return json_response(http_status(category), json{{"error", detail}});
}

json evaluation_to_json(const Evaluation& e) {
  json out;
  out["cadet_id"] = e.trace.cadet_id();
  out["cycle"] = e.trace.cycle();
  out["composite"] = e.composite.value.to_string();
  out["stage"] = std::string(to_string(e.stage));
  out["eligible"] = ranks_to_json(e.eligible);
  out["trace_id"] = e.trace.trace_id;
  return out;
}

json ranking_entry_to_json(std::size_t position, const RankingEntry& entry) {
  json out;
  out["position"] = position;
  out["cadet_id"] = entry.cadet_id;
  out["current_rank"] = std::string(to_string(entry.current_rank));
  out["composite"] = entry.composite.value.to_string();
  out["coach_observation"] = entry.coach_observation.to_string();
  out["stage"] = std::string(to_string(entry.stage));
  out["eligible"] = ranks_to_json(entry.eligible);
  out["tie_break_used"] = entry.tie_break_used;
  out["manual_review"] = entry.manual_review;
  json notes = json::array();
  for (const auto& n : entry.notes) notes.push_back(note_to_json(n));
  out["notes"] = std::move(notes);
  return out;
}

ApiResponse Api::create_cadet(std::string_view body) {
  return guarded([&] {
    const json j = parse_body(body);
    CadetRecord record;
    record.cadet_id = required_string(j, "cadet_id");
    record.name = optional_string(j, "name").value_or("");
    record.current_rank = j.contains("rank") ? required_rank(j, "rank") : Rank::CadetOfficer;
    record.enrollment_cycle = optional_string(j, "enrollment_cycle").value_or("");
    board_.store().put_cadet(record);
    return json_response(201, cadet_to_json(record));
  });
}

ApiResponse Api::list_cadets() {
  return guarded([&] {
    json cadets = json::array();
    for (const auto& c : board_.store().list_cadets()) cadets.push_back(cadet_to_json(c));
    return json_response(200, json{{"cadets", cadets}});
  });
}

ApiResponse Api::get_cadet(const std::string& cadet_id) {
  return guarded([&] {
    Store& store = board_.store();
    json out = cadet_to_json(store.get_cadet(cadet_id));
    std::vector<StoredSheet> sheets;
    for (const auto& [key, stored] : store.state().sheets) {
      if (key.first == cadet_id) sheets.push_back(stored);
    }
    std::sort(sheets.begin(), sheets.end(),
              [](const StoredSheet& a, const StoredSheet& b) { return a.sequence < b.sequence; });
    json assessments = json::array();
    for (const auto& s : sheets) {
      assessments.push_back(json{{"assessment_id", s.assessment_id},
                                 {"cycle", s.sheet.cycle},
                                 {"composite", compute_composite(s.sheet, board_.weights()).value.to_string()},
                                 {"marks", marks_to_json(s.sheet.marks)}});
    }
    out["assessments"] = std::move(assessments);
    json notes = json::array();
    for (const auto& n : store.notes(cadet_id)) notes.push_back(note_to_json(n));
    out["notes"] = std::move(notes);
    return json_response(200, out);
  });
}

ApiResponse Api::update_rank(const std::string& cadet_id, std::string_view body) {
  return guarded([&] {
    const json j = parse_body(body);
    board_.store().update_rank(cadet_id, required_rank(j, "rank"));
    return json_response(200, cadet_to_json(board_.store().get_cadet(cadet_id)));
  });
}

ApiResponse Api::submit_marks(const std::string& cadet_id, std::string_view body) {
  return guarded([&] {
    const json j = parse_body(body);
    MarkSheet sheet;
    sheet.cadet_id = cadet_id;
    sheet.cycle = required_string(j, "cycle");
    sheet.marks = marks_field(j, "marks");
    const bool resubmit = optional_bool(j, "resubmit");
    const std::string id = board_.store().submit_marks(sheet, resubmit);
    json out;
    out["assessment_id"] = id;
    out["cadet_id"] = cadet_id;
    out["cycle"] = sheet.cycle;
    out["composite"] = compute_composite(sheet, board_.weights()).value.to_string();
    out["resubmit"] = resubmit;
    return json_response(201, out);
  });
}

ApiResponse Api::evaluate(const std::string& cadet_id, std::string_view body) {
  return guarded([&] {
    const json j = parse_body(body, true);
    return json_response(200, evaluation_to_json(board_.evaluate(cadet_id, optional_string(j, "cycle"))));
  });
}

ApiResponse Api::get_trace(const std::string& trace_id, const std::optional<std::string>& view) {
  return guarded([&] {
    const std::string v = view.value_or("general");
    if (v != "general" && v != "detailed") throw ValidationError("view must be general or detailed", "view");
    const ExplanationTrace trace = board_.store().get_trace(trace_id);
    json out;
    out["trace_id"] = trace.trace_id;
    out["view"] = v;
    out["text"] = v == "general" ? render_general(trace) : render_detailed(trace);
    out["trace"] = trace_to_json(trace);
    return json_response(200, out);
  });
}

ApiResponse Api::rankings(const std::optional<std::string>& cycle) {
  return guarded([&] {
    const std::string c = board_.resolve_cycle(std::nullopt, cycle);
    const auto entries = board_.rankings(c);
    json list = json::array();
    for (std::size_t i = 0; i < entries.size(); ++i) list.push_back(ranking_entry_to_json(i + 1, entries[i]));
    return json_response(200, json{{"cycle", c}, {"entries", list}});
  });
}

ApiResponse Api::what_if(std::string_view body) {
  return guarded([&] {
    const json j = parse_body(body);
    if (j.contains("sheet")) {
      const json& s = j.at("sheet");
      if (!s.is_object()) throw ValidationError("sheet must be an object", "sheet");
      MarkSheet sheet;
      sheet.cadet_id = required_string(s, "cadet_id");
      sheet.cycle = required_string(s, "cycle");
      sheet.marks = marks_field(s, "marks");
      const Rank rank = j.contains("current_rank") ? required_rank(j, "current_rank") : Rank::CadetOfficer;
      return json_response(200, what_if_to_json(board_.what_if(sheet, rank)));
    }
    const std::string cadet_id = required_string(j, "cadet_id");
    const MarkChanges changes = j.contains("set") ? marks_field(j, "set") : MarkChanges{};
    for (const auto& [id, mark] : changes) {
      if (mark < Fixed2{} || mark > Fixed2::from_integer(100)) {
        throw ValidationError(std::string(component_key(id)) + " mark " + mark.to_string() + " outside 0..100",
                              std::string(component_key(id)));
      }
    }
    return json_response(200, what_if_to_json(board_.what_if(cadet_id, optional_string(j, "cycle"), changes)));
  });
}

ApiResponse Api::add_note(const std::string& cadet_id, std::string_view body) {
  return guarded([&] {
    const json j = parse_body(body);
    CoachNote note;
    note.cadet_id = cadet_id;
    note.cycle = required_string(j, "cycle");
    note.author = required_string(j, "author");
    note.text = required_string(j, "text");
    note.timestamp = optional_string(j, "timestamp").value_or("");
    return json_response(201, note_to_json(board_.store().add_note(note)));
  });
}

ApiResponse Api::export_archive() {
  return guarded([&] {
    const auto archive = board_.store().export_archive();
    ApiResponse r;
    r.content_type = "application/x-tar";
    r.body = archive.bytes;
    r.filename = archive.filename;
    return r;
  });
}

ApiResponse Api::ready() {
  return guarded([&] {
    return json_response(200, json{{"status", "ready"},
                                   {"rules", board_.rules().rules().size()},
                                   {"cadets", board_.store().list_cadets().size()}});
  });
}

}  // namespace rankwise
