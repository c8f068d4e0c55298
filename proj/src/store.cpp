#include "rankwise/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>

#include "rankwise/archive.hpp"
#include "rankwise/digest.hpp"
#include "rankwise/error.hpp"

namespace fs = std::filesystem;

namespace rankwise {

namespace {

constexpr const char* kSnapshotFile = "snapshot.json";
constexpr const char* kLogFile = "audit.log";
constexpr const char* kLockFile = "lock";
constexpr const char* kManifestFile = "MANIFEST";
constexpr int kSnapshotFormat = 1;

std::string errno_text() { return std::strerror(errno); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_all(int fd, std::string_view bytes, const fs::path& path) {
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("write to " + path.string() + " failed: " + errno_text());
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

void sync_directory(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

// Write to a temporary sibling, flush, then rename over the target.
void replace_file(const fs::path& path, std::string_view bytes, bool sync) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot create " + tmp.string() + ": " + errno_text());
  try {
    write_all(fd, bytes, tmp);
    if (sync && ::fsync(fd) != 0) throw IoError("fsync " + tmp.string() + " failed: " + errno_text());
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    ::unlink(tmp.c_str());
    throw IoError("cannot replace " + path.string() + ": " + errno_text());
  }
  if (sync) sync_directory(path.parent_path());
}

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError("corrupt " + what + ": " + e.what());
  }
}

// Splits complete lines; returns the byte length covered by them.
std::size_t complete_lines(const std::string& text, std::vector<std::string_view>& lines) {
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') {
      lines.emplace_back(text.data() + start, i - start);
      start = i + 1;
    }
  }
  return start;
}

std::vector<AuditEvent> parse_log(const std::string& text, std::size_t& complete_bytes) {
  std::vector<std::string_view> lines;
  complete_bytes = complete_lines(text, lines);
  std::vector<AuditEvent> events;
  events.reserve(lines.size());
  for (const auto& line : lines) {
    AuditEvent e = event_from_json(parse_json(line, "audit log line " + std::to_string(events.size() + 1)));
    if (e.sequence != events.size() + 1) {
      throw IoError("corrupt audit log: expected sequence " + std::to_string(events.size() + 1) + ", found " +
                    std::to_string(e.sequence));
    }
    events.push_back(std::move(e));
  }
  return events;
}

std::string latest_key_cycle(const StoreState& s, const std::string& cadet) {
  std::string cycle;
  std::uint64_t best = 0;
  for (const auto& [key, stored] : s.sheets) {
    if (key.first == cadet && stored.sequence > best) {
      best = stored.sequence;
      cycle = key.second;
    }
  }
  return cycle;
}

}  // namespace

// ---------------------------------------------------------------------------
// Serialization

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::CadetCreated: return "cadet-created";
    case EventKind::MarksSubmitted: return "marks-submitted";
    case EventKind::Evaluated: return "evaluated";
    case EventKind::NoteAdded: return "note-added";
    case EventKind::RankUpdated: return "rank-updated";
  }
  return "?";
}

namespace {

EventKind event_kind_from(const std::string& s) {
  for (EventKind k : {EventKind::CadetCreated, EventKind::MarksSubmitted, EventKind::Evaluated, EventKind::NoteAdded,
                      EventKind::RankUpdated}) {
    if (to_string(k) == s) return k;
  }
  throw IoError("corrupt audit log: unknown event kind '" + s + "'");
}

Rank rank_field(const json& j, const char* field) {
  const auto rank = parse_rank(j.at(field).get<std::string>());
  if (!rank) throw ValidationError("unknown rank '" + j.at(field).get<std::string>() + "'", field);
  return *rank;
}

}  // namespace

json event_to_json(const AuditEvent& event) {
  return json{{"seq", event.sequence},
              {"ts", event.timestamp},
              {"kind", std::string(to_string(event.kind))},
              {"payload", event.payload}};
}

AuditEvent event_from_json(const json& j) {
  try {
    AuditEvent e;
    e.sequence = j.at("seq").get<std::uint64_t>();
    e.timestamp = j.at("ts").get<std::string>();
    e.kind = event_kind_from(j.at("kind").get<std::string>());
    e.payload = j.at("payload");
    return e;
  } catch (const json::exception& ex) {
    throw IoError(std::string("corrupt audit event: ") + ex.what());
  }
}

json cadet_to_json(const CadetRecord& r) {
  return json{{"cadet_id", r.cadet_id},
              {"name", r.name},
              {"rank", std::string(to_string(r.current_rank))},
              {"enrollment_cycle", r.enrollment_cycle}};
}

CadetRecord cadet_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ValidationError("cadet must be a JSON object", "cadet");
    CadetRecord r;
    r.cadet_id = j.at("cadet_id").get<std::string>();
    r.name = j.value("name", std::string{});
    r.current_rank = j.contains("rank") ? rank_field(j, "rank") : Rank::CadetOfficer;
    r.enrollment_cycle = j.value("enrollment_cycle", std::string{});
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed cadet: ") + e.what(), "cadet");
  }
}

json note_to_json(const CoachNote& n) {
  return json{{"cadet_id", n.cadet_id}, {"cycle", n.cycle}, {"author", n.author}, {"text", n.text},
              {"timestamp", n.timestamp}};
}

CoachNote note_from_json(const json& j) {
  try {
    CoachNote n;
    n.cadet_id = j.at("cadet_id").get<std::string>();
    n.cycle = j.at("cycle").get<std::string>();
    n.author = j.at("author").get<std::string>();
    n.text = j.at("text").get<std::string>();
    n.timestamp = j.value("timestamp", std::string{});
    return n;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed note: ") + e.what(), "note");
  }
}

json sheet_to_json(const MarkSheet& s) {
  return json{{"cadet_id", s.cadet_id}, {"cycle", s.cycle}, {"marks", marks_to_json(s.marks)}};
}

MarkSheet sheet_from_json(const json& j) {
  try {
    MarkSheet s;
    s.cadet_id = j.at("cadet_id").get<std::string>();
    s.cycle = j.at("cycle").get<std::string>();
    s.marks = marks_from_json(j.at("marks"));
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed mark sheet: ") + e.what(), "sheet");
  }
}

void validate_identifier(const std::string& value, const char* field) {
  const auto ok_char = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.' ||
           c == '-';
  };
  if (value.empty() || value.size() > 64 || !std::all_of(value.begin(), value.end(), ok_char) ||
      !std::isalnum(static_cast<unsigned char>(value.front()))) {
    throw ValidationError(std::string(field) + " '" + value + "' must be 1-64 characters of [A-Za-z0-9_.-] " +
                              "starting with a letter or digit",
                          field);
  }
}

std::string format_timestamp(std::chrono::system_clock::time_point t) {
  using namespace std::chrono;
  const auto ms = duration_cast<milliseconds>(t.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000 - (ms % 1000 < 0 ? 1 : 0));
  const int millis = static_cast<int>(((ms % 1000) + 1000) % 1000);
  std::tm tm{};
  ::gmtime_r(&secs, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, millis);
  return buf;
}

bool is_timestamp(std::string_view t) {
  static constexpr std::string_view kShape = "dddd-dd-ddTdd:dd:dd.dddZ";
  if (t.size() != kShape.size()) return false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (kShape[i] == 'd' ? !std::isdigit(static_cast<unsigned char>(t[i])) : t[i] != kShape[i]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// StoreState

void StoreState::apply(const AuditEvent& event) {
  if (event.sequence != last_sequence + 1) {
    throw IoError("audit event " + std::to_string(event.sequence) + " does not follow " +
                  std::to_string(last_sequence));
  }
  const json& p = event.payload;
  try {
    switch (event.kind) {
      case EventKind::CadetCreated: {
        CadetRecord r = cadet_from_json(p.at("cadet"));
        if (cadets.count(r.cadet_id)) throw IoError("replayed duplicate cadet " + r.cadet_id);
        cadets.emplace(r.cadet_id, std::move(r));
        break;
      }
      case EventKind::RankUpdated: {
        auto it = cadets.find(p.at("cadet_id").get<std::string>());
        if (it == cadets.end()) throw IoError("rank update for unknown cadet");
        it->second.current_rank = rank_field(p, "rank");
        break;
      }
      case EventKind::MarksSubmitted: {
        MarkSheet sheet = sheet_from_json(p.at("sheet"));
        if (!cadets.count(sheet.cadet_id)) throw IoError("marks for unknown cadet " + sheet.cadet_id);
        auto key = std::make_pair(sheet.cadet_id, sheet.cycle);
        sheets.insert_or_assign(std::move(key),
                                StoredSheet{p.at("assessment_id").get<std::string>(), event.sequence, std::move(sheet)});
        break;
      }
      case EventKind::Evaluated: {
        ExplanationTrace trace = trace_from_json(p.at("trace"));
        const std::string id = trace.trace_id;
        traces.try_emplace(id, std::move(trace));
        break;
      }
      case EventKind::NoteAdded:
        notes.push_back(note_from_json(p.at("note")));
        break;
    }
  } catch (const json::exception& e) {
    throw IoError("corrupt " + std::string(to_string(event.kind)) + " event " + std::to_string(event.sequence) +
                  ": " + e.what());
  } catch (const ValidationError& e) {
    throw IoError("corrupt " + std::string(to_string(event.kind)) + " event " + std::to_string(event.sequence) +
                  ": " + e.what());
  }
  last_sequence = event.sequence;
}

json StoreState::to_json() const {
  json out;
  out["format"] = kSnapshotFormat;
  out["last_sequence"] = last_sequence;
  json c = json::array();
  for (const auto& [_, r] : cadets) c.push_back(cadet_to_json(r));
  out["cadets"] = std::move(c);
  json s = json::array();
  for (const auto& [_, stored] : sheets) {
    s.push_back(json{{"assessment_id", stored.assessment_id},
                     {"sequence", stored.sequence},
                     {"sheet", sheet_to_json(stored.sheet)}});
  }
  out["sheets"] = std::move(s);
  json n = json::array();
  for (const auto& note : notes) n.push_back(note_to_json(note));
  out["notes"] = std::move(n);
  json t = json::array();
  for (const auto& [_, trace] : traces) t.push_back(trace_to_json(trace));
  out["traces"] = std::move(t);
  return out;
}

StoreState StoreState::from_json(const json& j) {
  try {
    if (j.at("format").get<int>() != kSnapshotFormat) throw IoError("unsupported snapshot format");
    StoreState s;
    s.last_sequence = j.at("last_sequence").get<std::uint64_t>();
    for (const auto& c : j.at("cadets")) {
      CadetRecord r = cadet_from_json(c);
      s.cadets.emplace(r.cadet_id, std::move(r));
    }
    for (const auto& entry : j.at("sheets")) {
      StoredSheet stored{entry.at("assessment_id").get<std::string>(), entry.at("sequence").get<std::uint64_t>(),
                         sheet_from_json(entry.at("sheet"))};
      auto key = std::make_pair(stored.sheet.cadet_id, stored.sheet.cycle);
      s.sheets.emplace(std::move(key), std::move(stored));
    }
    for (const auto& n : j.at("notes")) s.notes.push_back(note_from_json(n));
    for (const auto& t : j.at("traces")) {
      ExplanationTrace trace = trace_from_json(t);
      const std::string id = trace.trace_id;
      s.traces.emplace(id, std::move(trace));
    }
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("corrupt snapshot: ") + e.what());
  } catch (const ValidationError& e) {
    throw IoError(std::string("corrupt snapshot: ") + e.what());
  }
}

StoreState replay_events(const std::vector<AuditEvent>& events) {
  StoreState s;
  for (const auto& e : events) s.apply(e);
  return s;
}

// ---------------------------------------------------------------------------
// Store

Store::Store(fs::path directory, StoreOptions options) : directory_(std::move(directory)), options_(std::move(options)) {
  if (!options_.clock) options_.clock = [] { return std::chrono::system_clock::now(); };
  std::error_code ec;
  fs::create_directories(directory_, ec);
  if (ec) throw IoError("cannot create store directory " + directory_.string() + ": " + ec.message());

  const fs::path lock_path = directory_ / kLockFile;
  lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) throw IoError("cannot open " + lock_path.string() + ": " + errno_text());
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    throw StoreLockedError("store " + directory_.string() + " is locked by another writer");
  }

  try {
    const fs::path snapshot_path = directory_ / kSnapshotFile;
    if (fs::exists(snapshot_path)) state_ = StoreState::from_json(parse_json(read_file(snapshot_path), "snapshot"));
    fs::remove(directory_ / (std::string(kSnapshotFile) + ".tmp"), ec);

    const fs::path log_path = directory_ / kLogFile;
    std::string log_text = fs::exists(log_path) ? read_file(log_path) : std::string{};
    std::size_t complete = 0;
    events_ = parse_log(log_text, complete);
    if (complete != log_text.size()) {
      // Torn final append: the event never completed.
      fs::resize_file(log_path, complete);
    }
    if (state_.last_sequence > events_.size()) {
      throw IoError("snapshot is ahead of the audit log (" + std::to_string(state_.last_sequence) + " > " +
                    std::to_string(events_.size()) + ")");
    }
    const bool behind = state_.last_sequence < events_.size();
    for (std::size_t i = state_.last_sequence; i < events_.size(); ++i) state_.apply(events_[i]);

    log_fd_ = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (log_fd_ < 0) throw IoError("cannot open " + log_path.string() + ": " + errno_text());
    if (behind || !fs::exists(snapshot_path)) write_snapshot();
  } catch (...) {
    if (log_fd_ >= 0) ::close(log_fd_);
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
    throw;
  }
}

Store::~Store() {
  if (log_fd_ >= 0) ::close(log_fd_);
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

std::string Store::now() const { return format_timestamp(options_.clock()); }

void Store::write_snapshot() { replace_file(directory_ / kSnapshotFile, state_.to_json().dump(1) + "\n", options_.sync); }

void Store::append(EventKind kind, json payload) {
  AuditEvent event{state_.last_sequence + 1, now(), kind, std::move(payload)};
  StoreState next = state_;
  next.apply(event);

  const std::string line = event_to_json(event).dump() + "\n";
  write_all(log_fd_, line, directory_ / kLogFile);
  if (options_.sync && ::fsync(log_fd_) != 0) throw IoError("fsync audit.log failed: " + errno_text());

  state_ = std::move(next);
  events_.push_back(std::move(event));
  write_snapshot();
}

void Store::put_cadet(const CadetRecord& record) {
  validate_identifier(record.cadet_id, "cadet_id");
  if (!record.enrollment_cycle.empty()) validate_identifier(record.enrollment_cycle, "enrollment_cycle");
  std::unique_lock lock(mutex_);
  if (state_.cadets.count(record.cadet_id)) {
    throw DuplicateError("cadet '" + record.cadet_id + "' already exists", "cadet_id");
  }
  append(EventKind::CadetCreated, json{{"cadet", cadet_to_json(record)}});
}

void Store::update_rank(const std::string& cadet_id, Rank rank) {
  std::unique_lock lock(mutex_);
  if (!state_.cadets.count(cadet_id)) throw NotFoundError("unknown cadet '" + cadet_id + "'", "cadet_id");
  append(EventKind::RankUpdated, json{{"cadet_id", cadet_id}, {"rank", std::string(to_string(rank))}});
}

CadetRecord Store::get_cadet(const std::string& cadet_id) const {
  std::shared_lock lock(mutex_);
  const auto it = state_.cadets.find(cadet_id);
  if (it == state_.cadets.end()) throw NotFoundError("unknown cadet '" + cadet_id + "'", "cadet_id");
  return it->second;
}

std::vector<CadetRecord> Store::list_cadets() const {
  std::shared_lock lock(mutex_);
  std::vector<CadetRecord> out;
  out.reserve(state_.cadets.size());
  for (const auto& [_, r] : state_.cadets) out.push_back(r);
  return out;
}

std::string Store::submit_marks(const MarkSheet& sheet, bool resubmit) {
  validate_sheet(sheet);
  validate_identifier(sheet.cycle, "cycle");
  std::unique_lock lock(mutex_);
  if (!state_.cadets.count(sheet.cadet_id)) {
    throw NotFoundError("unknown cadet '" + sheet.cadet_id + "'", "cadet_id");
  }
  if (state_.sheets.count({sheet.cadet_id, sheet.cycle}) && !resubmit) {
    throw DuplicateError("marks for cadet '" + sheet.cadet_id + "' in cycle '" + sheet.cycle +
                             "' already submitted; resubmit to replace them",
                         "cycle");
  }
  char id[32];
  std::snprintf(id, sizeof id, "a-%06llu", static_cast<unsigned long long>(state_.last_sequence + 1));
  append(EventKind::MarksSubmitted,
         json{{"assessment_id", id}, {"resubmit", resubmit}, {"sheet", sheet_to_json(sheet)}});
  return id;
}

std::optional<StoredSheet> Store::latest_sheet(const std::string& cadet_id, const std::string& cycle) const {
  std::shared_lock lock(mutex_);
  const auto it = state_.sheets.find({cadet_id, cycle});
  if (it == state_.sheets.end()) return std::nullopt;
  return it->second;
}

std::optional<StoredSheet> Store::latest_sheet(const std::string& cadet_id) const {
  std::shared_lock lock(mutex_);
  const std::string cycle = latest_key_cycle(state_, cadet_id);
  const auto it = state_.sheets.find({cadet_id, cycle});
  if (it == state_.sheets.end()) return std::nullopt;
  return it->second;
}

std::vector<StoredSheet> Store::sheets_for_cycle(const std::string& cycle) const {
  std::shared_lock lock(mutex_);
  std::vector<StoredSheet> out;
  for (const auto& [key, stored] : state_.sheets) {
    if (key.second == cycle) out.push_back(stored);
  }
  return out;
}

std::optional<std::string> Store::latest_cycle() const {
  std::shared_lock lock(mutex_);
  const StoredSheet* best = nullptr;
  for (const auto& [_, stored] : state_.sheets) {
    if (!best || stored.sequence > best->sequence) best = &stored;
  }
  if (!best) return std::nullopt;
  return best->sheet.cycle;
}

void Store::record_trace(const ExplanationTrace& trace) {
  const json doc = trace_to_json(trace);
  std::unique_lock lock(mutex_);
  if (!state_.cadets.count(trace.cadet_id())) {
    throw NotFoundError("unknown cadet '" + trace.cadet_id() + "'", "cadet_id");
  }
  if (auto it = state_.traces.find(trace.trace_id); it != state_.traces.end() && trace_to_json(it->second) != doc) {
    throw DuplicateError("trace '" + trace.trace_id + "' already stored with different content", "trace_id");
  }
  append(EventKind::Evaluated, json{{"trace", doc}});
}

ExplanationTrace Store::get_trace(const std::string& trace_id) const {
  std::shared_lock lock(mutex_);
  const auto it = state_.traces.find(trace_id);
  if (it == state_.traces.end()) throw NotFoundError("unknown trace '" + trace_id + "'", "trace_id");
  return it->second;
}

CoachNote Store::add_note(CoachNote note) {
  if (note.text.empty()) throw ValidationError("note text must not be empty", "text");
  if (note.author.empty()) throw ValidationError("note author must not be empty", "author");
  validate_identifier(note.cycle, "cycle");
  if (!note.timestamp.empty() && !is_timestamp(note.timestamp)) {
    throw ValidationError("timestamp must look like 2026-01-31T12:00:00.000Z", "timestamp");
  }
  std::unique_lock lock(mutex_);
  if (!state_.cadets.count(note.cadet_id)) throw NotFoundError("unknown cadet '" + note.cadet_id + "'", "cadet_id");
  std::string last;
  for (const auto& n : state_.notes) {
    if (n.cadet_id == note.cadet_id && n.author == note.author) last = std::max(last, n.timestamp);
  }
  if (note.timestamp.empty()) {
    note.timestamp = std::max(now(), last);
  } else if (note.timestamp < last) {
    throw ValidationError("timestamp " + note.timestamp + " precedes the previous note by this author (" + last + ")",
                          "timestamp");
  }
  append(EventKind::NoteAdded, json{{"note", note_to_json(note)}});
  return note;
}

std::vector<CoachNote> Store::notes(const std::string& cadet_id, const std::optional<std::string>& cycle) const {
  std::shared_lock lock(mutex_);
  std::vector<CoachNote> out;
  for (const auto& n : state_.notes) {
    if (n.cadet_id == cadet_id && (!cycle || n.cycle == *cycle)) out.push_back(n);
  }
  return out;
}

std::vector<CoachNote> Store::all_notes() const {
  std::shared_lock lock(mutex_);
  return state_.notes;
}

std::vector<AuditEvent> Store::audit_events() const {
  std::shared_lock lock(mutex_);
  return events_;
}

std::size_t Store::audit_size() const {
  std::shared_lock lock(mutex_);
  return events_.size();
}

StoreState Store::state() const {
  std::shared_lock lock(mutex_);
  return state_;
}

Store::Archive Store::export_archive() const {
  std::shared_lock lock(mutex_);
  const std::string snapshot = state_.to_json().dump(1) + "\n";
  const std::string log = read_file(directory_ / kLogFile);
  const std::string manifest = sha256_hex(snapshot) + "  " + kSnapshotFile + "\n" + sha256_hex(log) + "  " +
                               kLogFile + "\n";
  const auto now_tp = options_.clock();
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now_tp.time_since_epoch()).count();
  std::string stamp = format_timestamp(now_tp);
  stamp.erase(std::remove_if(stamp.begin(), stamp.end(), [](char c) { return c == '-' || c == ':' || c == '.'; }),
              stamp.end());
  Archive a;
  a.filename = "backup-" + stamp + ".tar";
  a.bytes = write_tar({{kManifestFile, manifest}, {kSnapshotFile, snapshot}, {kLogFile, log}}, secs);
  return a;
}

fs::path Store::export_backup(const fs::path& destination) const {
  const Archive a = export_archive();
  std::error_code ec;
  fs::create_directories(destination, ec);
  if (ec) throw IoError("cannot create " + destination.string() + ": " + ec.message());
  const fs::path target = destination / a.filename;
  replace_file(target, a.bytes, options_.sync);
  // Detect short or damaged writes before reporting success.
  if (read_file(target) != a.bytes) {
    fs::remove(target, ec);
    throw IoError("backup verification failed for " + target.string());
  }
  return target;
}

void Store::import_archive(std::string_view bytes, const fs::path& store_dir) {
  const auto entries = read_tar(bytes);
  std::map<std::string, std::string> files;
  for (const auto& e : entries) {
    if (!files.emplace(e.name, e.data).second) throw IoError("corrupt archive: duplicate entry " + e.name);
  }
  if (files.size() != 3 || !files.count(kManifestFile) || !files.count(kSnapshotFile) || !files.count(kLogFile)) {
    throw IoError("corrupt archive: expected MANIFEST, snapshot.json and audit.log");
  }
  const std::string expected_manifest = sha256_hex(files[kSnapshotFile]) + "  " + kSnapshotFile + "\n" +
                                        sha256_hex(files[kLogFile]) + "  " + kLogFile + "\n";
  if (files[kManifestFile] != expected_manifest) throw IoError("backup checksum mismatch");

  const StoreState snapshot = StoreState::from_json(parse_json(files[kSnapshotFile], "snapshot"));
  std::size_t complete = 0;
  const auto events = parse_log(files[kLogFile], complete);
  if (complete != files[kLogFile].size()) throw IoError("corrupt archive: torn audit log");
  if (replay_events(events).to_json() != snapshot.to_json()) {
    throw IoError("corrupt archive: audit log replay does not reproduce the snapshot");
  }

  std::error_code ec;
  if (fs::exists(store_dir) && !fs::is_empty(store_dir)) {
    throw IoError("import target " + store_dir.string() + " is not empty");
  }
  const fs::path parent = store_dir.has_parent_path() ? store_dir.parent_path() : fs::path(".");
  fs::create_directories(parent, ec);
  std::random_device rd;
  const fs::path staging = parent / (store_dir.filename().string() + ".import-" + std::to_string(rd()));
  try {
    fs::create_directories(staging);
    replace_file(staging / kSnapshotFile, files[kSnapshotFile], true);
    replace_file(staging / kLogFile, files[kLogFile], true);
    if (fs::exists(store_dir)) fs::remove(store_dir);
    fs::rename(staging, store_dir);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(staging, ec);
    throw IoError(std::string("import failed: ") + e.what());
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
}

void Store::import_backup(const fs::path& archive, const fs::path& store_dir) {
  import_archive(read_file(archive), store_dir);
}

}  // namespace rankwise
