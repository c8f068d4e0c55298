#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "rankwise/assessment.hpp"
#include "rankwise/explanation.hpp"
#include "rankwise/promotion.hpp"
#include "rankwise/rank.hpp"

namespace rankwise {

struct CadetRecord {
  std::string cadet_id;
  std::string name;
  Rank current_rank = Rank::CadetOfficer;
  std::string enrollment_cycle;

  bool operator==(const CadetRecord&) const = default;
};

enum class EventKind { CadetCreated, MarksSubmitted, Evaluated, NoteAdded, RankUpdated };

std::string_view to_string(EventKind kind);

struct AuditEvent {
  std::uint64_t sequence = 0;
  std::string timestamp;
  EventKind kind = EventKind::CadetCreated;
  json payload;
};

json event_to_json(const AuditEvent& event);
AuditEvent event_from_json(const json& j);

struct StoredSheet {
  std::string assessment_id;
  std::uint64_t sequence = 0;  // audit sequence of the submission
  MarkSheet sheet;

  bool operator==(const StoredSheet&) const = default;
};

/// Everything the store knows, as a pure fold over the audit log.
struct StoreState {
  std::uint64_t last_sequence = 0;
  std::map<std::string, CadetRecord> cadets;
  std::map<std::pair<std::string, std::string>, StoredSheet> sheets;  // (cadet, cycle) -> latest
  std::vector<CoachNote> notes;                                       // in append order
  std::map<std::string, ExplanationTrace> traces;

  /// Applies the next event. Throws IoError if it does not follow on from the
  /// current state (wrong sequence, unknown cadet, ...).
  void apply(const AuditEvent& event);

  json to_json() const;
  static StoreState from_json(const json& j);
};

/// Replays events from the empty state.
StoreState replay_events(const std::vector<AuditEvent>& events);

using Clock = std::function<std::chrono::system_clock::time_point()>;

/// ISO-8601 UTC with milliseconds: 2026-10-16T09:30:00.000Z
std::string format_timestamp(std::chrono::system_clock::time_point t);
bool is_timestamp(std::string_view text);

struct StoreOptions {
  Clock clock;       // defaults to the system clock
  bool sync = true;  // fsync appends and snapshot writes
};

/// Directory-backed store:
///
///   snapshot.json  current state, rewritten atomically after every mutation
///   audit.log      JSON Lines, one event per line, appended before the snapshot
///   lock           flock'd for as long as the store is open
///
/// Opening replays any log events newer than the snapshot and drops a torn
/// trailing line, so a crash at any point leaves the last completed event.
/// Reads may run concurrently; writes are serialized.
class Store {
 public:
  /// Creates the directory if needed. Throws StoreLockedError if another
  /// handle holds the lock, IoError on unreadable or inconsistent files.
  explicit Store(std::filesystem::path directory, StoreOptions options = {});
  ~Store();

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::filesystem::path& directory() const { return directory_; }

  void put_cadet(const CadetRecord& record);
  void update_rank(const std::string& cadet_id, Rank rank);
  CadetRecord get_cadet(const std::string& cadet_id) const;
  std::vector<CadetRecord> list_cadets() const;

  /// Returns the assessment id. A second sheet for the same (cadet, cycle)
  /// requires resubmit; all versions stay in the audit log.
  std::string submit_marks(const MarkSheet& sheet, bool resubmit = false);
  std::optional<StoredSheet> latest_sheet(const std::string& cadet_id, const std::string& cycle) const;
  /// Most recently submitted sheet of the cadet across cycles.
  std::optional<StoredSheet> latest_sheet(const std::string& cadet_id) const;
  std::vector<StoredSheet> sheets_for_cycle(const std::string& cycle) const;
  /// Cycle of the most recent submission.
  std::optional<std::string> latest_cycle() const;

  /// Appends an evaluated event. Traces are immutable: an id already present
  /// must carry identical content.
  void record_trace(const ExplanationTrace& trace);
  ExplanationTrace get_trace(const std::string& trace_id) const;

  /// Assigns the timestamp when empty. Timestamps never go backwards within a
  /// (cadet, author) stream.
  CoachNote add_note(CoachNote note);
  std::vector<CoachNote> notes(const std::string& cadet_id, const std::optional<std::string>& cycle = {}) const;
  std::vector<CoachNote> all_notes() const;

  std::vector<AuditEvent> audit_events() const;
  std::size_t audit_size() const;
  StoreState state() const;

  /// backup-<timestamp>.tar bytes: snapshot.json, audit.log and MANIFEST
  /// (sha256sum format).
  struct Archive {
    std::string filename;
    std::string bytes;
  };
  Archive export_archive() const;
  /// Writes the archive into a directory, verifies it by reading it back and
  /// returns its path.
  std::filesystem::path export_backup(const std::filesystem::path& destination) const;

  /// Verifies an archive completely (checksums, log replay == snapshot) and
  /// only then materializes it as a new store directory, which must not exist
  /// or be empty. Throws IoError with no files left behind on failure.
  static void import_archive(std::string_view bytes, const std::filesystem::path& store_dir);
  static void import_backup(const std::filesystem::path& archive, const std::filesystem::path& store_dir);

 private:
  void append(EventKind kind, json payload);
  void write_snapshot();
  std::string now() const;

  std::filesystem::path directory_;
  StoreOptions options_;
  int lock_fd_ = -1;
  int log_fd_ = -1;
  mutable std::shared_mutex mutex_;
  StoreState state_;
  std::vector<AuditEvent> events_;
};

/// Identifier rules shared by cadet ids and cycle labels.
void validate_identifier(const std::string& value, const char* field);

json cadet_to_json(const CadetRecord& record);
CadetRecord cadet_from_json(const json& j);
json note_to_json(const CoachNote& note);
CoachNote note_from_json(const json& j);
json sheet_to_json(const MarkSheet& sheet);
MarkSheet sheet_from_json(const json& j);

}  // namespace rankwise
