#pragma once

#include <exception>
#include <optional>
#include <string>
#include <string_view>

#include "rankwise/board.hpp"
#include "rankwise/explanation.hpp"

namespace rankwise {

/// Transport-neutral response. JSON bodies are indented by two spaces and end
/// with a newline; the CLI prints them verbatim under --json.
struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::string filename;  // set for downloads
};

/// One method per HTTP endpoint. Errors never escape: they become
/// {"error": {"code", "field", "message"}} with the matching status.
class Api {
 public:
  explicit Api(PromotionBoard& board) : board_(board) {}

  ApiResponse create_cadet(std::string_view body);
  ApiResponse list_cadets();
  ApiResponse get_cadet(const std::string& cadet_id);
  ApiResponse update_rank(const std::string& cadet_id, std::string_view body);
  ApiResponse submit_marks(const std::string& cadet_id, std::string_view body);
  ApiResponse evaluate(const std::string& cadet_id, std::string_view body);
  ApiResponse get_trace(const std::string& trace_id, const std::optional<std::string>& view);
  ApiResponse rankings(const std::optional<std::string>& cycle);
  ApiResponse what_if(std::string_view body);
  ApiResponse add_note(const std::string& cadet_id, std::string_view body);
  ApiResponse export_archive();
  ApiResponse ready();

  PromotionBoard& board() { return board_; }

 private:
  PromotionBoard& board_;
};

/// Status for an error category: 400, 404, 409, 423 or 500.
int http_status(ErrorCategory category);
std::string_view error_code(ErrorCategory category);
ApiResponse error_response(const std::exception& e);
ApiResponse json_response(int status, const json& body);

json evaluation_to_json(const Evaluation& e);
json ranking_entry_to_json(std::size_t position, const RankingEntry& entry);

}  // namespace rankwise
