#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rankwise/assessment.hpp"

namespace rankwise {

/// cadet_id,cycle followed by the twelve component keys in table order.
std::string marks_csv_header();

/// Parses a marks CSV. The header must match marks_csv_header() exactly; blank
/// lines are skipped. Every sheet is validated. Throws ValidationError with the
/// field set to "line N" on the first bad row.
std::vector<MarkSheet> parse_marks_csv(std::string_view text);

}  // namespace rankwise
