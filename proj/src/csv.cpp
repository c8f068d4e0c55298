#include "rankwise/csv.hpp"

#include "rankwise/error.hpp"
#include "rankwise/store.hpp"

namespace rankwise {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string marks_csv_header() {
  std::string h = "cadet_id,cycle";
  for (ComponentId id : kAllComponents) {
    h += ',';
    h += component_key(id);
  }
  return h;
}

std::vector<MarkSheet> parse_marks_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const std::string header = marks_csv_header();
  std::vector<MarkSheet> sheets;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    if (!line.empty() && line.back() == '\r') throw ValidationError("CR line endings are not accepted", where);
    if (line.empty()) continue;

    if (!seen_header) {
      if (line != header) throw ValidationError("expected header: " + header, where);
      seen_header = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 2 + kAllComponents.size()) {
      throw ValidationError("expected " + std::to_string(2 + kAllComponents.size()) + " fields, found " +
                                std::to_string(fields.size()),
                            where);
    }
    MarkSheet sheet;
    sheet.cadet_id = std::string(fields[0]);
    sheet.cycle = std::string(fields[1]);
    try {
      validate_identifier(sheet.cadet_id, "cadet_id");
      validate_identifier(sheet.cycle, "cycle");
      for (std::size_t i = 0; i < kAllComponents.size(); ++i) {
        const ComponentId id = kAllComponents[i];
        const auto mark = Fixed2::parse(fields[i + 2]);
        if (!mark) {
          throw ValidationError("'" + std::string(fields[i + 2]) + "' is not a decimal with at most 2 fraction digits",
                                std::string(component_key(id)));
        }
        sheet.marks[id] = *mark;
      }
      validate_sheet(sheet);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.field() + ": " + e.what(), where);
    }
    sheets.push_back(std::move(sheet));
  }
  if (!seen_header) throw ValidationError("empty CSV: expected header: " + header, "line 1");
  return sheets;
}

}  // namespace rankwise
