#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "discourse/common.hpp"

namespace discourse {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(std::string_view name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

// RFC-4180-ish: quoted fields, embedded commas/newlines, doubled quotes.
inline CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_has_data = false;
  size_t i = 0;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    if (table.header.empty())
      table.header = std::move(row);
    else
      table.rows.push_back(std::move(row));
    row.clear();
    row_has_data = false;
  };
  while (i < text.size()) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
      row_has_data = true;
    } else if (c == ',') {
      end_field();
      row_has_data = true;
    } else if (c == '\r') {
      // swallow; \n handles the row break
    } else if (c == '\n') {
      if (row_has_data || !field.empty() || !row.empty()) end_row();
    } else {
      field.push_back(c);
      row_has_data = true;
    }
    ++i;
  }
  if (in_quotes) throw Error("csv: unterminated quoted field");
  if (row_has_data || !field.empty() || !row.empty()) end_row();
  return table;
}

inline CsvTable read_csv_file(const std::filesystem::path& path) {
  return parse_csv(read_text_file(path));
}

inline std::string csv_escape(std::string_view s) {
  bool needs = s.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

inline std::string csv_join(const std::vector<std::string>& fields) {
  std::string line;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) line.push_back(',');
    line += csv_escape(fields[i]);
  }
  line.push_back('\n');
  return line;
}

}  // namespace discourse
