#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fieldscan/dataset.hpp"
#include "fieldscan/errors.hpp"

namespace fieldscan {

struct CsvOptions {
  std::map<std::string, AttributeKind> kind_hints;
  /// Cell texts (after trimming blanks) that read as Missing.
  std::vector<std::string> missing_sentinels{"", "no data", "sin datos"};
};

namespace csv_detail {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  double v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

/// RFC 4180 tokenizer. Accepts LF, CRLF or CR line ends and strips a UTF-8 BOM.
inline std::vector<Record> tokenize(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<Record> records;
  Record current;
  std::string field;
  std::size_t line = 1;
  current.line = 1;
  bool in_quotes = false;
  bool after_quote = false;  // just closed a quoted field
  bool field_started = false;
  std::size_t quote_line = 0;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    after_quote = false;
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(current));
    current = Record{};
    current.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (ch == '\n' || (ch == '\r' && !(i + 1 < text.size() && text[i + 1] == '\n'))) ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == ',') {
      end_field();
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++line;
      end_record();
    } else if (ch == '"') {
      if (field_started || after_quote)
        throw ParseError(line, "unexpected quote inside unquoted field");
      in_quotes = true;
      quote_line = line;
      field_started = true;
    } else {
      if (after_quote) throw ParseError(line, "unexpected character after closing quote");
      field.push_back(ch);
      field_started = true;
    }
  }
  if (in_quotes) throw ParseError(quote_line, "unbalanced quotes");
  if (field_started || after_quote || !current.fields.empty()) end_record();
  return records;
}

inline bool needs_quotes(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline void write_field(std::ostream& out, std::string_view s) {
  if (!needs_quotes(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char ch : s) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

}  // namespace csv_detail

/// Parses a CSV document with a header row into a typed Dataset.
///
/// A column is Numeric when every non-missing cell parses as a finite real
/// number, unless `kind_hints` says otherwise. Row ids are 0..n-1 in file
/// order. Throws ParseError (with a line number) for malformed input and
/// SchemaError for duplicate or empty header names.
inline Dataset load_csv(std::string_view text, const CsvOptions& options = {}) {
  using namespace csv_detail;
  auto records = tokenize(text);
  if (records.empty()) throw ParseError(1, "missing header row");

  const auto& header = records.front().fields;
  const std::size_t width = header.size();
  for (const auto& [name, kind] : options.kind_hints) {
    (void)kind;
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw SchemaError("kind hint for unknown column '" + name + "'");
  }

  // A trailing blank line is a file terminator, not a record.
  while (records.size() > 1 && records.back().fields.size() == 1 &&
         records.back().fields[0].empty() && width > 1)
    records.pop_back();

  for (std::size_t r = 1; r < records.size(); ++r)
    if (records[r].fields.size() != width)
      throw ParseError(records[r].line, "expected " + std::to_string(width) + " fields, found " +
                                            std::to_string(records[r].fields.size()));

  auto is_sentinel = [&](std::string_view cell) {
    const auto t = trim(cell);
    return std::find(options.missing_sentinels.begin(), options.missing_sentinels.end(), t) !=
           options.missing_sentinels.end();
  };

  std::vector<Attribute> attrs;
  for (std::size_t c = 0; c < width; ++c) {
    AttributeKind kind = AttributeKind::Numeric;
    if (auto it = options.kind_hints.find(header[c]); it != options.kind_hints.end()) {
      kind = it->second;
    } else {
      for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& cell = records[r].fields[c];
        if (!is_sentinel(cell) && !parse_number(cell)) {
          kind = AttributeKind::Nominal;
          break;
        }
      }
    }
    attrs.push_back({header[c], kind});
  }
  Schema schema(std::move(attrs));

  std::vector<Row> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    Row row;
    row.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
      auto& cell = records[r].fields[c];
      if (is_sentinel(cell)) {
        row.emplace_back();
      } else if (schema[c].kind == AttributeKind::Numeric) {
        auto v = parse_number(cell);
        if (!v)
          throw ParseError(records[r].line, "column '" + schema[c].name + "' is numeric but cell '" +
                                                cell + "' is not a number");
        row.emplace_back(*v);
      } else {
        row.emplace_back(std::move(cell));
      }
    }
    rows.push_back(std::move(row));
  }
  return Dataset(std::move(schema), std::move(rows));
}

inline Dataset load_csv(std::istream& in, const CsvOptions& options = {}) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return load_csv(std::string_view(text), options);
}

inline Dataset load_csv_file(const std::string& path, const CsvOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return load_csv(in, options);
}

/// Emits RFC 4180 CSV with LF line ends. Missing cells are empty; numbers use
/// the shortest round-trip representation. With `with_row_id` the first
/// column is `row_id`.
inline void write_csv(std::ostream& out, const Dataset& ds, bool with_row_id = false) {
  using csv_detail::write_field;
  if (with_row_id) out << "row_id";
  for (std::size_t c = 0; c < ds.num_attributes(); ++c) {
    if (c > 0 || with_row_id) out << ',';
    write_field(out, ds.schema()[c].name);
  }
  out << '\n';
  for (std::size_t r = 0; r < ds.num_rows(); ++r) {
    if (with_row_id) out << ds.row_id(r);
    for (std::size_t c = 0; c < ds.num_attributes(); ++c) {
      if (c > 0 || with_row_id) out << ',';
      write_field(out, ds.at(r, c).to_text());
    }
    out << '\n';
  }
}

inline std::string to_csv(const Dataset& ds, bool with_row_id = false) {
  std::ostringstream out;
  write_csv(out, ds, with_row_id);
  return out.str();
}

}  // namespace fieldscan
