#include "condmix/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "condmix/errors.hpp"

namespace condmix {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  if (cell.empty())
    raise(Errc::NonFiniteValue, "empty cell at row " + std::to_string(row) + ", column " +
                                    std::to_string(col));
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    raise(Errc::NonFiniteValue, "unparsable cell '" + std::string(cell) + "' at row " +
                                    std::to_string(row) + ", column " + std::to_string(col));
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

RawTable parse_csv(std::string_view text) {
  RawTable table;
  std::size_t pos = 0;
  bool header_seen = false;
  std::size_t data_row = 0;
  while (pos <= text.size()) {
    if (pos == text.size()) break;
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view raw_line = text.substr(pos, eol - pos);
    pos = eol + 1;
    const std::string_view line = trim(raw_line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      table.comments.emplace_back(line);
      continue;
    }
    if (!header_seen) {
      for (auto f : split_fields(line)) table.header.emplace_back(f);
      header_seen = true;
      continue;
    }
    ++data_row;
    const auto fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j)
      row.push_back(parse_cell(fields[j], data_row, j + 1));
    table.rows.push_back(std::move(row));
  }
  if (!header_seen) raise(Errc::EmptyTable, "no header row found");
  return table;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::Io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::Io, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) raise(Errc::Io, "write to '" + path + "' failed");
}

RawTable read_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::string table_to_csv(const std::vector<std::string>& comments,
                         const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& c : comments) {
    if (!c.empty() && c.front() == '#')
      out += c;
    else
      out += "# " + c;
    out += '\n';
  }
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out += ',';
    out += header[j];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += row[j];
    }
    out += '\n';
  }
  return out;
}

std::string dataset_to_csv(const Dataset& data, const std::vector<std::string>& comments,
                           bool include_y, const std::string& response_name) {
  std::vector<std::string> header = data.column_names();
  const bool with_y = include_y && data.has_y();
  if (with_y) header.push_back(response_name);

  std::vector<std::vector<std::string>> rows;
  rows.reserve(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    std::vector<std::string> cells;
    cells.reserve(header.size());
    for (double v : data.row(i)) cells.push_back(format_double(v));
    if (with_y) cells.push_back(format_double(data.y()[i]));
    rows.push_back(std::move(cells));
  }
  return table_to_csv(comments, header, rows);
}

}  // namespace condmix
