#include "storyarcs/table_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>

#include "storyarcs/error.hpp"

namespace storyarcs {

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf.data(), ptr);
}

double parse_double_field(std::string_view field) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw Error("not a number: '" + std::string(field) + "'");
  }
  return value;
}

void write_row(std::ostream& out, std::span<const std::string> fields, char delimiter) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << delimiter;
    const std::string& f = fields[i];
    if (f.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string::npos) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

std::vector<Row> read_rows(std::istream& in, char delimiter) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool row_has_content = false;
  char c = 0;
  const auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
  };
  const auto end_row = [&] {
    end_field();
    if (row_has_content) rows.push_back(std::move(row));
    row.clear();
    row_has_content = false;
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      row_has_content = true;
    } else if (c == delimiter) {
      end_field();
      row_has_content = true;
    } else if (c == '\n') {
      end_row();
    } else if (c != '\r') {
      field.push_back(c);
      row_has_content = true;
    }
  }
  if (in_quotes) throw Error("unterminated quoted field");
  end_row();
  return rows;
}

char detect_delimiter(std::string_view header_line) {
  return header_line.find('\t') != std::string_view::npos ? '\t' : ',';
}

TableWriter::TableWriter(const std::filesystem::path& path)
    : path_(path), out_(std::make_unique<std::ofstream>(path, std::ios::binary)) {
  if (!*out_) throw Error("cannot write " + path.string());
}

TableWriter& TableWriter::header(std::initializer_list<std::string_view> names) {
  std::vector<std::string> fields(names.begin(), names.end());
  write_row(*out_, fields);
  return *this;
}

void TableWriter::row(std::span<const std::string> fields) { write_row(*out_, fields); }

void TableWriter::row(std::initializer_list<std::string> fields) {
  write_row(*out_, std::span<const std::string>(fields.begin(), fields.size()));
}

void write_labeled_matrix(const std::filesystem::path& path, std::span<const std::string> header,
                          std::span<const std::string> labels, const Eigen::MatrixXd& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_row(out, header);
  std::vector<std::string> fields;
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    fields.clear();
    fields.push_back(labels[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < values.cols(); ++c) fields.push_back(format_double(values(r, c)));
    write_row(out, fields);
  }
}

}  // namespace storyarcs
