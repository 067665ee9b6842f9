#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace storyarcs {

// Shortest decimal that round-trips to the same double. Used for every
// numeric artifact so reruns are byte-identical.
std::string format_double(double value);
double parse_double_field(std::string_view field);

using Row = std::vector<std::string>;

// RFC 4180 style: fields containing the delimiter, a quote or a newline are
// quoted, embedded quotes doubled.
void write_row(std::ostream& out, std::span<const std::string> fields, char delimiter = ',');
std::vector<Row> read_rows(std::istream& in, char delimiter);
// Tab when the header line has one, comma otherwise.
char detect_delimiter(std::string_view header_line);

// Header row, then one row per matrix row prefixed by its label.
void write_labeled_matrix(const std::filesystem::path& path, std::span<const std::string> header,
                          std::span<const std::string> labels, const Eigen::MatrixXd& values);

class TableWriter {
 public:
  explicit TableWriter(const std::filesystem::path& path);
  TableWriter& header(std::initializer_list<std::string_view> names);
  void row(std::span<const std::string> fields);
  void row(std::initializer_list<std::string> fields);

 private:
  std::filesystem::path path_;
  std::unique_ptr<std::ostream> out_;
};

}  // namespace storyarcs
