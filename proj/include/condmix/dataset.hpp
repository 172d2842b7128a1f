#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace condmix {

enum class Origin { Measured, Simulated };

// Immutable column-labeled covariate matrix with an optional response vector.
// All entries are finite by construction (validate_dataset enforces it).
class Dataset {
 public:
  Dataset(std::vector<std::string> column_names, std::vector<double> x_row_major,
          std::size_t rows, std::size_t cols, std::optional<std::vector<double>> y,
          Origin origin);

  std::size_t rows() const noexcept { return n_; }
  std::size_t cols() const noexcept { return d_; }
  Origin origin() const noexcept { return origin_; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {x_.data() + i * d_, d_};
  }
  double x(std::size_t i, std::size_t j) const noexcept { return x_[i * d_ + j]; }
  const std::vector<double>& x_data() const noexcept { return x_; }

  bool has_y() const noexcept { return y_.has_value(); }
  const std::vector<double>& y() const;
  const std::vector<std::string>& column_names() const noexcept { return column_names_; }

  // New dataset with the given subset of rows, same columns and origin.
  Dataset select_rows(std::span<const std::size_t> keep) const;
  Dataset without_y() const;

 private:
  std::vector<std::string> column_names_;
  std::vector<double> x_;
  std::optional<std::vector<double>> y_;
  Origin origin_;
  std::size_t n_;
  std::size_t d_;
};

// Parsed-but-unvalidated table, as produced by the CSV reader.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> comments;  // leading '#' lines, verbatim
};

// Enforces the Dataset invariants: nonempty, rectangular, all-finite.
// If `response_column` is given, that column is split off as y; asking for a
// response that the table does not carry raises MissingResponse.
Dataset validate_dataset(const RawTable& table, Origin origin,
                         const std::optional<std::string>& response_column = std::nullopt);

}  // namespace condmix
