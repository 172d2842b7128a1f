#include "condmix/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "condmix/errors.hpp"

namespace condmix {

Dataset::Dataset(std::vector<std::string> column_names, std::vector<double> x_row_major,
                 std::size_t rows, std::size_t cols, std::optional<std::vector<double>> y,
                 Origin origin)
    : column_names_(std::move(column_names)),
      x_(std::move(x_row_major)),
      y_(std::move(y)),
      origin_(origin),
      n_(rows),
      d_(cols) {
  if (n_ == 0 || d_ == 0) raise(Errc::EmptyTable, "dataset must have n >= 1 and d >= 1");
  if (x_.size() != n_ * d_) raise(Errc::RaggedRows, "matrix storage does not match n*d");
  if (column_names_.size() != d_)
    raise(Errc::RaggedRows, "column label count does not match d");
  if (y_ && y_->size() != n_) raise(Errc::RaggedRows, "response length does not match n");
}

const std::vector<double>& Dataset::y() const {
  if (!y_) raise(Errc::MissingResponse, "dataset has no response column");
  return *y_;
}

Dataset Dataset::select_rows(std::span<const std::size_t> keep) const {
  std::vector<double> x;
  x.reserve(keep.size() * d_);
  std::optional<std::vector<double>> y;
  if (y_) {
    y.emplace();
    y->reserve(keep.size());
  }
  for (std::size_t i : keep) {
    const auto r = row(i);
    x.insert(x.end(), r.begin(), r.end());
    if (y_) y->push_back((*y_)[i]);
  }
  return Dataset(column_names_, std::move(x), keep.size(), d_, std::move(y), origin_);
}

Dataset Dataset::without_y() const {
  return Dataset(column_names_, x_, n_, d_, std::nullopt, origin_);
}

Dataset validate_dataset(const RawTable& table, Origin origin,
                         const std::optional<std::string>& response_column) {
  if (table.header.empty()) raise(Errc::EmptyTable, "missing header row");
  if (table.rows.empty()) raise(Errc::EmptyTable, "table has a header but no data rows");

  const std::size_t width = table.header.size();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].size() != width)
      raise(Errc::RaggedRows, "row " + std::to_string(i + 1) + " has " +
                                  std::to_string(table.rows[i].size()) + " cells, expected " +
                                  std::to_string(width));
  }

  std::size_t y_col = width;  // sentinel: no response
  if (response_column) {
    const auto it = std::find(table.header.begin(), table.header.end(), *response_column);
    if (it == table.header.end())
      raise(Errc::MissingResponse, "no column named '" + *response_column + "'");
    y_col = static_cast<std::size_t>(it - table.header.begin());
    if (width == 1) raise(Errc::EmptyTable, "response column leaves no covariates");
  }

  const std::size_t n = table.rows.size();
  const std::size_t d = response_column ? width - 1 : width;

  std::vector<std::string> names;
  names.reserve(d);
  for (std::size_t j = 0; j < width; ++j)
    if (j != y_col) names.push_back(table.header[j]);

  std::vector<double> x;
  x.reserve(n * d);
  std::optional<std::vector<double>> y;
  if (response_column) {
    y.emplace();
    y->reserve(n);
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      const double v = table.rows[i][j];
      if (!std::isfinite(v))
        raise(Errc::NonFiniteValue, "non-finite value at row " + std::to_string(i + 1) +
                                        ", column " + std::to_string(j + 1));
      if (j == y_col)
        y->push_back(v);
      else
        x.push_back(v);
    }
  }

  return Dataset(std::move(names), std::move(x), n, d, std::move(y), origin);
}

}  // namespace condmix
