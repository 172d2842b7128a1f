#include <doctest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <limits>

#include "condmix/csv.hpp"
#include "condmix/dataset.hpp"
#include "condmix/errors.hpp"
#include "condmix/rng.hpp"

using namespace condmix;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

}  // namespace

TEST_CASE("validate_dataset accepts a finite table") {
  RawTable t;
  t.header = {"a", "b"};
  t.rows = {{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
  const Dataset d = validate_dataset(t, Origin::Measured);
  CHECK(d.rows() == 3);
  CHECK(d.cols() == 2);
  CHECK(d.x(2, 1) == 6.0);
  CHECK_FALSE(d.has_y());
}

TEST_CASE("validate_dataset rejects non-finite values with location") {
  RawTable t;
  t.header = {"a", "b"};
  t.rows = {{1.0, 2.0}, {std::numeric_limits<double>::quiet_NaN(), 4.0}};
  try {
    validate_dataset(t, Origin::Measured);
    FAIL("expected NonFiniteValue");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonFiniteValue);
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    CHECK(std::string(e.what()).find("column 1") != std::string::npos);
  }
}

TEST_CASE("validate_dataset rejects header-only and ragged tables") {
  RawTable empty;
  empty.header = {"a"};
  CHECK(code_of([&] { validate_dataset(empty, Origin::Measured); }) == Errc::EmptyTable);

  RawTable ragged;
  ragged.header = {"a", "b"};
  ragged.rows = {{1.0, 2.0}, {3.0}};
  CHECK(code_of([&] { validate_dataset(ragged, Origin::Measured); }) == Errc::RaggedRows);
}

TEST_CASE("response column is split off and must exist when requested") {
  RawTable t;
  t.header = {"a", "y", "b"};
  t.rows = {{1.0, 10.0, 2.0}, {3.0, 20.0, 4.0}};
  const Dataset d = validate_dataset(t, Origin::Simulated, "y");
  CHECK(d.cols() == 2);
  CHECK(d.y() == std::vector<double>{10.0, 20.0});
  CHECK(d.column_names() == std::vector<std::string>{"a", "b"});

  CHECK(code_of([&] { validate_dataset(t, Origin::Simulated, "load"); }) ==
        Errc::MissingResponse);
}

TEST_CASE("CSV parsing flags unparsable and empty cells as non-finite") {
  CHECK(code_of([] { parse_csv("a,b\n1,abc\n"); }) == Errc::NonFiniteValue);
  CHECK(code_of([] { parse_csv("a,b\n1,\n"); }) == Errc::NonFiniteValue);
  CHECK(code_of([] { parse_csv(""); }) == Errc::EmptyTable);
}

TEST_CASE("CSV text 'nan'/'inf' cells are rejected at validation") {
  // Whether the reader parses the token or not, ingestion must refuse it.
  try {
    const RawTable t = parse_csv("a\nnan\n");
    validate_dataset(t, Origin::Measured);
    FAIL("expected NonFiniteValue");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonFiniteValue);
  }
}

TEST_CASE("serialize/parse round-trips the numeric payload bit for bit") {
  CounterRng rng(42);
  const std::size_t n = 200, d = 3;
  std::vector<double> x(n * d);
  std::vector<double> y(n);
  for (auto& v : x) v = (rng.uniform01() - 0.5) * std::exp(40.0 * (rng.uniform01() - 0.5));
  for (auto& v : y) v = rng.normal();
  x[0] = -0.0;
  x[1] = 1e-308;
  const Dataset data({"c1", "c2", "c3"}, x, n, d, y, Origin::Simulated);

  const std::string text = dataset_to_csv(data, {"# provenance: test"}, true);
  const Dataset back = validate_dataset(parse_csv(text), Origin::Simulated, "y");

  REQUIRE(back.rows() == n);
  REQUIRE(back.cols() == d);
  for (std::size_t i = 0; i < n * d; ++i) CHECK(same_bits(back.x_data()[i], x[i]));
  for (std::size_t i = 0; i < n; ++i) CHECK(same_bits(back.y()[i], y[i]));
}

TEST_CASE("comments are collected and preserved order of data rows") {
  const RawTable t = parse_csv("# manifest: abc\n# provenance: screen\na\n1\n2\n");
  CHECK(t.comments.size() == 2);
  CHECK(t.rows.size() == 2);
  CHECK(t.rows[0][0] == 1.0);
}

TEST_CASE("select_rows keeps alignment between covariates and response") {
  RawTable t;
  t.header = {"a", "y"};
  t.rows = {{1.0, 10.0}, {2.0, 20.0}, {3.0, 30.0}};
  const Dataset d = validate_dataset(t, Origin::Simulated, "y");
  const std::vector<std::size_t> keep = {2, 0};
  const Dataset s = d.select_rows(keep);
  CHECK(s.x(0, 0) == 3.0);
  CHECK(s.y() == std::vector<double>{30.0, 10.0});
}
