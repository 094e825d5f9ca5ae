#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ivfe/csv.hpp"
#include "support.hpp"

using namespace ivfe;
using ivfe::test::code;
using ivfe::test::error_code_of;

namespace {

IntervalSeries parse(const std::string& text, CsvSchema schema) {
  std::istringstream in(text);
  return read_csv(in, schema);
}

std::string parse_error(const std::string& text, CsvSchema schema) {
  try {
    (void)parse(text, schema);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("csv") {
  TEST_CASE("ohlc maps high to upper and low to lower") {
    const auto s = parse("date,high,low\n2012-01-03,1284.62,1258.86\n", CsvSchema::kOhlc);
    REQUIRE(s.size() == 1);
    CHECK(s.lower()[0] == 1258.86);
    CHECK(s.upper()[0] == 1284.62);
  }

  TEST_CASE("ohlc header locates columns by name") {
    const auto s = parse("Date,Open,High,Low,Close\n2012-01-03,1270,1284.62,1258.86,1277\n", CsvSchema::kOhlc);
    CHECK(s.lower()[0] == 1258.86);
    CHECK(s.upper()[0] == 1284.62);
  }

  TEST_CASE("bounds with and without header, row order preserved") {
    const auto a = parse("t,lower,upper\n1,0.5,1.5\n2,-1,3\n", CsvSchema::kBounds);
    const auto b = parse("1,0.5,1.5\n2,-1,3\n", CsvSchema::kBounds);
    CHECK(a.lower() == std::vector<double>{0.5, -1.0});
    CHECK(a.upper() == std::vector<double>{1.5, 3.0});
    CHECK(b.lower() == a.lower());
    CHECK(b.upper() == a.upper());
  }

  TEST_CASE("parse errors name the line") {
    CHECK(parse_error("t,lower,upper\n1,0.5,1.5\n2,abc,3\n", CsvSchema::kBounds).find("line 3") !=
          std::string::npos);
    CHECK(parse_error("t,lower,upper\n1,0.5\n", CsvSchema::kBounds).find("line 2") != std::string::npos);
    CHECK(error_code_of([] { (void)parse("t,lower,upper\n", CsvSchema::kBounds); }) ==
          code(ErrorCode::kParseError));
    CHECK(error_code_of([] { (void)parse("1,3,2\n", CsvSchema::kBounds); }) == code(ErrorCode::kBoundViolation));
  }

  TEST_CASE("write then read reproduces every double exactly") {
    auto lo = ivfe::test::normal_vector(100, 3, 1e3);
    auto hi = lo;
    const auto w = ivfe::test::normal_vector(100, 4);
    for (std::size_t i = 0; i < hi.size(); ++i) hi[i] += std::abs(w[i]) / 3.0;
    const IntervalSeries s(lo, hi);
    std::stringstream buf;
    write_csv(buf, s);
    CHECK(buf.str().rfind("t,lower,upper\n1,", 0) == 0);
    const auto back = read_csv(buf, CsvSchema::kBounds);
    CHECK(back.lower() == s.lower());
    CHECK(back.upper() == s.upper());
  }

  TEST_CASE("file round-trip and missing file") {
    const auto dir = std::filesystem::temp_directory_path() / "ivfe_csv_test";
    std::filesystem::create_directories(dir);
    const IntervalSeries s({1.0, 2.0}, {1.5, 2.25});
    save_csv(dir / "s.csv", s);
    const auto back = load_csv(dir / "s.csv", CsvSchema::kBounds);
    CHECK(back.upper() == s.upper());
    CHECK(error_code_of([&] { (void)load_csv(dir / "absent.csv", CsvSchema::kBounds); }) ==
          code(ErrorCode::kIoError));
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("schema names") {
    CHECK(parse_csv_schema("ohlc") == CsvSchema::kOhlc);
    CHECK(parse_csv_schema("bounds") == CsvSchema::kBounds);
    CHECK_FALSE(parse_csv_schema("xml").has_value());
  }
}
