#include "ivfe/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ivfe/error.hpp"

namespace ivfe {
namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n\"");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n\"");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower_case(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

[[noreturn]] void parse_error(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": " + why);
}

}  // namespace

std::optional<CsvSchema> parse_csv_schema(std::string_view name) noexcept {
  if (name == "bounds") return CsvSchema::kBounds;
  if (name == "ohlc") return CsvSchema::kOhlc;
  return std::nullopt;
}

IntervalSeries read_csv(std::istream& in, CsvSchema schema) {
  // Column positions of (lower, upper) and the minimum field count per row.
  std::size_t lower_col = schema == CsvSchema::kBounds ? 1 : 2;
  std::size_t upper_col = schema == CsvSchema::kBounds ? 2 : 1;

  std::vector<double> lower;
  std::vector<double> upper;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);

    if (first_content) {
      first_content = false;
      const bool looks_numeric = fields.size() > upper_col && fields.size() > lower_col &&
                                 parse_number(fields[lower_col]) && parse_number(fields[upper_col]);
      if (!looks_numeric) {
        // Header row: locate columns by name.
        std::vector<std::string> names;
        for (auto& f : fields) names.push_back(lower_case(f));
        auto find = [&](std::string_view want) -> std::size_t {
          auto it = std::find(names.begin(), names.end(), want);
          if (it == names.end()) parse_error(line_no, "header lacks column '" + std::string(want) + "'");
          return static_cast<std::size_t>(it - names.begin());
        };
        if (schema == CsvSchema::kBounds) {
          lower_col = find("lower");
          upper_col = find("upper");
        } else {
          lower_col = find("low");
          upper_col = find("high");
        }
        continue;
      }
    }

    const std::size_t need = std::max(lower_col, upper_col) + 1;
    if (fields.size() < need) {
      parse_error(line_no, "expected at least " + std::to_string(need) + " fields, got " +
                               std::to_string(fields.size()));
    }
    auto lo = parse_number(fields[lower_col]);
    auto hi = parse_number(fields[upper_col]);
    if (!lo) parse_error(line_no, "cannot parse '" + fields[lower_col] + "' as a number");
    if (!hi) parse_error(line_no, "cannot parse '" + fields[upper_col] + "' as a number");
    if (*lo > *hi) {
      throw Error(ErrorCode::kBoundViolation,
                  "line " + std::to_string(line_no) + ": lower " + fields[lower_col] +
                      " exceeds upper " + fields[upper_col]);
    }
    lower.push_back(*lo);
    upper.push_back(*hi);
  }
  if (lower.empty()) throw Error(ErrorCode::kParseError, "no data rows");
  return IntervalSeries(std::move(lower), std::move(upper));
}

IntervalSeries load_csv(const std::filesystem::path& path, CsvSchema schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_csv(in, schema);
}

void write_csv(std::ostream& out, const IntervalSeries& s) {
  out << "t,lower,upper\n";
  char buf[96];
  for (std::size_t t = 0; t < s.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", t + 1, s.lower()[t], s.upper()[t]);
    out << buf;
  }
}

void save_csv(const std::filesystem::path& path, const IntervalSeries& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_csv(out, s);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace ivfe
