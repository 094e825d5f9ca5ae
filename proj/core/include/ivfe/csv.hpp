#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "ivfe/series.hpp"

namespace ivfe {

enum class CsvSchema {
  kBounds,  ///< columns t,lower,upper
  kOhlc,    ///< columns date,high,low (extra columns allowed when a header names them)
};

[[nodiscard]] std::optional<CsvSchema> parse_csv_schema(std::string_view name) noexcept;

/// Reads an interval series. A leading header row is optional; when present
/// columns are located by name (case-insensitive), otherwise by position.
/// Throws IoError, ParseError (with 1-based line number) or BoundViolation.
[[nodiscard]] IntervalSeries load_csv(const std::filesystem::path& path, CsvSchema schema);
[[nodiscard]] IntervalSeries read_csv(std::istream& in, CsvSchema schema);

/// Writes `t,lower,upper` with t starting at 1 and 17 significant digits.
void write_csv(std::ostream& out, const IntervalSeries& s);
void save_csv(const std::filesystem::path& path, const IntervalSeries& s);

}  // namespace ivfe
