#pragma once

#include <filesystem>
#include <string>

#include "ivfe/pipeline.hpp"

namespace ivfe {

/// Nested report: meta (seed, config hash, version, dataset), the resolved
/// config, orders, FEN selection, per-cell metrics and interval MDE.
[[nodiscard]] std::string report_to_json(const ExperimentReport& report);

/// Long-format table `section,regressor,method,source,metric,value,error`
/// behind a `# ivfe <version> seed=<s> config_hash=<h>` header line. Values
/// use 17 significant digits; nothing time-dependent is written.
[[nodiscard]] std::string report_to_csv(const ExperimentReport& report);

/// Fixed-width summary of center/range MSE and MDE per (regressor, method).
[[nodiscard]] std::string report_summary(const ExperimentReport& report);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ivfe
