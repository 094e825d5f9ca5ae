#pragma once

#include <filesystem>
#include <string>

#include "ivfe/fen.hpp"

namespace ivfe {

inline constexpr int kModelFormatVersion = 1;

/// JSON document {version, architecture, weight_order, weights, ...}. Weights
/// are flat row-major arrays in weight_order; numbers round-trip exactly.
/// `meta` (may be empty) is embedded verbatim as a JSON object of strings.
[[nodiscard]] std::string model_to_json(const FenModel& model,
                                        const std::vector<std::pair<std::string, std::string>>& meta = {});

/// Throws VersionMismatch for an unsupported version and CorruptModel for a
/// malformed or inconsistent document.
[[nodiscard]] FenModel model_from_json(const std::string& text);

void save_model(const FenModel& model, const std::filesystem::path& path,
                const std::vector<std::pair<std::string, std::string>>& meta = {});
[[nodiscard]] FenModel load_model(const std::filesystem::path& path);

}  // namespace ivfe
