#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ivfe/csv.hpp"
#include "ivfe/dgp.hpp"
#include "ivfe/imaging.hpp"
#include "ivfe/regress.hpp"
#include "ivfe/train.hpp"

namespace ivfe {

struct DataSource {
  std::optional<DgpSpec> dgp;
  std::optional<std::filesystem::path> csv_path;
  CsvSchema csv_schema = CsvSchema::kBounds;

  /// "c1" for a DGP, the file stem for a CSV.
  [[nodiscard]] std::string name() const;
};

struct OrderSetting {
  std::optional<std::size_t> center;  ///< nullopt selects automatically
  std::optional<std::size_t> range;
  std::size_t max_lag = 40;
};

/// Fixes the FEN candidate instead of sweeping (depth index, segment length, epochs).
struct FenPin {
  std::size_t depth = 1;
  std::size_t segment_length = 45;
  std::size_t epochs = 10;
};

/// Length of the lag windows imaged for feature extraction.
enum class FeatureWindow {
  kOrder,    ///< the center/range orders
  kSegment,  ///< the selected segmentation length, for both series
};

struct ExperimentConfig {
  DataSource data;
  OrderSetting orders;
  std::vector<std::size_t> segment_lengths = {30, 35, 40, 45, 50, 55};
  std::vector<std::size_t> depths = {1, 2, 3, 4, 5};
  std::vector<std::size_t> widths = {8, 16, 32, 64};
  std::optional<FenPin> pinned_fen;
  TrainConfig train;
  ImagingOptions imaging;
  std::vector<ImagingMethod> methods = {kAllMethods.begin(), kAllMethods.end()};
  std::vector<RegressorSpec> regressors;  ///< empty means the default roster
  double split = 0.8;                     ///< chronological train fraction
  bool leak_free = true;                  ///< FEN sees only the training prefix
  FeatureWindow feature_window = FeatureWindow::kOrder;
  double selection_tolerance = 0.01;
  std::uint64_t seed = 0;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
  [[nodiscard]] std::vector<RegressorSpec> effective_regressors() const;
};

/// ridge(lambda=1), knn(k=10), mlp(hidden=16).
[[nodiscard]] std::vector<RegressorSpec> default_regressors();

/// Parses the JSON config. Every field is optional; unknown keys and invalid
/// values throw ConfigError.
[[nodiscard]] ExperimentConfig config_from_json(const std::string& text);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON with every field spelled out (defaults included).
[[nodiscard]] std::string config_to_json(const ExperimentConfig& cfg);

/// 16 hex digits of FNV-1a over config_to_json().
[[nodiscard]] std::string config_hash(const ExperimentConfig& cfg);

/// Deterministic seed derivation from a master seed and cell coordinates.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts) noexcept;
[[nodiscard]] std::uint64_t fnv1a(std::string_view text) noexcept;

}  // namespace ivfe
