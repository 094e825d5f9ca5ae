#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ivfe/autocorr.hpp"
#include "ivfe/config.hpp"
#include "ivfe/fen.hpp"
#include "ivfe/metrics.hpp"

namespace ivfe {

// ---- FEN construction and selection ---------------------------------------

struct CandidateResult {
  std::size_t depth = 0;
  std::size_t segment_length = 0;
  std::optional<TrainReport> report;  ///< empty when the candidate failed
  std::string error;
};

struct FenSelection {
  std::vector<CandidateResult> candidates;
  std::size_t chosen = 0;  ///< index into candidates

  [[nodiscard]] const CandidateResult& chosen_candidate() const { return candidates.at(chosen); }
};

/// Highest held-out accuracy wins; among candidates within `tolerance` of the
/// best, the shallowest, then the smallest best epoch, then the shortest
/// segment length. Independent of candidate order. Throws InsufficientData
/// when no candidate trained successfully.
[[nodiscard]] std::size_t select_candidate(std::span<const CandidateResult> candidates, double tolerance);

struct FenOutcome {
  FenSelection selection;
  FenModel model;  ///< the chosen candidate's best-epoch snapshot
};

/// Trains every (depth, segment length) candidate of `cfg` on the merged
/// center+range imaging dataset of `series` and selects one. Throws
/// InsufficientData if some swept length yields fewer than 2 segments.
[[nodiscard]] FenOutcome run_algorithm1(const ExperimentConfig& cfg, const CenterRangeSeries& series,
                                        std::size_t jobs = 1);

/// Loads the configured data and applies the leak-free cut before training.
[[nodiscard]] FenOutcome run_algorithm1(const ExperimentConfig& cfg, std::size_t jobs = 1);

// ---- feature datasets -----------------------------------------------------

/// Rows pair FEN features of an imaged lag window with the next value.
struct FeatureDataset {
  Matrix features;
  std::vector<double> targets;
  std::vector<std::size_t> target_index;
  std::size_t order = 0;
  ImagingMethod method = ImagingMethod::kRp;
  Source source = Source::kCenter;

  [[nodiscard]] std::size_t size() const noexcept { return targets.size(); }
};

/// Window -> image -> [0,1] normalization -> bilinear upsampling to
/// `min_side` when the window is shorter. MTF bins are capped at the
/// window length.
[[nodiscard]] GrayImage feature_image(std::span<const double> window, ImagingMethod method,
                                      const ImagingOptions& options, std::size_t min_side);

/// Throws OrderTooLarge if order >= x.size(); orders below 2 are raised to 2
/// because a one-point window has no image.
[[nodiscard]] FeatureDataset build_feature_dataset(const FenModel& model, std::span<const double> x,
                                                   std::size_t order, ImagingMethod method,
                                                   const ImagingOptions& options, Source source,
                                                   std::size_t jobs = 1);

[[nodiscard]] std::pair<FeatureDataset, FeatureDataset> build_feature_datasets(
    const FenModel& model, const CenterRangeSeries& series, OrderPair orders, ImagingMethod method,
    const ImagingOptions& options, std::size_t jobs = 1);

// ---- experiment -------------------------------------------------------------

struct MetricValue {
  std::optional<double> value;
  std::string error;
};

struct CellResult {
  std::string regressor;
  std::string method;  ///< "raw" or an imaging method name
  Source source = Source::kCenter;
  MetricValue mse, mae, mape, smape;
  std::string error;                 ///< fit/predict failure, if any
  std::vector<double> predictions;   ///< test-split predictions
};

struct MdeResult {
  std::string regressor;
  std::string method;
  MetricValue nested;       ///< canonical double-root form
  MetricValue single_root;  ///< conventional variant for comparison
};

struct ExperimentReport {
  std::string version;
  std::string config_hash;
  std::string config_json;
  std::string dataset;
  std::uint64_t seed = 0;
  OrderPair orders;
  OrderPair feature_orders;  ///< window lengths used for feature extraction
  std::size_t series_length = 0;
  std::size_t split_index = 0;  ///< first test target index
  FenSelection selection;
  FenModel model;
  std::vector<CellResult> cells;
  std::vector<MdeResult> mde;

  [[nodiscard]] const CellResult* find_cell(std::string_view regressor, std::string_view method,
                                            Source source) const noexcept;
};

[[nodiscard]] CenterRangeSeries load_series(const DataSource& data);

/// Pinned orders are taken verbatim; the rest come from select_order with
/// max_lag capped below the series length.
[[nodiscard]] OrderPair resolve_orders(const ExperimentConfig& cfg, const CenterRangeSeries& series);

/// First test target index: floor(split * T).
[[nodiscard]] std::size_t chronological_split_index(std::size_t length, double split);

/// Full protocol: orders, FEN selection, raw-lag and extracted-feature
/// regressions on a chronological split, metrics per cell. Cell failures are
/// recorded, not thrown.
[[nodiscard]] ExperimentReport run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1);

/// Human-readable description of the grid a config would run.
[[nodiscard]] std::string describe_plan(const ExperimentConfig& cfg);

}  // namespace ivfe
