#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "ivfe/fen.hpp"

namespace ivfe {

enum class Optimizer { kSgdMomentum, kAdam };

[[nodiscard]] std::string_view optimizer_name(Optimizer o) noexcept;
[[nodiscard]] std::optional<Optimizer> parse_optimizer(std::string_view name) noexcept;

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 8;
  double learning_rate = 0.01;
  Optimizer optimizer = Optimizer::kSgdMomentum;
  double momentum = 0.9;
  double split = 0.8;  ///< stratified train fraction
  double bn_momentum = 0.1;
  HeadInit head_init = HeadInit::kZero;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument unless 0 < split < 1, epochs >= 1, batch_size >= 2
  /// and learning_rate > 0.
  void validate() const;
};

struct TrainReport {
  std::vector<double> epoch_loss;      ///< mean training loss per epoch
  std::vector<double> epoch_accuracy;  ///< held-out accuracy per epoch
  double initial_loss = 0.0;           ///< training loss before the first update
  std::size_t best_epoch = 0;          ///< 1-based; earliest epoch with top accuracy
  double best_accuracy = 0.0;
  double best_loss = 0.0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

/// Stratified train/test split: indices into the dataset, each sorted.
[[nodiscard]] std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const LabeledImageSet& dataset, double train_fraction, std::uint64_t seed);

/// Fraction of items whose arg-max logit matches the label (inference mode).
[[nodiscard]] double accuracy(const FenModel& model, const LabeledImageSet& dataset,
                              std::span<const std::size_t> indices);

/// Trains a fresh model and returns the snapshot from the best epoch.
/// Deterministic given (dataset, arch, cfg). Throws InsufficientData when
/// some class has fewer than 4 samples.
[[nodiscard]] std::pair<FenModel, TrainReport> train(const LabeledImageSet& dataset,
                                                     const FenArchitecture& arch,
                                                     const TrainConfig& cfg);

}  // namespace ivfe
