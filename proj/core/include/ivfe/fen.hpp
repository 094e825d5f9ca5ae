#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ivfe/imaging.hpp"
#include "ivfe/tensor.hpp"

namespace ivfe {

/// Residual convolutional classifier family.
///
/// Layout: 3x3 conv stem -> one stage per entry of `widths`, each holding
/// `blocks` residual blocks -> global average pooling -> affine head.
/// A block is conv3x3-BN-ReLU-conv3x3-BN plus a skip connection, with ReLU
/// after the addition. Stages after the first halve the spatial size in their
/// first block; whenever shape changes the skip is a 1x1 conv + BN projection,
/// otherwise it is the identity. The pooled vector (width widths.back()) is
/// the feature vector.
struct FenArchitecture {
  std::size_t blocks = 1;  ///< residual blocks per stage; the depth knob
  std::vector<std::size_t> widths = {8, 16, 32, 64};
  std::size_t feature_dim = 64;  ///< must equal widths.back()
  std::size_t classes = 4;
  std::size_t min_side = 8;  ///< smallest image side accepted by forward()

  /// Throws InvalidArgument unless blocks >= 1, widths nonempty and positive,
  /// feature_dim == widths.back() >= 8 and classes == 4.
  void validate() const;

  friend bool operator==(const FenArchitecture&, const FenArchitecture&) = default;
};

/// Architecture for a depth index 1..5 at the default desk widths.
[[nodiscard]] FenArchitecture architecture_for_depth(std::size_t depth);

enum class HeadInit { kZero, kRandom };

struct FenModel {
  FenArchitecture architecture;
  TensorSet params;   ///< trainable weights
  TensorSet buffers;  ///< batch-norm running mean / variance
  std::size_t trained_epochs = 0;
  std::uint64_t rng_seed = 0;
};

/// He-normal convolutions, unit/zero batch-norm affine, zero or Xavier head.
[[nodiscard]] FenModel init_model(const FenArchitecture& arch, std::uint64_t seed,
                                  HeadInit head = HeadInit::kZero);

struct ForwardResult {
  std::array<double, 4> logits{};
  std::vector<double> features;
};

/// Inference (running batch-norm statistics). Throws ShapeMismatch when the
/// image side is below architecture.min_side or the pixel count is wrong.
[[nodiscard]] ForwardResult forward(const FenModel& model, const GrayImage& image);

/// Penultimate activations of forward().
[[nodiscard]] std::vector<double> extract_features(const FenModel& model, const GrayImage& image);

[[nodiscard]] std::array<double, 4> softmax(const std::array<double, 4>& logits) noexcept;

struct LossAndGrad {
  double loss = 0.0;
  TensorSet grads;  ///< same names and shapes as model.params
  /// Per-layer batch statistics (same layout as model.buffers; variances unbiased).
  TensorSet batch_stats;
};

/// Mean cross-entropy over the batch with batch-norm in training mode (batch
/// statistics), and its gradient for every parameter by reverse-mode
/// differentiation. Does not modify the model. Throws ShapeMismatch for an
/// empty batch or mixed image sides, InvalidArgument for labels outside 1..4.
[[nodiscard]] LossAndGrad loss_and_grad(const FenModel& model, std::span<const LabeledImage> batch);

/// Zeroes every residual-branch parameter (both convolutions and their
/// batch-norm affine), leaving stems, projections and the head untouched.
void zero_residual_branches(FenModel& model);

/// Output of a single residual block (inference mode) for an NCHW input.
/// Exposed for verification of the skip path.
[[nodiscard]] Tensor residual_block_forward(const FenModel& model, std::size_t block_index,
                                            const Tensor& input);

[[nodiscard]] std::size_t residual_block_count(const FenArchitecture& arch) noexcept;

}  // namespace ivfe
