#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ivfe {

using Matrix = std::vector<std::vector<double>>;  // row-major: one row per sample

enum class RegressorKind { kRidge, kKnn, kMlp };

[[nodiscard]] std::string_view regressor_kind_name(RegressorKind k) noexcept;
[[nodiscard]] std::optional<RegressorKind> parse_regressor_kind(std::string_view name) noexcept;

struct RegressorSpec {
  RegressorKind kind = RegressorKind::kRidge;
  double lambda = 1.0;        // ridge
  std::size_t k = 10;         // knn
  std::size_t hidden = 16;    // mlp: single hidden tanh layer
  std::size_t epochs = 1000;  // mlp: full-batch steps
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 0;

  void validate() const;
  /// Short label used in reports, e.g. "ridge", "knn", "mlp".
  [[nodiscard]] std::string label() const;
};

/// Single-hidden-layer network y = w2 . tanh(W1 x + b1) + b2.
struct MlpParams {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x inputs
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;

  [[nodiscard]] std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
};

/// Half mean squared error of the network on (x, y); fills `grad` when given.
double mlp_loss_and_grad(const MlpParams& p, const Matrix& x, std::span<const double> y, MlpParams* grad);

struct FittedRegressor {
  RegressorSpec spec;
  std::size_t width = 0;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;  // population std; 1 for constant features

  // ridge
  double intercept = 0.0;
  std::vector<double> coefficients;  // on standardized features

  // knn: standardized training rows in canonical order
  Matrix train_rows;
  std::vector<double> train_targets;
  std::vector<std::size_t> train_origin;  // row index in the caller's X

  // mlp (target standardized internally)
  MlpParams mlp;
  double target_mean = 0.0;
  double target_scale = 1.0;
};

/// Rows are first put in a canonical (lexicographic) order, so the fit does not
/// depend on the order in which samples are supplied. Throws DimensionMismatch
/// for ragged or mismatched inputs, InvalidArgument for fewer than 2 rows or a
/// constant mlp target, SingularSystem if the solve produces non-finite values.
[[nodiscard]] FittedRegressor fit(const RegressorSpec& spec, const Matrix& x, std::span<const double> y);

/// knn averages the targets of all training rows no farther than the k-th
/// nearest, so ties at the boundary can contribute more than k rows. Throws
/// DimensionMismatch when a row width differs from the training width.
[[nodiscard]] std::vector<double> predict(const FittedRegressor& model, const Matrix& x);

/// Standardized feature row.
[[nodiscard]] std::vector<double> standardize(const FittedRegressor& model, std::span<const double> row);

/// Caller-side training row indices of the k nearest neighbours of `row`,
/// nearest first (knn models only).
[[nodiscard]] std::vector<std::size_t> knn_neighbors(const FittedRegressor& model, std::span<const double> row);

}  // namespace ivfe
