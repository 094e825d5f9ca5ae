#pragma once

#include <span>

namespace ivfe {

// Point metrics over equal-length, nonempty sequences (LengthMismatch otherwise).

[[nodiscard]] double mse(std::span<const double> truth, std::span<const double> pred);
[[nodiscard]] double mae(std::span<const double> truth, std::span<const double> pred);
/// mean |(y - yhat) / y|; ZeroDenominator (naming the index) if some y == 0.
[[nodiscard]] double mape(std::span<const double> truth, std::span<const double> pred);
/// mean |y - yhat| / (|y| + |yhat|), no factor 2 and no percentage scaling,
/// so the value lies in [0, 1]. ZeroDenominator when both terms vanish.
[[nodiscard]] double smape(std::span<const double> truth, std::span<const double> pred);

/// Mean distance error between true and predicted intervals, from center and
/// range sequences. With lower/upper errors el = (c - r) - (ĉ - r̂) and
/// eu = (c + r) - (ĉ + r̂):
///   nested:      sqrt( mean_t sqrt( (el^2 + eu^2) / 2 ) )
///   single-root: sqrt( mean_t (el^2 + eu^2) / 2 )
[[nodiscard]] double mde(std::span<const double> center_truth, std::span<const double> center_pred,
                         std::span<const double> range_truth, std::span<const double> range_pred,
                         bool nested_root = true);

/// The same quantity from lower/upper bounds directly.
[[nodiscard]] double mde_bounds(std::span<const double> lower_truth, std::span<const double> lower_pred,
                                std::span<const double> upper_truth, std::span<const double> upper_pred,
                                bool nested_root = true);

struct PointMetrics {
  double mse = 0.0;
  double mae = 0.0;
  double mape = 0.0;
  double smape = 0.0;
};

/// All four point metrics; MAPE/SMAPE errors propagate.
[[nodiscard]] PointMetrics point_metrics(std::span<const double> truth, std::span<const double> pred);

struct MetricTable {
  PointMetrics center;
  PointMetrics range;
  double mde = 0.0;
};

}  // namespace ivfe
