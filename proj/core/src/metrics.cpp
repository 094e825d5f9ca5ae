#include "ivfe/metrics.hpp"

#include <cmath>
#include <string>

#include "ivfe/error.hpp"

namespace ivfe {
namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "metric inputs have lengths " + std::to_string(a.size()) +
                                                " and " + std::to_string(b.size()));
  }
}

}  // namespace

double mse(std::span<const double> truth, std::span<const double> pred) {
  check_pair(truth, pred);
  double s = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) s += (truth[t] - pred[t]) * (truth[t] - pred[t]);
  return s / static_cast<double>(truth.size());
}

double mae(std::span<const double> truth, std::span<const double> pred) {
  check_pair(truth, pred);
  double s = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) s += std::abs(truth[t] - pred[t]);
  return s / static_cast<double>(truth.size());
}

double mape(std::span<const double> truth, std::span<const double> pred) {
  check_pair(truth, pred);
  double s = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (truth[t] == 0.0) {
      throw Error(ErrorCode::kZeroDenominator, "MAPE undefined: truth is zero at index " + std::to_string(t));
    }
    s += std::abs((truth[t] - pred[t]) / truth[t]);
  }
  return s / static_cast<double>(truth.size());
}

double smape(std::span<const double> truth, std::span<const double> pred) {
  check_pair(truth, pred);
  double s = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    const double denom = std::abs(truth[t]) + std::abs(pred[t]);
    if (denom == 0.0) {
      throw Error(ErrorCode::kZeroDenominator, "SMAPE undefined: |y| + |yhat| is zero at index " + std::to_string(t));
    }
    s += std::abs(truth[t] - pred[t]) / denom;
  }
  return s / static_cast<double>(truth.size());
}

double mde(std::span<const double> center_truth, std::span<const double> center_pred,
           std::span<const double> range_truth, std::span<const double> range_pred, bool nested_root) {
  check_pair(center_truth, center_pred);
  check_pair(center_truth, range_truth);
  check_pair(center_truth, range_pred);
  double s = 0.0;
  for (std::size_t t = 0; t < center_truth.size(); ++t) {
    const double el = (center_truth[t] - range_truth[t]) - (center_pred[t] - range_pred[t]);
    const double eu = (range_truth[t] + center_truth[t]) - (range_pred[t] + center_pred[t]);
    const double inner = (el * el + eu * eu) / 2.0;
    s += nested_root ? std::sqrt(inner) : inner;
  }
  return std::sqrt(s / static_cast<double>(center_truth.size()));
}

double mde_bounds(std::span<const double> lower_truth, std::span<const double> lower_pred,
                  std::span<const double> upper_truth, std::span<const double> upper_pred, bool nested_root) {
  check_pair(lower_truth, lower_pred);
  check_pair(lower_truth, upper_truth);
  check_pair(lower_truth, upper_pred);
  double s = 0.0;
  for (std::size_t t = 0; t < lower_truth.size(); ++t) {
    const double el = lower_truth[t] - lower_pred[t];
    const double eu = upper_truth[t] - upper_pred[t];
    const double inner = (el * el + eu * eu) / 2.0;
    s += nested_root ? std::sqrt(inner) : inner;
  }
  return std::sqrt(s / static_cast<double>(lower_truth.size()));
}

PointMetrics point_metrics(std::span<const double> truth, std::span<const double> pred) {
  return {mse(truth, pred), mae(truth, pred), mape(truth, pred), smape(truth, pred)};
}

}  // namespace ivfe
