#include "ivfe/autocorr.hpp"

#include <cmath>
#include <string>

#include "ivfe/error.hpp"

namespace ivfe {

std::vector<double> acf(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (max_lag < 1 || n <= max_lag) {
    throw Error(ErrorCode::kInvalidArgument, "acf needs length > max_lag >= 1 (length " +
                                                 std::to_string(n) + ", max_lag " +
                                                 std::to_string(max_lag) + ")");
  }
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);

  std::vector<double> centered(n);
  for (std::size_t t = 0; t < n; ++t) centered[t] = x[t] - mean;

  double c0 = 0.0;
  for (double v : centered) c0 += v * v;
  if (!(c0 > 0.0) || !std::isfinite(c0)) {
    throw Error(ErrorCode::kDegenerateSeries, "series has zero (or non-finite) sample variance");
  }

  std::vector<double> r(max_lag + 1);
  r[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) ck += centered[t] * centered[t + k];
    r[k] = ck / c0;
  }
  return r;
}

std::vector<double> pacf_from_acf(std::span<const double> r) {
  if (r.size() < 2) throw Error(ErrorCode::kInvalidArgument, "pacf needs at least lag 1");
  const std::size_t max_lag = r.size() - 1;
  std::vector<double> out(max_lag + 1);
  out[0] = 1.0;

  std::vector<double> phi(max_lag + 1, 0.0);
  std::vector<double> prev(max_lag + 1, 0.0);
  phi[1] = r[1];
  out[1] = r[1];
  double v = 1.0 - r[1] * r[1];
  for (std::size_t k = 2; k <= max_lag; ++k) {
    prev = phi;
    double num = r[k];
    for (std::size_t j = 1; j < k; ++j) num -= prev[j] * r[k - j];
    if (!(v > 0.0)) {
      // Perfectly predictable at a lower order; higher partials vanish.
      out[k] = 0.0;
      continue;
    }
    const double kk = num / v;
    phi[k] = kk;
    for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - kk * prev[k - j];
    v *= 1.0 - kk * kk;
    out[k] = kk;
  }
  return out;
}

std::vector<double> pacf(std::span<const double> x, std::size_t max_lag) {
  const auto r = acf(x, max_lag);
  return pacf_from_acf(r);
}

double pacf_band(std::size_t length) noexcept {
  return 1.96 / std::sqrt(static_cast<double>(length));
}

std::size_t select_order(std::span<const double> x, std::size_t max_lag) {
  const auto p = pacf(x, max_lag);
  const double band = pacf_band(x.size());
  for (std::size_t k = max_lag; k >= 1; --k) {
    if (std::abs(p[k]) > band) return k;
  }
  return 1;
}

std::optional<OrderPair> reference_orders(std::string_view dataset) noexcept {
  if (dataset == "sp500") return OrderPair{35, 35};
  if (dataset == "c1") return OrderPair{5, 3};
  if (dataset == "c2") return OrderPair{25, 5};
  if (dataset == "c3") return OrderPair{5, 5};
  return std::nullopt;
}

}  // namespace ivfe
