#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ivfe {

/// Sample autocorrelations r(0..max_lag) with the biased (divide by T)
/// autocovariance, so r(0) == 1 and the sequence is positive semidefinite.
/// Throws InvalidArgument unless size() > max_lag >= 1, DegenerateSeries for
/// zero sample variance.
[[nodiscard]] std::vector<double> acf(std::span<const double> x, std::size_t max_lag);

/// Partial autocorrelations by Durbin-Levinson on acf(x). Indexed like acf:
/// element 0 is 1 by convention and element k is the lag-k partial.
[[nodiscard]] std::vector<double> pacf(std::span<const double> x, std::size_t max_lag);

/// Durbin-Levinson on a given autocorrelation sequence r(0..K).
[[nodiscard]] std::vector<double> pacf_from_acf(std::span<const double> r);

/// 1.96 / sqrt(T).
[[nodiscard]] double pacf_band(std::size_t length) noexcept;

/// Largest lag k <= max_lag with |pacf(k)| above the 95% band; 1 if none.
[[nodiscard]] std::size_t select_order(std::span<const double> x, std::size_t max_lag);

struct OrderPair {
  std::size_t center = 1;
  std::size_t range = 1;
};

/// Orders read off ACF/PACF plots for the named reference datasets
/// ("sp500", "c1", "c2", "c3"); nullopt for other names.
[[nodiscard]] std::optional<OrderPair> reference_orders(std::string_view dataset) noexcept;

}  // namespace ivfe
