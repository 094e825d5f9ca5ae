#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ivfe/series.hpp"

namespace ivfe {

enum class DgpKind { kC1, kC2, kC3 };

[[nodiscard]] std::string_view dgp_name(DgpKind kind) noexcept;
/// Accepts "c1"/"C1" etc. Returns nullopt for anything else.
[[nodiscard]] std::optional<DgpKind> parse_dgp_kind(std::string_view name) noexcept;

struct DgpSpec {
  DgpKind kind = DgpKind::kC1;
  std::size_t length = 1500;
  std::uint64_t seed = 0;
  double noise_std = 1.0;
  /// Generated values discarded before the returned window. 0 keeps the
  /// stated initial conditions as the start of the output.
  std::size_t burn_in = 0;
  /// Natural log in the C3 range recursion; false selects log10.
  bool natural_log = true;

  /// Throws InvalidArgument when length < 10 or noise_std <= 0.
  void validate() const;
};

/// Which parts of a generated series follow a recursion the generator was
/// explicitly given, and which reuse another setting's process.
struct DgpProvenance {
  bool center_extrapolated = false;
  bool range_extrapolated = false;
};

[[nodiscard]] DgpProvenance dgp_provenance(DgpKind kind) noexcept;

/// Draws the noise and uniforms from a generator seeded with spec.seed and
/// runs the recursions. Bit-identical for identical specs.
[[nodiscard]] CenterRangeSeries generate_dgp(const DgpSpec& spec);

// The recursions below take the innovation sequence explicitly. eps[0] drives
// the first generated value; the output has eps.size() values and excludes the
// initial conditions.

/// y_t = 0.4 y_{t-1} + e_t + 2 e_{t-1}, with y_0 = 0 and e_0 = 0.
[[nodiscard]] std::vector<double> c1_center(std::span<const double> eps);

/// Threshold AR(2): y_{t+2} = 0.6 + 1.3 y_{t+1} - 0.4 y_t + e  if y_t < 5,
///                           1.2 + 1.6 y_{t+1} - 1.1 y_t + e  otherwise,
/// started from y_0 = y_1 = 0.
[[nodiscard]] std::vector<double> c2_center(std::span<const double> eps);

/// y_t = 0.2 y_{t-1} + 1.6 log(1000 y_{t-1}) + 30 + e_t, y_0 = 0.001.
/// Throws LogDomain if an iterate reaches y <= 0.
[[nodiscard]] std::vector<double> c3_range(std::span<const double> eps, bool natural_log = true);

}  // namespace ivfe
