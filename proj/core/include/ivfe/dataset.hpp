#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace ivfe {

enum class Source { kCenter, kRange };

[[nodiscard]] std::string_view source_name(Source s) noexcept;

/// Supervised lag dataset. Row j pairs the window x[j .. j+order-1] (oldest
/// first, most recent last) with target x[j+order]; target_index[j] is the
/// position of that target in the source series.
struct LagDataset {
  std::size_t order = 0;
  Source source = Source::kCenter;
  std::vector<std::vector<double>> windows;
  std::vector<double> targets;
  std::vector<std::size_t> target_index;

  [[nodiscard]] std::size_t size() const noexcept { return targets.size(); }
};

/// Throws OrderTooLarge if order >= x.size(), InvalidArgument if order == 0.
[[nodiscard]] LagDataset build_lag_dataset(std::span<const double> x, std::size_t order,
                                           Source source = Source::kCenter);

/// Disjoint consecutive segments of equal length; the remainder is dropped.
struct SegmentSet {
  std::size_t length = 0;
  Source source = Source::kCenter;
  std::vector<std::vector<double>> segments;

  [[nodiscard]] std::size_t size() const noexcept { return segments.size(); }
};

/// floor(T / length) segments. Throws InvalidArgument for length < 2 and
/// SegmentTooLong when length > T.
[[nodiscard]] SegmentSet segment(std::span<const double> x, std::size_t length,
                                 Source source = Source::kCenter);

}  // namespace ivfe
