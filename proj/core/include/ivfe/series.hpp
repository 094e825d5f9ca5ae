#pragma once

#include <cstddef>
#include <vector>

namespace ivfe {

/// Interval-valued series given by its bounds. lower[t] <= upper[t] for all t.
class IntervalSeries {
 public:
  /// Throws LengthMismatch on unequal or empty inputs and BoundViolation
  /// when some lower[t] > upper[t].
  IntervalSeries(std::vector<double> lower, std::vector<double> upper);

  [[nodiscard]] const std::vector<double>& lower() const noexcept { return lower_; }
  [[nodiscard]] const std::vector<double>& upper() const noexcept { return upper_; }
  [[nodiscard]] std::size_t size() const noexcept { return lower_.size(); }

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Center/range form of an interval series: center = (l+u)/2, range = (u-l)/2.
struct CenterRangeSeries {
  std::vector<double> center;
  std::vector<double> range;

  [[nodiscard]] std::size_t size() const noexcept { return center.size(); }
};

[[nodiscard]] CenterRangeSeries to_center_range(const IntervalSeries& s);

/// Inverse of to_center_range. Throws NegativeRange if any range[t] < 0 and
/// LengthMismatch if the two sequences differ in length.
[[nodiscard]] IntervalSeries from_center_range(const CenterRangeSeries& s);

}  // namespace ivfe
