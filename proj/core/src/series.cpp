#include "ivfe/series.hpp"

#include <string>

#include "ivfe/error.hpp"

namespace ivfe {

IntervalSeries::IntervalSeries(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw Error(ErrorCode::kLengthMismatch, "lower has " + std::to_string(lower_.size()) +
                                                " values, upper has " +
                                                std::to_string(upper_.size()));
  }
  if (lower_.empty()) throw Error(ErrorCode::kLengthMismatch, "interval series is empty");
  for (std::size_t t = 0; t < lower_.size(); ++t) {
    if (!(lower_[t] <= upper_[t])) {
      throw Error(ErrorCode::kBoundViolation, "lower > upper at index " + std::to_string(t));
    }
  }
}

CenterRangeSeries to_center_range(const IntervalSeries& s) {
  CenterRangeSeries out;
  out.center.resize(s.size());
  out.range.resize(s.size());
  for (std::size_t t = 0; t < s.size(); ++t) {
    out.center[t] = (s.lower()[t] + s.upper()[t]) / 2.0;
    out.range[t] = (s.upper()[t] - s.lower()[t]) / 2.0;
  }
  return out;
}

IntervalSeries from_center_range(const CenterRangeSeries& s) {
  if (s.center.size() != s.range.size()) {
    throw Error(ErrorCode::kLengthMismatch, "center and range lengths differ");
  }
  std::vector<double> lower(s.size());
  std::vector<double> upper(s.size());
  for (std::size_t t = 0; t < s.size(); ++t) {
    if (s.range[t] < 0.0) {
      throw Error(ErrorCode::kNegativeRange, "range[" + std::to_string(t) + "] < 0");
    }
    lower[t] = s.center[t] - s.range[t];
    upper[t] = s.center[t] + s.range[t];
  }
  return IntervalSeries(std::move(lower), std::move(upper));
}

}  // namespace ivfe
