#include "ivfe/dataset.hpp"

#include <string>

#include "ivfe/error.hpp"

namespace ivfe {

std::string_view source_name(Source s) noexcept {
  return s == Source::kCenter ? "center" : "range";
}

LagDataset build_lag_dataset(std::span<const double> x, std::size_t order, Source source) {
  if (order == 0) throw Error(ErrorCode::kInvalidArgument, "lag order must be >= 1");
  if (order >= x.size()) {
    throw Error(ErrorCode::kOrderTooLarge, "order " + std::to_string(order) +
                                               " needs a series longer than " +
                                               std::to_string(x.size()));
  }
  LagDataset out;
  out.order = order;
  out.source = source;
  const std::size_t rows = x.size() - order;
  out.windows.reserve(rows);
  out.targets.reserve(rows);
  out.target_index.reserve(rows);
  for (std::size_t j = order; j < x.size(); ++j) {
    out.windows.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(j - order),
                             x.begin() + static_cast<std::ptrdiff_t>(j));
    out.targets.push_back(x[j]);
    out.target_index.push_back(j);
  }
  return out;
}

SegmentSet segment(std::span<const double> x, std::size_t length, Source source) {
  if (length < 2) throw Error(ErrorCode::kInvalidArgument, "segment length must be >= 2");
  if (length > x.size()) {
    throw Error(ErrorCode::kSegmentTooLong, "segment length " + std::to_string(length) +
                                                " exceeds series length " +
                                                std::to_string(x.size()));
  }
  SegmentSet out;
  out.length = length;
  out.source = source;
  const std::size_t count = x.size() / length;
  out.segments.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto first = x.begin() + static_cast<std::ptrdiff_t>(i * length);
    out.segments.emplace_back(first, first + static_cast<std::ptrdiff_t>(length));
  }
  return out;
}

}  // namespace ivfe
