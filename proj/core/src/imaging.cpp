#include "ivfe/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ivfe/error.hpp"

namespace ivfe {
namespace {

void require_window(std::span<const double> w) {
  if (w.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "imaging needs a window of length >= 2, got " +
                                                 std::to_string(w.size()));
  }
}

std::vector<double> polar_angles(std::span<const double> w) {
  auto x = rescale_minmax(w);
  for (auto& v : x) v = std::acos(std::clamp(v, -1.0, 1.0));
  return x;
}

}  // namespace

std::string_view method_name(ImagingMethod m) noexcept {
  switch (m) {
    case ImagingMethod::kRp: return "rp";
    case ImagingMethod::kGasf: return "gasf";
    case ImagingMethod::kGadf: return "gadf";
    case ImagingMethod::kMtf: return "mtf";
  }
  return "?";
}

std::optional<ImagingMethod> parse_method(std::string_view name) noexcept {
  for (auto m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  if (name == "RP") return ImagingMethod::kRp;
  if (name == "GASF") return ImagingMethod::kGasf;
  if (name == "GADF") return ImagingMethod::kGadf;
  if (name == "MTF") return ImagingMethod::kMtf;
  return std::nullopt;
}

std::vector<double> rescale_minmax(std::span<const double> w) {
  std::vector<double> out(w.size(), 0.0);
  if (w.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(w.begin(), w.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;
  if (!(span > 0.0)) return out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i] = std::clamp(2.0 * (w[i] - lo) / span - 1.0, -1.0, 1.0);
  }
  return out;
}

GrayImage rp(std::span<const double> w, std::optional<double> threshold) {
  require_window(w);
  const std::size_t n = w.size();
  GrayImage img;
  img.side = n;
  img.pixels.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = std::abs(w[i] - w[j]);
      img.at(i, j) = threshold ? (d <= *threshold ? 1.0 : 0.0) : d;
    }
  }
  if (threshold) {
    img.value_min = 0.0;
    img.value_max = 1.0;
  } else {
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    img.value_min = 0.0;
    img.value_max = *hi - *lo;
  }
  return img;
}

GrayImage gasf(std::span<const double> w) {
  require_window(w);
  const auto phi = polar_angles(w);
  const std::size_t n = w.size();
  GrayImage img{n, std::vector<double>(n * n), -1.0, 1.0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) img.at(i, j) = std::cos(phi[i] + phi[j]);
  }
  return img;
}

GrayImage gadf(std::span<const double> w) {
  require_window(w);
  const auto phi = polar_angles(w);
  const std::size_t n = w.size();
  GrayImage img{n, std::vector<double>(n * n), -1.0, 1.0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) img.at(i, j) = std::sin(phi[i] - phi[j]);
  }
  return img;
}

std::vector<std::size_t> quantile_bins(std::span<const double> w, std::size_t bins) {
  if (bins < 2 || bins > w.size()) {
    throw Error(ErrorCode::kBinCountTooLarge, "need 2 <= bins <= " + std::to_string(w.size()) +
                                                  ", got " + std::to_string(bins));
  }
  std::vector<double> sorted(w.begin(), w.end());
  std::sort(sorted.begin(), sorted.end());
  const double last = static_cast<double>(sorted.size() - 1);

  std::vector<double> edges(bins - 1);
  for (std::size_t k = 1; k < bins; ++k) {
    const double pos = last * static_cast<double>(k) / static_cast<double>(bins);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    edges[k - 1] = frac == 0.0 ? sorted[lo] : sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
  }

  std::vector<std::size_t> q(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    q[i] = static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), w[i]) - edges.begin());
  }
  return q;
}

std::vector<std::vector<double>> markov_transition_matrix(std::span<const double> w, std::size_t bins) {
  const auto q = quantile_bins(w, bins);
  std::vector<std::vector<double>> m(bins, std::vector<double>(bins, 0.0));
  for (std::size_t t = 0; t + 1 < q.size(); ++t) m[q[t]][q[t + 1]] += 1.0;
  for (auto& row : m) {
    double total = 0.0;
    for (double v : row) total += v;
    if (total > 0.0) {
      for (auto& v : row) v /= total;
    } else {
      std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(bins));
    }
  }
  return m;
}

GrayImage mtf(std::span<const double> w, std::size_t bins) {
  require_window(w);
  const auto q = quantile_bins(w, bins);
  const auto m = markov_transition_matrix(w, bins);
  const std::size_t n = w.size();
  GrayImage img{n, std::vector<double>(n * n), 0.0, 1.0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) img.at(i, j) = m[q[i]][q[j]];
  }
  return img;
}

GrayImage make_image(ImagingMethod method, std::span<const double> w, const ImagingOptions& options) {
  switch (method) {
    case ImagingMethod::kRp: return rp(w, options.rp_threshold);
    case ImagingMethod::kGasf: return gasf(w);
    case ImagingMethod::kGadf: return gadf(w);
    case ImagingMethod::kMtf: return mtf(w, options.mtf_bins);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown imaging method");
}

GrayImage normalize_unit(const GrayImage& img) {
  GrayImage out{img.side, std::vector<double>(img.pixels.size(), 0.0), 0.0, 1.0};
  if (img.pixels.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(img.pixels.begin(), img.pixels.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;
  if (!(span > 0.0)) return out;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    out.pixels[i] = std::clamp((img.pixels[i] - lo) / span, 0.0, 1.0);
  }
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, std::size_t side) {
  if (img.side == 0 || side == 0) throw Error(ErrorCode::kShapeMismatch, "cannot resize an empty image");
  GrayImage out{side, std::vector<double>(side * side), img.value_min, img.value_max};
  if (img.side == side) {
    out.pixels = img.pixels;
    return out;
  }
  const double scale = side > 1 ? static_cast<double>(img.side - 1) / static_cast<double>(side - 1) : 0.0;
  for (std::size_t r = 0; r < side; ++r) {
    const double y = static_cast<double>(r) * scale;
    const auto y0 = std::min(static_cast<std::size_t>(y), img.side - 1);
    const auto y1 = std::min(y0 + 1, img.side - 1);
    const double fy = y - static_cast<double>(y0);
    for (std::size_t c = 0; c < side; ++c) {
      const double x = static_cast<double>(c) * scale;
      const auto x0 = std::min(static_cast<std::size_t>(x), img.side - 1);
      const auto x1 = std::min(x0 + 1, img.side - 1);
      const double fx = x - static_cast<double>(x0);
      const double top = img.at(y0, x0) * (1.0 - fx) + img.at(y0, x1) * fx;
      const double bottom = img.at(y1, x0) * (1.0 - fx) + img.at(y1, x1) * fx;
      out.at(r, c) = top * (1.0 - fy) + bottom * fy;
    }
  }
  return out;
}

std::array<std::size_t, 4> LabeledImageSet::class_counts() const noexcept {
  std::array<std::size_t, 4> counts{};
  for (const auto& item : items) {
    if (item.label >= 1 && item.label <= 4) ++counts[static_cast<std::size_t>(item.label - 1)];
  }
  return counts;
}

LabeledImageSet build_classification_dataset(const SegmentSet& center_segments,
                                             const SegmentSet& range_segments,
                                             const ImagingOptions& options) {
  LabeledImageSet out;
  out.provenance = Provenance::kMerged;
  out.items.reserve(4 * (center_segments.size() + range_segments.size()));
  for (const SegmentSet* set : {&center_segments, &range_segments}) {
    for (std::size_t i = 0; i < set->size(); ++i) {
      for (auto method : kAllMethods) {
        out.items.push_back(LabeledImage{normalize_unit(make_image(method, set->segments[i], options)),
                                         label_of(method), set->source, i});
      }
    }
  }
  return out;
}

void export_pgm(const std::filesystem::path& path, const GrayImage& img, ImagingMethod method,
                std::size_t window_begin, std::size_t window_end) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << "P5\n" << img.side << ' ' << img.side << "\n255\n";
  const double span = img.value_max - img.value_min;
  for (double v : img.pixels) {
    const double unit = span > 0.0 ? std::clamp((v - img.value_min) / span, 0.0, 1.0) : 0.0;
    out.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(unit * 255.0))));
  }

  nlohmann::ordered_json meta;
  meta["method"] = method_name(method);
  meta["window"] = {window_begin, window_end};
  meta["side"] = img.side;
  meta["value_range"] = {img.value_min, img.value_max};
  std::ofstream side(path.string() + ".json");
  if (!side) throw Error(ErrorCode::kIoError, "cannot write sidecar for " + path.string());
  side << meta.dump(2) << '\n';
}

}  // namespace ivfe
