#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ivfe/dataset.hpp"

namespace ivfe {

/// Square single-channel image, row-major. Pixels lie within
/// [value_min, value_max], the declared range of the encoding.
struct GrayImage {
  std::size_t side = 0;
  std::vector<double> pixels;
  double value_min = 0.0;
  double value_max = 1.0;

  [[nodiscard]] double at(std::size_t row, std::size_t col) const { return pixels[row * side + col]; }
  double& at(std::size_t row, std::size_t col) { return pixels[row * side + col]; }
};

enum class ImagingMethod { kRp = 1, kGasf = 2, kGadf = 3, kMtf = 4 };

inline constexpr std::array<ImagingMethod, 4> kAllMethods = {
    ImagingMethod::kRp, ImagingMethod::kGasf, ImagingMethod::kGadf, ImagingMethod::kMtf};

/// Class label of a method: RP=1, GASF=2, GADF=3, MTF=4.
[[nodiscard]] constexpr int label_of(ImagingMethod m) noexcept { return static_cast<int>(m); }
[[nodiscard]] std::string_view method_name(ImagingMethod m) noexcept;
[[nodiscard]] std::optional<ImagingMethod> parse_method(std::string_view name) noexcept;

struct ImagingOptions {
  std::size_t mtf_bins = 8;
  /// When set, RP pixels become 1 where |w_i - w_j| <= threshold, else 0.
  std::optional<double> rp_threshold;
};

/// Affine map of w onto [-1, 1]; a constant vector maps to zeros.
[[nodiscard]] std::vector<double> rescale_minmax(std::span<const double> w);

/// Unthresholded recurrence plot R_ij = |w_i - w_j| (embedding dimension 1,
/// delay 1), or the binary plot when a threshold is given.
[[nodiscard]] GrayImage rp(std::span<const double> w, std::optional<double> threshold = std::nullopt);

/// cos(phi_i + phi_j) with phi = arccos(rescale_minmax(w)).
[[nodiscard]] GrayImage gasf(std::span<const double> w);

/// sin(phi_i - phi_j).
[[nodiscard]] GrayImage gadf(std::span<const double> w);

/// Equal-count quantile bins; a value equal to a bin edge falls in the lower bin.
/// Returns the bin index of every element.
[[nodiscard]] std::vector<std::size_t> quantile_bins(std::span<const double> w, std::size_t bins);

/// Row-stochastic first-order transition matrix between quantile bins.
/// Rows with no outgoing transitions are uniform.
[[nodiscard]] std::vector<std::vector<double>> markov_transition_matrix(std::span<const double> w,
                                                                        std::size_t bins);

/// MTF_ij = W[q(i)][q(j)]. Throws BinCountTooLarge unless 2 <= bins <= |w|.
[[nodiscard]] GrayImage mtf(std::span<const double> w, std::size_t bins = 8);

[[nodiscard]] GrayImage make_image(ImagingMethod method, std::span<const double> w,
                                   const ImagingOptions& options = {});

/// Per-image min-max normalization to [0, 1]; constant images become zeros.
[[nodiscard]] GrayImage normalize_unit(const GrayImage& img);

/// Bilinear resampling to side x side (align-corners convention).
[[nodiscard]] GrayImage resize_bilinear(const GrayImage& img, std::size_t side);

struct LabeledImage {
  GrayImage image;  // normalized to [0, 1]
  int label = 0;    // 1..4
  Source source = Source::kCenter;
  std::size_t segment = 0;
};

enum class Provenance { kCenter, kRange, kMerged };

struct LabeledImageSet {
  std::vector<LabeledImage> items;
  Provenance provenance = Provenance::kMerged;

  [[nodiscard]] std::size_t size() const noexcept { return items.size(); }
  [[nodiscard]] std::array<std::size_t, 4> class_counts() const noexcept;
};

/// Images every segment with all four methods (labels 1..4). The result is
/// the union of the center and range sets.
[[nodiscard]] LabeledImageSet build_classification_dataset(const SegmentSet& center_segments,
                                                           const SegmentSet& range_segments,
                                                           const ImagingOptions& options = {});

/// Writes an 8-bit binary PGM of the image linearly quantized over its
/// declared value range, plus `<path>.json` with method, window indices and range.
void export_pgm(const std::filesystem::path& path, const GrayImage& img, ImagingMethod method,
                std::size_t window_begin, std::size_t window_end);

}  // namespace ivfe
