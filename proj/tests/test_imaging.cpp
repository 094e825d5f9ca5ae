#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "ivfe/imaging.hpp"
#include "support.hpp"

using namespace ivfe;
using ivfe::test::code;
using ivfe::test::error_code_of;

namespace {

using Grid = std::vector<std::vector<double>>;

double max_dev(const GrayImage& img, const Grid& expected) {
  double m = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    for (std::size_t j = 0; j < expected.size(); ++j) m = std::max(m, std::abs(img.at(i, j) - expected[i][j]));
  }
  return m;
}

std::vector<double> random_window(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> len(2, 60);
  std::normal_distribution<double> g(0.0, 5.0);
  std::vector<double> w(len(rng));
  for (auto& v : w) v = g(rng);
  return w;
}

}  // namespace

TEST_SUITE("imaging") {
  TEST_CASE("rescale to [-1, 1]") {
    CHECK(rescale_minmax(std::vector<double>{0, 0.5, 1}) == std::vector<double>{-1, 0, 1});
    CHECK(rescale_minmax(std::vector<double>{7, 7, 7}) == std::vector<double>{0, 0, 0});
    CHECK(rescale_minmax(std::vector<double>{-1, 1}) == std::vector<double>{-1, 1});
  }

  TEST_CASE("hand-derived matrices") {
    const std::vector<double> w{0, 0.5, 1};
    const auto r = rp(std::vector<double>{0, 1, 2});
    CHECK(max_dev(r, {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}) < 1e-10);
    CHECK(r.value_max == 2.0);
    CHECK(max_dev(gasf(w), {{1, 0, -1}, {0, -1, 0}, {-1, 0, 1}}) < 1e-10);
    CHECK(max_dev(gadf(w), {{0, 1, 0}, {-1, 0, 1}, {0, -1, 0}}) < 1e-10);
    const auto m = mtf(std::vector<double>{1, 1, 2, 2}, 2);
    CHECK(max_dev(m, {{.5, .5, .5, .5}, {.5, .5, .5, .5}, {0, 0, 1, 1}, {0, 0, 1, 1}}) < 1e-10);
  }

  TEST_CASE("thresholded recurrence plot") {
    const auto r = rp(std::vector<double>{0, 1, 2}, 1.0);
    CHECK(max_dev(r, {{1, 1, 0}, {1, 1, 1}, {0, 1, 1}}) == 0.0);
  }

  TEST_CASE("degenerate windows") {
    const std::vector<double> flat(5, 3.0);
    for (double v : rp(flat).pixels) CHECK(v == 0.0);
    const auto m = mtf(flat, 2);
    for (double v : m.pixels) CHECK(v == 1.0);
    const auto W = markov_transition_matrix(flat, 2);
    CHECK(W[1] == std::vector<double>{0.5, 0.5});
    for (double v : gasf(flat).pixels) CHECK(std::isfinite(v));
  }

  TEST_CASE("quantile bins put edge values in the lower bin") {
    CHECK(quantile_bins(std::vector<double>{1, 1, 2, 2}, 2) == std::vector<std::size_t>{0, 0, 1, 1});
    // Quartile edges of 1..8 are 2.75, 4.5, 6.25.
    CHECK(quantile_bins(std::vector<double>{8, 1, 2, 3, 4, 5, 6, 7}, 4) ==
          std::vector<std::size_t>{3, 0, 0, 1, 1, 2, 2, 3});
    CHECK(quantile_bins(std::vector<double>{1, 2, 3}, 2) == std::vector<std::size_t>{0, 0, 1});
  }

  TEST_CASE("bin count bounds") {
    const std::vector<double> w{1, 2, 3};
    CHECK(error_code_of([&] { (void)mtf(w, 4); }) == code(ErrorCode::kBinCountTooLarge));
    CHECK(error_code_of([&] { (void)mtf(w, 1); }) == code(ErrorCode::kBinCountTooLarge));
    CHECK(mtf(w, 3).side == 3);
  }

  TEST_CASE("structural invariants on 1000 random windows") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto w = random_window(rng);
      const std::size_t n = w.size();
      const auto r = rp(w);
      const auto s = gasf(w);
      const auto d = gadf(w);
      const std::size_t bins = std::min<std::size_t>(8, n);
      const auto m = mtf(w, bins);
      const auto W = markov_transition_matrix(w, bins);
      const auto q = quantile_bins(w, bins);
      const auto x = rescale_minmax(w);
      REQUIRE(r.side == n);
      REQUIRE(s.side == n);
      REQUIRE(d.side == n);
      REQUIRE(m.side == n);
      for (const auto& row : W) {
        double total = 0.0;
        for (double v : row) total += v;
        CHECK(std::abs(total - 1.0) < 1e-12);
      }
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(r.at(i, i) == 0.0);
        CHECK(d.at(i, i) == 0.0);
        for (std::size_t j = 0; j < n; ++j) {
          CHECK(std::abs(r.at(i, j) - r.at(j, i)) < 1e-12);
          CHECK(std::abs(s.at(i, j) - s.at(j, i)) < 1e-12);
          CHECK(std::abs(d.at(i, j) + d.at(j, i)) < 1e-12);
          const double identity = x[i] * x[j] - std::sqrt(1 - x[i] * x[i]) * std::sqrt(1 - x[j] * x[j]);
          CHECK(std::abs(s.at(i, j) - identity) < 1e-10);
          CHECK(s.at(i, j) >= -1.0);
          CHECK(s.at(i, j) <= 1.0);
          CHECK(m.at(i, j) == W[q[i]][q[j]]);
          CHECK(m.at(i, j) >= 0.0);
          CHECK(m.at(i, j) <= 1.0);
        }
      }
    }
  }

  TEST_CASE("affine invariance") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
      const auto w = random_window(rng);
      std::vector<double> v(w.size());
      const double a = 0.5 + static_cast<double>(trial), b = -3.0 * trial;
      for (std::size_t i = 0; i < w.size(); ++i) v[i] = a * w[i] + b;
      CHECK(ivfe::test::max_abs_diff(gasf(v).pixels, gasf(w).pixels) < 1e-9);
      CHECK(ivfe::test::max_abs_diff(gadf(v).pixels, gadf(w).pixels) < 1e-9);
      const std::size_t bins = std::min<std::size_t>(8, w.size());
      CHECK(mtf(v, bins).pixels == mtf(w, bins).pixels);
      const auto rw = rp(w), rv = rp(v);
      for (std::size_t i = 0; i < rw.pixels.size(); ++i) {
        CHECK(std::abs(rv.pixels[i] - a * rw.pixels[i]) < 1e-9 * (1 + std::abs(rv.pixels[i])));
      }
    }
  }

  TEST_CASE("unit normalization and bilinear resize") {
    const auto n = normalize_unit(rp(std::vector<double>{0, 1, 3}));
    CHECK(max_dev(n, {{0, 1. / 3, 1}, {1. / 3, 0, 2. / 3}, {1, 2. / 3, 0}}) < 1e-15);
    CHECK(n.value_min == 0.0);
    CHECK(n.value_max == 1.0);
    for (double v : normalize_unit(rp(std::vector<double>{2, 2})).pixels) CHECK(v == 0.0);

    GrayImage small;
    small.side = 2;
    small.pixels = {0, 1, 2, 3};
    const auto big = resize_bilinear(small, 3);
    CHECK(max_dev(big, {{0, 0.5, 1}, {1, 1.5, 2}, {2, 2.5, 3}}) < 1e-15);
    CHECK(resize_bilinear(small, 2).pixels == small.pixels);
  }

  TEST_CASE("classification dataset composition") {
    std::vector<double> x(1500);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (auto& v : x) v = g(rng);
    const auto c = segment(x, 45, Source::kCenter);
    const auto r = segment(x, 45, Source::kRange);
    const auto set = build_classification_dataset(c, r);
    CHECK(set.size() == 264);
    CHECK(set.class_counts() == std::array<std::size_t, 4>{66, 66, 66, 66});
    for (const auto& item : set.items) {
      CHECK(item.image.side == 45);
      for (double p : item.image.pixels) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
      }
    }
    const auto one = build_classification_dataset(segment(std::vector<double>{1, 2, 4}, 3), SegmentSet{}, ImagingOptions{2, std::nullopt});
    REQUIRE(one.size() == 4);
    for (int k = 0; k < 4; ++k) CHECK(one.items[static_cast<std::size_t>(k)].label == k + 1);
    CHECK(build_classification_dataset(SegmentSet{}, SegmentSet{}).size() == 0);
  }

  TEST_CASE("method names and labels") {
    CHECK(label_of(ImagingMethod::kRp) == 1);
    CHECK(label_of(ImagingMethod::kMtf) == 4);
    CHECK(parse_method("GADF") == ImagingMethod::kGadf);
    CHECK(method_name(ImagingMethod::kGasf) == "gasf");
    CHECK_FALSE(parse_method("spectrogram").has_value());
  }

  TEST_CASE("pgm export with sidecar") {
    const auto dir = std::filesystem::temp_directory_path() / "ivfe_pgm_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "w.pgm";
    export_pgm(path, gasf(std::vector<double>{0, 0.5, 1}), ImagingMethod::kGasf, 10, 13);
    std::ifstream in(path, std::ios::binary);
    std::string magic;
    std::size_t w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    in.get();
    std::vector<unsigned char> px(9);
    in.read(reinterpret_cast<char*>(px.data()), 9);
    CHECK(magic == "P5");
    CHECK(w == 3);
    CHECK(h == 3);
    CHECK(maxval == 255);
    CHECK(px[0] == 255);
    CHECK(px[2] == 0);
    std::ifstream side(dir / "w.pgm.json");
    std::string text((std::istreambuf_iterator<char>(side)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"gasf\"") != std::string::npos);
    CHECK(text.find("13") != std::string::npos);
    std::filesystem::remove_all(dir);
  }
}
