#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <vector>

#include "ivfe/error.hpp"

namespace ivfe::test {

inline std::vector<double> normal_vector(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed) {
  auto e = normal_vector(n + 200, seed);
  std::vector<double> y(n + 200, 0.0);
  for (std::size_t t = 1; t < y.size(); ++t) y[t] = phi * y[t - 1] + e[t];
  return {y.begin() + 200, y.end()};
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Runs `fn` and returns the ErrorCode it threw, or nullopt-like sentinel -1.
template <typename Fn>
int error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return static_cast<int>(e.code());
  }
  return -1;
}

inline int code(ErrorCode c) { return static_cast<int>(c); }

}  // namespace ivfe::test

#include <filesystem>
#include <string>

namespace ivfe::test {

/// Scratch directory under IVFE_TEST_TMP (or the system temp dir), recreated empty.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* root = std::getenv("IVFE_TEST_TMP");
  const auto dir = (root ? std::filesystem::path(root) : std::filesystem::temp_directory_path()) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// A config small enough to run the full protocol in a few seconds.
inline constexpr const char* kTinyConfig = R"({
  "data": {"dgp": {"kind": "c1", "length": 300, "seed": 11}},
  "orders": {"center": 3, "range": 2},
  "pinned_fen": {"depth": 1, "segment_length": 20, "epochs": 2},
  "regressors": [{"kind": "ridge", "lambda": 1.0}, {"kind": "knn", "k": 5}],
  "seed": 3
})";

}  // namespace ivfe::test
